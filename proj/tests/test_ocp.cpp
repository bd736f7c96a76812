#include <doctest.h>

#include <Eigen/Dense>
#include <sstream>

#include "cineplan/dynamics.hpp"
#include "cineplan/gimbal.hpp"
#include "cineplan/ocp.hpp"
#include "test_support.hpp"

using namespace cineplan;

namespace {

OcpProblem basic_problem(int steps, double dt = 0.1) {
  OcpProblem p;
  p.steps = steps;
  p.dt = dt;
  p.initial_state.position = Vec3(-20.0, 0.0, 3.0);
  p.initial_state.velocity = Vec3(1.5, 0.0, 0.0);
  p.weights = PlannerWeights{1.0, 0.0, 0.0, 1.0};
  p.bounds.pitch_min = -kPi / 2;
  p.bounds.pitch_max = -0.02;
  p.desired.position = Vec3(10.0, 0.0, 3.0);
  p.desired.velocity = Vec3(1.5, 0.0, 0.0);
  TargetEstimate est;
  est.position = Vec3(0, 0, 0);
  est.velocity = Vec3(1.5, 0, 0);
  p.target_prediction = predict_target(est, steps, dt);
  return p;
}

/// Random decision vector away from the singular sets: velocities with a
/// clearly defined heading and positions well off the target track.
Eigen::VectorXd random_point(const TranscribedNlp& nlp, testing::Rng& rng) {
  const OcpProblem& p = nlp.problem();
  Eigen::VectorXd z(nlp.dim());
  for (int k = 0; k <= p.steps; ++k) {
    const Vec3 target = p.target_prediction.positions[k];
    Vec3 offset = rng.vec3(-12, 12);
    if (std::hypot(offset.x(), offset.y()) < 1.0) offset.x() += 3.0;
    offset.z() = rng.uniform(1.0, 8.0);
    z.segment<3>(nlp.state_index(k)) = target + offset;
    Vec3 vel = rng.vec3(-4, 4);
    if (std::hypot(vel.x(), vel.y()) < 0.5) vel.x() += 1.0;
    z.segment<3>(nlp.state_index(k) + 3) = vel;
  }
  for (int k = 0; k < p.steps; ++k) {
    z.segment<3>(nlp.control_index(k)) = rng.vec3(-3, 3);
  }
  return z;
}

}  // namespace

TEST_SUITE_BEGIN("ocp");

TEST_CASE("dimension and row counting") {
  OcpProblem p = basic_problem(2);
  TranscribedNlp nlp(p);
  CHECK(nlp.dim() == 24);
  CHECK(nlp.num_equalities() == 18);
  CHECK(nlp.lower_bounds().size() == 24);
  CHECK(nlp.upper_bounds().size() == 24);

  // Each neighbor adds one collision and one visibility row per step.
  OcpProblem p10 = basic_problem(10);
  TranscribedNlp solo(p10);
  NeighborPlan neighbor;
  neighbor.uav_id = 2;
  neighbor.positions.assign(11, Vec3(5, 5, 5));
  p10.neighbor_plans.push_back(neighbor);
  TranscribedNlp with_neighbor(p10);
  CHECK(with_neighbor.num_inequalities() - solo.num_inequalities() == 22);
  int collision_rows = 0, visibility_rows = 0;
  for (const RowInfo& row : with_neighbor.row_info()) {
    collision_rows += row.kind == RowInfo::Kind::kCollision;
    visibility_rows += row.kind == RowInfo::Kind::kVisibility;
  }
  CHECK(collision_rows == 11);
  CHECK(visibility_rows == 11);
}

TEST_CASE("row order is a stable contract") {
  OcpProblem p = basic_problem(1);
  p.no_fly_zones.push_back({NoFlyZone::Kind::kCircle, Vec2(5, 5), 1.0, {}});
  NeighborPlan neighbor;
  neighbor.uav_id = 7;
  neighbor.positions.assign(2, Vec3(4, 4, 4));
  p.neighbor_plans.push_back(neighbor);
  DynamicObstacle obstacle;
  obstacle.positions.assign(2, Vec3(-4, 4, 4));
  obstacle.radius = 1.0;
  p.dynamic_obstacles.push_back(obstacle);
  TranscribedNlp nlp(p);

  std::ostringstream got;
  for (const RowInfo& row : nlp.row_info()) {
    got << to_string(row.kind) << ':' << row.step << ':' << row.entity << ' ';
  }
  const std::string expected =
      "initial_state:0:0 initial_state:0:0 initial_state:0:0 "
      "initial_state:0:0 initial_state:0:0 initial_state:0:0 "
      "dynamics:0:0 dynamics:0:0 dynamics:0:0 dynamics:0:0 dynamics:0:0 dynamics:0:0 "
      "no_fly_zone:0:0 no_fly_zone:1:0 "
      "collision:0:0 collision:1:0 collision:0:1 collision:1:1 "
      "pitch_min:0:0 pitch_max:0:0 pitch_min:1:0 pitch_max:1:0 "
      "yaw_cone:0:0 yaw_cone:1:0 "
      "visibility:0:0 visibility:1:0 ";
  CHECK(got.str() == expected);
}

TEST_CASE("hover trajectory with matching desired state has zero cost") {
  OcpProblem p = basic_problem(5);
  p.initial_state.position = Vec3(-5.0, 4.0, 3.0);
  p.initial_state.velocity = Vec3::Zero();
  p.desired.position = p.initial_state.position;
  p.desired.velocity = Vec3::Zero();
  TargetEstimate est;  // static target below
  est.position = Vec3(0, 0, 0);
  p.target_prediction = predict_target(est, p.steps, p.dt);
  p.weights = PlannerWeights{1.0, 1.0, 1.0, 1.0};
  TranscribedNlp nlp(p);
  const Eigen::VectorXd z = nlp.guess_hover();
  CHECK(nlp.cost(z, nullptr) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("doubling the control weight doubles the control term exactly") {
  OcpProblem p = basic_problem(8);
  p.weights = PlannerWeights{1.0, 0.0, 0.0, 0.0};
  TranscribedNlp nlp1(p);
  p.weights.w1 = 2.0;
  TranscribedNlp nlp2(p);
  testing::Rng rng(5);
  const Eigen::VectorXd z = random_point(nlp1, rng);
  CHECK(nlp2.cost(z, nullptr) == doctest::Approx(2.0 * nlp1.cost(z, nullptr)));
}

TEST_CASE("straight feasible rollout reaching the desired state has zero cost") {
  OcpProblem p = basic_problem(10);
  p.weights = PlannerWeights{1.0, 0.0, 0.0, 1.0};
  p.initial_state.position = Vec3(-2, 3, 4);
  p.initial_state.velocity = Vec3(1.0, 0, 0);
  p.desired.position =
      p.initial_state.position + p.steps * p.dt * p.initial_state.velocity;
  p.desired.velocity = p.initial_state.velocity;
  TranscribedNlp nlp(p);
  Eigen::VectorXd grad;
  const Eigen::VectorXd z = nlp.guess_coast();
  CHECK(nlp.cost(z, &grad) == doctest::Approx(0.0).epsilon(1e-18));
  for (int k = 0; k < p.steps; ++k) {
    CHECK(grad.segment<3>(nlp.control_index(k)).norm() == doctest::Approx(0.0));
  }
}

TEST_CASE("analytic cost gradient matches central finite differences") {
  OcpProblem p = basic_problem(6);
  p.weights = PlannerWeights{1.0, 1.0, 1.0, 1.0};
  p.no_fly_zones.push_back({NoFlyZone::Kind::kCircle, Vec2(0, 0), 2.0, {}});
  TranscribedNlp nlp(p);
  testing::Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd z = random_point(nlp, rng);
    Eigen::VectorXd grad;
    nlp.cost(z, &grad);
    const Eigen::VectorXd fd = testing::fd_gradient(
        [&](const Eigen::VectorXd& zz) { return nlp.cost(zz, nullptr); }, z);
    CHECK(testing::max_rel_error(grad, fd, 1e-3) <= 1e-5);
  }
}

TEST_CASE("constraint jacobian matches central finite differences") {
  OcpProblem p = basic_problem(4);
  p.weights = PlannerWeights{1.0, 1.0, 1.0, 1.0};
  p.no_fly_zones.push_back({NoFlyZone::Kind::kCircle, Vec2(3, 1), 2.0, {}});
  NoFlyZone poly;
  poly.kind = NoFlyZone::Kind::kPolygon;
  poly.vertices = {Vec2(-8, -8), Vec2(-6, -8), Vec2(-6, -6), Vec2(-8, -6)};
  p.no_fly_zones.push_back(poly);
  NeighborPlan neighbor;
  neighbor.uav_id = 1;
  for (int k = 0; k <= p.steps; ++k) {
    neighbor.positions.emplace_back(2.0 + 0.1 * k, -3.0, 5.0);
  }
  p.neighbor_plans.push_back(neighbor);
  DynamicObstacle obstacle;
  obstacle.positions.assign(p.steps + 1, Vec3(-6, 2, 3));
  obstacle.radius = 1.5;
  p.dynamic_obstacles.push_back(obstacle);
  TranscribedNlp nlp(p);

  testing::Rng rng(78);
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::VectorXd z = random_point(nlp, rng);
    Eigen::VectorXd r;
    Eigen::SparseMatrix<double> jac;
    nlp.constraints(z, r, &jac);
    const Eigen::MatrixXd fd = testing::fd_jacobian(
        [&](const Eigen::VectorXd& zz) {
          Eigen::VectorXd rr;
          nlp.constraints(zz, rr, nullptr);
          return rr;
        },
        z);
    CHECK(testing::max_rel_error(Eigen::MatrixXd(jac), fd, 1e-3) <= 1e-5);
  }
}

TEST_CASE("equality-satisfying vectors match a forward rollout") {
  OcpProblem p = basic_problem(12);
  TranscribedNlp nlp(p);
  const Eigen::VectorXd z = nlp.guess_coast();
  Eigen::VectorXd r;
  nlp.constraints(z, r, nullptr);
  CHECK(r.head(nlp.num_equalities()).lpNorm<Eigen::Infinity>() <= 1e-12);

  // Any z with small equality residuals stays within integration error of the
  // rollout of its own controls.
  testing::Rng rng(79);
  Eigen::VectorXd z2 = z;
  for (int k = 0; k < p.steps; ++k) {
    z2.segment<3>(nlp.control_index(k)) = rng.vec3(-2, 2);
  }
  UavState x = p.initial_state;
  for (int k = 0; k < p.steps; ++k) {
    x = step_rk4(x, ControlInput{z2.segment<3>(nlp.control_index(k))}, p.dt);
    z2.segment<3>(nlp.state_index(k + 1)) = x.position;
    z2.segment<3>(nlp.state_index(k + 1) + 3) = x.velocity;
  }
  nlp.constraints(z2, r, nullptr);
  CHECK(r.head(nlp.num_equalities()).lpNorm<Eigen::Infinity>() <= 1e-8);
}

TEST_CASE("collision residual is zero exactly at the keep-out radius") {
  OcpProblem p = basic_problem(2);
  NeighborPlan neighbor;
  neighbor.uav_id = 3;
  neighbor.positions.assign(3, Vec3(0, 0, 3));
  p.neighbor_plans.push_back(neighbor);
  p.bounds.collision_radius = 2.0;
  TranscribedNlp nlp(p);
  Eigen::VectorXd z = nlp.guess_coast();
  z.segment<3>(nlp.state_index(1)) = Vec3(2.0, 0.0, 3.0);  // exactly r_col away
  Eigen::VectorXd r;
  nlp.constraints(z, r, nullptr);
  for (size_t i = 0; i < nlp.row_info().size(); ++i) {
    const RowInfo& info = nlp.row_info()[i];
    if (info.kind == RowInfo::Kind::kCollision && info.step == 1) {
      CHECK(r[static_cast<int>(i)] == doctest::Approx(0.0));
    }
  }
}

TEST_CASE("visibility residual values and scale invariance") {
  // cos(alpha) - cos(beta) with q = (1,0,0), d = (0,1,0) and alpha = pi/6.
  const Vec3 q(1, 0, 0);
  const Vec3 d(0, 1, 0);
  const double cos_beta = q.dot(d) / (q.norm() * d.norm());
  CHECK(std::cos(kPi / 6) - cos_beta == doctest::Approx(0.86603).epsilon(1e-5));

  OcpProblem p = basic_problem(2);
  p.bounds.view_half_angle = kPi / 6;
  NeighborPlan neighbor;
  neighbor.uav_id = 3;
  neighbor.positions.assign(3, Vec3(2, 2, 5));
  p.neighbor_plans.push_back(neighbor);
  TranscribedNlp nlp(p);
  Eigen::VectorXd z = nlp.guess_coast();

  auto visibility_at = [&](double target_scale, double neighbor_scale) {
    OcpProblem scaled = p;
    for (int k = 0; k <= p.steps; ++k) {
      const Vec3 pos = z.segment<3>(nlp.state_index(k));
      const Vec3 q_k = pos - p.target_prediction.positions[k];
      const Vec3 d_k = pos - neighbor.positions[k];
      scaled.target_prediction.positions[k] = pos - target_scale * q_k;
      scaled.neighbor_plans[0].positions[k] = pos - neighbor_scale * d_k;
    }
    TranscribedNlp scaled_nlp(scaled);
    Eigen::VectorXd r;
    scaled_nlp.constraints(z, r, nullptr);
    double value = 0.0;
    for (size_t i = 0; i < scaled_nlp.row_info().size(); ++i) {
      if (scaled_nlp.row_info()[i].kind == RowInfo::Kind::kVisibility &&
          scaled_nlp.row_info()[i].step == 1) {
        value = r[static_cast<int>(i)];
      }
    }
    return value;
  };
  const double base = visibility_at(1.0, 1.0);
  CHECK(visibility_at(2.5, 1.0) == doctest::Approx(base).epsilon(1e-12));
  CHECK(visibility_at(1.0, 3.0) == doctest::Approx(base).epsilon(1e-12));

  // Collinear q and d means the neighbor sits dead-center in view: violated.
  OcpProblem collinear = p;
  for (int k = 0; k <= p.steps; ++k) {
    const Vec3 pos = z.segment<3>(nlp.state_index(k));
    const Vec3 q_k = pos - p.target_prediction.positions[k];
    collinear.neighbor_plans[0].positions[k] = pos - 0.5 * q_k;
  }
  TranscribedNlp collinear_nlp(collinear);
  Eigen::VectorXd r;
  collinear_nlp.constraints(z, r, nullptr);
  for (size_t i = 0; i < collinear_nlp.row_info().size(); ++i) {
    if (collinear_nlp.row_info()[i].kind == RowInfo::Kind::kVisibility) {
      CHECK(r[static_cast<int>(i)] == doctest::Approx(std::cos(kPi / 6) - 1.0));
      CHECK(r[static_cast<int>(i)] < 0.0);
    }
  }
}

TEST_CASE("yaw cone row agrees with the exact relative yaw") {
  // Away from the guards the smooth cone row must equal
  // cos(rel_yaw - mid) - cos(half) with rel_yaw from the exact geometry.
  OcpProblem p = basic_problem(2);
  TranscribedNlp nlp(p);
  testing::Rng rng(91);
  const double mid = 0.5 * (p.bounds.yaw_max + p.bounds.yaw_min);
  const double half = 0.5 * (p.bounds.yaw_max - p.bounds.yaw_min);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd z = random_point(nlp, rng);
    // Strong horizontal speeds and offsets keep the guard bias tiny.
    for (int k = 0; k <= p.steps; ++k) {
      Vec3 vel = z.segment<3>(nlp.state_index(k) + 3);
      if (std::hypot(vel.x(), vel.y()) < 3.0) {
        vel.x() += 5.0;
        z.segment<3>(nlp.state_index(k) + 3) = vel;
      }
    }
    Eigen::VectorXd r;
    nlp.constraints(z, r, nullptr);
    for (size_t i = 0; i < nlp.row_info().size(); ++i) {
      const RowInfo& info = nlp.row_info()[i];
      if (info.kind != RowInfo::Kind::kYawCone) continue;
      const int k = info.step;
      const Vec3 q = Vec3(z.segment<3>(nlp.state_index(k))) -
                     p.target_prediction.positions[k];
      const Vec3 vel = z.segment<3>(nlp.state_index(k) + 3);
      const double rel = relative_gimbal_angles(q, vel).yaw;
      const double expected = std::cos(wrap_angle(rel - mid)) - std::cos(half);
      CHECK(r[static_cast<int>(i)] == doctest::Approx(expected).epsilon(2e-3));
    }
  }

  // A chase geometry (camera looking along the motion) satisfies the cone.
  OcpProblem chase = basic_problem(2);
  TranscribedNlp chase_nlp(chase);
  Eigen::VectorXd z = chase_nlp.guess_coast();
  Eigen::VectorXd r;
  chase_nlp.constraints(z, r, nullptr);
  for (size_t i = 0; i < chase_nlp.row_info().size(); ++i) {
    if (chase_nlp.row_info()[i].kind == RowInfo::Kind::kYawCone) {
      CHECK(r[static_cast<int>(i)] > 0.5);  // rel yaw ~ 0, far inside the window
    }
  }
}

TEST_CASE("build rejects inconsistent sequence lengths") {
  OcpProblem p = basic_problem(10);
  p.target_prediction.positions.resize(5);
  CHECK_THROWS_AS(TranscribedNlp{p}, BuildError);

  OcpProblem p2 = basic_problem(10);
  NeighborPlan neighbor;
  neighbor.uav_id = 1;
  neighbor.positions.assign(4, Vec3::Zero());
  p2.neighbor_plans.push_back(neighbor);
  CHECK_THROWS_AS(TranscribedNlp{p2}, BuildError);
}

TEST_CASE("zone distances: smooth circle and conservative polygon") {
  NoFlyZone circle{NoFlyZone::Kind::kCircle, Vec2(1, 1), 2.0, {}};
  CHECK(circle.smooth_signed_distance(Vec2(4, 1)) == doctest::Approx(1.0));
  CHECK(circle.boundary_distance(Vec2(1, 1)) == doctest::Approx(-2.0));

  NoFlyZone poly;
  poly.kind = NoFlyZone::Kind::kPolygon;
  poly.vertices = {Vec2(0, 0), Vec2(4, 0), Vec2(4, 4), Vec2(0, 4)};
  poly.validate();
  // Smooth distance stays at or below the exact half-plane maximum.
  CHECK(poly.smooth_signed_distance(Vec2(6, 2)) <= 2.0 + 1e-12);
  CHECK(poly.smooth_signed_distance(Vec2(6, 2)) >= 2.0 - 0.1);
  CHECK(poly.boundary_distance(Vec2(6, 2)) == doctest::Approx(2.0));
  CHECK(poly.boundary_distance(Vec2(2, 2)) < 0.0);
  // Winding/convexity validation.
  NoFlyZone bad;
  bad.kind = NoFlyZone::Kind::kPolygon;
  bad.vertices = {Vec2(0, 0), Vec2(0, 4), Vec2(4, 4), Vec2(4, 0)};  // clockwise
  CHECK_THROWS_AS(bad.validate(), BuildError);
}

TEST_SUITE_END();
