#include <doctest.h>

#include <Eigen/Geometry>
#include <cmath>

#include "cineplan/shots.hpp"
#include "test_support.hpp"

using namespace cineplan;

namespace {

PolylinePath make_eight(double scale, int samples = 2000) {
  std::vector<Vec3> pts;
  pts.reserve(samples + 1);
  for (int i = 0; i <= samples; ++i) {
    const double t = 2.0 * kPi * i / samples;
    pts.emplace_back(scale * std::sin(t), scale * std::sin(t) * std::cos(t), 0.0);
  }
  return PolylinePath(std::move(pts), true);
}

}  // namespace

TEST_SUITE_BEGIN("shots");

TEST_CASE("constant-velocity prediction") {
  TargetEstimate est;
  est.position = Vec3(0, 0, 0);
  est.velocity = Vec3(1.5, 0, 0);
  const TargetPrediction pred = predict_target(est, 100, 0.1);
  REQUIRE(pred.positions.size() == 101);
  CHECK(pred.positions.back().isApprox(Vec3(15, 0, 0), 1e-12));
  CHECK(pred.velocities.back().isApprox(Vec3(1.5, 0, 0), 1e-12));
}

TEST_CASE("zero velocity predicts a constant position") {
  TargetEstimate est;
  est.position = Vec3(3, -2, 0);
  const TargetPrediction pred = predict_target(est, 10, 0.1);
  for (const Vec3& p : pred.positions) {
    CHECK(p.isApprox(est.position, 1e-15));
  }
}

TEST_CASE("path prediction advances by arc length at the current speed") {
  const PolylinePath path = make_eight(10.0);
  TargetEstimate est;
  est.position = path.position_at_arc(0.0);
  est.velocity = path.tangent_at_arc(0.0);  // 1 m/s
  est.path = path;
  const TargetPrediction pred = predict_target(est, 40, 0.1);
  REQUIRE(pred.positions.size() == 41);
  // Oracle: the dense polyline's own arc-length parameterization.
  const Vec3 expected = path.position_at_arc(4.0);
  CHECK((pred.positions.back() - expected).norm() <= 1e-6);
  for (const Vec3& v : pred.velocities) {
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("lateral desired state offsets the predicted target sideways") {
  TargetEstimate est;
  est.velocity = Vec3(1.5, 0, 0);
  const TargetPrediction pred = predict_target(est, 100, 0.1);
  ShotSpec shot;
  shot.kind = ShotKind::kLateral;
  shot.duration = 20.0;
  shot.altitude = 3.0;
  shot.distance = 8.0;
  shot.side = 1.0;
  const auto desired = desired_state(shot, pred, 0.0, 5.0);
  REQUIRE(desired.has_value());
  CHECK(desired->position.isApprox(Vec3(7.5, 8.0, 3.0), 1e-9));
  CHECK(desired->velocity.isApprox(Vec3(1.5, 0, 0), 1e-12));
}

TEST_CASE("chase on a static target uses the fallback heading") {
  TargetEstimate est;  // static at origin
  TargetPrediction pred = predict_target(est, 50, 0.1);
  pred.fallback_heading = 0.0;  // +x
  ShotSpec shot;
  shot.kind = ShotKind::kChase;
  shot.duration = 10.0;
  shot.altitude = 3.5;
  shot.distance = 2.0;
  const auto desired = desired_state(shot, pred, 0.0, 5.0);
  REQUIRE(desired.has_value());
  CHECK(desired->position.isApprox(Vec3(-2.0, 0.0, 3.5), 1e-12));
  CHECK(desired->velocity.norm() == doctest::Approx(0.0));
}

TEST_CASE("flyby offset endpoints match the shot parameters") {
  TargetEstimate est;
  est.velocity = Vec3(1.0, 0, 0);
  const TargetPrediction pred = predict_target(est, 100, 0.1);
  ShotSpec shot;
  shot.kind = ShotKind::kFlyby;
  shot.duration = 10.0;
  shot.altitude = 3.0;
  shot.behind = 20.0;
  shot.ahead = 15.0;

  // horizon 0 queries the current shot phase directly.
  auto start = desired_state(shot, pred, 0.0, 0.0);
  REQUIRE(start.has_value());
  CHECK(start->position.x() == doctest::Approx(-20.0));

  // The prediction is always anchored at the query's elapsed time.
  TargetEstimate est_end;
  est_end.position = Vec3(10.0, 0, 0);
  est_end.velocity = est.velocity;
  const TargetPrediction pred_end = predict_target(est_end, 100, 0.1);
  auto end = desired_state(shot, pred_end, shot.duration, 0.0);
  REQUIRE(end.has_value());
  // Target at 10 m; offset is +15 ahead.
  CHECK(end->position.x() == doctest::Approx(10.0 + 15.0));

  CHECK_FALSE(desired_state(shot, pred_end, shot.duration + 0.01, 0.0).has_value());
}

TEST_CASE("flyby offset is continuous and monotone in progress") {
  TargetEstimate est;
  est.velocity = Vec3(1.0, 0, 0);
  const TargetPrediction pred = predict_target(est, 10, 0.1);
  ShotSpec shot;
  shot.kind = ShotKind::kFlyby;
  shot.duration = 10.0;
  shot.altitude = 3.0;
  shot.behind = 20.0;
  shot.ahead = 15.0;
  double previous = -1e9;
  for (double elapsed = 0.0; elapsed <= shot.duration; elapsed += 0.05) {
    const auto d = desired_state(shot, pred, elapsed, 0.0);
    REQUIRE(d.has_value());
    const double along = d->position.x() - elapsed * 1.0;  // subtract target motion
    CHECK(along >= previous - 1e-9);
    CHECK(std::abs(along) <= 20.0 + 1e-9);
    previous = along;
  }
}

TEST_CASE("desired states are equivariant under target heading rotation") {
  testing::Rng rng(31);
  for (ShotKind kind : {ShotKind::kChase, ShotKind::kLead, ShotKind::kLateral,
                        ShotKind::kFlyby, ShotKind::kOrbit}) {
    ShotSpec shot;
    shot.kind = kind;
    shot.duration = 12.0;
    shot.altitude = 4.0;
    shot.distance = 6.0;
    shot.behind = 10.0;
    shot.ahead = 5.0;

    const double delta = rng.uniform(-kPi, kPi);
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(delta).toRotationMatrix();

    TargetEstimate est;
    est.position = Vec3(2.0, -1.0, 0.0);
    est.velocity = Vec3(1.2, 0.4, 0.0);

    TargetEstimate est_rot;
    est_rot.position << rot * est.position.head<2>(), 0.0;
    est_rot.velocity << rot * est.velocity.head<2>(), 0.0;

    const TargetPrediction pred = predict_target(est, 40, 0.1);
    const TargetPrediction pred_rot = predict_target(est_rot, 40, 0.1);
    const auto d = desired_state(shot, pred, 1.0, 4.0);
    const auto d_rot = desired_state(shot, pred_rot, 1.0, 4.0);
    REQUIRE(d.has_value());
    REQUIRE(d_rot.has_value());
    const Eigen::Vector2d expected = rot * d->position.head<2>();
    CHECK((d_rot->position.head<2>() - expected).norm() <= 1e-9);
    CHECK(d_rot->position.z() == doctest::Approx(d->position.z()));
  }
}

TEST_CASE("heading holds the last valid value within the prediction") {
  TargetPrediction pred;
  pred.dt = 0.1;
  for (int k = 0; k <= 10; ++k) {
    pred.positions.emplace_back(k * 0.1, 0, 0);
    // Moving along +y early, then slower than the heading threshold.
    pred.velocities.emplace_back(0.0, k < 5 ? 1.0 : 0.01, 0.0);
  }
  CHECK(target_heading_at(pred, 10) == doctest::Approx(kPi / 2));
  pred.velocities.assign(11, Vec3::Zero());
  pred.fallback_heading = 1.0;
  CHECK(target_heading_at(pred, 10) == doctest::Approx(1.0));
}

TEST_CASE("shot validation rejects bad parameters") {
  ShotSpec shot;
  shot.duration = 0.0;
  CHECK_THROWS_AS(shot.validate(), ScenarioError);
  shot.duration = 10.0;
  shot.altitude = -1.0;
  CHECK_THROWS_AS(shot.validate(), ScenarioError);
  shot.altitude = 3.0;
  shot.kind = ShotKind::kFlyby;
  shot.behind = -5.0;
  CHECK_THROWS_AS(shot.validate(), ScenarioError);
}

TEST_SUITE_END();
