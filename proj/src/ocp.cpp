// Copyright 2026 The Cineplan Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cineplan/ocp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "cineplan/dynamics.hpp"

namespace cineplan {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPolygonSharpness = 20.0;
constexpr double kTinyDistance = 1e-6;

double guard_sq(double g) { return g * g; }

}  // namespace

void PlannerWeights::validate() const {
  if (w1 < 0.0 || w2 < 0.0 || w3 < 0.0 || w4 < 0.0) {
    throw BuildError("planner weights must be nonnegative");
  }
  if (w1 == 0.0 && w2 == 0.0 && w3 == 0.0 && w4 == 0.0) {
    throw BuildError("planner weights must not all be zero");
  }
}

void PlannerBounds::validate() const {
  for (int i = 0; i < 3; ++i) {
    if (!(velocity_min[i] < velocity_max[i]) || !(accel_min[i] < accel_max[i])) {
      throw BuildError("planner bounds must satisfy min < max componentwise");
    }
  }
  if (!(pitch_min < pitch_max) || !(yaw_min < yaw_max)) {
    throw BuildError("gimbal angle bounds must satisfy min < max");
  }
  if (!(view_half_angle > 0.0) || !(view_half_angle < kPi / 2.0)) {
    throw BuildError("view half angle must lie in (0, pi/2)");
  }
  if (!(collision_radius > 0.0)) {
    throw BuildError("collision radius must be positive");
  }
}

void NoFlyZone::validate() const {
  if (kind == Kind::kCircle) {
    if (!(radius > 0.0)) throw BuildError("no-fly circle radius must be positive");
    return;
  }
  if (vertices.size() < 3) {
    throw BuildError("no-fly polygon needs at least three vertices");
  }
  // Convexity and consistent counter-clockwise winding.
  const size_t n = vertices.size();
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices[i];
    const Vec2 b = vertices[(i + 1) % n];
    const Vec2 c = vertices[(i + 2) % n];
    const double cross = (b.x() - a.x()) * (c.y() - b.y()) - (b.y() - a.y()) * (c.x() - b.x());
    if (cross <= 1e-12) {
      throw BuildError("no-fly polygon must be convex with counter-clockwise winding");
    }
  }
}

double NoFlyZone::smooth_signed_distance(const Vec2& p, Vec2* grad) const {
  if (kind == Kind::kCircle) {
    const Vec2 delta = p - center;
    const double dist = delta.norm();
    if (grad) {
      *grad = delta / std::max(dist, 1e-9);
    }
    return dist - radius;
  }

  // Log-sum-exp over the half-plane distances, shifted by log(E)/s so the
  // smooth value never exceeds the hard maximum (conservative side).
  const size_t n = vertices.size();
  std::vector<Vec2> normals(n);
  std::vector<double> dists(n);
  double max_d = -kInf;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices[i];
    const Vec2 b = vertices[(i + 1) % n];
    const Vec2 edge = b - a;
    Vec2 normal(edge.y(), -edge.x());
    normal /= std::max(normal.norm(), 1e-12);
    normals[i] = normal;
    dists[i] = normal.dot(p - a);
    max_d = std::max(max_d, dists[i]);
  }
  double sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    sum += std::exp(kPolygonSharpness * (dists[i] - max_d));
  }
  if (grad) {
    Vec2 g(0.0, 0.0);
    for (size_t i = 0; i < n; ++i) {
      g += (std::exp(kPolygonSharpness * (dists[i] - max_d)) / sum) * normals[i];
    }
    *grad = g;
  }
  return max_d + (std::log(sum) - std::log(static_cast<double>(n))) / kPolygonSharpness;
}

double NoFlyZone::boundary_distance(const Vec2& p) const {
  if (kind == Kind::kCircle) {
    return (p - center).norm() - radius;
  }
  const size_t n = vertices.size();
  double max_half_plane = -kInf;
  double min_edge_dist = kInf;
  for (size_t i = 0; i < n; ++i) {
    const Vec2 a = vertices[i];
    const Vec2 b = vertices[(i + 1) % n];
    const Vec2 edge = b - a;
    Vec2 normal(edge.y(), -edge.x());
    normal /= std::max(normal.norm(), 1e-12);
    max_half_plane = std::max(max_half_plane, normal.dot(p - a));
    const double len2 = edge.squaredNorm();
    const double t = std::clamp((p - a).dot(edge) / std::max(len2, 1e-18), 0.0, 1.0);
    min_edge_dist = std::min(min_edge_dist, (p - (a + t * edge)).norm());
  }
  return max_half_plane <= 0.0 ? max_half_plane : min_edge_dist;
}

std::string to_string(RowInfo::Kind kind) {
  switch (kind) {
    case RowInfo::Kind::kInitialState: return "initial_state";
    case RowInfo::Kind::kDynamics: return "dynamics";
    case RowInfo::Kind::kNoFlyZone: return "no_fly_zone";
    case RowInfo::Kind::kCollision: return "collision";
    case RowInfo::Kind::kPitchMin: return "pitch_min";
    case RowInfo::Kind::kPitchMax: return "pitch_max";
    case RowInfo::Kind::kYawCone: return "yaw_cone";
    case RowInfo::Kind::kVisibility: return "visibility";
  }
  return "unknown";
}

TranscribedNlp::TranscribedNlp(OcpProblem problem) : problem_(std::move(problem)) {
  const int n_steps = problem_.steps;
  if (n_steps < 1) throw BuildError("horizon must have at least one step");
  if (!(problem_.dt > 0.0)) throw BuildError("dt must be positive");
  if (!all_finite(problem_.initial_state)) throw BuildError("initial state not finite");
  if (!all_finite(problem_.desired.position) || !all_finite(problem_.desired.velocity)) {
    throw BuildError("desired state not finite");
  }
  problem_.weights.validate();
  problem_.bounds.validate();
  for (const NoFlyZone& zone : problem_.no_fly_zones) zone.validate();

  const size_t needed = static_cast<size_t>(n_steps) + 1;
  if (problem_.target_prediction.positions.size() < needed ||
      problem_.target_prediction.velocities.size() < needed) {
    throw BuildError("target prediction shorter than horizon");
  }
  for (const NeighborPlan& plan : problem_.neighbor_plans) {
    if (plan.positions.size() < needed) {
      throw BuildError("neighbor plan shorter than horizon");
    }
  }
  for (const DynamicObstacle& obstacle : problem_.dynamic_obstacles) {
    if (obstacle.positions.size() < needed) {
      throw BuildError("obstacle prediction shorter than horizon");
    }
    if (!(obstacle.radius > 0.0)) throw BuildError("obstacle radius must be positive");
  }

  dim_ = 9 * n_steps + 6;
  num_eq_ = 6 * (n_steps + 1);

  lower_ = Eigen::VectorXd::Constant(dim_, -kInf);
  upper_ = Eigen::VectorXd::Constant(dim_, kInf);
  for (int k = 0; k <= n_steps; ++k) {
    for (int i = 0; i < 3; ++i) {
      lower_[state_index(k) + 3 + i] = problem_.bounds.velocity_min[i];
      upper_[state_index(k) + 3 + i] = problem_.bounds.velocity_max[i];
    }
  }
  for (int k = 0; k < n_steps; ++k) {
    for (int i = 0; i < 3; ++i) {
      lower_[control_index(k) + i] = problem_.bounds.accel_min[i];
      upper_[control_index(k) + i] = problem_.bounds.accel_max[i];
    }
  }
  // Pin the initial state through the bounds as well; its equality rows are
  // then exactly zero for every feasible iterate.
  for (int i = 0; i < 3; ++i) {
    lower_[i] = upper_[i] = problem_.initial_state.position[i];
    lower_[3 + i] = upper_[3 + i] = problem_.initial_state.velocity[i];
  }

  rows_.clear();
  for (int i = 0; i < 6; ++i) {
    rows_.push_back({RowInfo::Kind::kInitialState, 0, 0, i});
  }
  for (int k = 0; k < n_steps; ++k) {
    for (int i = 0; i < 6; ++i) {
      rows_.push_back({RowInfo::Kind::kDynamics, k, 0, i});
    }
  }
  for (size_t zi = 0; zi < problem_.no_fly_zones.size(); ++zi) {
    for (int k = 0; k <= n_steps; ++k) {
      rows_.push_back({RowInfo::Kind::kNoFlyZone, k, static_cast<int>(zi), 0});
    }
  }
  const int n_neighbors = static_cast<int>(problem_.neighbor_plans.size());
  const int n_obstacles = static_cast<int>(problem_.dynamic_obstacles.size());
  for (int e = 0; e < n_neighbors + n_obstacles; ++e) {
    for (int k = 0; k <= n_steps; ++k) {
      rows_.push_back({RowInfo::Kind::kCollision, k, e, 0});
    }
  }
  for (int k = 0; k <= n_steps; ++k) {
    rows_.push_back({RowInfo::Kind::kPitchMin, k, 0, 0});
    rows_.push_back({RowInfo::Kind::kPitchMax, k, 0, 0});
  }
  for (int k = 0; k <= n_steps; ++k) {
    rows_.push_back({RowInfo::Kind::kYawCone, k, 0, 0});
  }
  if (problem_.visibility_enabled) {
    for (int j = 0; j < n_neighbors; ++j) {
      for (int k = 0; k <= n_steps; ++k) {
        rows_.push_back({RowInfo::Kind::kVisibility, k, j, 0});
      }
    }
  }
  num_ineq_ = static_cast<int>(rows_.size()) - num_eq_;

  const double mid = 0.5 * (problem_.bounds.yaw_max + problem_.bounds.yaw_min);
  const double half = 0.5 * (problem_.bounds.yaw_max - problem_.bounds.yaw_min);
  yaw_mid_cos_ = std::cos(mid);
  yaw_mid_sin_ = std::sin(mid);
  yaw_half_cos_ = std::cos(std::min(half, kPi));
}

double TranscribedNlp::cost(const Eigen::VectorXd& z, Eigen::VectorXd* gradient) const {
  const int n_steps = problem_.steps;
  const PlannerWeights& w = problem_.weights;
  const double g2 = guard_sq(kPlannerHorizontalGuard);
  const double v2g = guard_sq(kPlannerSpeedGuard);

  if (gradient) {
    gradient->setZero(dim_);
  }
  double total = 0.0;

  // Control effort.
  for (int k = 0; k < n_steps; ++k) {
    const int ui = control_index(k);
    const Eigen::Vector3d u = z.segment<3>(ui);
    total += w.w1 * u.squaredNorm();
    if (gradient) gradient->segment<3>(ui) += 2.0 * w.w1 * u;
  }

  // Camera pitch rate, every step.
  if (w.w2 > 0.0) {
    for (int k = 0; k <= n_steps; ++k) {
      const int xi = state_index(k);
      const Vec3 q = z.segment<3>(xi) - problem_.target_prediction.positions[k];
      const Vec3 qd = z.segment<3>(xi + 3) - problem_.target_prediction.velocities[k];

      const double s2 = q.x() * q.x() + q.y() * q.y() + g2;
      const double h = std::sqrt(s2);
      const double hdot = (q.x() * qd.x() + q.y() * qd.y()) / h;
      const double denom = s2 + q.z() * q.z();
      const double numer = h * qd.z() - q.z() * hdot;
      const double rate = numer / denom;
      total += w.w2 * rate * rate;

      if (gradient) {
        const double dh_dqx = q.x() / h;
        const double dh_dqy = q.y() / h;
        const double dhdot_dqx = qd.x() / h - hdot * q.x() / s2;
        const double dhdot_dqy = qd.y() / h - hdot * q.y() / s2;
        Vec3 dA_dq(qd.z() * dh_dqx - q.z() * dhdot_dqx,
                   qd.z() * dh_dqy - q.z() * dhdot_dqy, -hdot);
        Vec3 dA_dqd(-q.z() * q.x() / h, -q.z() * q.y() / h, h);
        Vec3 dD_dq(2.0 * q.x(), 2.0 * q.y(), 2.0 * q.z());
        const double scale = 2.0 * w.w2 * rate;
        const Vec3 drate_dq = (dA_dq * denom - numer * dD_dq) / (denom * denom);
        const Vec3 drate_dqd = dA_dqd / denom;
        gradient->segment<3>(xi) += scale * drate_dq;
        gradient->segment<3>(xi + 3) += scale * drate_dqd;
      }
    }
  }

  // Body-relative camera yaw rate; needs the control, so it runs over the
  // steps that have one.
  if (w.w3 > 0.0) {
    for (int k = 0; k < n_steps; ++k) {
      const int xi = state_index(k);
      const int ui = control_index(k);
      const Vec3 q = z.segment<3>(xi) - problem_.target_prediction.positions[k];
      const Vec3 qd = z.segment<3>(xi + 3) - problem_.target_prediction.velocities[k];
      const Vec3 v = z.segment<3>(xi + 3);
      const Vec3 a = z.segment<3>(ui);

      const double s2 = q.x() * q.x() + q.y() * q.y() + g2;
      const double cam_rate = (q.x() * qd.y() - q.y() * qd.x()) / s2;
      const double v2 = v.x() * v.x() + v.y() * v.y() + v2g;
      const double heading_rate = (v.x() * a.y() - v.y() * a.x()) / v2;
      const double rel = cam_rate - heading_rate;
      total += w.w3 * rel * rel;

      if (gradient) {
        const double scale = 2.0 * w.w3 * rel;
        Vec3 dcam_dq(qd.y() / s2 - 2.0 * q.x() * cam_rate / s2,
                     -qd.x() / s2 - 2.0 * q.y() * cam_rate / s2, 0.0);
        Vec3 dcam_dqd(-q.y() / s2, q.x() / s2, 0.0);
        Vec3 dhr_dv(a.y() / v2 - 2.0 * v.x() * heading_rate / v2,
                    -a.x() / v2 - 2.0 * v.y() * heading_rate / v2, 0.0);
        Vec3 dhr_da(-v.y() / v2, v.x() / v2, 0.0);
        gradient->segment<3>(xi) += scale * dcam_dq;
        gradient->segment<3>(xi + 3) += scale * (dcam_dqd - dhr_dv);
        gradient->segment<3>(ui) += scale * (-dhr_da);
      }
    }
  }

  // Terminal state error.
  {
    const int xi = state_index(n_steps);
    Eigen::Matrix<double, 6, 1> err;
    err.head<3>() = z.segment<3>(xi) - problem_.desired.position;
    err.tail<3>() = z.segment<3>(xi + 3) - problem_.desired.velocity;
    total += w.w4 * err.squaredNorm();
    if (gradient) gradient->segment<6>(xi) += 2.0 * w.w4 * err;
  }

  return total;
}

void TranscribedNlp::constraints(const Eigen::VectorXd& z, Eigen::VectorXd& residuals,
                                 Eigen::SparseMatrix<double>* jacobian) const {
  const int n_steps = problem_.steps;
  const int n_rows = num_eq_ + num_ineq_;
  const double dt = problem_.dt;
  const double g2 = guard_sq(kPlannerHorizontalGuard);
  const double v2g = guard_sq(kPlannerSpeedGuard);

  residuals.setZero(n_rows);
  std::vector<Eigen::Triplet<double>> triplets;
  if (jacobian) {
    triplets.reserve(static_cast<size_t>(n_rows) * 6);
  }
  auto add = [&](int row, int col, double value) {
    if (jacobian) triplets.emplace_back(row, col, value);
  };

  int row = 0;

  // Initial state.
  for (int i = 0; i < 3; ++i) {
    residuals[row] = z[state_index(0) + i] - problem_.initial_state.position[i];
    add(row, state_index(0) + i, 1.0);
    ++row;
  }
  for (int i = 0; i < 3; ++i) {
    residuals[row] = z[state_index(0) + 3 + i] - problem_.initial_state.velocity[i];
    add(row, state_index(0) + 3 + i, 1.0);
    ++row;
  }

  // Shooting defects: x_{k+1} - rk4(x_k, u_k). The integrator is exact for
  // this model, so the jacobian uses the closed-form step.
  for (int k = 0; k < n_steps; ++k) {
    const int xk = state_index(k);
    const int xn = state_index(k + 1);
    const int uk = control_index(k);
    UavState current{z.segment<3>(xk), z.segment<3>(xk + 3)};
    ControlInput input{z.segment<3>(uk)};
    const UavState next = step_rk4(current, input, dt);
    for (int i = 0; i < 3; ++i) {
      residuals[row] = z[xn + i] - next.position[i];
      add(row, xn + i, 1.0);
      add(row, xk + i, -1.0);
      add(row, xk + 3 + i, -dt);
      add(row, uk + i, -0.5 * dt * dt);
      ++row;
    }
    for (int i = 0; i < 3; ++i) {
      residuals[row] = z[xn + 3 + i] - next.velocity[i];
      add(row, xn + 3 + i, 1.0);
      add(row, xk + 3 + i, -1.0);
      add(row, uk + i, -dt);
      ++row;
    }
  }

  // No-fly zones.
  for (const NoFlyZone& zone : problem_.no_fly_zones) {
    for (int k = 0; k <= n_steps; ++k) {
      const int xi = state_index(k);
      const Vec2 p(z[xi], z[xi + 1]);
      Vec2 grad;
      residuals[row] = zone.smooth_signed_distance(p, jacobian ? &grad : nullptr);
      if (jacobian) {
        add(row, xi, grad.x());
        add(row, xi + 1, grad.y());
      }
      ++row;
    }
  }

  // Collision keep-out, neighbors then obstacles.
  auto collision_rows = [&](const std::vector<Vec3>& positions, double radius) {
    for (int k = 0; k <= n_steps; ++k) {
      const int xi = state_index(k);
      const Vec3 delta = z.segment<3>(xi) - positions[k];
      residuals[row] = delta.squaredNorm() - radius * radius;
      add(row, xi, 2.0 * delta.x());
      add(row, xi + 1, 2.0 * delta.y());
      add(row, xi + 2, 2.0 * delta.z());
      ++row;
    }
  };
  for (const NeighborPlan& plan : problem_.neighbor_plans) {
    collision_rows(plan.positions, problem_.bounds.collision_radius);
  }
  for (const DynamicObstacle& obstacle : problem_.dynamic_obstacles) {
    collision_rows(obstacle.positions, obstacle.radius);
  }

  // Camera pitch window (guarded horizontal distance keeps the gradient
  // bounded when the vehicle wanders over the target).
  for (int k = 0; k <= n_steps; ++k) {
    const int xi = state_index(k);
    const Vec3 q = z.segment<3>(xi) - problem_.target_prediction.positions[k];
    const double s2 = q.x() * q.x() + q.y() * q.y() + g2;
    const double h = std::sqrt(s2);
    const double denom = s2 + q.z() * q.z();
    const double pitch = std::atan2(-h, q.z());
    const Vec3 dpitch(-q.z() * q.x() / (h * denom), -q.z() * q.y() / (h * denom),
                      h / denom);
    residuals[row] = pitch - problem_.bounds.pitch_min;
    add(row, xi, dpitch.x());
    add(row, xi + 1, dpitch.y());
    add(row, xi + 2, dpitch.z());
    ++row;
    residuals[row] = problem_.bounds.pitch_max - pitch;
    add(row, xi, -dpitch.x());
    add(row, xi + 1, -dpitch.y());
    add(row, xi + 2, -dpitch.z());
    ++row;
  }

  // Camera yaw window as one smooth cone row per step:
  //   cos(rel_yaw - mid) >= cos(half)
  // written with the algebraic sine/cosine of the relative yaw, which has no
  // branch cut. rel_yaw is the camera yaw measured from the vehicle heading.
  for (int k = 0; k <= n_steps; ++k) {
    const int xi = state_index(k);
    const Vec3 q = z.segment<3>(xi) - problem_.target_prediction.positions[k];
    const Vec3 v = z.segment<3>(xi + 3);
    const double s2 = q.x() * q.x() + q.y() * q.y() + g2;
    const double h = std::sqrt(s2);
    const double v2 = v.x() * v.x() + v.y() * v.y() + v2g;
    const double sv = std::sqrt(v2);

    // The camera yaw is atan2(-qy, -qx), so relative to the heading
    //   cos(rel_yaw) = -(q.v)/(h sv),  sin(rel_yaw) = (q x v)_z/(h sv).
    const double dot = q.x() * v.x() + q.y() * v.y();
    const double crs = q.x() * v.y() - q.y() * v.x();
    const double numer = -yaw_mid_cos_ * dot + yaw_mid_sin_ * crs;
    const double den = h * sv;
    residuals[row] = numer / den - yaw_half_cos_;
    if (jacobian) {
      const double dnum_dqx = -yaw_mid_cos_ * v.x() + yaw_mid_sin_ * v.y();
      const double dnum_dqy = -yaw_mid_cos_ * v.y() - yaw_mid_sin_ * v.x();
      const double dnum_dvx = -yaw_mid_cos_ * q.x() - yaw_mid_sin_ * q.y();
      const double dnum_dvy = -yaw_mid_cos_ * q.y() + yaw_mid_sin_ * q.x();
      const double dden_dqx = sv * q.x() / h;
      const double dden_dqy = sv * q.y() / h;
      const double dden_dvx = h * v.x() / sv;
      const double dden_dvy = h * v.y() / sv;
      const double den2 = den * den;
      add(row, xi, (dnum_dqx * den - numer * dden_dqx) / den2);
      add(row, xi + 1, (dnum_dqy * den - numer * dden_dqy) / den2);
      add(row, xi + 3, (dnum_dvx * den - numer * dden_dvx) / den2);
      add(row, xi + 4, (dnum_dvy * den - numer * dden_dvy) / den2);
    }
    ++row;
  }

  // Mutual visibility: keep each higher-priority neighbor outside the camera
  // cone. Steps where the two vehicles coincide are left to the collision
  // rows (residual pinned at the most-satisfied value).
  if (problem_.visibility_enabled) {
    const double cos_alpha = std::cos(problem_.bounds.view_half_angle);
    for (const NeighborPlan& plan : problem_.neighbor_plans) {
      for (int k = 0; k <= n_steps; ++k) {
        const int xi = state_index(k);
        const Vec3 q = z.segment<3>(xi) - problem_.target_prediction.positions[k];
        const Vec3 d = z.segment<3>(xi) - plan.positions[k];
        const double nd2 = d.squaredNorm();
        if (nd2 < kTinyDistance * kTinyDistance) {
          residuals[row] = cos_alpha + 1.0;
          ++row;
          continue;
        }
        const double nq = std::max(q.norm(), kTinyDistance);
        const double nd = std::sqrt(nd2);
        const double cos_beta = q.dot(d) / (nq * nd);
        residuals[row] = cos_alpha - cos_beta;
        if (jacobian) {
          const Vec3 dcos_dq = d / (nq * nd) - cos_beta * q / (nq * nq);
          const Vec3 dcos_dd = q / (nq * nd) - cos_beta * d / (nd * nd);
          const Vec3 dres = -(dcos_dq + dcos_dd);
          add(row, xi, dres.x());
          add(row, xi + 1, dres.y());
          add(row, xi + 2, dres.z());
        }
        ++row;
      }
    }
  }

  if (jacobian) {
    jacobian->resize(n_rows, dim_);
    jacobian->setFromTriplets(triplets.begin(), triplets.end());
  }
}

Eigen::VectorXd TranscribedNlp::guess_coast() const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim_);
  UavState x = problem_.initial_state;
  for (int k = 0; k <= problem_.steps; ++k) {
    z.segment<3>(state_index(k)) = x.position;
    z.segment<3>(state_index(k) + 3) = x.velocity;
    if (k < problem_.steps) {
      x = step_rk4(x, ControlInput{}, problem_.dt);
    }
  }
  return z;
}

Eigen::VectorXd TranscribedNlp::guess_hover() const {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(dim_);
  for (int k = 0; k <= problem_.steps; ++k) {
    z.segment<3>(state_index(k)) = problem_.initial_state.position;
  }
  return z;
}

Eigen::VectorXd TranscribedNlp::guess_detour() const {
  const int n_steps = problem_.steps;
  const double margin = 0.5;
  Eigen::VectorXd z = guess_coast();

  // Goal-directed base path: straight line from the current position to the
  // desired one. A ballistic rollout never anticipates the goal, so it can
  // leave the solve in a symmetric basin that dives through an obstacle.
  const Vec3 start = problem_.initial_state.position;
  Vec3 track = problem_.desired.position - start;
  if (track.head<2>().norm() < 1e-9) track = problem_.initial_state.velocity;
  Vec2 left(-track.y(), track.x());
  if (left.norm() < 1e-9) left = Vec2(0.0, 1.0);
  left.normalize();

  // A gentle fixed-side arc breaks the exact lateral symmetry of head-on
  // geometries (zone or target dead ahead), whose straight line sits on a
  // zero-gradient saddle.
  const double bow = std::min(0.5, 0.05 * track.norm());
  for (int k = 1; k <= n_steps; ++k) {
    const double t = static_cast<double>(k) / n_steps;
    Vec3 point = start + t * (problem_.desired.position - start);
    point.head<2>() += bow * std::sin(kPi * t) * left;
    z.segment<3>(state_index(k)) = point;
  }

  // Start at k=1: the pinned initial state must stay put.
  for (int k = 1; k <= n_steps; ++k) {
    Eigen::Ref<Eigen::Vector3d> p = z.segment<3>(state_index(k));

    for (const NoFlyZone& zone : problem_.no_fly_zones) {
      Vec2 pxy(p.x(), p.y());
      if (zone.kind == NoFlyZone::Kind::kCircle) {
        Vec2 radial = pxy - zone.center;
        if (radial.norm() < zone.radius + margin) {
          radial += 0.2 * zone.radius * left;  // break the through-center saddle
          radial.normalize();
          pxy = zone.center + (zone.radius + margin) * radial;
        }
      } else {
        for (int it = 0; it < 4; ++it) {
          Vec2 grad;
          const double d = zone.smooth_signed_distance(pxy, &grad);
          if (d >= margin) break;
          if (it == 0) pxy += 0.1 * margin * left;
          pxy += (margin - d) * grad;
        }
      }
      p.x() = pxy.x();
      p.y() = pxy.y();
    }

    auto push_out_of_sphere = [&](const Vec3& obstacle, double radius) {
      Vec3 delta = p - obstacle;
      if (delta.norm() < radius + margin) {
        delta += 0.2 * radius * Vec3(left.x(), left.y(), 0.0);
        const double norm = delta.norm();
        delta = norm > 1e-9 ? Vec3(delta / norm) : Vec3(left.x(), left.y(), 0.0);
        p = obstacle + (radius + margin) * delta;
      }
    };
    for (const NeighborPlan& plan : problem_.neighbor_plans) {
      push_out_of_sphere(plan.positions[k], problem_.bounds.collision_radius);
    }
    for (const DynamicObstacle& obstacle : problem_.dynamic_obstacles) {
      push_out_of_sphere(obstacle.positions[k], obstacle.radius);
    }
  }

  // Rebuild velocities and controls consistent with the shifted waypoints.
  for (int k = 1; k <= n_steps; ++k) {
    const Vec3 prev = z.segment<3>(state_index(k - 1));
    const Vec3 next = z.segment<3>(state_index(std::min(k + 1, n_steps)));
    const double span = (k < n_steps ? 2.0 : 1.0) * problem_.dt;
    Vec3 vel = (next - prev) / span;
    for (int i = 0; i < 3; ++i) {
      vel[i] = std::clamp(vel[i], problem_.bounds.velocity_min[i],
                          problem_.bounds.velocity_max[i]);
    }
    z.segment<3>(state_index(k) + 3) = vel;
  }
  for (int k = 0; k < n_steps; ++k) {
    const Vec3 v0 = z.segment<3>(state_index(k) + 3);
    const Vec3 v1 = z.segment<3>(state_index(k + 1) + 3);
    Vec3 acc = (v1 - v0) / problem_.dt;
    for (int i = 0; i < 3; ++i) {
      acc[i] = std::clamp(acc[i], problem_.bounds.accel_min[i],
                          problem_.bounds.accel_max[i]);
    }
    z.segment<3>(control_index(k)) = acc;
  }
  return z;
}

}  // namespace cineplan
