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

#pragma once

#include <string>
#include <vector>

#include "cineplan/shots.hpp"
#include "cineplan/solver.hpp"
#include "cineplan/types.hpp"

namespace cineplan {

/// Cost weights: control effort (w1), camera pitch rate (w2), body-relative
/// camera yaw rate (w3), terminal state error (w4).
struct PlannerWeights {
  double w1 = 1.0;
  double w2 = 0.0;
  double w3 = 0.0;
  double w4 = 1.0;

  void validate() const;
};

struct PlannerBounds {
  Vec3 velocity_min{-10.0, -10.0, -10.0};
  Vec3 velocity_max{10.0, 10.0, 10.0};
  Vec3 accel_min{-5.0, -5.0, -5.0};
  Vec3 accel_max{5.0, 5.0, 5.0};
  double pitch_min = -kPi / 2.0;       // camera pitch window, rad
  double pitch_max = -kPi / 4.0;
  double yaw_min = -3.0 * kPi / 4.0;   // body-relative camera yaw window, rad
  double yaw_max = 3.0 * kPi / 4.0;
  double view_half_angle = kPi / 6.0;  // camera cone semi-angle, rad
  double collision_radius = 2.0;       // meters

  void validate() const;
};

/// Static keep-out region: a vertical prism over a circle or a convex
/// polygon. The planner uses a smooth signed distance (log-sum-exp over the
/// polygon half-planes, sharpness 20, shifted to stay conservative); metrics
/// use the exact Euclidean boundary distance.
struct NoFlyZone {
  enum class Kind { kCircle, kPolygon };
  Kind kind = Kind::kCircle;
  Vec2 center{0.0, 0.0};
  double radius = 1.0;
  std::vector<Vec2> vertices;  // convex, counter-clockwise

  void validate() const;

  /// Smooth signed distance (>= 0 outside); fills d/dxy when grad is non-null.
  double smooth_signed_distance(const Vec2& p, Vec2* grad = nullptr) const;

  /// Exact signed Euclidean distance to the zone boundary (< 0 inside).
  double boundary_distance(const Vec2& p) const;
};

struct DynamicObstacle {
  std::vector<Vec3> positions;  // one per step, >= N+1 entries
  double radius = 1.0;
};

struct NeighborPlan {
  int uav_id = -1;
  std::vector<Vec3> positions;  // one per step, >= N+1 entries
};

/// Frozen per-solve snapshot of one vehicle's planning problem.
struct OcpProblem {
  UavState initial_state;
  int steps = 50;      // N
  double dt = 0.1;     // seconds
  PlannerWeights weights;
  PlannerBounds bounds;
  DesiredState desired;
  TargetPrediction target_prediction;  // >= N+1 samples
  std::vector<NoFlyZone> no_fly_zones;
  std::vector<NeighborPlan> neighbor_plans;
  std::vector<DynamicObstacle> dynamic_obstacles;
  bool visibility_enabled = true;
};

/// Row identity in the fixed constraint ordering (a public contract):
///   equalities:  initial state (6 rows), then dynamics step-major (6 per
///                step, position rows before velocity rows);
///   inequalities: no-fly zones (zone-major, one row per step), collisions
///                (neighbors then obstacles, one row per step), camera pitch
///                (two rows per step: min then max), camera yaw cone (one row
///                per step), visibility (neighbor-major, one row per step).
struct RowInfo {
  enum class Kind {
    kInitialState,
    kDynamics,
    kNoFlyZone,
    kCollision,
    kPitchMin,
    kPitchMax,
    kYawCone,
    kVisibility,
  };
  Kind kind;
  int step = 0;       // k
  int entity = 0;     // zone/neighbor/obstacle index within its group
  int component = 0;  // vector component for 6-row blocks
};

std::string to_string(RowInfo::Kind kind);

/// Direct multiple-shooting transcription of the planning problem with
/// analytic first derivatives. Decision vector
///   z = [x_0 .. x_N, u_0 .. u_{N-1}]  (9N+6 scalars),
/// where each x_k is (position, velocity). The initial state is also pinned
/// via equal lower/upper bounds, so its equality rows are trivially exact.
class TranscribedNlp : public NlpProblem {
 public:
  explicit TranscribedNlp(OcpProblem problem);

  int dim() const override { return dim_; }
  const Eigen::VectorXd& lower_bounds() const override { return lower_; }
  const Eigen::VectorXd& upper_bounds() const override { return upper_; }
  int num_equalities() const override { return num_eq_; }
  int num_inequalities() const override { return num_ineq_; }

  double cost(const Eigen::VectorXd& z, Eigen::VectorXd* gradient) const override;
  void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& residuals,
                   Eigen::SparseMatrix<double>* jacobian) const override;

  const OcpProblem& problem() const { return problem_; }
  const std::vector<RowInfo>& row_info() const { return rows_; }

  int state_index(int k) const { return 6 * k; }
  int control_index(int k) const { return 6 * (problem_.steps + 1) + 3 * k; }

  /// Ballistic (zero-control) rollout from the initial state.
  Eigen::VectorXd guess_coast() const;
  /// Hold position with zero velocity everywhere (hover re-init).
  Eigen::VectorXd guess_hover() const;
  /// Coast rollout with waypoints pushed deterministically out of no-fly
  /// zones and keep-out spheres, with a fixed left-hand tie-break. Straight
  /// guesses through an obstacle sit on a gradient saddle; this biases the
  /// solve into one basin.
  Eigen::VectorXd guess_detour() const;

 private:
  OcpProblem problem_;
  int dim_ = 0;
  int num_eq_ = 0;
  int num_ineq_ = 0;
  Eigen::VectorXd lower_, upper_;
  std::vector<RowInfo> rows_;
  double yaw_mid_cos_ = 1.0, yaw_mid_sin_ = 0.0, yaw_half_cos_ = 0.0;
};

/// Horizontal-distance guard inside the planner: squared floor added to
/// q_x^2 + q_y^2 so camera-angle gradients stay bounded near the
/// directly-above singularity.
inline constexpr double kPlannerHorizontalGuard = 0.1;  // meters
/// Matching floor for the horizontal-speed denominators of heading terms.
inline constexpr double kPlannerSpeedGuard = 0.1;  // m/s

}  // namespace cineplan
