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

#include <Eigen/Core>
#include <optional>

#include "cineplan/trajectory.hpp"
#include "cineplan/types.hpp"

namespace cineplan {

struct FollowerConfig {
  double look_ahead = 1.0;  // meters along the remaining path
  double rate = 10.0;       // Hz
};

struct FollowResult {
  Vec3 velocity_command{Vec3::Zero()};
  int look_ahead_index = -1;  // waypoint the command points to
  bool exhausted = false;     // no remaining waypoints: hover and replan
};

/// Pure-pursuit step: discard waypoints whose stamps have passed, find the
/// closest remaining waypoint, pick the first one at least look_ahead meters
/// further along the polyline, and command the speed needed to reach it on
/// schedule. The command is scaled (direction preserved) into the velocity
/// box.
FollowResult follow(const PlannedTrajectory& trajectory, const Vec3& position,
                    double now, const FollowerConfig& config,
                    const Vec3& velocity_min, const Vec3& velocity_max);

struct GimbalControllerConfig {
  double gain = 2.0;   // 1/s
  double rate = 10.0;  // Hz
};

/// First-order attitude-rate law on the rotation group: with the error
/// rotation E = R^T R_desired, the body-rate command is gain * vee(E - E^T).
/// Returns nullopt when the desired orientation is singular (target not
/// below the camera); the caller holds the previous command.
std::optional<Vec3> gimbal_command(const Eigen::Matrix3d& camera_rotation_current,
                                   const Vec3& uav_position, const Vec3& target_position,
                                   const GimbalControllerConfig& config);

/// vee of the skew-symmetric part convention used by the controller.
Vec3 vee(const Eigen::Matrix3d& m);

/// Rodrigues exponential of a rotation vector.
Eigen::Matrix3d so3_exp(const Vec3& rotation_vector);

/// Right-multiplicative integration of body rates over dt, re-orthonormalized.
Eigen::Matrix3d integrate_body_rates(const Eigen::Matrix3d& rotation, const Vec3& body_rates,
                                     double dt);

/// Geodesic angle between two rotations.
double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

}  // namespace cineplan
