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

#include "cineplan/execution.hpp"

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <algorithm>
#include <cmath>

#include "cineplan/gimbal.hpp"

namespace cineplan {

FollowResult follow(const PlannedTrajectory& trajectory, const Vec3& position,
                    double now, const FollowerConfig& config,
                    const Vec3& velocity_min, const Vec3& velocity_max) {
  FollowResult result;
  const int count = static_cast<int>(trajectory.states.size());

  // Synchronization: waypoints whose stamps have passed are discarded.
  int first = 0;
  while (first < count && trajectory.stamp(first) < now - 1e-12) ++first;
  if (first >= count) {
    result.exhausted = true;
    return result;
  }

  int closest = first;
  double closest_d2 = (trajectory.states[first].position - position).squaredNorm();
  for (int k = first + 1; k < count; ++k) {
    const double d2 = (trajectory.states[k].position - position).squaredNorm();
    if (d2 < closest_d2) {
      closest = k;
      closest_d2 = d2;
    }
  }

  // Look-ahead measured along the remaining polyline.
  int target = closest;
  double arc = 0.0;
  while (target < count - 1 && arc < config.look_ahead) {
    arc += (trajectory.states[target + 1].position - trajectory.states[target].position)
               .norm();
    ++target;
  }
  result.look_ahead_index = target;

  const Vec3 to_target = trajectory.states[target].position - position;
  const double distance = to_target.norm();
  if (distance < 1e-12) {
    return result;  // already there (hovering plan): zero command
  }
  const double time_left = trajectory.stamp(target) - now;
  const Vec3 direction = to_target / distance;

  double speed;
  if (time_left > 1e-9) {
    speed = distance / time_left;
  } else {
    speed = velocity_max.lpNorm<Eigen::Infinity>();  // late: catch up at the cap
  }
  Vec3 command = speed * direction;

  // Uniform scaling into the velocity box keeps the pursuit direction.
  double scale = 1.0;
  for (int i = 0; i < 3; ++i) {
    if (command[i] > velocity_max[i]) scale = std::min(scale, velocity_max[i] / command[i]);
    if (command[i] < velocity_min[i]) scale = std::min(scale, velocity_min[i] / command[i]);
  }
  result.velocity_command = scale * command;
  return result;
}

Vec3 vee(const Eigen::Matrix3d& m) {
  return Vec3(m(2, 1), m(0, 2), m(1, 0));
}

Eigen::Matrix3d so3_exp(const Vec3& rotation_vector) {
  const double angle = rotation_vector.norm();
  if (angle < 1e-12) {
    Eigen::Matrix3d skew;
    skew << 0, -rotation_vector.z(), rotation_vector.y(),
        rotation_vector.z(), 0, -rotation_vector.x(),
        -rotation_vector.y(), rotation_vector.x(), 0;
    return Eigen::Matrix3d::Identity() + skew;
  }
  return Eigen::AngleAxisd(angle, rotation_vector / angle).toRotationMatrix();
}

Eigen::Matrix3d integrate_body_rates(const Eigen::Matrix3d& rotation, const Vec3& body_rates,
                                     double dt) {
  const Eigen::Matrix3d updated = rotation * so3_exp(body_rates * dt);
  return Eigen::Quaterniond(updated).normalized().toRotationMatrix();
}

double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double c = ((a.transpose() * b).trace() - 1.0) / 2.0;
  return std::acos(std::clamp(c, -1.0, 1.0));
}

std::optional<Vec3> gimbal_command(const Eigen::Matrix3d& camera_rotation_current,
                                   const Vec3& uav_position, const Vec3& target_position,
                                   const GimbalControllerConfig& config) {
  const Vec3 offset = uav_position - target_position;
  if (!(offset.z() > 0.0) || std::hypot(offset.x(), offset.y()) <= 1e-12) {
    return std::nullopt;
  }
  const Eigen::Matrix3d desired = camera_rotation(offset);
  const Eigen::Matrix3d error = camera_rotation_current.transpose() * desired;
  return config.gain * vee(error - error.transpose());
}

}  // namespace cineplan
