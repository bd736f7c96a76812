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

#include "cineplan/gimbal.hpp"

#include <cmath>

#include "cineplan/dynamics.hpp"

namespace cineplan {

namespace detail {

double camera_pitch_guarded(const Vec3& q, double horizontal_guard_sq) {
  const double h = std::sqrt(q.x() * q.x() + q.y() * q.y() + horizontal_guard_sq);
  return std::atan2(-h, q.z());
}

double camera_pitch_rate_guarded(const Vec3& q, const Vec3& q_rate,
                                 double horizontal_guard_sq) {
  const double s2 = q.x() * q.x() + q.y() * q.y() + horizontal_guard_sq;
  const double h = std::sqrt(s2);
  const double h_rate = (q.x() * q_rate.x() + q.y() * q_rate.y()) / h;
  const double denom = s2 + q.z() * q.z();
  return (h * q_rate.z() - q.z() * h_rate) / denom;
}

double camera_yaw_rate_guarded(const Vec3& q, const Vec3& q_rate,
                               double horizontal_guard_sq) {
  const double s2 = q.x() * q.x() + q.y() * q.y() + horizontal_guard_sq;
  return (q.x() * q_rate.y() - q.y() * q_rate.x()) / s2;
}

double heading_rate_guarded(const Vec3& velocity, const Vec3& acceleration,
                            double speed_guard_sq) {
  const double v2 =
      velocity.x() * velocity.x() + velocity.y() * velocity.y() + speed_guard_sq;
  return (velocity.x() * acceleration.y() - velocity.y() * acceleration.x()) / v2;
}

}  // namespace detail

namespace {

void check_offset(const Vec3& q) {
  if (!all_finite(q)) {
    throw std::invalid_argument("gimbal: non-finite camera offset");
  }
  if (!(q.z() > 0.0)) {
    throw SingularityError("gimbal: target is not below the camera");
  }
  if (q.x() * q.x() + q.y() * q.y() <= 0.0) {
    throw SingularityError("gimbal: camera directly above the target");
  }
}

}  // namespace

CameraAngles world_gimbal_angles(const Vec3& camera_offset) {
  check_offset(camera_offset);
  const Vec3& q = camera_offset;
  CameraAngles angles;
  angles.roll = 0.0;
  angles.pitch = wrap_angle(std::atan2(-std::hypot(q.x(), q.y()), q.z()));
  angles.yaw = wrap_angle(std::atan2(-q.y(), -q.x()));
  return angles;
}

BodyCameraAngles relative_gimbal_angles(const Vec3& camera_offset,
                                        const Vec3& uav_velocity) {
  const CameraAngles world = world_gimbal_angles(camera_offset);
  if (std::hypot(uav_velocity.x(), uav_velocity.y()) < kYawSpeedThreshold) {
    throw YawUndefinedError("relative_gimbal_angles: vehicle heading undefined");
  }
  const double heading = std::atan2(uav_velocity.y(), uav_velocity.x());
  BodyCameraAngles rel;
  rel.pitch = world.pitch;
  rel.yaw = angle_difference(world.yaw, heading);
  return rel;
}

GimbalRates gimbal_rates(const Vec3& camera_offset, const Vec3& offset_rate,
                         const Vec3& uav_velocity, const Vec3& uav_acceleration) {
  check_offset(camera_offset);
  if (std::hypot(uav_velocity.x(), uav_velocity.y()) < kYawSpeedThreshold) {
    throw YawUndefinedError("gimbal_rates: vehicle heading undefined");
  }
  GimbalRates rates;
  rates.pitch_rate = detail::camera_pitch_rate_guarded(camera_offset, offset_rate, 0.0);
  const double camera_yaw_rate =
      detail::camera_yaw_rate_guarded(camera_offset, offset_rate, 0.0);
  const double heading_rate =
      detail::heading_rate_guarded(uav_velocity, uav_acceleration, 0.0);
  rates.rel_yaw_rate = camera_yaw_rate - heading_rate;
  return rates;
}

Eigen::Matrix3d camera_rotation(const Vec3& camera_offset) {
  const CameraAngles angles = world_gimbal_angles(camera_offset);
  return euler_zyx_to_rotation(angles.roll, angles.pitch, angles.yaw);
}

}  // namespace cineplan
