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

#include "cineplan/types.hpp"

namespace cineplan {

// Camera/gimbal orientation geometry. The camera origin coincides with the
// UAV origin, so the camera offset is p_camera - p_target; the target must be
// below (offset.z > 0) and not directly below the camera.

/// World-frame Z-Y-X camera angles; roll is zero by construction and pitch is
/// strictly negative (camera looks down).
struct CameraAngles {
  double roll = 0.0;
  double pitch = 0.0;
  double yaw = 0.0;
};

/// Gimbal angles relative to the vehicle body under the small roll/pitch
/// approximation: pitch equals the world pitch, yaw is measured from the
/// vehicle heading.
struct BodyCameraAngles {
  double pitch = 0.0;
  double yaw = 0.0;
};

struct GimbalRates {
  double pitch_rate = 0.0;     // d(camera pitch)/dt, rad/s
  double rel_yaw_rate = 0.0;   // d(body-relative yaw)/dt, rad/s
};

/// World camera angles that point the optical axis at the target while the
/// image stays level. Throws SingularityError when offset.z <= 0 or the
/// horizontal offset vanishes (camera directly above the target).
CameraAngles world_gimbal_angles(const Vec3& camera_offset);

/// Body-relative gimbal angles; the vehicle heading comes from its velocity.
/// Propagates YawUndefinedError when horizontal speed is below
/// kYawSpeedThreshold.
BodyCameraAngles relative_gimbal_angles(const Vec3& camera_offset,
                                        const Vec3& uav_velocity);

/// Exact analytic time derivatives of the camera pitch and body-relative yaw
/// along a trajectory. offset_rate is d/dt of the camera offset
/// (uav_velocity - target_velocity). Throws on singular configurations.
GimbalRates gimbal_rates(const Vec3& camera_offset, const Vec3& offset_rate,
                         const Vec3& uav_velocity, const Vec3& uav_acceleration);

/// Rotation matrix of the camera frame implied by the world angles; its third
/// column is camera_offset normalized.
Eigen::Matrix3d camera_rotation(const Vec3& camera_offset);

namespace detail {

// Guarded cores shared with the planner transcription. The guards add
// squared floor terms to the horizontal-distance and horizontal-speed
// denominators so cost/constraint gradients stay bounded near the singular
// sets; with both guards zero the expressions are the exact derivatives.

double camera_pitch_guarded(const Vec3& q, double horizontal_guard_sq);

double camera_pitch_rate_guarded(const Vec3& q, const Vec3& q_rate,
                                 double horizontal_guard_sq);

double camera_yaw_rate_guarded(const Vec3& q, const Vec3& q_rate,
                               double horizontal_guard_sq);

double heading_rate_guarded(const Vec3& velocity, const Vec3& acceleration,
                            double speed_guard_sq);

}  // namespace detail

}  // namespace cineplan
