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

/// Horizontal speed below which the velocity-aligned yaw is undefined.
inline constexpr double kYawSpeedThreshold = 1e-3;  // m/s

/// One classical 4th-order Runge-Kutta step of the double-integrator model
/// (position'/velocity' = velocity/acceleration) with the input held constant
/// over dt. For this model the step is exact: it equals
/// p + v dt + u dt^2/2, v + u dt to round-off.
UavState step_rk4(const UavState& state, const ControlInput& input, double dt);

/// Thrust and Z-Y-X Euler angles that realize a given acceleration while the
/// vehicle yaw tracks the direction of horizontal motion.
///
/// Throws SingularityError in free fall (acceleration cancels gravity) and
/// YawUndefinedError when horizontal speed is below kYawSpeedThreshold; the
/// caller is expected to hold the last valid yaw in that case.
AttitudeThrust recover_attitude(const Vec3& velocity, const Vec3& acceleration,
                                const PhysicsConstants& constants = {});

/// Z-Y-X Euler angles to rotation matrix: Rz(yaw) * Ry(pitch) * Rx(roll).
Eigen::Matrix3d euler_zyx_to_rotation(double roll, double pitch, double yaw);

/// Acceleration produced by a thrust/attitude pair under gravity; the inverse
/// of recover_attitude, used for consistency checks.
Vec3 acceleration_from_attitude(const AttitudeThrust& attitude,
                                const PhysicsConstants& constants = {});

}  // namespace cineplan
