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
#include <cmath>
#include <stdexcept>
#include <string>

namespace cineplan {

using Vec3 = Eigen::Vector3d;
using Vec2 = Eigen::Vector2d;

inline constexpr double kPi = 3.14159265358979323846;

// World frame is ENU; all positions in meters, velocities m/s, angles rad.

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Geometry has no defined answer (free fall, camera directly above target).
struct SingularityError : Error {
  using Error::Error;
};

/// Horizontal speed too small to define a heading.
struct YawUndefinedError : Error {
  using Error::Error;
};

/// Inconsistent problem data handed to the transcription.
struct BuildError : Error {
  using Error::Error;
};

/// Malformed or invalid scenario description.
struct ScenarioError : Error {
  using Error::Error;
};

struct UavState {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
};

struct ControlInput {
  Vec3 acceleration{Vec3::Zero()};
};

/// Thrust and Z-Y-X Euler attitude recovered from flat outputs.
struct AttitudeThrust {
  double thrust = 0.0;  // newtons, >= 0
  double roll = 0.0;    // (-pi, pi]
  double pitch = 0.0;
  double yaw = 0.0;
};

struct PhysicsConstants {
  double gravity = 9.81;  // m/s^2
  double mass = 1.0;      // kg
};

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double angle) {
  double w = std::remainder(angle, 2.0 * kPi);
  if (w <= -kPi) w += 2.0 * kPi;
  return w;
}

/// Wrap-safe angle difference a - b in (-pi, pi].
inline double angle_difference(double a, double b) { return wrap_angle(a - b); }

inline bool all_finite(const Vec3& v) {
  return std::isfinite(v.x()) && std::isfinite(v.y()) && std::isfinite(v.z());
}

inline bool all_finite(const UavState& x) {
  return all_finite(x.position) && all_finite(x.velocity);
}

}  // namespace cineplan
