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

#include "cineplan/dynamics.hpp"

#include <Eigen/Geometry>

#include <cmath>

namespace cineplan {

namespace {

struct StateDerivative {
  Vec3 dp;
  Vec3 dv;
};

StateDerivative flow(const UavState& x, const Vec3& u) {
  return {x.velocity, u};
}

}  // namespace

UavState step_rk4(const UavState& state, const ControlInput& input, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw std::invalid_argument("step_rk4: dt must be positive and finite");
  }
  if (!all_finite(state) || !all_finite(input.acceleration)) {
    throw std::invalid_argument("step_rk4: non-finite state or input");
  }

  const Vec3& u = input.acceleration;
  const StateDerivative k1 = flow(state, u);
  const StateDerivative k2 =
      flow({state.position + 0.5 * dt * k1.dp, state.velocity + 0.5 * dt * k1.dv}, u);
  const StateDerivative k3 =
      flow({state.position + 0.5 * dt * k2.dp, state.velocity + 0.5 * dt * k2.dv}, u);
  const StateDerivative k4 =
      flow({state.position + dt * k3.dp, state.velocity + dt * k3.dv}, u);

  UavState next;
  next.position =
      state.position + (dt / 6.0) * (k1.dp + 2.0 * k2.dp + 2.0 * k3.dp + k4.dp);
  next.velocity =
      state.velocity + (dt / 6.0) * (k1.dv + 2.0 * k2.dv + 2.0 * k3.dv + k4.dv);
  return next;
}

AttitudeThrust recover_attitude(const Vec3& velocity, const Vec3& acceleration,
                                const PhysicsConstants& constants) {
  if (!all_finite(velocity) || !all_finite(acceleration)) {
    throw std::invalid_argument("recover_attitude: non-finite input");
  }

  const Vec3 specific_force = acceleration + Vec3(0.0, 0.0, constants.gravity);
  const double force_norm = specific_force.norm();
  if (force_norm <= 0.0) {
    throw SingularityError("recover_attitude: free fall, attitude undefined");
  }
  const double horizontal_speed = std::hypot(velocity.x(), velocity.y());
  if (horizontal_speed < kYawSpeedThreshold) {
    throw YawUndefinedError("recover_attitude: horizontal speed below yaw threshold");
  }

  AttitudeThrust out;
  out.thrust = constants.mass * force_norm;
  out.yaw = std::atan2(velocity.y(), velocity.x());
  const double cy = std::cos(out.yaw);
  const double sy = std::sin(out.yaw);
  out.roll = -std::asin((acceleration.y() * cy - acceleration.x() * sy) / force_norm);
  out.pitch = std::atan2(acceleration.x() * cy + acceleration.y() * sy,
                         acceleration.z() + constants.gravity);
  out.roll = wrap_angle(out.roll);
  out.pitch = wrap_angle(out.pitch);
  out.yaw = wrap_angle(out.yaw);
  return out;
}

Eigen::Matrix3d euler_zyx_to_rotation(double roll, double pitch, double yaw) {
  const Eigen::AngleAxisd rz(yaw, Vec3::UnitZ());
  const Eigen::AngleAxisd ry(pitch, Vec3::UnitY());
  const Eigen::AngleAxisd rx(roll, Vec3::UnitX());
  return (rz * ry * rx).toRotationMatrix();
}

Vec3 acceleration_from_attitude(const AttitudeThrust& attitude,
                                const PhysicsConstants& constants) {
  const Eigen::Matrix3d rotation =
      euler_zyx_to_rotation(attitude.roll, attitude.pitch, attitude.yaw);
  return Vec3(0.0, 0.0, -constants.gravity) +
         rotation * Vec3(0.0, 0.0, attitude.thrust / constants.mass);
}

}  // namespace cineplan
