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

#include "cineplan/trajectory.hpp"

#include <algorithm>
#include <cmath>

#include "cineplan/dynamics.hpp"

namespace cineplan {

namespace {

int segment_of(const PlannedTrajectory& traj, double t) {
  const int last = static_cast<int>(traj.states.size()) - 1;
  const int seg = static_cast<int>(std::floor((t - traj.stamp_start) / traj.dt));
  return std::clamp(seg, 0, last - 1);
}

}  // namespace

Vec3 PlannedTrajectory::position_at(double t) const {
  if (states.empty()) return Vec3::Zero();
  if (states.size() == 1) return states.front().position;
  if (t <= stamp_start) {
    return states.front().position + (t - stamp_start) * states.front().velocity;
  }
  if (t >= stamp_end()) {
    return states.back().position + (t - stamp_end()) * states.back().velocity;
  }
  const int seg = segment_of(*this, t);
  const double u = (t - stamp(seg)) / dt;
  return states[seg].position +
         u * (states[seg + 1].position - states[seg].position);
}

Vec3 PlannedTrajectory::velocity_at(double t) const {
  if (states.empty()) return Vec3::Zero();
  if (states.size() == 1 || t <= stamp_start) return states.front().velocity;
  if (t >= stamp_end()) return states.back().velocity;
  const int seg = segment_of(*this, t);
  const double u = (t - stamp(seg)) / dt;
  return states[seg].velocity + u * (states[seg + 1].velocity - states[seg].velocity);
}

Vec3 PlannedTrajectory::control_at(double t) const {
  if (controls.empty() || t < stamp_start || t >= stamp_end()) return Vec3::Zero();
  const int seg = std::clamp(static_cast<int>(std::floor((t - stamp_start) / dt)), 0,
                             steps() - 1);
  return controls[static_cast<size_t>(seg)];
}

double PlannedTrajectory::max_dynamics_defect() const {
  double worst = 0.0;
  for (size_t k = 0; k + 1 < states.size() && k < controls.size(); ++k) {
    const UavState propagated = step_rk4(states[k], ControlInput{controls[k]}, dt);
    worst = std::max(worst,
                     (propagated.position - states[k + 1].position).lpNorm<Eigen::Infinity>());
    worst = std::max(worst,
                     (propagated.velocity - states[k + 1].velocity).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

}  // namespace cineplan
