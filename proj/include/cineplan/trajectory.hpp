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

#include <vector>

#include "cineplan/types.hpp"

namespace cineplan {

/// Timestamped output of one planning solve: N+1 states and N controls on a
/// uniform grid starting at stamp_start (simulation clock).
struct PlannedTrajectory {
  int uav_id = -1;
  double stamp_start = 0.0;
  double dt = 0.1;
  std::vector<UavState> states;
  std::vector<Vec3> controls;

  int steps() const { return static_cast<int>(controls.size()); }
  double stamp(int k) const { return stamp_start + k * dt; }
  double stamp_end() const { return stamp(static_cast<int>(states.size()) - 1); }

  /// Position at time t: linear interpolation inside the horizon,
  /// constant-velocity extrapolation from the boundary states outside it.
  Vec3 position_at(double t) const;
  Vec3 velocity_at(double t) const;
  /// Piecewise-constant control of the segment containing t; zero outside.
  Vec3 control_at(double t) const;

  /// Max norm of the per-step defect between states and an integration of the
  /// controls; used to assert internal consistency.
  double max_dynamics_defect() const;
};

}  // namespace cineplan
