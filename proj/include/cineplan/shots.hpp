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

#include <optional>
#include <string>
#include <vector>

#include "cineplan/types.hpp"

namespace cineplan {

enum class ShotKind { kChase, kLead, kLateral, kFlyby, kOrbit };

std::string to_string(ShotKind kind);
ShotKind shot_kind_from_string(const std::string& name);

/// One parameterized camera maneuver relative to the moving target.
struct ShotSpec {
  ShotKind kind = ShotKind::kLateral;
  double start_time = 0.0;  // seconds on the mission clock
  double duration = 10.0;   // seconds, > 0
  double altitude = 3.0;    // meters, desired z of the vehicle

  // Kind-specific geometry, all meters:
  //   chase/lead: standoff distance behind/ahead of the target
  //   lateral:    side distance; side = +1 keeps left of heading, -1 right
  //   flyby:      behind -> ahead transition distances
  //   orbit:      radius; start_azimuth measured from the target heading
  double distance = 8.0;
  double side = 1.0;
  double behind = 20.0;
  double ahead = 15.0;
  double start_azimuth = 0.0;

  void validate() const;
};

/// Piecewise-linear path with arc-length parameterization.
class PolylinePath {
 public:
  PolylinePath() = default;
  PolylinePath(std::vector<Vec3> points, bool closed);

  bool empty() const { return points_.size() < 2; }
  bool closed() const { return closed_; }
  double total_length() const { return total_length_; }
  const std::vector<Vec3>& points() const { return points_; }

  /// Position at arc length s; closed paths wrap, open paths clamp.
  Vec3 position_at_arc(double s) const;
  /// Unit tangent of the segment containing arc length s.
  Vec3 tangent_at_arc(double s) const;
  /// Arc length of the closest point on the path to p.
  double project_arc(const Vec3& p) const;

 private:
  std::vector<Vec3> points_;
  std::vector<double> cumulative_;
  bool closed_ = false;
  double total_length_ = 0.0;
};

/// Instantaneous target state plus an optional known course.
struct TargetEstimate {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
  std::optional<PolylinePath> path;
};

/// Predicted target states at uniform dt, starting at the estimate time.
struct TargetPrediction {
  double dt = 0.1;
  std::vector<Vec3> positions;
  std::vector<Vec3> velocities;
  /// Heading to fall back on when the predicted speed never reaches the
  /// heading threshold (e.g. a stationary target); callers that track the
  /// target over time keep this at the last observed valid heading.
  double fallback_heading = 0.0;
};

struct DesiredState {
  Vec3 position{Vec3::Zero()};
  Vec3 velocity{Vec3::Zero()};
};

/// Speed below which the target heading is held rather than recomputed.
inline constexpr double kHeadingSpeedThreshold = 0.1;  // m/s

/// Constant-velocity extrapolation of the target, or an arc-length advance
/// along the known course at the current speed when a path is present.
/// Returns horizon_steps + 1 samples, the first being the estimate itself.
TargetPrediction predict_target(const TargetEstimate& estimate, int horizon_steps,
                                double dt);

/// Target heading at prediction index, scanning back for the last sample with
/// defined heading and falling back to prediction.fallback_heading.
double target_heading_at(const TargetPrediction& prediction, int index);

/// Desired vehicle state for the shot, placed at the prediction-horizon end
/// (clamped to the shot end). Returns nullopt once the shot is complete.
std::optional<DesiredState> desired_state(const ShotSpec& shot,
                                          const TargetPrediction& prediction,
                                          double shot_elapsed, double horizon);

}  // namespace cineplan
