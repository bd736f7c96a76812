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

#include "cineplan/shots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace cineplan {

std::string to_string(ShotKind kind) {
  switch (kind) {
    case ShotKind::kChase: return "chase";
    case ShotKind::kLead: return "lead";
    case ShotKind::kLateral: return "lateral";
    case ShotKind::kFlyby: return "flyby";
    case ShotKind::kOrbit: return "orbit";
  }
  return "unknown";
}

ShotKind shot_kind_from_string(const std::string& name) {
  if (name == "chase") return ShotKind::kChase;
  if (name == "lead") return ShotKind::kLead;
  if (name == "lateral") return ShotKind::kLateral;
  if (name == "flyby") return ShotKind::kFlyby;
  if (name == "orbit") return ShotKind::kOrbit;
  throw ScenarioError("unknown shot kind: " + name);
}

void ShotSpec::validate() const {
  if (!(duration > 0.0)) throw ScenarioError("shot duration must be > 0");
  if (!(altitude > 0.0)) throw ScenarioError("shot altitude must be > 0");
  switch (kind) {
    case ShotKind::kChase:
    case ShotKind::kLead:
    case ShotKind::kLateral:
      if (!(distance > 0.0)) throw ScenarioError("shot distance must be > 0");
      break;
    case ShotKind::kFlyby:
      if (!(behind > 0.0) || !(ahead > 0.0)) {
        throw ScenarioError("flyby behind/ahead distances must be > 0");
      }
      break;
    case ShotKind::kOrbit:
      if (!(distance > 0.0)) throw ScenarioError("orbit radius must be > 0");
      break;
  }
}

PolylinePath::PolylinePath(std::vector<Vec3> points, bool closed)
    : points_(std::move(points)), closed_(closed) {
  if (points_.size() < 2) {
    throw std::invalid_argument("PolylinePath needs at least two points");
  }
  if (closed_ && (points_.front() - points_.back()).norm() > 1e-9) {
    points_.push_back(points_.front());
  }
  cumulative_.resize(points_.size());
  cumulative_[0] = 0.0;
  for (size_t i = 1; i < points_.size(); ++i) {
    cumulative_[i] = cumulative_[i - 1] + (points_[i] - points_[i - 1]).norm();
  }
  total_length_ = cumulative_.back();
  if (!(total_length_ > 0.0)) {
    throw std::invalid_argument("PolylinePath has zero length");
  }
}

namespace {

double wrap_or_clamp_arc(double s, double total, bool closed) {
  if (closed) {
    double w = std::fmod(s, total);
    if (w < 0.0) w += total;
    return w;
  }
  return std::clamp(s, 0.0, total);
}

}  // namespace

Vec3 PolylinePath::position_at_arc(double s) const {
  const double arc = wrap_or_clamp_arc(s, total_length_, closed_);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), arc);
  size_t seg = static_cast<size_t>(std::distance(cumulative_.begin(), it));
  seg = std::min(std::max<size_t>(seg, 1), points_.size() - 1);
  const double seg_len = cumulative_[seg] - cumulative_[seg - 1];
  const double t = seg_len > 0.0 ? (arc - cumulative_[seg - 1]) / seg_len : 0.0;
  return points_[seg - 1] + t * (points_[seg] - points_[seg - 1]);
}

Vec3 PolylinePath::tangent_at_arc(double s) const {
  const double arc = wrap_or_clamp_arc(s, total_length_, closed_);
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), arc);
  size_t seg = static_cast<size_t>(std::distance(cumulative_.begin(), it));
  seg = std::min(std::max<size_t>(seg, 1), points_.size() - 1);
  Vec3 d = points_[seg] - points_[seg - 1];
  const double n = d.norm();
  return n > 0.0 ? Vec3(d / n) : Vec3::UnitX();
}

double PolylinePath::project_arc(const Vec3& p) const {
  double best_d2 = std::numeric_limits<double>::infinity();
  double best_arc = 0.0;
  for (size_t i = 1; i < points_.size(); ++i) {
    const Vec3& a = points_[i - 1];
    const Vec3& b = points_[i];
    const Vec3 ab = b - a;
    const double len2 = ab.squaredNorm();
    double t = len2 > 0.0 ? (p - a).dot(ab) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec3 proj = a + t * ab;
    const double d2 = (p - proj).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best_arc = cumulative_[i - 1] + t * std::sqrt(len2);
    }
  }
  return best_arc;
}

TargetPrediction predict_target(const TargetEstimate& estimate, int horizon_steps,
                                double dt) {
  if (horizon_steps < 1) {
    throw std::invalid_argument("predict_target: horizon_steps must be >= 1");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("predict_target: dt must be > 0");
  }
  TargetPrediction pred;
  pred.dt = dt;
  pred.positions.reserve(horizon_steps + 1);
  pred.velocities.reserve(horizon_steps + 1);

  if (estimate.path && !estimate.path->empty()) {
    const PolylinePath& path = *estimate.path;
    const double speed = estimate.velocity.norm();
    const double arc0 = path.project_arc(estimate.position);
    for (int k = 0; k <= horizon_steps; ++k) {
      const double arc = arc0 + speed * k * dt;
      pred.positions.push_back(path.position_at_arc(arc));
      pred.velocities.push_back(speed * path.tangent_at_arc(arc));
    }
  } else {
    for (int k = 0; k <= horizon_steps; ++k) {
      pred.positions.push_back(estimate.position + (k * dt) * estimate.velocity);
      pred.velocities.push_back(estimate.velocity);
    }
  }
  return pred;
}

double target_heading_at(const TargetPrediction& prediction, int index) {
  index = std::clamp(index, 0, static_cast<int>(prediction.velocities.size()) - 1);
  for (int i = index; i >= 0; --i) {
    const Vec3& v = prediction.velocities[static_cast<size_t>(i)];
    if (std::hypot(v.x(), v.y()) >= kHeadingSpeedThreshold) {
      return std::atan2(v.y(), v.x());
    }
  }
  return prediction.fallback_heading;
}

std::optional<DesiredState> desired_state(const ShotSpec& shot,
                                          const TargetPrediction& prediction,
                                          double shot_elapsed, double horizon) {
  if (shot_elapsed < 0.0) {
    throw std::invalid_argument("desired_state: negative shot_elapsed");
  }
  if (shot_elapsed > shot.duration) {
    return std::nullopt;  // shot complete
  }
  if (prediction.positions.empty() || prediction.positions.size() != prediction.velocities.size()) {
    throw std::invalid_argument("desired_state: empty or inconsistent prediction");
  }

  // Query instant: the prediction-horizon end, clamped to the shot end.
  const double query = std::min(shot_elapsed + horizon, shot.duration);
  const int last = static_cast<int>(prediction.positions.size()) - 1;
  const int index =
      std::clamp(static_cast<int>(std::lround((query - shot_elapsed) / prediction.dt)),
                 0, last);

  const Vec3& target_pos = prediction.positions[static_cast<size_t>(index)];
  const Vec3& target_vel = prediction.velocities[static_cast<size_t>(index)];
  const double heading = target_heading_at(prediction, index);
  const Vec3 ahead_dir(std::cos(heading), std::sin(heading), 0.0);
  const Vec3 left_dir(-std::sin(heading), std::cos(heading), 0.0);

  DesiredState desired;
  desired.velocity = target_vel;
  Vec3 offset = Vec3::Zero();
  switch (shot.kind) {
    case ShotKind::kChase:
      offset = -shot.distance * ahead_dir;
      break;
    case ShotKind::kLead:
      offset = shot.distance * ahead_dir;
      break;
    case ShotKind::kLateral:
      offset = shot.side * shot.distance * left_dir;
      break;
    case ShotKind::kFlyby: {
      const double progress = std::clamp(query / shot.duration, 0.0, 1.0);
      const double along = -shot.behind + progress * (shot.behind + shot.ahead);
      offset = along * ahead_dir;
      desired.velocity += ((shot.behind + shot.ahead) / shot.duration) * ahead_dir;
      break;
    }
    case ShotKind::kOrbit: {
      const double azimuth =
          shot.start_azimuth + 2.0 * kPi * std::clamp(query / shot.duration, 0.0, 1.0);
      offset = shot.distance * (std::cos(azimuth) * ahead_dir + std::sin(azimuth) * left_dir);
      const double azimuth_rate = 2.0 * kPi / shot.duration;
      desired.velocity += shot.distance * azimuth_rate *
                          (-std::sin(azimuth) * ahead_dir + std::cos(azimuth) * left_dir);
      break;
    }
  }
  desired.position = target_pos + offset;
  desired.position.z() = shot.altitude;
  return desired;
}

}  // namespace cineplan
