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
#include <vector>

#include "cineplan/ocp.hpp"
#include "cineplan/solver.hpp"
#include "cineplan/trajectory.hpp"

namespace cineplan {

struct PlanBusMessage {
  PlannedTrajectory trajectory;
  double send_time = 0.0;
  double deliver_time = 0.0;
};

/// Simulated broadcast link for plan exchange with a constant delivery delay.
class PlanBus {
 public:
  explicit PlanBus(double delay = 0.0) : delay_(delay) {}

  double delay() const { return delay_; }
  void publish(const PlannedTrajectory& trajectory, double send_time);

  /// Most recent plan of uav_id delivered at or before query_time.
  std::optional<PlannedTrajectory> latest_plan(int uav_id, double query_time) const;

  const std::vector<PlanBusMessage>& messages() const { return messages_; }

 private:
  double delay_ = 0.0;
  std::vector<PlanBusMessage> messages_;
};

/// Per-vehicle inputs to one planning round, assembled by the caller.
struct UavPlanningContext {
  int uav_id = -1;
  int priority = 1;  // 1 = plans first, ignoring everyone
  UavState current_state;
  int horizon_steps = 50;
  double dt = 0.1;
  PlannerWeights weights;
  PlannerBounds bounds;
  DesiredState desired;
  TargetPrediction target_prediction;
  std::vector<NoFlyZone> no_fly_zones;
  std::vector<DynamicObstacle> extra_obstacles;
  bool visibility_enabled = true;
  SolveOptions solve_options;  // initial_guess/fallback filled by the round if empty
  std::optional<PlannedTrajectory> previous_plan;  // warm start source
};

struct RoundEntry {
  int uav_id = -1;
  int priority = 0;
  SolveResult result;
  PlannedTrajectory plan;
  bool published = false;
  int neighbors_used = 0;
  /// Age of the oldest neighbor plan consumed (0 when none).
  double max_neighbor_staleness = 0.0;
};

/// Neighbor positions resampled on [now, now + steps*dt]; past the plan's end
/// the last state is extrapolated at constant velocity.
std::vector<Vec3> sample_neighbor_positions(const PlannedTrajectory& plan, double now,
                                            int steps, double dt);

/// One priority-ordered sequential planning round. The top-priority vehicle
/// plans without inter-vehicle rows; each following vehicle plans against the
/// latest delivered plans of strictly higher priorities (including the ones
/// just published in this round when the bus delay allows). Only converged
/// plans are published. Entries come back in execution (priority) order.
std::vector<RoundEntry> planning_round(std::vector<UavPlanningContext> contexts,
                                       PlanBus& bus, double now);

}  // namespace cineplan
