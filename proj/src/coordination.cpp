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

#include "cineplan/coordination.hpp"

#include <algorithm>

namespace cineplan {

void PlanBus::publish(const PlannedTrajectory& trajectory, double send_time) {
  messages_.push_back({trajectory, send_time, send_time + delay_});
}

std::optional<PlannedTrajectory> PlanBus::latest_plan(int uav_id,
                                                      double query_time) const {
  const PlanBusMessage* found = nullptr;
  for (const PlanBusMessage& message : messages_) {
    if (message.trajectory.uav_id != uav_id) continue;
    if (message.deliver_time > query_time) continue;
    if (!found || message.deliver_time >= found->deliver_time) {
      found = &message;
    }
  }
  if (!found) return std::nullopt;
  return found->trajectory;
}

std::vector<Vec3> sample_neighbor_positions(const PlannedTrajectory& plan, double now,
                                            int steps, double dt) {
  std::vector<Vec3> positions;
  positions.reserve(steps + 1);
  for (int k = 0; k <= steps; ++k) {
    positions.push_back(plan.position_at(now + k * dt));
  }
  return positions;
}

namespace {

Eigen::VectorXd warm_start_vector(const TranscribedNlp& nlp,
                                  const PlannedTrajectory& previous, double now) {
  const OcpProblem& problem = nlp.problem();
  Eigen::VectorXd z(nlp.dim());
  for (int k = 0; k <= problem.steps; ++k) {
    const double t = now + k * problem.dt;
    z.segment<3>(nlp.state_index(k)) = previous.position_at(t);
    z.segment<3>(nlp.state_index(k) + 3) = previous.velocity_at(t);
  }
  for (int k = 0; k < problem.steps; ++k) {
    z.segment<3>(nlp.control_index(k)) = previous.control_at(now + k * problem.dt);
  }
  // The pinned block must match the measured state, not the stale plan.
  z.segment<3>(nlp.state_index(0)) = problem.initial_state.position;
  z.segment<3>(nlp.state_index(0) + 3) = problem.initial_state.velocity;
  return z;
}

PlannedTrajectory decode_plan(const TranscribedNlp& nlp, const Eigen::VectorXd& z,
                              int uav_id, double now) {
  const OcpProblem& problem = nlp.problem();
  PlannedTrajectory plan;
  plan.uav_id = uav_id;
  plan.stamp_start = now;
  plan.dt = problem.dt;
  plan.states.reserve(problem.steps + 1);
  plan.controls.reserve(problem.steps);
  for (int k = 0; k <= problem.steps; ++k) {
    UavState x;
    x.position = z.segment<3>(nlp.state_index(k));
    x.velocity = z.segment<3>(nlp.state_index(k) + 3);
    plan.states.push_back(x);
  }
  for (int k = 0; k < problem.steps; ++k) {
    plan.controls.push_back(z.segment<3>(nlp.control_index(k)));
  }
  return plan;
}

}  // namespace

std::vector<RoundEntry> planning_round(std::vector<UavPlanningContext> contexts,
                                       PlanBus& bus, double now) {
  std::stable_sort(contexts.begin(), contexts.end(),
                   [](const UavPlanningContext& a, const UavPlanningContext& b) {
                     return a.priority < b.priority;
                   });

  std::vector<RoundEntry> entries;
  entries.reserve(contexts.size());

  for (UavPlanningContext& ctx : contexts) {
    RoundEntry entry;
    entry.uav_id = ctx.uav_id;
    entry.priority = ctx.priority;

    OcpProblem problem;
    problem.initial_state = ctx.current_state;
    problem.steps = ctx.horizon_steps;
    problem.dt = ctx.dt;
    problem.weights = ctx.weights;
    problem.bounds = ctx.bounds;
    problem.desired = ctx.desired;
    problem.target_prediction = ctx.target_prediction;
    problem.no_fly_zones = ctx.no_fly_zones;
    problem.dynamic_obstacles = ctx.extra_obstacles;
    problem.visibility_enabled = ctx.visibility_enabled;

    // Plans of strictly higher priorities, as most recently delivered.
    for (const UavPlanningContext& other : contexts) {
      if (other.priority >= ctx.priority) continue;
      const auto plan = bus.latest_plan(other.uav_id, now);
      if (!plan) continue;  // nothing delivered yet: no constraint, log staleness 0
      NeighborPlan neighbor;
      neighbor.uav_id = other.uav_id;
      neighbor.positions =
          sample_neighbor_positions(*plan, now, ctx.horizon_steps, ctx.dt);
      problem.neighbor_plans.push_back(std::move(neighbor));
      ++entry.neighbors_used;
      entry.max_neighbor_staleness =
          std::max(entry.max_neighbor_staleness, now - plan->stamp_start);
    }

    TranscribedNlp nlp(std::move(problem));
    SolveOptions options = ctx.solve_options;
    if (options.initial_guess.size() != nlp.dim()) {
      options.initial_guess = ctx.previous_plan
                                  ? warm_start_vector(nlp, *ctx.previous_plan, now)
                                  : nlp.guess_detour();
    }
    if (options.fallback_guess.size() != nlp.dim()) {
      options.fallback_guess = nlp.guess_hover();
    }
    // Warm-started multipliers only make sense when the row structure matches.
    if (options.initial_eq_multipliers.size() != nlp.num_equalities()) {
      options.initial_eq_multipliers.resize(0);
    }
    if (options.initial_ineq_multipliers.size() != nlp.num_inequalities()) {
      options.initial_ineq_multipliers.resize(0);
    }

    entry.result = solve(nlp, options);
    entry.plan = decode_plan(nlp, entry.result.z, ctx.uav_id, now);
    if (entry.result.status == SolveStatus::kConverged) {
      bus.publish(entry.plan, now);
      entry.published = true;
    }
    entries.push_back(std::move(entry));
  }
  return entries;
}

}  // namespace cineplan
