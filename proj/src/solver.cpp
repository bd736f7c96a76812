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

#include "cineplan/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <ostream>
#include <utility>
#include <vector>

namespace cineplan {

namespace {

using Eigen::VectorXd;
using SpMat = Eigen::SparseMatrix<double>;
using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMuInitial = 10.0;
constexpr double kMuGrowth = 10.0;
constexpr double kMuMax = 1e8;
constexpr int kMaxOuter = 60;
constexpr int kLbfgsMemory = 12;
constexpr double kArmijoSlope = 1e-4;

VectorXd project(const VectorXd& z, const VectorXd& lo, const VectorXd& hi) {
  return z.cwiseMax(lo).cwiseMin(hi);
}

double violation_norm(const VectorXd& residuals, int num_eq) {
  double v = 0.0;
  for (int i = 0; i < residuals.size(); ++i) {
    const double r = residuals[i];
    v = std::max(v, i < num_eq ? std::abs(r) : std::max(0.0, -r));
  }
  return v;
}

/// Augmented Lagrangian of the problem for fixed multipliers and penalty.
/// Equalities get the usual linear + quadratic terms; inequalities r >= 0 use
/// the slack-free form  ( max(0, lambda - mu r)^2 - lambda^2 ) / (2 mu).
class AlFunction {
 public:
  AlFunction(const NlpProblem& problem, VectorXd lam_eq, VectorXd lam_ineq, double mu)
      : problem_(problem), lam_eq_(std::move(lam_eq)),
        lam_ineq_(std::move(lam_ineq)), mu_(mu) {}

  bool eval(const VectorXd& z, double& value, VectorXd* grad) {
    const int num_eq = problem_.num_equalities();
    const int num_ineq = problem_.num_inequalities();
    const double f = problem_.cost(z, grad);
    VectorXd r;
    SpMat jac;
    problem_.constraints(z, r, grad ? &jac : nullptr);

    double val = f;
    VectorXd weights;
    if (grad) weights.setZero(num_eq + num_ineq);
    for (int i = 0; i < num_eq; ++i) {
      const double ri = r[i];
      val += -lam_eq_[i] * ri + 0.5 * mu_ * ri * ri;
      if (grad) weights[i] = -lam_eq_[i] + mu_ * ri;
    }
    for (int i = 0; i < num_ineq; ++i) {
      const double ri = r[num_eq + i];
      const double shifted = lam_ineq_[i] - mu_ * ri;
      if (shifted > 0.0) {
        val += (shifted * shifted - lam_ineq_[i] * lam_ineq_[i]) / (2.0 * mu_);
        if (grad) weights[num_eq + i] = -shifted;
      } else {
        val += -lam_ineq_[i] * lam_ineq_[i] / (2.0 * mu_);
      }
    }
    if (grad) *grad += jac.transpose() * weights;

    last_cost_ = f;
    last_violation_ = violation_norm(r, num_eq);
    value = val;
    return std::isfinite(val) && (!grad || grad->allFinite());
  }

  double last_cost() const { return last_cost_; }
  double last_violation() const { return last_violation_; }

 private:
  const NlpProblem& problem_;
  VectorXd lam_eq_, lam_ineq_;
  double mu_;
  double last_cost_ = 0.0;
  double last_violation_ = 0.0;
};

VectorXd lbfgs_direction(const std::deque<std::pair<VectorXd, VectorXd>>& memory,
                         const VectorXd& gradient) {
  VectorXd q = gradient;
  if (memory.empty()) return -q;
  std::vector<double> alpha(memory.size());
  std::vector<double> rho(memory.size());
  for (int i = static_cast<int>(memory.size()) - 1; i >= 0; --i) {
    const auto& [s, y] = memory[static_cast<size_t>(i)];
    rho[static_cast<size_t>(i)] = 1.0 / y.dot(s);
    alpha[static_cast<size_t>(i)] = rho[static_cast<size_t>(i)] * s.dot(q);
    q -= alpha[static_cast<size_t>(i)] * y;
  }
  const auto& [s_last, y_last] = memory.back();
  q *= s_last.dot(y_last) / y_last.dot(y_last);
  for (size_t i = 0; i < memory.size(); ++i) {
    const auto& [s, y] = memory[i];
    const double beta = rho[i] * y.dot(q);
    q += s * (alpha[i] - beta);
  }
  return -q;
}

struct InnerOutcome {
  VectorXd z;
  double pg_norm = kInf;
  int iterations = 0;
  bool numeric_ok = true;
  bool hit_time = false;
};

struct Budget {
  Clock::time_point start;
  double max_seconds;
  bool cap_enabled;
  int max_total_iterations;

  bool time_up() const {
    if (!cap_enabled) return false;
    return std::chrono::duration<double>(Clock::now() - start).count() >= max_seconds;
  }
};

/// Zeroes gradient entries of coordinates that cannot move: fixed variables
/// (equal bounds) and variables pressed against an active bound. The L-BFGS
/// model then lives on the free subspace, which keeps curvature pairs clean
/// when the projection clips steps (two-metric projection).
VectorXd masked_gradient(const VectorXd& grad, const VectorXd& z, const VectorXd& lo,
                         const VectorXd& hi) {
  VectorXd masked = grad;
  for (int i = 0; i < z.size(); ++i) {
    const bool fixed = !(hi[i] - lo[i] > 0.0);
    const bool at_lower = z[i] <= lo[i] + 1e-12 && grad[i] > 0.0;
    const bool at_upper = z[i] >= hi[i] - 1e-12 && grad[i] < 0.0;
    if (fixed || at_lower || at_upper) masked[i] = 0.0;
  }
  return masked;
}

InnerOutcome minimize_al(AlFunction& fn, VectorXd z, const VectorXd& lo,
                         const VectorXd& hi, double pg_tol, int iteration_budget,
                         const Budget& budget, int outer_index,
                         int iterations_so_far, std::ostream* log) {
  InnerOutcome out;
  double value = 0.0;
  VectorXd grad(z.size());
  if (!fn.eval(z, value, &grad)) {
    out.z = std::move(z);
    out.numeric_ok = false;
    return out;
  }
  VectorXd grad_masked = masked_gradient(grad, z, lo, hi);

  std::deque<std::pair<VectorXd, VectorXd>> memory;
  while (true) {
    const VectorXd pg = z - project(z - grad, lo, hi);
    out.pg_norm = pg.lpNorm<Eigen::Infinity>();
    if (log) {
      (*log) << outer_index << ',' << (iterations_so_far + out.iterations) << ','
             << fn.last_cost() << ',' << fn.last_violation() << ',' << out.pg_norm
             << '\n';
    }
    if (out.pg_norm <= pg_tol) break;
    if (out.iterations >= iteration_budget) break;
    if (budget.time_up()) {
      out.hit_time = true;
      break;
    }

    VectorXd direction = lbfgs_direction(memory, grad_masked);
    double slope = grad_masked.dot(direction);
    if (!(slope < -1e-14 * grad_masked.norm() * direction.norm())) {
      direction = -grad_masked;
      memory.clear();
      slope = -grad_masked.squaredNorm();
    }

    double alpha =
        memory.empty()
            ? std::min(1.0, 1.0 / std::max(1.0, grad_masked.lpNorm<Eigen::Infinity>()))
            : 1.0;
    bool accepted = false;
    VectorXd z_trial;
    double value_trial = 0.0;
    for (int backtrack = 0; backtrack < 60; ++backtrack) {
      z_trial = project(z + alpha * direction, lo, hi);
      if ((z_trial - z).lpNorm<Eigen::Infinity>() == 0.0) break;
      if (fn.eval(z_trial, value_trial, nullptr) &&
          value_trial <= value + kArmijoSlope * grad.dot(z_trial - z)) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!accepted) {
      if (memory.empty()) break;  // stalled even along steepest descent
      memory.clear();
      continue;
    }

    VectorXd grad_new(z.size());
    double value_new = 0.0;
    if (!fn.eval(z_trial, value_new, &grad_new)) {
      out.numeric_ok = false;
      break;
    }
    VectorXd grad_new_masked = masked_gradient(grad_new, z_trial, lo, hi);
    const VectorXd s = z_trial - z;
    const VectorXd y = grad_new_masked - grad_masked;
    const double sy = s.dot(y);
    if (sy > 1e-10 * s.norm() * y.norm()) {
      memory.emplace_back(s, y);
      if (memory.size() > kLbfgsMemory) memory.pop_front();
    }
    z = std::move(z_trial);
    value = value_new;
    grad = std::move(grad_new);
    grad_masked = std::move(grad_new_masked);
    ++out.iterations;
  }
  out.z = std::move(z);
  return out;
}

struct KktMeasures {
  double stationarity = kInf;
  double complementarity = kInf;
  double violation = kInf;
};

KktMeasures kkt_measures(const NlpProblem& problem, const VectorXd& z,
                         const VectorXd& lam_eq, const VectorXd& lam_ineq) {
  KktMeasures m;
  VectorXd grad(z.size());
  problem.cost(z, &grad);
  VectorXd r;
  SpMat jac;
  problem.constraints(z, r, &jac);
  const int num_eq = problem.num_equalities();
  const int num_ineq = problem.num_inequalities();

  VectorXd weights(num_eq + num_ineq);
  weights.head(num_eq) = -lam_eq;
  weights.tail(num_ineq) = -lam_ineq;
  const VectorXd lagrangian_grad = grad + jac.transpose() * weights;
  const VectorXd pg =
      z - project(z - lagrangian_grad, problem.lower_bounds(), problem.upper_bounds());
  m.stationarity = pg.lpNorm<Eigen::Infinity>();
  m.violation = violation_norm(r, num_eq);
  m.complementarity = 0.0;
  for (int i = 0; i < num_ineq; ++i) {
    m.complementarity =
        std::max(m.complementarity, std::abs(std::min(lam_ineq[i], r[num_eq + i])));
  }
  return m;
}

struct Attempt {
  SolveResult result;
  bool usable = false;
};

Attempt run_augmented_lagrangian(const NlpProblem& problem, const SolveOptions& options,
                                 const VectorXd& guess, const Budget& budget,
                                 int iterations_consumed) {
  const int num_eq = problem.num_equalities();
  const int num_ineq = problem.num_inequalities();
  const VectorXd& lo = problem.lower_bounds();
  const VectorXd& hi = problem.upper_bounds();

  VectorXd lam_eq = VectorXd::Zero(num_eq);
  VectorXd lam_ineq = VectorXd::Zero(num_ineq);
  if (options.initial_eq_multipliers.size() == num_eq) {
    lam_eq = options.initial_eq_multipliers;
  }
  if (options.initial_ineq_multipliers.size() == num_ineq) {
    lam_ineq = options.initial_ineq_multipliers.cwiseMax(0.0);
  }

  double mu = kMuInitial;
  double omega = 1.0 / mu;
  double eta = std::pow(mu, -0.1);

  VectorXd z = project(guess, lo, hi);

  SolveResult best;
  best.z = z;
  best.constraint_violation = kInf;
  best.cost = kInf;
  bool have_best = false;

  Attempt attempt;
  SolveResult& res = attempt.result;
  res.z = z;
  res.iterations = iterations_consumed;

  double previous_violation = kInf;
  int stagnant_outers = 0;

  for (int outer = 0; outer < kMaxOuter; ++outer) {
    const int budget_left = budget.max_total_iterations - res.iterations;
    if (budget_left <= 0) {
      res.status = SolveStatus::kMaxIterations;
      break;
    }
    AlFunction fn(problem, lam_eq, lam_ineq, mu);
    const double inner_tol = std::max(omega, 0.05 * options.optimality_tol);
    InnerOutcome inner =
        minimize_al(fn, z, lo, hi, inner_tol, std::min(budget_left, 600), budget,
                    outer, res.iterations, options.iteration_log);
    res.iterations += inner.iterations;
    z = inner.z;

    if (!inner.numeric_ok) {
      res.status = SolveStatus::kNumericFailure;
      break;
    }

    VectorXd r;
    problem.constraints(z, r, nullptr);
    const double viol = violation_norm(r, num_eq);
    const double cost = problem.cost(z, nullptr);

    const bool better =
        !have_best ||
        (viol <= options.feasibility_tol && best.constraint_violation <= options.feasibility_tol
             ? cost < best.cost
             : viol < best.constraint_violation);
    if (better && z.allFinite()) {
      best.z = z;
      best.cost = cost;
      best.constraint_violation = viol;
      best.eq_multipliers = lam_eq;
      best.ineq_multipliers = lam_ineq;
      have_best = true;
    }

    if (inner.hit_time) {
      res.status = SolveStatus::kMaxTime;
      break;
    }

    if (viol <= std::max(eta, options.feasibility_tol)) {
      lam_eq -= mu * r.head(num_eq);
      lam_ineq = (lam_ineq - mu * r.tail(num_ineq)).cwiseMax(0.0);
      const KktMeasures kkt = kkt_measures(problem, z, lam_eq, lam_ineq);
      if (kkt.violation <= options.feasibility_tol &&
          kkt.stationarity <= options.optimality_tol &&
          kkt.complementarity <= std::max(options.feasibility_tol, options.optimality_tol)) {
        res.status = SolveStatus::kConverged;
        res.z = z;
        res.eq_multipliers = lam_eq;
        res.ineq_multipliers = lam_ineq;
        res.cost = cost;
        res.constraint_violation = kkt.violation;
        res.kkt_residual = std::max(kkt.stationarity, kkt.complementarity);
        attempt.usable = true;
        return attempt;
      }
      eta = std::max(eta * std::pow(mu, -0.9), 0.25 * options.feasibility_tol);
      omega = std::max(omega / mu, 0.02 * options.optimality_tol);
    } else {
      if (viol > 0.95 * previous_violation) {
        ++stagnant_outers;
      } else {
        stagnant_outers = 0;
      }
      previous_violation = viol;
      if (mu >= kMuMax && stagnant_outers >= 3) {
        res.status = SolveStatus::kInfeasibleDetected;
        break;
      }
      mu = std::min(mu * kMuGrowth, kMuMax);
      eta = std::pow(mu, -0.1);
      omega = 1.0 / mu;
    }

    if (budget.time_up()) {
      res.status = SolveStatus::kMaxTime;
      break;
    }
    if (outer == kMaxOuter - 1) {
      res.status = SolveStatus::kMaxIterations;
    }
  }

  // Non-converged exit: report the best iterate seen.
  if (have_best) {
    res.z = best.z;
    res.cost = best.cost;
    res.constraint_violation = best.constraint_violation;
    res.eq_multipliers = best.eq_multipliers;
    res.ineq_multipliers = best.ineq_multipliers;
    const KktMeasures kkt =
        kkt_measures(problem, res.z, res.eq_multipliers, res.ineq_multipliers);
    res.kkt_residual = std::max(kkt.stationarity, kkt.complementarity);
    attempt.usable = res.z.allFinite();
  } else {
    res.z = project(guess, lo, hi);
    res.eq_multipliers = VectorXd::Zero(num_eq);
    res.ineq_multipliers = VectorXd::Zero(num_ineq);
    VectorXd r;
    problem.constraints(res.z, r, nullptr);
    res.constraint_violation = violation_norm(r, num_eq);
    res.cost = problem.cost(res.z, nullptr);
    attempt.usable = false;
  }
  return attempt;
}

}  // namespace

std::string to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::kConverged: return "converged";
    case SolveStatus::kMaxTime: return "max_time";
    case SolveStatus::kMaxIterations: return "max_iter";
    case SolveStatus::kInfeasibleDetected: return "infeasible_detected";
    case SolveStatus::kNumericFailure: return "numeric_failure";
  }
  return "unknown";
}

SolveResult solve(const NlpProblem& problem, const SolveOptions& options) {
  if (options.initial_guess.size() != problem.dim()) {
    throw std::invalid_argument("solve: initial guess has wrong dimension");
  }
  if (!(options.feasibility_tol > 0.0) || !(options.optimality_tol > 0.0) ||
      !(options.max_wall_time > 0.0)) {
    throw std::invalid_argument("solve: tolerances and wall time must be positive");
  }

  const Clock::time_point start = Clock::now();
  Budget budget{start, options.max_wall_time, options.enable_time_cap,
                options.max_iterations};

  Attempt first = run_augmented_lagrangian(problem, options, options.initial_guess,
                                           budget, 0);
  Attempt* chosen = &first;

  Attempt retry;
  const bool should_retry =
      (first.result.status == SolveStatus::kNumericFailure ||
       first.result.status == SolveStatus::kInfeasibleDetected || !first.usable) &&
      options.fallback_guess.size() == problem.dim() && !budget.time_up();
  if (should_retry) {
    retry = run_augmented_lagrangian(problem, options, options.fallback_guess, budget,
                                     first.result.iterations);
    const bool retry_better =
        retry.result.status == SolveStatus::kConverged ||
        (first.result.status != SolveStatus::kConverged && retry.usable &&
         retry.result.constraint_violation < first.result.constraint_violation);
    if (retry_better) chosen = &retry;
  }

  SolveResult result = std::move(chosen->result);
  if (!result.z.allFinite()) {
    result.z = project(options.initial_guess, problem.lower_bounds(),
                       problem.upper_bounds());
    result.status = SolveStatus::kNumericFailure;
  }
  result.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

KktReport kkt_audit(const NlpProblem& problem, const SolveResult& result,
                    double feasibility_tol, double optimality_tol) {
  KktReport report;
  if (result.eq_multipliers.size() != problem.num_equalities() ||
      result.ineq_multipliers.size() != problem.num_inequalities() ||
      result.z.size() != problem.dim()) {
    return report;  // ok = false
  }
  const KktMeasures m =
      kkt_measures(problem, result.z, result.eq_multipliers, result.ineq_multipliers);
  report.stationarity = m.stationarity;
  report.violation = m.violation;
  report.complementarity = m.complementarity;
  report.min_ineq_multiplier =
      problem.num_inequalities() > 0 ? result.ineq_multipliers.minCoeff() : 0.0;
  report.ok = m.violation <= feasibility_tol && m.stationarity <= optimality_tol &&
              m.complementarity <= std::max(feasibility_tol, optimality_tol) &&
              report.min_ineq_multiplier >= -1e-12;
  return report;
}

}  // namespace cineplan
