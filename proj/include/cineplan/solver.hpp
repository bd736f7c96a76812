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
#include <Eigen/SparseCore>
#include <iosfwd>
#include <string>

namespace cineplan {

/// Smooth non-convex NLP with simple bounds:
///   minimize f(z)  s.t.  r_i(z) = 0 (equalities), r_j(z) >= 0 (inequalities),
///   lower <= z <= upper.
/// constraints() fills one residual vector with equality rows first, then
/// inequality rows; the jacobian rows follow the same order.
class NlpProblem {
 public:
  virtual ~NlpProblem() = default;

  virtual int dim() const = 0;
  virtual const Eigen::VectorXd& lower_bounds() const = 0;
  virtual const Eigen::VectorXd& upper_bounds() const = 0;
  virtual int num_equalities() const = 0;
  virtual int num_inequalities() const = 0;

  /// Objective value; fills the gradient when non-null.
  virtual double cost(const Eigen::VectorXd& z, Eigen::VectorXd* gradient) const = 0;

  /// Residuals (and jacobian when non-null) in the documented row order.
  virtual void constraints(const Eigen::VectorXd& z, Eigen::VectorXd& residuals,
                           Eigen::SparseMatrix<double>* jacobian) const = 0;
};

enum class SolveStatus {
  kConverged,
  kMaxTime,
  kMaxIterations,
  kInfeasibleDetected,
  kNumericFailure,
};

std::string to_string(SolveStatus status);

struct SolveOptions {
  double max_wall_time = 1.0;    // seconds; see enable_time_cap
  int max_iterations = 20000;    // total inner iterations across outer loops
  double feasibility_tol = 1e-4;
  double optimality_tol = 1e-3;
  Eigen::VectorXd initial_guess;

  // Optional warm starts; sizes must match the problem or they are ignored.
  Eigen::VectorXd initial_eq_multipliers;
  Eigen::VectorXd initial_ineq_multipliers;

  /// Retried once from here when the first attempt fails numerically or
  /// stalls infeasible (empty = no retry).
  Eigen::VectorXd fallback_guess;

  /// When false the wall-time cap is ignored; determinism tests rely on this
  /// because the cap is the only wall-clock-dependent branch.
  bool enable_time_cap = true;

  /// Optional CSV iteration log: outer,iteration,cost,violation,pg_norm.
  std::ostream* iteration_log = nullptr;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kNumericFailure;
  Eigen::VectorXd z;
  Eigen::VectorXd eq_multipliers;
  Eigen::VectorXd ineq_multipliers;
  double cost = 0.0;
  double kkt_residual = 0.0;          // max of projected stationarity and complementarity
  double constraint_violation = 0.0;  // max-norm over all constraint rows
  int iterations = 0;                 // inner iterations consumed
  double wall_time = 0.0;             // seconds
};

/// Augmented-Lagrangian solve with a projected L-BFGS inner loop.
/// Deterministic for identical inputs (wall-time cap aside); returns the best
/// iterate found on timeout and never returns non-finite z.
SolveResult solve(const NlpProblem& problem, const SolveOptions& options);

/// Independent first-order optimality audit: re-evaluates cost gradient and
/// constraint jacobian at result.z and checks stationarity, feasibility, sign
/// and complementarity of the returned multipliers. Trusts nothing from the
/// solver internals beyond (z, multipliers).
struct KktReport {
  bool ok = false;
  double stationarity = 0.0;     // projected-gradient max norm of the Lagrangian
  double violation = 0.0;        // constraint violation max norm
  double complementarity = 0.0;  // max_i |min(multiplier_i, residual_i)|
  double min_ineq_multiplier = 0.0;
};

KktReport kkt_audit(const NlpProblem& problem, const SolveResult& result,
                    double feasibility_tol, double optimality_tol);

}  // namespace cineplan
