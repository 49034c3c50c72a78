#pragma once

#include <cstddef>

#include "paththresh/linalg.hpp"

namespace paththresh {

struct CoordinateDescentOptions {
  /// Converged when the largest coefficient change of a full sweep is below
  /// tol * max(1, ||beta||_inf).
  double tol = 1e-9;
  std::size_t max_sweeps = 100000;
};

/// Pathwise coordinate descent for
///   min_beta ||y - X beta||^2 / (2n) + lambda ||beta||_1.
/// The solver keeps its coefficients between calls, so solving a decreasing
/// sequence of lambdas warm-starts each problem from the previous solution.
class LassoSolver {
 public:
  explicit LassoSolver(const ProblemInstance& inst, CoordinateDescentOptions opts = {});

  /// Solves at `lambda` starting from the current coefficients. Returns the
  /// number of sweeps used. Throws Error{NonConverged} at the sweep cap.
  std::size_t solve(double lambda);

  const Vector& beta() const noexcept { return beta_; }
  const Vector& residual() const noexcept { return residual_; }

  /// Indices of nonzero coefficients, ascending.
  SupportSet support() const;

  void reset();

 private:
  double sweep(bool active_only, double lambda);
  bool polish(double lambda);
  void refresh_residual();

  const ProblemInstance* inst_;
  CoordinateDescentOptions opts_;
  Vector col_scale_;  // ||X_j||^2 / n
  Vector beta_;
  Vector residual_;
};

/// Smallest lambda whose solution is beta = 0: ||X^T y||_inf / n.
double lasso_lambda_max(const ProblemInstance& inst);

double lasso_objective(const ProblemInstance& inst, const Vector& beta, double lambda);

/// Largest violation of the subgradient optimality conditions at `beta`:
/// |g_j - lambda sign(beta_j)| for active j and max(0, |g_j| - lambda)
/// otherwise, with g = X^T (y - X beta) / n.
double lasso_kkt_violation(const ProblemInstance& inst, const Vector& beta, double lambda);

inline double soft_threshold(double z, double t) noexcept {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

}  // namespace paththresh
