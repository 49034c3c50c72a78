#pragma once

#include <cstddef>
#include <vector>

#include "paththresh/path_thresholding.hpp"

namespace paththresh {

struct ScaledLassoOptions {
  double rel_tol = 1e-8;          // stop when |sigma_new - sigma| < rel_tol * sigma
  std::size_t max_iterations = 100;
  double zero_sigma = 1e-12;      // relative to the initial ||y|| / sqrt(n)
  CoordinateDescentOptions cd{};
};

struct ScaledLassoResult {
  Vector beta_hat;
  double sigma_hat = 0.0;
  double lambda = 0.0;  // lambda0 * sigma_hat, the effective Lasso penalty
  double lambda0 = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective after every iteration
};

/// ||y - X beta||^2 / (2 n sigma) + sigma / 2 + lambda0 ||beta||_1
double scaled_lasso_objective(const ProblemInstance& inst, const Vector& beta, double sigma,
                              double lambda0);

/// lambda0 = sqrt(2 c log p / n)
double scaled_lasso_lambda0(double c, std::size_t n, std::size_t p);

/// Joint (beta, sigma) minimization by alternating a Lasso solve at
/// lambda = lambda0 * sigma with sigma = ||y - X beta|| / sqrt(n), starting from
/// sigma = ||y|| / sqrt(n). Throws Error{ZeroResidual} when sigma collapses to
/// zero (an interpolating fit) and Error{InvalidArgument} for y == 0 or
/// lambda0 <= 0. At the iteration cap the result is returned with
/// converged == false.
ScaledLassoResult scaled_lasso(const ProblemInstance& inst, double lambda0,
                               const ScaledLassoOptions& opts = {});

struct EquilibriumResult {
  SupportSet support;
  std::size_t stop_s = 0;
  std::vector<double> sigma_trace;  // sigma0 followed by every re-estimate
  std::size_t rounds = 0;
  bool converged = false;
};

/// Fixed-point iteration that alternates between picking the first path level
/// whose Delta falls below 2 c sigma^2 log p and re-estimating
/// sigma = ||Pi_perp[S_t] y|| / sqrt(n). Converges when the selected support
/// repeats. If no level satisfies the threshold, the last path entry is used.
EquilibriumResult equilibrium_iteration(const RegressorSpec& spec, const ProblemInstance& inst,
                                        double c, double sigma0, std::size_t max_rounds = 50,
                                        DeltaMode mode = DeltaMode::Ratio);

/// Same, over a precomputed path and its Delta cache.
EquilibriumResult equilibrium_on_path(DeltaCache& deltas, double c, double sigma0,
                                      std::size_t max_rounds = 50);

}  // namespace paththresh
