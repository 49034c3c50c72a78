#include "paththresh/scaled_lasso.hpp"

#include <cmath>
#include <string>

#include "paththresh/errors.hpp"
#include "paththresh/simd/kernels.hpp"

namespace paththresh {

double scaled_lasso_objective(const ProblemInstance& inst, const Vector& beta, double sigma,
                              double lambda0) {
  Vector r = inst.y;
  double l1 = 0.0;
  for (Index j = 0; j < inst.p(); ++j) {
    if (beta[j] == 0.0) continue;
    simd::axpy(-beta[j], inst.X.col(j).data(), r.data(), inst.n());
    l1 += std::abs(beta[j]);
  }
  const double n = static_cast<double>(inst.n());
  return simd::sum_squares(r.data(), r.size()) / (2.0 * n * sigma) + 0.5 * sigma + lambda0 * l1;
}

double scaled_lasso_lambda0(double c, std::size_t n, std::size_t p) {
  return std::sqrt(2.0 * c * std::log(static_cast<double>(p)) / static_cast<double>(n));
}

ScaledLassoResult scaled_lasso(const ProblemInstance& inst, double lambda0,
                               const ScaledLassoOptions& opts) {
  if (!(lambda0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda0 must be positive");
  const std::size_t n = inst.n();
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double sigma0 = std::sqrt(simd::sum_squares(inst.y.data(), n)) / sqrt_n;
  if (sigma0 == 0.0) throw Error(ErrorCode::InvalidArgument, "scaled lasso needs y != 0");

  ScaledLassoResult res;
  res.lambda0 = lambda0;
  LassoSolver solver(inst, opts.cd);
  double sigma = sigma0;
  res.objective_trace.push_back(scaled_lasso_objective(inst, solver.beta(), sigma, lambda0));

  while (res.iterations < opts.max_iterations) {
    ++res.iterations;
    solver.solve(lambda0 * sigma);
    Vector r = inst.y;
    for (Index j = 0; j < inst.p(); ++j)
      if (solver.beta()[j] != 0.0) simd::axpy(-solver.beta()[j], inst.X.col(j).data(), r.data(), n);
    const double sigma_new = std::sqrt(simd::sum_squares(r.data(), n)) / sqrt_n;
    if (sigma_new < opts.zero_sigma * sigma0) {
      throw Error(ErrorCode::ZeroResidual,
                  "noise estimate collapsed to zero after " + std::to_string(res.iterations) +
                      " iterations (the fit interpolates y)");
    }
    res.objective_trace.push_back(scaled_lasso_objective(inst, solver.beta(), sigma_new, lambda0));
    const bool done = std::abs(sigma_new - sigma) < opts.rel_tol * sigma;
    sigma = sigma_new;
    if (done) {
      res.converged = true;
      break;
    }
  }
  res.beta_hat = solver.beta();
  res.sigma_hat = sigma;
  res.lambda = lambda0 * sigma;
  return res;
}

EquilibriumResult equilibrium_on_path(DeltaCache& deltas, double c, double sigma0,
                                      std::size_t max_rounds) {
  if (!(sigma0 > 0.0)) throw Error(ErrorCode::InvalidArgument, "sigma0 must be positive");
  if (!(c > 0.0)) throw Error(ErrorCode::InvalidConfig, "c must be positive");
  const SolutionPath& path = deltas.path();
  const ProblemInstance& inst = deltas.instance();
  if (path.entries.empty()) throw Error(ErrorCode::InvalidArgument, "empty solution path");
  const double n = static_cast<double>(inst.n());
  const double y_sq = simd::sum_squares(inst.y.data(), inst.n());

  // First level whose Delta is below the threshold at `sigma`; levels where
  // Delta is undefined or the loss vanished also end the scan.
  auto first_stop = [&](double sigma) {
    const double thr = stopping_threshold(c, sigma * sigma, inst.p());
    for (std::size_t i = 0; i < path.entries.size(); ++i) {
      if (interpolates(path.entries[i].loss, y_sq)) return i;
      const std::optional<double> d = deltas.at(i);
      if (!d || *d < thr) return i;
    }
    return path.entries.size() - 1;
  };

  EquilibriumResult res;
  res.sigma_trace.push_back(sigma0);
  double sigma = sigma0;
  const PathEntry* previous = nullptr;
  while (res.rounds < max_rounds) {
    ++res.rounds;
    const PathEntry& e = path.entries[first_stop(sigma)];
    const double sigma_new = std::sqrt(e.loss / n);
    res.sigma_trace.push_back(sigma_new);
    res.support = e.support;
    res.stop_s = e.s;
    const bool fixed = previous ? previous->support.same_set(e.support) : sigma_new == sigma;
    if (fixed) {
      res.converged = true;
      break;
    }
    previous = &e;
    sigma = sigma_new;
  }
  return res;
}

EquilibriumResult equilibrium_iteration(const RegressorSpec& spec, const ProblemInstance& inst,
                                        double c, double sigma0, std::size_t max_rounds,
                                        DeltaMode mode) {
  const SolutionPath path = compute_path(spec, inst);
  DeltaCache cache(path, inst, mode);
  return equilibrium_on_path(cache, c, sigma0, max_rounds);
}

}  // namespace paththresh
