#pragma once

#include <cstddef>
#include <vector>

#include "paththresh/linalg.hpp"

namespace paththresh {

struct Metrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double err = 0.0;
};

struct SupportScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Precision |S* n S^| / |S^| (0 for an empty estimate), recall |S* n S^| / |S*|,
/// and their harmonic mean 2PR / (P + R) (0 when either is 0).
/// Throws Error{InvalidArgument} for an empty truth.
SupportScores support_metrics(const SupportSet& estimated, const SupportSet& truth);

/// ||beta_hat - beta_star||_2
double estimation_error(const Vector& beta_hat, const Vector& beta_star);

Metrics evaluate(const SupportSet& estimated, const Vector& beta_hat, const GroundTruth& truth);

/// Eigenvalues of a symmetric matrix in ascending order (cyclic Jacobi).
Vector symmetric_eigenvalues(Matrix a);

/// min over A with S* c A, |A| = 2k, of lambda_min(X_A^T X_A / n), where
/// k = |S*|. Throws Error{TooLarge} when more than `max_subsets` supersets
/// would need enumerating, Error{InvalidArgument} when 2k > min(n, p).
double restricted_eigenvalue(const ProblemInstance& inst, const SupportSet& truth_support,
                             std::size_t max_subsets = 1'000'000);

/// Number of k-subsets of an m-set, saturating at SIZE_MAX.
std::size_t binomial(std::size_t m, std::size_t k);

struct TheoremDiagnostics {
  double beta_min = 0.0;
  double rho_2k = 0.0;
  double epsilon = 0.0;        // k/n + sqrt(1/k), the smallest admissible value
  double n_required = 0.0;
  double c_required = 0.0;     // 1 / (1 - epsilon)
  bool condition_holds = false;
};

struct SampleConditionInputs {
  std::size_t n = 0;
  std::size_t k = 0;
  std::size_t p = 0;
  double c = 1.0;
  double sigma = 1.0;
  double beta_min = 1.0;
  double rho_2k = 1.0;
};

/// Sample-size requirement for exact support recovery:
///   n >= 2ck log p / rho + 8 sigma c sqrt(k) log p / (beta_min rho^2)
///        + 8 sigma^2 c log p / (beta_min^2 rho^2)
/// together with c > 1 / (1 - epsilon). Throws Error{EpsilonInfeasible} when
/// k/n + sqrt(1/k) >= 1 and Error{InvalidArgument} for nonpositive inputs.
TheoremDiagnostics sample_condition(const SampleConditionInputs& in);

/// Smallest absolute nonzero of beta_star.
double beta_min(const Vector& beta_star);

}  // namespace paththresh
