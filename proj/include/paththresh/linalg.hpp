#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "paththresh/matrix.hpp"

namespace paththresh {

using Index = std::size_t;

/// Relative threshold below which a projected column (or Gram-Schmidt pivot)
/// is treated as lying in the span of the current support.
inline constexpr double kRankTolerance = 1e-10;

struct GroundTruth {
  Vector beta_star;
  std::vector<Index> support_star;  // ascending
  double sigma2 = 0.0;
};

/// Design matrix with column-normalized entries (||X_j||^2 / n == 1),
/// observations, and optional simulation ground truth.
struct ProblemInstance {
  Matrix X;
  Vector y;
  std::optional<GroundTruth> truth;

  std::size_t n() const noexcept { return X.rows(); }
  std::size_t p() const noexcept { return X.cols(); }
};

/// Throws Error{InvalidArgument} unless the instance satisfies its invariants:
/// n, p >= 1, |y| == n, unit-normalized columns (relative 1e-8), and a truth
/// record whose support matches the nonzeros of beta_star.
void validate_instance(const ProblemInstance& inst);

/// Ordered list of distinct column indices. Order is insertion order (the
/// order a greedy method picked them); set comparisons ignore it.
class SupportSet {
 public:
  SupportSet() = default;
  explicit SupportSet(std::vector<Index> indices);

  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }
  const std::vector<Index>& indices() const noexcept { return indices_; }
  Index operator[](std::size_t i) const { return indices_[i]; }
  auto begin() const noexcept { return indices_.begin(); }
  auto end() const noexcept { return indices_.end(); }

  bool contains(Index j) const noexcept;
  std::vector<Index> sorted() const;

  SupportSet with(Index j) const;
  SupportSet without(Index j) const;

  /// Set equality, ignoring order.
  bool same_set(const SupportSet& other) const;

  friend bool operator==(const SupportSet&, const SupportSet&) = default;

 private:
  std::vector<Index> indices_;
};

/// Thin QR factorization X_S = Q R kept as an immutable value together with
/// the residual Pi_perp[S] y. Q is built by classical Gram-Schmidt with one
/// reorthogonalization pass.
class FactorState {
 public:
  /// The state for the empty support: residual = y.
  static FactorState empty(const ProblemInstance& inst);

  /// Batch factorization of `support`, in its given order.
  /// Throws Error{RankDeficient} if some column is numerically in the span of
  /// the preceding ones.
  static FactorState build(const SupportSet& support, const ProblemInstance& inst);

  /// Returns the state for support + {j}; O(n |S|).
  /// Throws Error{DegenerateColumn} if Pi_perp[S] X_j is below
  /// kRankTolerance * ||X_j||, Error{InvalidArgument} if j is already present.
  FactorState extend(Index j, const ProblemInstance& inst) const;

  /// Returns the state with the column at support position `pos` removed, by
  /// Givens downdating; O(n |S|). When `removed_direction` is given it
  /// receives the unit vector spanning span(X_S) minus span(X_S without pos).
  FactorState remove(std::size_t pos, const ProblemInstance& inst, Vector* removed_direction = nullptr) const;

  const SupportSet& support() const noexcept { return support_; }
  std::size_t size() const noexcept { return support_.size(); }
  const Matrix& basis() const noexcept { return q_; }
  const Vector& residual() const noexcept { return residual_; }
  double loss() const noexcept { return loss_; }

  /// Q^T y, i.e. the coefficients of the projection of y in the basis.
  const Vector& qty() const noexcept { return qty_; }

  /// Upper-triangular R, column k holding R(0..k, k).
  const std::vector<Vector>& r_columns() const noexcept { return r_cols_; }

  /// Restricted least-squares coefficients in support order (R beta = Q^T y).
  Vector support_coefficients() const;

  /// Length-p coefficient vector, zero off the support.
  Vector coefficients(std::size_t p) const;

 private:
  // In-place form of extend; leaves the state untouched when it throws.
  void append(Index j, const ProblemInstance& inst);

  SupportSet support_;
  Matrix q_;
  std::vector<Vector> r_cols_;
  Vector qty_;
  Vector residual_;
  double loss_ = 0.0;
};

/// ||Pi_perp[S] y||^2, by batch factorization.
double loss(const SupportSet& support, const ProblemInstance& inst);

/// Restricted least squares on `support`, zero elsewhere.
Vector restricted_ls(const SupportSet& support, const ProblemInstance& inst);

/// X^T residual (length p).
Vector correlations(const FactorState& state, const ProblemInstance& inst);

/// ||Pi_perp[S] X_j||^2 for every column j. Entries that lost more than a few
/// digits to cancellation are recomputed by explicit projection.
Vector projected_sq_norms(const FactorState& state, const ProblemInstance& inst);

/// Squared Euclidean norm of every column of X.
Vector column_sq_norms(const Matrix& X);

/// Projects `v` onto the orthogonal complement of span(Q) in place (two
/// Gram-Schmidt passes). Returns the accumulated coefficients Q^T v.
Vector project_out(const Matrix& q, std::span<double> v);

}  // namespace paththresh
