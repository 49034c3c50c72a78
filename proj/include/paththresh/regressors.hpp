#pragma once

#include <cstddef>
#include <optional>
#include <string_view>
#include <vector>

#include "paththresh/lasso.hpp"
#include "paththresh/linalg.hpp"

namespace paththresh {

enum class RegressorKind { Omp, Foba, Marginal, Lasso };

std::string_view to_string(RegressorKind k) noexcept;
std::optional<RegressorKind> parse_regressor(std::string_view name) noexcept;

struct LassoGrid {
  std::size_t num_points = 100;
  double decay = default_decay(100);

  /// Decay that puts the last grid point at 1e-3 * lambda_max.
  static double default_decay(std::size_t num_points);
};

struct RegressorSpec {
  RegressorKind kind = RegressorKind::Omp;
  double foba_backward_ratio = 0.5;
  LassoGrid lasso_grid{};
  CoordinateDescentOptions lasso_cd{};

  static RegressorSpec omp() { return {RegressorKind::Omp}; }
  static RegressorSpec marginal() { return {RegressorKind::Marginal}; }
  static RegressorSpec foba(double backward_ratio = 0.5) {
    RegressorSpec s{RegressorKind::Foba};
    s.foba_backward_ratio = backward_ratio;
    return s;
  }
  static RegressorSpec lasso(LassoGrid grid = {}) {
    RegressorSpec s{RegressorKind::Lasso};
    s.lasso_grid = grid;
    return s;
  }
};

/// Throws Error{InvalidConfig} on out-of-range parameters for spec.kind.
void validate_spec(const RegressorSpec& spec);

struct PathEntry {
  std::size_t s = 0;
  SupportSet support;
  double loss = 0.0;        // ||Pi_perp[S] y||^2
  double sigma2_hat = 0.0;  // loss / n
  Vector coefficients;      // restricted least-squares refit, length p
};

/// Per-sparsity-level estimates. Levels are strictly increasing and start at
/// 0; greedy paths are contiguous, a Lasso path may skip levels it never
/// visited.
struct SolutionPath {
  RegressorKind kind = RegressorKind::Omp;
  std::vector<PathEntry> entries;
  /// Set when the path ended before s_max because every remaining column was
  /// numerically in the span of the current support.
  bool truncated = false;

  const PathEntry* at(std::size_t s) const noexcept;
  std::size_t max_level() const noexcept { return entries.empty() ? 0 : entries.back().s; }
};

/// True when losses strictly decrease along the path (the precondition of the
/// PaTh / equilibrium-iteration equivalence).
bool losses_strictly_decreasing(const SolutionPath& path);

PathEntry make_entry(const FactorState& state, const ProblemInstance& inst);

SolutionPath omp_path(const ProblemInstance& inst, std::size_t s_max);
SolutionPath foba_path(const ProblemInstance& inst, std::size_t s_max, double backward_ratio);
SolutionPath marginal_path(const ProblemInstance& inst, std::size_t s_max);
SolutionPath lasso_path(const ProblemInstance& inst, const LassoGrid& grid,
                        const CoordinateDescentOptions& cd = {});

/// Dispatches on spec.kind. `s_max` defaults to min(n, p); it is ignored for
/// the Lasso, whose extent is set by its lambda grid.
SolutionPath compute_path(const RegressorSpec& spec, const ProblemInstance& inst,
                          std::optional<std::size_t> s_max = std::nullopt);

/// The support of size exactly `s` on the algorithm's path.
/// Throws Error{Infeasible} if the path never reaches level `s`.
SupportSet run_alg(const RegressorSpec& spec, const ProblemInstance& inst, std::size_t s);

}  // namespace paththresh
