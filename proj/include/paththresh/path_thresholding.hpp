#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string_view>
#include <vector>

#include "paththresh/regressors.hpp"

namespace paththresh {

enum class DeltaMode {
  Ratio,        // max_j |X_j^T r|^2 / ||Pi_perp[S] X_j||^2 : the exact best one-column loss decrease
  Correlation,  // max_j |X_j^T r|^2 : drops the projected-norm denominator
};

enum class SigmaDenominator { N, NMinusS };

std::string_view to_string(DeltaMode m) noexcept;
std::optional<DeltaMode> parse_delta_mode(std::string_view s) noexcept;
std::string_view to_string(SigmaDenominator d) noexcept;
std::optional<SigmaDenominator> parse_sigma_denominator(std::string_view s) noexcept;

struct PathConfig {
  double c = 1.0;
  DeltaMode delta_mode = DeltaMode::Ratio;
  SigmaDenominator sigma_denominator = SigmaDenominator::N;
};

enum class StopReason {
  ThresholdMet,  // Delta_s fell below the threshold
  Interpolated,  // the loss reached numerical zero; stopped regardless of Delta
  PathExhausted,
};
std::string_view to_string(StopReason r) noexcept;

struct PathSelection {
  SupportSet support;
  std::size_t stop_s = 0;
  double c = 0.0;
  double sigma2_at_stop = 0.0;
  /// NaN when the path ended before Delta could be evaluated at the stop.
  double delta_at_stop = 0.0;
  double threshold_at_stop = 0.0;
  StopReason stop_reason = StopReason::PathExhausted;
  Vector coefficients;  // restricted least-squares refit on `support`
};

/// Delta for the support of `entry`. Throws Error{NoCandidates} if every
/// column outside the support is numerically in its span, and
/// Error{InvalidArgument} if the support already has min(n, p) columns.
double delta(const PathEntry& entry, const ProblemInstance& inst, DeltaMode mode);

/// Same, from an existing factorization of the support.
double delta(const FactorState& state, const ProblemInstance& inst, DeltaMode mode);

/// Noise-variance estimate at a path entry under the configured denominator.
double sigma2_estimate(const PathEntry& entry, std::size_t n, SigmaDenominator denom);

/// 2 c sigma2 log p (natural log).
double stopping_threshold(double c, double sigma2, std::size_t p);

/// True when the loss is numerically zero relative to ||y||^2, in which case
/// the path is stopped regardless of Delta.
bool interpolates(double loss, double y_sq_norm);

/// Lazily evaluated Delta values along a fixed solution path, shared by
/// every replay of the stopping rule (one path, many values of c).
class DeltaCache {
 public:
  DeltaCache(const SolutionPath& path, const ProblemInstance& inst, DeltaMode mode);

  /// Delta at path entry `i`, or nullopt when it is not defined there (the
  /// support is full or no column remains outside its span).
  std::optional<double> at(std::size_t i);

  const SolutionPath& path() const noexcept { return *path_; }
  const ProblemInstance& instance() const noexcept { return *inst_; }
  DeltaMode mode() const noexcept { return mode_; }
  /// Number of entries whose Delta has been evaluated so far.
  std::size_t evaluated() const noexcept;

 private:
  const SolutionPath* path_;
  const ProblemInstance* inst_;
  DeltaMode mode_;
  std::vector<std::optional<std::optional<double>>> values_;
};

struct StopPoint {
  std::size_t index = 0;  // into the entry list
  double delta = 0.0;     // NaN when undefined at the stop
  double threshold = 0.0;
  StopReason reason = StopReason::PathExhausted;
};

/// The stopping rule over path entries whose Delta values come from
/// `delta_at(i)` (nullopt when undefined). Only `s` and `loss` of each entry
/// are read. `delta_at` is called in increasing order and never past the stop.
StopPoint find_stop(const std::vector<PathEntry>& entries, std::size_t n, std::size_t p, double y_sq_norm,
                    const PathConfig& cfg, const std::function<std::optional<double>(std::size_t)>& delta_at);

/// Applies the stopping rule to an already computed path.
PathSelection select_on_path(DeltaCache& deltas, const PathConfig& cfg);

struct PathRun {
  PathSelection selection;
  SolutionPath path;
};

/// Computes the regressor's solution path and walks it from s = 0, stopping at
/// the first level with Delta_s < 2 c sigma2_s log p.
PathRun run_path(const RegressorSpec& spec, const ProblemInstance& inst, const PathConfig& cfg);

struct CGridRun {
  std::vector<PathSelection> selections;  // one per c, in input order
  std::vector<SupportSet> distinct_supports;  // first-seen order
  SolutionPath path;
};

/// One path computation, the stopping rule replayed for every c in `c_values`
/// (cfg.c is ignored).
CGridRun run_path_for_c_grid(const RegressorSpec& spec, const ProblemInstance& inst,
                             const std::vector<double>& c_values, const PathConfig& cfg);

}  // namespace paththresh
