#include "paththresh/path_thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "paththresh/errors.hpp"
#include "paththresh/simd/kernels.hpp"

namespace paththresh {

std::string_view to_string(DeltaMode m) noexcept {
  return m == DeltaMode::Ratio ? "ratio" : "correlation";
}

std::optional<DeltaMode> parse_delta_mode(std::string_view s) noexcept {
  if (s == "ratio") return DeltaMode::Ratio;
  if (s == "correlation") return DeltaMode::Correlation;
  return std::nullopt;
}

std::string_view to_string(SigmaDenominator d) noexcept {
  return d == SigmaDenominator::N ? "n" : "n-s";
}

std::optional<SigmaDenominator> parse_sigma_denominator(std::string_view s) noexcept {
  if (s == "n") return SigmaDenominator::N;
  if (s == "n-s") return SigmaDenominator::NMinusS;
  return std::nullopt;
}

std::string_view to_string(StopReason r) noexcept {
  switch (r) {
    case StopReason::ThresholdMet: return "threshold_met";
    case StopReason::Interpolated: return "interpolated";
    case StopReason::PathExhausted: return "path_exhausted";
  }
  return "unknown";
}

double delta(const FactorState& state, const ProblemInstance& inst, DeltaMode mode) {
  const std::size_t p = inst.p();
  if (state.size() >= std::min(inst.n(), p))
    throw Error(ErrorCode::InvalidArgument, "delta needs a support smaller than min(n, p)");
  const Vector corr = correlations(state, inst);
  const Vector proj = projected_sq_norms(state, inst);
  const Vector full = column_sq_norms(inst.X);
  std::vector<bool> in_support(p, false);
  for (Index j : state.support()) in_support[j] = true;

  bool any = false;
  double best = 0.0;
  for (Index j = 0; j < p; ++j) {
    if (in_support[j]) continue;
    if (!(proj[j] >= kRankTolerance * kRankTolerance * full[j])) continue;
    const double num = corr[j] * corr[j];
    const double v = mode == DeltaMode::Ratio ? num / proj[j] : num;
    if (!any || v > best) best = v;
    any = true;
  }
  if (!any) throw Error(ErrorCode::NoCandidates, "every remaining column lies in the span of the support");
  return best;
}

double delta(const PathEntry& entry, const ProblemInstance& inst, DeltaMode mode) {
  return delta(FactorState::build(entry.support, inst), inst, mode);
}

double sigma2_estimate(const PathEntry& entry, std::size_t n, SigmaDenominator denom) {
  double d = static_cast<double>(n);
  // n - s can reach zero only for an interpolating fit; clamp to 1.
  if (denom == SigmaDenominator::NMinusS)
    d = entry.s < n ? static_cast<double>(n - entry.s) : 1.0;
  return entry.loss / d;
}

double stopping_threshold(double c, double sigma2, std::size_t p) {
  return 2.0 * c * sigma2 * std::log(static_cast<double>(p));
}

bool interpolates(double loss, double y_sq_norm) { return loss <= 1e-12 * y_sq_norm; }

DeltaCache::DeltaCache(const SolutionPath& path, const ProblemInstance& inst, DeltaMode mode)
    : path_(&path), inst_(&inst), mode_(mode), values_(path.entries.size()) {}

std::optional<double> DeltaCache::at(std::size_t i) {
  auto& slot = values_.at(i);
  if (!slot) {
    const PathEntry& e = path_->entries[i];
    if (e.s >= std::min(inst_->n(), inst_->p())) {
      slot = std::optional<double>{};
    } else {
      try {
        slot = std::optional<double>{delta(e, *inst_, mode_)};
      } catch (const Error& err) {
        if (err.code() != ErrorCode::NoCandidates) throw;
        slot = std::optional<double>{};
      }
    }
  }
  return *slot;
}

std::size_t DeltaCache::evaluated() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](const auto& v) { return v.has_value(); }));
}

StopPoint find_stop(const std::vector<PathEntry>& entries, std::size_t n, std::size_t p, double y_sq_norm,
                    const PathConfig& cfg, const std::function<std::optional<double>(std::size_t)>& delta_at) {
  if (!(cfg.c > 0.0)) throw Error(ErrorCode::InvalidConfig, "c must be positive");
  if (entries.empty()) throw Error(ErrorCode::InvalidArgument, "empty solution path");
  constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
  auto threshold_at = [&](std::size_t i) {
    return stopping_threshold(cfg.c, sigma2_estimate(entries[i], n, cfg.sigma_denominator), p);
  };
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const double thr = threshold_at(i);
    if (interpolates(entries[i].loss, y_sq_norm))
      return {i, delta_at(i).value_or(kNaN), thr, StopReason::Interpolated};
    const std::optional<double> d = delta_at(i);
    if (!d) return {i, kNaN, thr, StopReason::PathExhausted};
    if (*d < thr) return {i, *d, thr, StopReason::ThresholdMet};
  }
  const std::size_t last = entries.size() - 1;
  return {last, delta_at(last).value_or(kNaN), threshold_at(last), StopReason::PathExhausted};
}

PathSelection select_on_path(DeltaCache& deltas, const PathConfig& cfg) {
  const SolutionPath& path = deltas.path();
  const ProblemInstance& inst = deltas.instance();
  const std::size_t n = inst.n();
  const double y_sq = simd::sum_squares(inst.y.data(), n);
  const StopPoint stop =
      find_stop(path.entries, n, inst.p(), y_sq, cfg, [&](std::size_t i) { return deltas.at(i); });

  const PathEntry& e = path.entries[stop.index];
  PathSelection sel;
  sel.support = e.support;
  sel.stop_s = e.s;
  sel.c = cfg.c;
  sel.sigma2_at_stop = sigma2_estimate(e, n, cfg.sigma_denominator);
  sel.delta_at_stop = stop.delta;
  sel.threshold_at_stop = stop.threshold;
  sel.stop_reason = stop.reason;
  sel.coefficients = e.coefficients;
  return sel;
}

PathRun run_path(const RegressorSpec& spec, const ProblemInstance& inst, const PathConfig& cfg) {
  CGridRun grid = run_path_for_c_grid(spec, inst, {cfg.c}, cfg);
  return {std::move(grid.selections.front()), std::move(grid.path)};
}

CGridRun run_path_for_c_grid(const RegressorSpec& spec, const ProblemInstance& inst,
                             const std::vector<double>& c_values, const PathConfig& cfg) {
  if (c_values.empty()) throw Error(ErrorCode::InvalidArgument, "c grid is empty");
  for (double c : c_values)
    if (!(c > 0.0)) throw Error(ErrorCode::InvalidConfig, "c must be positive");
  CGridRun out;
  out.path = compute_path(spec, inst);
  DeltaCache cache(out.path, inst, cfg.delta_mode);
  for (double c : c_values) {
    PathConfig one = cfg;
    one.c = c;
    PathSelection sel = select_on_path(cache, one);
    const bool seen = std::any_of(out.distinct_supports.begin(), out.distinct_supports.end(),
                                  [&](const SupportSet& s) { return s.same_set(sel.support); });
    if (!seen) out.distinct_supports.push_back(sel.support);
    out.selections.push_back(std::move(sel));
  }
  return out;
}

}  // namespace paththresh
