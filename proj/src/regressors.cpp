#include "paththresh/regressors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <string>

#include "paththresh/errors.hpp"
#include "paththresh/simd/kernels.hpp"

namespace paththresh {

std::string_view to_string(RegressorKind k) noexcept {
  switch (k) {
    case RegressorKind::Omp: return "omp";
    case RegressorKind::Foba: return "foba";
    case RegressorKind::Marginal: return "marginal";
    case RegressorKind::Lasso: return "lasso";
  }
  return "unknown";
}

std::optional<RegressorKind> parse_regressor(std::string_view name) noexcept {
  if (name == "omp") return RegressorKind::Omp;
  if (name == "foba") return RegressorKind::Foba;
  if (name == "marginal") return RegressorKind::Marginal;
  if (name == "lasso") return RegressorKind::Lasso;
  return std::nullopt;
}

double LassoGrid::default_decay(std::size_t num_points) {
  return num_points < 2 ? 0.5 : std::pow(1e-3, 1.0 / static_cast<double>(num_points - 1));
}

void validate_spec(const RegressorSpec& spec) {
  if (spec.kind == RegressorKind::Foba &&
      !(spec.foba_backward_ratio > 0.0 && spec.foba_backward_ratio < 1.0))
    throw Error(ErrorCode::InvalidConfig, "foba backward ratio must lie in (0, 1)");
  if (spec.kind == RegressorKind::Lasso) {
    if (spec.lasso_grid.num_points < 2)
      throw Error(ErrorCode::InvalidConfig, "lasso grid needs at least 2 points");
    if (!(spec.lasso_grid.decay > 0.0 && spec.lasso_grid.decay < 1.0))
      throw Error(ErrorCode::InvalidConfig, "lasso grid decay must lie in (0, 1)");
  }
}

const PathEntry* SolutionPath::at(std::size_t s) const noexcept {
  auto it = std::lower_bound(entries.begin(), entries.end(), s,
                             [](const PathEntry& e, std::size_t v) { return e.s < v; });
  return (it != entries.end() && it->s == s) ? &*it : nullptr;
}

bool losses_strictly_decreasing(const SolutionPath& path) {
  for (std::size_t i = 1; i < path.entries.size(); ++i)
    if (!(path.entries[i].loss < path.entries[i - 1].loss)) return false;
  return true;
}

PathEntry make_entry(const FactorState& state, const ProblemInstance& inst) {
  PathEntry e;
  e.s = state.size();
  e.support = state.support();
  e.loss = state.loss();
  e.sigma2_hat = e.loss / static_cast<double>(inst.n());
  e.coefficients = state.coefficients(inst.p());
  return e;
}

namespace {

std::size_t default_s_max(const ProblemInstance& inst) { return std::min(inst.n(), inst.p()); }

void check_s_max(const ProblemInstance& inst, std::size_t s_max) {
  if (s_max > default_s_max(inst))
    throw Error(ErrorCode::InvalidArgument, "s_max exceeds min(n, p)");
}

// Forward-selection bookkeeping on top of a FactorState: X^T r and the
// projected column norms ||Pi_perp[S] X_j||^2, updated in O(np) per step.
class GreedyTracker {
 public:
  explicit GreedyTracker(const ProblemInstance& inst)
      : inst_(inst), state_(FactorState::empty(inst)), full_(column_sq_norms(inst.X)) {
    reset(state_);
  }

  const FactorState& state() const { return state_; }

  void reset(FactorState st) {
    state_ = std::move(st);
    in_support_.assign(inst_.p(), false);
    for (Index j : state_.support()) in_support_[j] = true;
    proj_ = projected_sq_norms(state_, inst_);
    corr_ = correlations(state_, inst_);
    degenerate_.assign(inst_.p(), false);
  }

  // argmax_j corr_j^2 / proj_j over admissible candidates; lowest index wins ties.
  std::optional<Index> best_candidate() const {
    std::optional<Index> best;
    double best_score = -1.0;
    for (Index j = 0; j < inst_.p(); ++j) {
      if (in_support_[j] || degenerate_[j]) continue;
      if (!(proj_[j] >= kRankTolerance * kRankTolerance * full_[j])) continue;
      const double score = corr_[j] * corr_[j] / proj_[j];
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  // One forward step. Returns false when no column can be added.
  bool forward() {
    while (auto j = best_candidate()) {
      try {
        FactorState next = state_.extend(*j, inst_);
        advance(std::move(next), *j);
        return true;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateColumn) throw;
        degenerate_[*j] = true;
      }
    }
    return false;
  }

  // Drops the column at support position `pos`. Projected norms only grow, by
  // the squared component along the removed direction.
  void remove(std::size_t pos) {
    const std::size_t n = inst_.n();
    const std::size_t p = inst_.p();
    const Index j = state_.support()[pos];
    Vector u;
    state_ = state_.remove(pos, inst_, &u);
    in_support_[j] = false;
    Vector h(p);
    simd::gemv_t(inst_.X.data(), n, p, u.data(), h.data());
    for (Index i = 0; i < p; ++i) {
      if (in_support_[i]) continue;
      proj_[i] = i == j ? h[i] * h[i] : proj_[i] + h[i] * h[i];
    }
    degenerate_.assign(p, false);
    simd::gemv_t(inst_.X.data(), n, p, state_.residual().data(), corr_.data());
  }

 private:
  void advance(FactorState next, Index j) {
    const std::size_t n = inst_.n();
    const std::size_t p = inst_.p();
    const double* q = next.basis().col(next.size() - 1).data();
    Vector h(p);
    simd::gemv_t(inst_.X.data(), n, p, q, h.data());
    state_ = std::move(next);
    in_support_[j] = true;
    Vector tmp(n);
    for (Index i = 0; i < p; ++i) {
      if (in_support_[i]) continue;
      proj_[i] -= h[i] * h[i];
      if (proj_[i] < 1e-4 * full_[i]) {
        const auto c = inst_.X.col(i);
        std::copy(c.begin(), c.end(), tmp.begin());
        project_out(state_.basis(), tmp);
        proj_[i] = simd::sum_squares(tmp.data(), n);
      }
    }
    simd::gemv_t(inst_.X.data(), n, p, state_.residual().data(), corr_.data());
  }

  const ProblemInstance& inst_;
  FactorState state_;
  Vector full_;
  Vector proj_;
  Vector corr_;
  std::vector<bool> in_support_;
  std::vector<bool> degenerate_;
};

}  // namespace

SolutionPath omp_path(const ProblemInstance& inst, std::size_t s_max) {
  check_s_max(inst, s_max);
  SolutionPath path;
  path.kind = RegressorKind::Omp;
  GreedyTracker tracker(inst);
  path.entries.push_back(make_entry(tracker.state(), inst));
  while (tracker.state().size() < s_max) {
    if (!tracker.forward()) {
      path.truncated = true;
      break;
    }
    path.entries.push_back(make_entry(tracker.state(), inst));
  }
  return path;
}

namespace {

// Inverse of the triangular factor and the derived quantities FoBa needs to
// price removals: loss(S \ {i}) - loss(S) = beta_i^2 / [(X_S^T X_S)^{-1}]_ii,
// and (X_S^T X_S)^{-1} = R^{-1} R^{-T}.
struct RemovalPricer {
  std::vector<Vector> rinv_cols;  // column k holds R^{-1}(0..k, k)
  Vector row_sq;                  // squared row norms of R^{-1}
  Vector beta;                    // support-order coefficients

  void rebuild(const FactorState& st) {
    rinv_cols.clear();
    row_sq.clear();
    beta.clear();
    for (std::size_t k = 0; k < st.size(); ++k) append(st, k);
  }

  // Folds in the k-th column of R (the most recently added one).
  void append(const FactorState& st, std::size_t k) {
    const Vector& rcol = st.r_columns()[k];
    const double rho = rcol[k];
    Vector col(k + 1, 0.0);
    for (std::size_t i = 0; i < k; ++i) {
      double acc = 0.0;
      for (std::size_t m = i; m < k; ++m) acc += rinv_cols[m][i] * rcol[m];
      col[i] = -acc / rho;
    }
    col[k] = 1.0 / rho;
    const double z = st.qty()[k];
    for (std::size_t i = 0; i < k; ++i) {
      row_sq[i] += col[i] * col[i];
      beta[i] += col[i] * z;
    }
    row_sq.push_back(col[k] * col[k]);
    beta.push_back(col[k] * z);
    rinv_cols.push_back(std::move(col));
  }
};

}  // namespace

SolutionPath foba_path(const ProblemInstance& inst, std::size_t s_max, double backward_ratio) {
  check_s_max(inst, s_max);
  if (!(backward_ratio > 0.0 && backward_ratio < 1.0))
    throw Error(ErrorCode::InvalidConfig, "foba backward ratio must lie in (0, 1)");

  SolutionPath path;
  path.kind = RegressorKind::Foba;
  std::vector<std::optional<PathEntry>> best(s_max + 1);
  auto record = [&](const FactorState& st) {
    auto& slot = best[st.size()];
    if (!slot || st.loss() < slot->loss) slot = make_entry(st, inst);
  };

  GreedyTracker tracker(inst);
  RemovalPricer pricer;
  // gains[s] is the loss decrease of the forward step that reached size s.
  std::vector<double> gains(s_max + 1, 0.0);
  record(tracker.state());

  const std::size_t forward_cap = 50 * std::max<std::size_t>(s_max, 1) + 100;
  std::size_t forward_steps = 0;
  while (tracker.state().size() < s_max) {
    if (forward_steps++ >= forward_cap) {
      path.truncated = true;
      break;
    }
    const double before = tracker.state().loss();
    if (!tracker.forward()) {
      path.truncated = true;
      break;
    }
    const FactorState& st = tracker.state();
    gains[st.size()] = before - st.loss();
    pricer.append(st, st.size() - 1);
    record(st);

    while (tracker.state().size() > 1) {
      const FactorState& cur = tracker.state();
      std::size_t victim = 0;
      double victim_cost = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < cur.size(); ++k) {
        const double cost = pricer.beta[k] * pricer.beta[k] / pricer.row_sq[k];
        if (cost < victim_cost || (cost == victim_cost && cur.support()[k] < cur.support()[victim])) {
          victim_cost = cost;
          victim = k;
        }
      }
      if (!(victim_cost < backward_ratio * gains[cur.size()])) break;
      tracker.remove(victim);
      pricer.rebuild(tracker.state());
      record(tracker.state());
    }
  }

  for (auto& e : best) {
    if (!e) break;
    path.entries.push_back(std::move(*e));
  }
  return path;
}

SolutionPath marginal_path(const ProblemInstance& inst, std::size_t s_max) {
  check_s_max(inst, s_max);
  const std::size_t p = inst.p();
  Vector xty(p);
  simd::gemv_t(inst.X.data(), inst.n(), p, inst.y.data(), xty.data());
  std::vector<Index> order(p);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return std::abs(xty[a]) > std::abs(xty[b]); });

  SolutionPath path;
  path.kind = RegressorKind::Marginal;
  FactorState st = FactorState::empty(inst);
  path.entries.push_back(make_entry(st, inst));
  for (std::size_t s = 0; s < s_max; ++s) {
    try {
      st = st.extend(order[s], inst);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateColumn) throw;
      path.truncated = true;
      break;
    }
    path.entries.push_back(make_entry(st, inst));
  }
  return path;
}

SolutionPath lasso_path(const ProblemInstance& inst, const LassoGrid& grid,
                        const CoordinateDescentOptions& cd) {
  if (grid.num_points < 2) throw Error(ErrorCode::InvalidConfig, "lasso grid needs at least 2 points");
  if (!(grid.decay > 0.0 && grid.decay < 1.0))
    throw Error(ErrorCode::InvalidConfig, "lasso grid decay must lie in (0, 1)");

  const std::size_t s_cap = default_s_max(inst);
  const double lmax = lasso_lambda_max(inst);
  LassoSolver solver(inst, cd);

  // Best (lowest-loss) factorization per support size. Consecutive grid
  // points share most of their support, so the factor is carried along by
  // downdates and extensions instead of being rebuilt.
  std::map<std::size_t, FactorState> best;
  best.emplace(0, FactorState::empty(inst));
  std::optional<FactorState> carried = FactorState::empty(inst);
  std::vector<Index> previous;
  for (std::size_t t = 0; t < grid.num_points; ++t) {
    if (lmax == 0.0) break;
    solver.solve(lmax * std::pow(grid.decay, static_cast<double>(t)));
    const SupportSet supp = solver.support();
    if (supp.indices() == previous) continue;
    previous = supp.indices();
    if (supp.size() > s_cap) break;

    FactorState st = carried ? *carried : FactorState::empty(inst);
    for (std::size_t pos = st.size(); pos-- > 0;)
      if (!supp.contains(st.support()[pos])) st = st.remove(pos, inst);
    bool independent = true;
    for (Index j : supp) {
      if (st.support().contains(j)) continue;
      try {
        st = st.extend(j, inst);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateColumn) throw;
        independent = false;
        break;
      }
    }
    if (!independent) {
      // Rank-deficient supports have no well-defined restricted fit; skip.
      carried.reset();
      continue;
    }
    auto it = best.find(st.size());
    if (it == best.end())
      best.emplace(st.size(), st);
    else if (st.loss() < it->second.loss())
      it->second = st;
    carried = std::move(st);
    // Larger supports cannot be admitted once the active set saturates.
    if (supp.size() >= s_cap) break;
  }

  SolutionPath path;
  path.kind = RegressorKind::Lasso;
  for (auto& [s, st] : best) {
    PathEntry e = make_entry(st, inst);
    e.support = SupportSet(e.support.sorted());
    path.entries.push_back(std::move(e));
  }
  return path;
}

SolutionPath compute_path(const RegressorSpec& spec, const ProblemInstance& inst,
                          std::optional<std::size_t> s_max) {
  validate_spec(spec);
  const std::size_t sm = s_max.value_or(default_s_max(inst));
  switch (spec.kind) {
    case RegressorKind::Omp: return omp_path(inst, sm);
    case RegressorKind::Foba: return foba_path(inst, sm, spec.foba_backward_ratio);
    case RegressorKind::Marginal: return marginal_path(inst, sm);
    case RegressorKind::Lasso: return lasso_path(inst, spec.lasso_grid, spec.lasso_cd);
  }
  throw Error(ErrorCode::InvalidConfig, "unknown regressor kind");
}

SupportSet run_alg(const RegressorSpec& spec, const ProblemInstance& inst, std::size_t s) {
  if (s > default_s_max(inst)) throw Error(ErrorCode::InvalidArgument, "s exceeds min(n, p)");
  if (s == 0) return {};
  // OMP and marginal paths are nested prefixes; FoBa entries may improve
  // after later backward steps, so it always runs the full path.
  std::optional<std::size_t> s_max;
  if (spec.kind == RegressorKind::Omp || spec.kind == RegressorKind::Marginal) s_max = s;
  const SolutionPath path = compute_path(spec, inst, s_max);
  if (const PathEntry* e = path.at(s)) return e->support;
  throw Error(ErrorCode::Infeasible,
              "the " + std::string(to_string(spec.kind)) + " path never reaches sparsity level " +
                  std::to_string(s));
}

}  // namespace paththresh
