#include "paththresh/lasso.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "paththresh/errors.hpp"
#include "paththresh/simd/kernels.hpp"

namespace paththresh {

LassoSolver::LassoSolver(const ProblemInstance& inst, CoordinateDescentOptions opts)
    : inst_(&inst), opts_(opts) {
  col_scale_ = column_sq_norms(inst.X);
  for (double& d : col_scale_) d /= static_cast<double>(inst.n());
  reset();
}

void LassoSolver::reset() {
  beta_.assign(inst_->p(), 0.0);
  residual_ = inst_->y;
}

SupportSet LassoSolver::support() const {
  std::vector<Index> idx;
  for (Index j = 0; j < beta_.size(); ++j)
    if (beta_[j] != 0.0) idx.push_back(j);
  return SupportSet(std::move(idx));
}

double LassoSolver::sweep(bool active_only, double lambda) {
  const std::size_t n = inst_->n();
  const double inv_n = 1.0 / static_cast<double>(n);
  double max_change = 0.0;
  for (Index j = 0; j < beta_.size(); ++j) {
    const double old = beta_[j];
    if (active_only && old == 0.0) continue;
    const double* xj = inst_->X.col(j).data();
    const double g = simd::dot(xj, residual_.data(), n) * inv_n + col_scale_[j] * old;
    const double updated = soft_threshold(g, lambda) / col_scale_[j];
    if (updated != old) {
      simd::axpy(old - updated, xj, residual_.data(), n);
      beta_[j] = updated;
      max_change = std::max(max_change, std::abs(updated - old));
    }
  }
  return max_change;
}

void LassoSolver::refresh_residual() {
  const std::size_t n = inst_->n();
  residual_ = inst_->y;
  for (Index j = 0; j < beta_.size(); ++j)
    if (beta_[j] != 0.0) simd::axpy(-beta_[j], inst_->X.col(j).data(), residual_.data(), n);
}

// Solves the optimality conditions on the current active set with its current
// signs, X_A^T X_A b = X_A^T y - n lambda sign(beta_A), and moves toward b,
// stopping where the first coefficient changes sign. Near saturation this
// replaces thousands of sweeps; the sweeps that follow still decide
// convergence. Returns true when the full step was taken.
bool LassoSolver::polish(double lambda) {
  std::vector<Index> active;
  for (Index j = 0; j < beta_.size(); ++j)
    if (beta_[j] != 0.0) active.push_back(j);
  if (active.empty() || active.size() > inst_->n()) return false;
  std::optional<FactorState> st;
  try {
    st = FactorState::build(SupportSet(active), *inst_);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::RankDeficient) throw;
    return false;
  }
  const auto& r = st->r_columns();
  const std::size_t a = active.size();
  const double nl = static_cast<double>(inst_->n()) * lambda;
  // R^T w = sign, then R b = Q^T y - n lambda w.
  Vector w(a);
  for (std::size_t k = 0; k < a; ++k) {
    double acc = beta_[active[k]] > 0.0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < k; ++i) acc -= r[k][i] * w[i];
    w[k] = acc / r[k][k];
  }
  Vector b(a);
  for (std::size_t k = 0; k < a; ++k) b[k] = st->qty()[k] - nl * w[k];
  for (std::size_t k = a; k-- > 0;) {
    b[k] /= r[k][k];
    for (std::size_t i = 0; i < k; ++i) b[i] -= r[k][i] * b[k];
  }
  // The objective is the orthant's quadratic all the way to the first sign
  // change, so stepping toward b up to that point never increases it.
  double step = 1.0;
  for (std::size_t k = 0; k < a; ++k) {
    const double cur = beta_[active[k]];
    if (!(b[k] * cur > 0.0)) step = std::min(step, cur / (cur - b[k]));
  }
  for (std::size_t k = 0; k < a; ++k) {
    double& cur = beta_[active[k]];
    const double moved = step == 1.0 ? b[k] : cur + step * (b[k] - cur);
    cur = moved * cur > 0.0 ? moved : 0.0;
  }
  refresh_residual();
  return step == 1.0;
}

std::size_t LassoSolver::solve(double lambda) {
  if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
  // Refresh the residual so rounding from earlier solves does not accumulate.
  refresh_residual();

  auto threshold = [&] {
    double m = 1.0;
    for (double b : beta_) m = std::max(m, std::abs(b));
    return opts_.tol * m;
  };

  std::size_t sweeps = 0;
  std::size_t next_polish = 16;
  while (true) {
    if (sweeps >= opts_.max_sweeps) break;
    ++sweeps;
    if (sweep(false, lambda) < threshold()) return sweeps;
    // Iterate on the active set until it settles, then re-check all coordinates.
    while (sweeps < opts_.max_sweeps) {
      ++sweeps;
      if (sweep(true, lambda) < threshold()) break;
      if (sweeps >= next_polish) {
        next_polish *= 2;
        polish(lambda);
      }
    }
  }
  throw Error(ErrorCode::NonConverged,
              "coordinate descent did not converge within " + std::to_string(opts_.max_sweeps) +
                  " sweeps at lambda=" + std::to_string(lambda));
}

double lasso_lambda_max(const ProblemInstance& inst) {
  // Same expression as the first coordinate update from beta = 0, so that
  // solving at exactly lambda_max leaves every coefficient at zero.
  const double inv_n = 1.0 / static_cast<double>(inst.n());
  double m = 0.0;
  for (Index j = 0; j < inst.p(); ++j)
    m = std::max(m, std::abs(simd::dot(inst.X.col(j).data(), inst.y.data(), inst.n()) * inv_n));
  return m;
}

namespace {

Vector residual_of(const ProblemInstance& inst, const Vector& beta) {
  Vector r = inst.y;
  for (Index j = 0; j < inst.p(); ++j)
    if (beta[j] != 0.0) simd::axpy(-beta[j], inst.X.col(j).data(), r.data(), inst.n());
  return r;
}

}  // namespace

double lasso_objective(const ProblemInstance& inst, const Vector& beta, double lambda) {
  const Vector r = residual_of(inst, beta);
  double l1 = 0.0;
  for (double b : beta) l1 += std::abs(b);
  return simd::sum_squares(r.data(), r.size()) / (2.0 * static_cast<double>(inst.n())) + lambda * l1;
}

double lasso_kkt_violation(const ProblemInstance& inst, const Vector& beta, double lambda) {
  const Vector r = residual_of(inst, beta);
  Vector g(inst.p());
  simd::gemv_t(inst.X.data(), inst.n(), inst.p(), r.data(), g.data());
  const double inv_n = 1.0 / static_cast<double>(inst.n());
  double worst = 0.0;
  for (Index j = 0; j < inst.p(); ++j) {
    const double gj = g[j] * inv_n;
    const double v = beta[j] != 0.0 ? std::abs(gj - std::copysign(lambda, beta[j]))
                                    : std::max(0.0, std::abs(gj) - lambda);
    worst = std::max(worst, v);
  }
  return worst;
}

}  // namespace paththresh
