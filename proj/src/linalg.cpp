#include "paththresh/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "paththresh/errors.hpp"
#include "paththresh/simd/kernels.hpp"

namespace paththresh {

void validate_instance(const ProblemInstance& inst) {
  const std::size_t n = inst.n();
  const std::size_t p = inst.p();
  if (n == 0 || p == 0) throw Error(ErrorCode::InvalidArgument, "instance needs n >= 1 and p >= 1");
  if (inst.y.size() != n) {
    throw Error(ErrorCode::InvalidArgument,
                "y has " + std::to_string(inst.y.size()) + " entries, expected " + std::to_string(n));
  }
  for (Index j = 0; j < p; ++j) {
    const auto c = inst.X.col(j);
    const double scaled = simd::sum_squares(c.data(), n) / static_cast<double>(n);
    if (!(std::abs(scaled - 1.0) <= 1e-8)) {
      throw Error(ErrorCode::InvalidArgument,
                  "column " + std::to_string(j) + " is not normalized (||X_j||^2/n = " +
                      std::to_string(scaled) + ")");
    }
  }
  if (inst.truth) {
    const auto& t = *inst.truth;
    if (t.beta_star.size() != p) throw Error(ErrorCode::InvalidArgument, "beta_star length != p");
    std::vector<Index> nz;
    for (Index j = 0; j < p; ++j)
      if (t.beta_star[j] != 0.0) nz.push_back(j);
    std::vector<Index> s = t.support_star;
    std::sort(s.begin(), s.end());
    if (nz != s) throw Error(ErrorCode::InvalidArgument, "support_star differs from nonzeros of beta_star");
  }
}

SupportSet::SupportSet(std::vector<Index> indices) : indices_(std::move(indices)) {
  std::vector<Index> s = indices_;
  std::sort(s.begin(), s.end());
  if (std::adjacent_find(s.begin(), s.end()) != s.end())
    throw Error(ErrorCode::InvalidArgument, "support contains duplicate indices");
}

bool SupportSet::contains(Index j) const noexcept {
  return std::find(indices_.begin(), indices_.end(), j) != indices_.end();
}

std::vector<Index> SupportSet::sorted() const {
  std::vector<Index> s = indices_;
  std::sort(s.begin(), s.end());
  return s;
}

SupportSet SupportSet::with(Index j) const {
  if (contains(j)) throw Error(ErrorCode::InvalidArgument, "index already in support");
  SupportSet out = *this;
  out.indices_.push_back(j);
  return out;
}

SupportSet SupportSet::without(Index j) const {
  SupportSet out;
  out.indices_.reserve(indices_.size());
  for (Index i : indices_)
    if (i != j) out.indices_.push_back(i);
  return out;
}

bool SupportSet::same_set(const SupportSet& other) const {
  return size() == other.size() && sorted() == other.sorted();
}

Vector column_sq_norms(const Matrix& X) {
  Vector out(X.cols());
  for (Index j = 0; j < X.cols(); ++j) out[j] = simd::sum_squares(X.col(j).data(), X.rows());
  return out;
}

Vector project_out(const Matrix& q, std::span<double> v) {
  const std::size_t n = v.size();
  const std::size_t s = q.cols();
  Vector coef(s, 0.0);
  if (s == 0) return coef;
  Vector h(s);
  for (int pass = 0; pass < 2; ++pass) {
    simd::gemv_t(q.data(), n, s, v.data(), h.data());
    simd::gemv_n_sub(q.data(), n, s, h.data(), v.data());
    for (std::size_t k = 0; k < s; ++k) coef[k] += h[k];
  }
  return coef;
}

FactorState FactorState::empty(const ProblemInstance& inst) {
  FactorState st;
  st.q_ = Matrix(inst.n(), 0);
  st.residual_ = inst.y;
  st.loss_ = simd::sum_squares(inst.y.data(), inst.y.size());
  return st;
}

FactorState FactorState::build(const SupportSet& support, const ProblemInstance& inst) {
  FactorState st = empty(inst);
  st.q_.reserve_cols(support.size());
  for (Index j : support) {
    try {
      st.append(j, inst);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateColumn) throw;
      throw Error(ErrorCode::RankDeficient,
                  "columns of the support are numerically dependent at index " + std::to_string(j));
    }
  }
  return st;
}

FactorState FactorState::extend(Index j, const ProblemInstance& inst) const {
  FactorState next = *this;
  next.append(j, inst);
  return next;
}

void FactorState::append(Index j, const ProblemInstance& inst) {
  const std::size_t n = inst.n();
  if (j >= inst.p()) throw Error(ErrorCode::InvalidArgument, "column index out of range");
  if (support_.contains(j)) throw Error(ErrorCode::InvalidArgument, "column already in support");

  const auto xj = inst.X.col(j);
  Vector v(xj.begin(), xj.end());
  const double xnorm = std::sqrt(simd::sum_squares(v.data(), n));
  Vector rcol = project_out(q_, v);
  const double rho = std::sqrt(simd::sum_squares(v.data(), n));
  if (!(rho >= kRankTolerance * xnorm) || xnorm == 0.0) {
    throw Error(ErrorCode::DegenerateColumn,
                "column " + std::to_string(j) + " lies in the span of the current support");
  }
  for (double& x : v) x /= rho;
  rcol.push_back(rho);

  support_ = support_.with(j);
  q_.push_col(v);
  r_cols_.push_back(std::move(rcol));
  // q is orthogonal to span(Q), so q^T r == q^T y.
  const double z = simd::dot(v.data(), residual_.data(), n);
  simd::axpy(-z, v.data(), residual_.data(), n);
  qty_.push_back(z);
  // One more pass over the whole basis. Near interpolation the incremental
  // residual carries rounding of order eps ||y||, which is comparable to it.
  {
    Vector h(q_.cols());
    simd::gemv_t(q_.data(), n, q_.cols(), residual_.data(), h.data());
    simd::gemv_n_sub(q_.data(), n, q_.cols(), h.data(), residual_.data());
  }
  loss_ = simd::sum_squares(residual_.data(), n);
}

FactorState FactorState::remove(std::size_t pos, const ProblemInstance& inst, Vector* removed_direction) const {
  const std::size_t s = size();
  const std::size_t n = inst.n();
  if (pos >= s) throw Error(ErrorCode::InvalidArgument, "support position out of range");

  // Dropping column pos of R leaves an upper Hessenberg block; rotations on
  // rows (i, i+1) restore the triangle and the last basis column becomes the
  // direction that was removed.
  std::vector<Vector> r;
  r.reserve(s - 1);
  for (std::size_t k = 0; k < s; ++k)
    if (k != pos) r.push_back(r_cols_[k]);
  Matrix q = q_;
  Vector qty = qty_;
  for (std::size_t i = pos; i + 1 < s; ++i) {
    const double a = r[i][i];
    const double b = r[i][i + 1];
    const double h = std::hypot(a, b);
    const double c = a / h;
    const double sn = b / h;
    for (std::size_t k = i; k + 1 < s; ++k) {
      const double ri = r[k][i];
      const double rn = r[k][i + 1];
      r[k][i] = c * ri + sn * rn;
      r[k][i + 1] = -sn * ri + c * rn;
    }
    r[i].pop_back();
    const double ti = qty[i];
    const double tn = qty[i + 1];
    qty[i] = c * ti + sn * tn;
    qty[i + 1] = -sn * ti + c * tn;
    auto qi = q.col(i);
    auto qn = q.col(i + 1);
    for (std::size_t m = 0; m < n; ++m) {
      const double vi = qi[m];
      const double vn = qn[m];
      qi[m] = c * vi + sn * vn;
      qn[m] = -sn * vi + c * vn;
    }
  }

  FactorState next;
  next.support_ = support_.without(support_[pos]);
  const auto u = q.col(s - 1);
  const double z = qty[s - 1];
  next.residual_ = residual_;
  simd::axpy(z, u.data(), next.residual_.data(), n);
  next.loss_ = simd::sum_squares(next.residual_.data(), n);
  if (removed_direction) removed_direction->assign(u.begin(), u.end());
  q.pop_col();
  next.q_ = std::move(q);
  next.r_cols_ = std::move(r);
  qty.pop_back();
  next.qty_ = std::move(qty);
  return next;
}

Vector FactorState::support_coefficients() const {
  const std::size_t s = support_.size();
  Vector beta = qty_;
  for (std::size_t kk = s; kk-- > 0;) {
    beta[kk] /= r_cols_[kk][kk];
    const double b = beta[kk];
    for (std::size_t i = 0; i < kk; ++i) beta[i] -= r_cols_[kk][i] * b;
  }
  return beta;
}

Vector FactorState::coefficients(std::size_t p) const {
  Vector out(p, 0.0);
  const Vector b = support_coefficients();
  for (std::size_t k = 0; k < support_.size(); ++k) out[support_[k]] = b[k];
  return out;
}

double loss(const SupportSet& support, const ProblemInstance& inst) {
  return FactorState::build(support, inst).loss();
}

Vector restricted_ls(const SupportSet& support, const ProblemInstance& inst) {
  return FactorState::build(support, inst).coefficients(inst.p());
}

Vector correlations(const FactorState& state, const ProblemInstance& inst) {
  Vector out(inst.p());
  simd::gemv_t(inst.X.data(), inst.n(), inst.p(), state.residual().data(), out.data());
  return out;
}

Vector projected_sq_norms(const FactorState& state, const ProblemInstance& inst) {
  const std::size_t n = inst.n();
  const std::size_t p = inst.p();
  const std::size_t s = state.size();
  Vector out = column_sq_norms(inst.X);
  if (s == 0) return out;
  const Matrix& q = state.basis();
  Vector h(p);
  for (std::size_t k = 0; k < s; ++k) {
    simd::gemv_t(inst.X.data(), n, p, q.col(k).data(), h.data());
    for (Index j = 0; j < p; ++j) out[j] -= h[j] * h[j];
  }
  const Vector full = column_sq_norms(inst.X);
  Vector tmp(n);
  for (Index j = 0; j < p; ++j) {
    if (out[j] < 1e-4 * full[j]) {
      const auto c = inst.X.col(j);
      std::copy(c.begin(), c.end(), tmp.begin());
      project_out(q, tmp);
      out[j] = simd::sum_squares(tmp.data(), n);
    }
  }
  return out;
}

}  // namespace paththresh
