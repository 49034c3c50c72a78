#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <random>

namespace oracle {

Eigen::MatrixXd to_eigen(const Matrix& m) {
  Eigen::MatrixXd out(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) out(i, j) = m(i, j);
  return out;
}

Eigen::VectorXd to_eigen(const Vector& v) {
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out(i) = v[i];
  return out;
}

Eigen::MatrixXd columns(const ProblemInstance& inst, const std::vector<Index>& support) {
  Eigen::MatrixXd out(inst.n(), support.size());
  for (std::size_t k = 0; k < support.size(); ++k)
    for (std::size_t i = 0; i < inst.n(); ++i) out(i, k) = inst.X(i, support[k]);
  return out;
}

namespace {

using MatrixXl = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorXl = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Extended precision so that differences of nearby losses keep their digits.
long double ls_loss_ext(const ProblemInstance& inst, const std::vector<Index>& support) {
  VectorXl y(inst.n());
  for (std::size_t i = 0; i < inst.n(); ++i) y(i) = inst.y[i];
  if (support.empty()) return y.squaredNorm();
  MatrixXl xs(inst.n(), support.size());
  for (std::size_t k = 0; k < support.size(); ++k)
    for (std::size_t i = 0; i < inst.n(); ++i) xs(i, k) = inst.X(i, support[k]);
  const VectorXl a = xs.colPivHouseholderQr().solve(y);
  return (y - xs * a).squaredNorm();
}

}  // namespace

double ls_loss(const ProblemInstance& inst, const std::vector<Index>& support) {
  return static_cast<double>(ls_loss_ext(inst, support));
}

Vector ls_coefficients(const ProblemInstance& inst, const std::vector<Index>& support) {
  Vector beta(inst.p(), 0.0);
  if (support.empty()) return beta;
  const Eigen::MatrixXd xs = columns(inst, support);
  const Eigen::MatrixXd g = xs.transpose() * xs;
  const Eigen::VectorXd a = g.ldlt().solve(xs.transpose() * to_eigen(inst.y));
  for (std::size_t k = 0; k < support.size(); ++k) beta[support[k]] = a(k);
  return beta;
}

double max_single_decrease(const ProblemInstance& inst, const std::vector<Index>& support) {
  const long double base = ls_loss_ext(inst, support);
  long double best = -std::numeric_limits<long double>::infinity();
  for (Index j = 0; j < inst.p(); ++j) {
    if (std::find(support.begin(), support.end(), j) != support.end()) continue;
    std::vector<Index> ext = support;
    ext.push_back(j);
    best = std::max(best, base - ls_loss_ext(inst, ext));
  }
  return static_cast<double>(best);
}

double max_sq_correlation(const ProblemInstance& inst, const std::vector<Index>& support) {
  const Eigen::VectorXd y = to_eigen(inst.y);
  Eigen::VectorXd r = y;
  if (!support.empty()) {
    const Eigen::MatrixXd xs = columns(inst, support);
    r = y - xs * xs.colPivHouseholderQr().solve(y);
  }
  const Eigen::MatrixXd x = to_eigen(inst.X);
  double best = 0.0;
  for (Index j = 0; j < inst.p(); ++j) {
    if (std::find(support.begin(), support.end(), j) != support.end()) continue;
    const double c = x.col(static_cast<Eigen::Index>(j)).dot(r);
    best = std::max(best, c * c);
  }
  return best;
}

double best_subset_loss(const ProblemInstance& inst, std::size_t s, std::vector<Index>* argmin) {
  const std::size_t p = inst.p();
  std::vector<bool> pick(p, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(s), true);
  double best = std::numeric_limits<double>::infinity();
  do {
    std::vector<Index> sup;
    for (Index j = 0; j < p; ++j)
      if (pick[j]) sup.push_back(j);
    const double l = ls_loss(inst, sup);
    if (l < best) {
      best = l;
      if (argmin) *argmin = sup;
    }
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return best;
}

std::vector<double> naive_foba_losses(const ProblemInstance& inst, std::size_t s_max, double ratio) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> best(s_max + 1, inf);
  std::vector<double> gains(s_max + 1, 0.0);
  std::vector<Index> sup;
  double loss = ls_loss(inst, sup);
  best[0] = loss;
  for (std::size_t steps = 0; sup.size() < s_max && steps < 50 * s_max + 100; ++steps) {
    double next = inf;
    Index pick = 0;
    for (Index j = 0; j < inst.p(); ++j) {
      if (std::find(sup.begin(), sup.end(), j) != sup.end()) continue;
      std::vector<Index> ext = sup;
      ext.push_back(j);
      const double l = ls_loss(inst, ext);
      if (l < next) {
        next = l;
        pick = j;
      }
    }
    sup.push_back(pick);
    gains[sup.size()] = loss - next;
    loss = next;
    best[sup.size()] = std::min(best[sup.size()], loss);
    while (sup.size() > 1) {
      double cost = inf;
      std::size_t victim = 0;
      for (std::size_t k = 0; k < sup.size(); ++k) {
        std::vector<Index> less = sup;
        less.erase(less.begin() + static_cast<std::ptrdiff_t>(k));
        const double c = ls_loss(inst, less) - loss;
        if (c < cost) {
          cost = c;
          victim = k;
        }
      }
      if (!(cost < ratio * gains[sup.size()])) break;
      sup.erase(sup.begin() + static_cast<std::ptrdiff_t>(victim));
      loss += cost;
      best[sup.size()] = std::min(best[sup.size()], loss);
    }
  }
  return best;
}

LassoEnumerator::LassoEnumerator(const ProblemInstance& inst) : inst_(&inst) {
  const std::size_t p = inst.p();
  const Eigen::MatrixXd x = to_eigen(inst.X);
  const Eigen::VectorXd y = to_eigen(inst.y);
  yty_ = y.squaredNorm();
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << p); ++mask) {
    Block b;
    for (Index j = 0; j < p; ++j)
      if (mask >> j & 1) b.cols.push_back(j);
    if (b.cols.size() > inst.n()) continue;
    const Eigen::MatrixXd xa = columns(inst, b.cols);
    b.g = xa.transpose() * xa;
    b.gram.compute(b.g);
    const Eigen::VectorXd d = b.gram.vectorD();
    if (d.minCoeff() <= 1e-10 * d.maxCoeff()) continue;
    b.xty = xa.transpose() * y;
    blocks_.push_back(std::move(b));
  }
}

LassoEnumerator::Solution LassoEnumerator::solve(double lambda) const {
  const double n = static_cast<double>(inst_->n());
  Solution best{Vector(inst_->p(), 0.0), yty_ / (2.0 * n)};
  for (const Block& blk : blocks_) {
    const std::size_t a = blk.cols.size();
    Eigen::VectorXd sign(a);
    for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << a); ++pattern) {
      for (std::size_t k = 0; k < a; ++k) sign(static_cast<Eigen::Index>(k)) = (pattern >> k & 1) ? -1.0 : 1.0;
      const Eigen::VectorXd b = blk.gram.solve(blk.xty - n * lambda * sign);
      bool consistent = true;
      for (std::size_t k = 0; k < a && consistent; ++k)
        consistent = b(static_cast<Eigen::Index>(k)) * sign(static_cast<Eigen::Index>(k)) > 0.0;
      if (!consistent) continue;
      const double rss = yty_ - 2.0 * b.dot(blk.xty) + b.dot(blk.g * b);
      const double obj = std::max(rss, 0.0) / (2.0 * n) + lambda * b.lpNorm<1>();
      if (obj < best.objective) {
        best.objective = obj;
        best.beta.assign(inst_->p(), 0.0);
        for (std::size_t k = 0; k < a; ++k) best.beta[blk.cols[k]] = b(static_cast<Eigen::Index>(k));
      }
    }
  }
  return best;
}

double LassoEnumerator::scaled_objective(double sigma, double lambda0) const {
  return solve(lambda0 * sigma).objective / sigma + sigma / 2.0;
}

ScaledOptimum scaled_lasso_minimum(const LassoEnumerator& lasso, double lambda0, double sigma_lo, double sigma_hi) {
  constexpr int kGrid = 200;
  std::vector<double> grid(kGrid);
  const double step = std::log(sigma_hi / sigma_lo) / (kGrid - 1);
  std::size_t arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = sigma_lo * std::exp(step * i);
    const double f = lasso.scaled_objective(grid[i], lambda0);
    if (f < best) {
      best = f;
      arg = static_cast<std::size_t>(i);
    }
  }
  double a = grid[arg == 0 ? 0 : arg - 1];
  double b = grid[std::min<std::size_t>(arg + 1, kGrid - 1)];
  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - phi * (b - a);
  double d = a + phi * (b - a);
  double fc = lasso.scaled_objective(c, lambda0);
  double fd = lasso.scaled_objective(d, lambda0);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * b; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - phi * (b - a);
      fc = lasso.scaled_objective(c, lambda0);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + phi * (b - a);
      fd = lasso.scaled_objective(d, lambda0);
    }
  }
  const double sigma = 0.5 * (a + b);
  const double f = lasso.scaled_objective(sigma, lambda0);
  if (f < best) return {sigma, f};
  return {grid[arg], best};
}

namespace {

// Number of eigenvalues of `a` below t.
int count_below(const Eigen::MatrixXd& a, double t) {
  const Eigen::Index m = a.rows();
  Eigen::MatrixXd w = a;
  for (Eigen::Index i = 0; i < m; ++i) w(i, i) -= t;
  int negatives = 0;
  const double tiny = 1e-300;
  for (Eigen::Index k = 0; k < m; ++k) {
    double d = w(k, k);
    if (d == 0.0) d = tiny;
    if (d < 0.0) ++negatives;
    for (Eigen::Index i = k + 1; i < m; ++i) {
      const double l = w(i, k) / d;
      for (Eigen::Index j = k + 1; j <= i; ++j) w(i, j) -= l * w(j, k);
    }
  }
  return negatives;
}

}  // namespace

double min_eigenvalue_bisection(const Eigen::MatrixXd& a) {
  // Gershgorin bounds enclose the spectrum.
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      if (j != i) off += std::abs(a(i, j));
    lo = std::min(lo, a(i, i) - off);
    hi = std::max(hi, a(i, i) + off);
  }
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(a, mid) >= 1)
      hi = mid;
    else
      lo = mid;
    if (hi - lo <= 1e-15 * std::max(1.0, std::abs(hi))) break;
  }
  return 0.5 * (lo + hi);
}

double restricted_eigenvalue_bitmask(const ProblemInstance& inst, const std::vector<Index>& truth) {
  const std::size_t p = inst.p();
  const std::size_t want = 2 * truth.size();
  std::uint64_t truth_mask = 0;
  for (Index j : truth) truth_mask |= std::uint64_t{1} << j;
  const double n = static_cast<double>(inst.n());
  double best = std::numeric_limits<double>::infinity();
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
    if (static_cast<std::size_t>(std::popcount(mask)) != want || (mask & truth_mask) != truth_mask) continue;
    std::vector<Index> cols;
    for (Index j = 0; j < p; ++j)
      if (mask >> j & 1) cols.push_back(j);
    const Eigen::MatrixXd xa = columns(inst, cols);
    const Eigen::MatrixXd g = xa.transpose() * xa / n;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g, Eigen::EigenvaluesOnly);
    best = std::min(best, es.eigenvalues()(0));
  }
  return best;
}

ProblemInstance random_instance(std::size_t n, std::size_t p, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  std::normal_distribution<double> z;
  Matrix X(n, p);
  for (std::size_t j = 0; j < p; ++j) {
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      X(i, j) = z(eng);
      ss += X(i, j) * X(i, j);
    }
    const double scale = std::sqrt(static_cast<double>(n) / ss);
    for (std::size_t i = 0; i < n; ++i) X(i, j) *= scale;
  }
  Vector y(n);
  const std::size_t active = std::min<std::size_t>(3, p);
  for (std::size_t i = 0; i < n; ++i) {
    double v = z(eng);
    for (std::size_t j = 0; j < active; ++j) v += (1.5 + 0.5 * static_cast<double>(j)) * X(i, (j * 7) % p);
    y[i] = v;
  }
  return ProblemInstance{std::move(X), std::move(y), std::nullopt};
}

}  // namespace oracle
