#include "paththresh/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "paththresh/errors.hpp"
#include "paththresh/simd/kernels.hpp"

namespace paththresh {

SupportScores support_metrics(const SupportSet& estimated, const SupportSet& truth) {
  if (truth.empty()) throw Error(ErrorCode::InvalidArgument, "truth support is empty");
  std::size_t overlap = 0;
  for (Index j : estimated)
    if (truth.contains(j)) ++overlap;
  SupportScores s;
  s.precision = estimated.empty() ? 0.0 : static_cast<double>(overlap) / static_cast<double>(estimated.size());
  s.recall = static_cast<double>(overlap) / static_cast<double>(truth.size());
  s.f1 = (s.precision > 0.0 && s.recall > 0.0) ? 2.0 * s.precision * s.recall / (s.precision + s.recall) : 0.0;
  return s;
}

double estimation_error(const Vector& beta_hat, const Vector& beta_star) {
  if (beta_hat.size() != beta_star.size())
    throw Error(ErrorCode::ShapeMismatch, "coefficient vectors differ in length");
  double s = 0.0;
  for (std::size_t i = 0; i < beta_hat.size(); ++i) {
    const double d = beta_hat[i] - beta_star[i];
    s += d * d;
  }
  return std::sqrt(s);
}

Metrics evaluate(const SupportSet& estimated, const Vector& beta_hat, const GroundTruth& truth) {
  const SupportScores s = support_metrics(estimated, SupportSet(truth.support_star));
  return {s.precision, s.recall, s.f1, estimation_error(beta_hat, truth.beta_star)};
}

Vector symmetric_eigenvalues(Matrix a) {
  const std::size_t m = a.rows();
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < m; ++j) {
        total += a(i, j) * a(i, j);
        if (i != j) off += a(i, j) * a(i, j);
      }
    if (off <= 1e-30 * total || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < m; ++p) {
      for (std::size_t q = p + 1; q < m; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < m; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < m; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
      }
    }
  }
  Vector ev(m);
  for (std::size_t i = 0; i < m; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

std::size_t binomial(std::size_t m, std::size_t k) {
  if (k > m) return 0;
  k = std::min(k, m - k);
  constexpr std::size_t kMax = std::numeric_limits<std::size_t>::max();
  std::size_t r = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t num = m - k + i;
    // r * num / i is exact at every step; check the multiplication first.
    if (r > kMax / num) return kMax;
    r = r * num / i;
  }
  return r;
}

double restricted_eigenvalue(const ProblemInstance& inst, const SupportSet& truth_support,
                             std::size_t max_subsets) {
  const std::size_t k = truth_support.size();
  const std::size_t p = inst.p();
  const std::size_t n = inst.n();
  if (k == 0) throw Error(ErrorCode::InvalidArgument, "truth support is empty");
  if (2 * k > std::min(n, p)) throw Error(ErrorCode::InvalidArgument, "2k exceeds min(n, p)");
  const std::size_t count = binomial(p - k, k);
  if (count > max_subsets) {
    throw Error(ErrorCode::TooLarge,
                std::to_string(count) + " supersets exceed the enumeration limit of " +
                    std::to_string(max_subsets));
  }

  std::vector<Index> rest;
  for (Index j = 0; j < p; ++j)
    if (!truth_support.contains(j)) rest.push_back(j);
  const std::vector<Index> core = truth_support.sorted();

  // Gram entries are reused across subsets.
  const std::size_t m = 2 * k;
  std::vector<std::size_t> pick(k);
  for (std::size_t i = 0; i < k; ++i) pick[i] = i;
  double best = std::numeric_limits<double>::infinity();
  std::vector<Index> cols(m);
  const double inv_n = 1.0 / static_cast<double>(n);
  while (true) {
    for (std::size_t i = 0; i < k; ++i) cols[i] = core[i];
    for (std::size_t i = 0; i < k; ++i) cols[k + i] = rest[pick[i]];
    Matrix g(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = a; b < m; ++b) {
        const double v = simd::dot(inst.X.col(cols[a]).data(), inst.X.col(cols[b]).data(), n) * inv_n;
        g(a, b) = v;
        g(b, a) = v;
      }
    best = std::min(best, symmetric_eigenvalues(std::move(g)).front());

    // next combination in lexicographic order
    std::size_t i = k;
    while (i > 0 && pick[i - 1] == rest.size() - k + (i - 1)) --i;
    if (i == 0) break;
    ++pick[i - 1];
    for (std::size_t j = i; j < k; ++j) pick[j] = pick[j - 1] + 1;
  }
  return std::max(best, 0.0);
}

TheoremDiagnostics sample_condition(const SampleConditionInputs& in) {
  if (in.n == 0 || in.k == 0 || in.p == 0 || !(in.c > 0.0) || !(in.sigma >= 0.0) ||
      !(in.beta_min > 0.0) || !(in.rho_2k > 0.0))
    throw Error(ErrorCode::InvalidArgument, "sample condition inputs must be positive");
  const double n = static_cast<double>(in.n);
  const double k = static_cast<double>(in.k);
  const double logp = std::log(static_cast<double>(in.p));
  const double rho2 = in.rho_2k * in.rho_2k;

  TheoremDiagnostics d;
  d.beta_min = in.beta_min;
  d.rho_2k = in.rho_2k;
  d.epsilon = k / n + std::sqrt(1.0 / k);
  if (d.epsilon >= 1.0) {
    throw Error(ErrorCode::EpsilonInfeasible,
                "k/n + sqrt(1/k) = " + std::to_string(d.epsilon) + " leaves no epsilon below 1");
  }
  d.n_required = 2.0 * in.c * k * logp / in.rho_2k +
                 8.0 * in.sigma * in.c * std::sqrt(k) * logp / (in.beta_min * rho2) +
                 8.0 * in.sigma * in.sigma * in.c * logp / (in.beta_min * in.beta_min * rho2);
  d.c_required = 1.0 / (1.0 - d.epsilon);
  d.condition_holds = n >= d.n_required && in.c > d.c_required;
  return d;
}

double beta_min(const Vector& beta_star) {
  double m = std::numeric_limits<double>::infinity();
  for (double b : beta_star)
    if (b != 0.0) m = std::min(m, std::abs(b));
  if (!std::isfinite(m)) throw Error(ErrorCode::InvalidArgument, "beta_star has no nonzero entries");
  return m;
}

}  // namespace paththresh
