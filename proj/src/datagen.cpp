#include "paththresh/datagen.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numbers>

#include "paththresh/errors.hpp"
#include "paththresh/rng.hpp"
#include "paththresh/simd/kernels.hpp"

namespace paththresh {

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t m) {
  if (m <= 1) return 0;
  int shift = 0;
  while (((m - 1) >> shift) != 0) ++shift;
  const std::uint64_t mask = shift >= 64 ? ~std::uint64_t{0} : ((std::uint64_t{1} << shift) - 1);
  while (true) {
    const std::uint64_t v = engine_() & mask;
    if (v < m) return v;
  }
}

std::string to_string(const Covariance& c) {
  if (c.kind == Covariance::Kind::Identity) return "identity";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, c.a);
  return "equicorrelated:" + std::string(buf, ptr);
}

std::optional<Covariance> parse_covariance(std::string_view s) {
  if (s == "identity") return Covariance::identity();
  constexpr std::string_view prefix = "equicorrelated:";
  if (s.substr(0, prefix.size()) == prefix) {
    const std::string_view num = s.substr(prefix.size());
    double a = 0.0;
    auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), a);
    if (ec != std::errc{} || ptr != num.data() + num.size()) return std::nullopt;
    return Covariance::equicorrelated(a);
  }
  return std::nullopt;
}

void validate_config(const GenConfig& cfg) {
  if (cfg.n == 0 || cfg.p == 0) throw Error(ErrorCode::InvalidConfig, "n and p must be positive");
  if (cfg.k > std::min(cfg.n, cfg.p)) throw Error(ErrorCode::InvalidConfig, "k exceeds min(n, p)");
  if (!(cfg.beta_lo > 0.0) || !(cfg.beta_lo <= cfg.beta_hi))
    throw Error(ErrorCode::InvalidConfig, "beta range must satisfy 0 < lo <= hi");
  if (!(cfg.sigma >= 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma must be nonnegative");
  if (cfg.covariance.kind == Covariance::Kind::EquiCorrelated &&
      !(cfg.covariance.a >= 0.0 && cfg.covariance.a < 1.0))
    throw Error(ErrorCode::InvalidConfig, "equicorrelation must lie in [0, 1)");
}

NormalizedColumns normalize_columns(const Matrix& raw) {
  NormalizedColumns out{raw, Vector(raw.cols())};
  const double sqrt_n = std::sqrt(static_cast<double>(raw.rows()));
  for (Index j = 0; j < raw.cols(); ++j) {
    auto c = out.X.col(j);
    const double norm = std::sqrt(simd::sum_squares(c.data(), c.size()));
    if (!(norm >= 1e-12)) throw Error(ErrorCode::ZeroColumn, "column " + std::to_string(j) + " is zero");
    const double scale = norm / sqrt_n;
    for (double& v : c) v /= scale;
    out.scale[j] = scale;
  }
  return out;
}

ProblemInstance make_instance(const Matrix& raw_X, Vector y, Vector* scale_out) {
  if (y.size() != raw_X.rows())
    throw Error(ErrorCode::ShapeMismatch, "X has " + std::to_string(raw_X.rows()) + " rows but y has " +
                                              std::to_string(y.size()) + " entries");
  NormalizedColumns nc = normalize_columns(raw_X);
  if (scale_out) *scale_out = nc.scale;
  ProblemInstance inst{std::move(nc.X), std::move(y), std::nullopt};
  validate_instance(inst);
  return inst;
}

ProblemInstance generate(const GenConfig& cfg) {
  validate_config(cfg);
  Rng rng(cfg.seed);
  const std::size_t n = cfg.n;
  const std::size_t p = cfg.p;

  Matrix raw(n, p);
  const bool equi = cfg.covariance.kind == Covariance::Kind::EquiCorrelated;
  const double shared = equi ? std::sqrt(cfg.covariance.a) : 0.0;
  const double own = equi ? std::sqrt(1.0 - cfg.covariance.a) : 1.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double g = equi ? rng.normal() : 0.0;
    for (std::size_t j = 0; j < p; ++j) raw(i, j) = shared * g + own * rng.normal();
  }
  Matrix X = normalize_columns(raw).X;

  std::vector<Index> perm(p);
  for (Index j = 0; j < p; ++j) perm[j] = j;
  for (std::size_t i = 0; i < cfg.k; ++i) {
    const std::size_t pick = i + static_cast<std::size_t>(rng.below(p - i));
    std::swap(perm[i], perm[pick]);
  }
  std::vector<Index> support(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(cfg.k));
  std::sort(support.begin(), support.end());

  Vector beta(p, 0.0);
  for (Index j : support) {
    double b = rng.uniform(cfg.beta_lo, cfg.beta_hi);
    if (cfg.signs == SignScheme::Random && rng.uniform() < 0.5) b = -b;
    beta[j] = b;
  }

  Vector y(n, 0.0);
  for (Index j : support) simd::axpy(beta[j], X.col(j).data(), y.data(), n);
  for (std::size_t i = 0; i < n; ++i) y[i] += cfg.sigma * rng.normal();

  return ProblemInstance{std::move(X), std::move(y),
                         GroundTruth{std::move(beta), std::move(support), cfg.sigma * cfg.sigma}};
}

}  // namespace paththresh
