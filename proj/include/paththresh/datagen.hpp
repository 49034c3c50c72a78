#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "paththresh/linalg.hpp"

namespace paththresh {

struct Covariance {
  enum class Kind { Identity, EquiCorrelated };
  Kind kind = Kind::Identity;
  double a = 0.0;  // Sigma = (1 - a) I + a 11^T, used by EquiCorrelated

  static Covariance identity() { return {}; }
  static Covariance equicorrelated(double a) { return {Kind::EquiCorrelated, a}; }
};

/// "identity" or "equicorrelated:<a>"
std::string to_string(const Covariance& c);
std::optional<Covariance> parse_covariance(std::string_view s);

enum class SignScheme { Positive, Random };

struct GenConfig {
  std::size_t p = 100;
  std::size_t n = 100;
  std::size_t k = 5;
  double sigma = 1.0;
  Covariance covariance{};
  double beta_lo = 1.0;
  double beta_hi = 2.0;
  SignScheme signs = SignScheme::Random;
  std::uint64_t seed = 1;
};

/// Throws Error{InvalidConfig} unless k <= min(n, p), 0 < lo <= hi, sigma >= 0,
/// and 0 <= a < 1.
void validate_config(const GenConfig& cfg);

/// Draws a synthetic instance y = X beta* + w.
///
/// Draw order, all from one Rng seeded with cfg.seed:
///  1. X row by row; for EquiCorrelated a row is sqrt(a) g 1 + sqrt(1-a) z with
///     scalar g drawn before the row's p entries of z.
///  2. The support: partial Fisher-Yates over 0..p-1, k swaps; stored sorted.
///  3. For each support index in ascending order, |beta| ~ U[lo, hi] and, for
///     random signs, one further uniform (< 0.5 means negative).
///  4. Noise w_i ~ N(0, sigma^2), i = 0..n-1.
/// Columns are normalized to ||X_j||^2 = n after step 1, before y is formed.
ProblemInstance generate(const GenConfig& cfg);

struct NormalizedColumns {
  Matrix X;
  Vector scale;  // X_raw(:, j) = scale[j] * X(:, j)
};

/// Rescales every column to ||X_j||^2 = n. Throws Error{ZeroColumn} for a
/// column with norm below 1e-12.
NormalizedColumns normalize_columns(const Matrix& raw);

/// Builds an instance from raw data, normalizing X; returns the scales so
/// coefficients can be mapped back to raw units (beta_raw_j = beta_j / scale_j).
ProblemInstance make_instance(const Matrix& raw_X, Vector y, Vector* scale_out = nullptr);

}  // namespace paththresh
