#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "paththresh/datagen.hpp"
#include "paththresh/path_thresholding.hpp"

namespace paththresh {

/// A Monte-Carlo sweep. Every combination of the generator lists forms one
/// grid cell; each cell runs `trials` instances, trial t drawn with seed
/// `seed + t`.
struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<std::size_t> n_values;
  std::vector<std::size_t> p_values;
  std::vector<std::size_t> k_values;
  std::vector<double> sigma_values{1.0};
  std::vector<Covariance> covariances{Covariance::identity()};
  double beta_lo = 1.0;
  double beta_hi = 2.0;
  SignScheme signs = SignScheme::Random;
  std::vector<RegressorSpec> regressors;
  std::vector<double> c_values;
  std::size_t trials = 1;
  std::uint64_t seed = 1;
  DeltaMode delta_mode = DeltaMode::Ratio;
  SigmaDenominator sigma_denominator = SigmaDenominator::N;
  std::string output_path = "results.csv";
  std::size_t threads = 1;  // 0 = one per hardware thread
};

/// Flat `key = value` text, one entry per line, '#' starts a comment, list
/// values are comma separated. Unknown or repeated keys are errors.
/// Throws Error{ParseError} for malformed text, Error{InvalidConfig} for
/// values out of range.
ExperimentConfig parse_experiment_config(std::string_view text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Throws Error{InvalidConfig} unless trials >= 1 and every list is nonempty.
void validate_experiment(const ExperimentConfig& cfg);

struct ResultRow {
  std::string experiment;
  std::size_t trial = 0;
  std::uint64_t seed = 0;
  std::string regressor;
  double c = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t k = 0;
  double sigma = 0.0;
  std::string covariance;
  std::size_t stop_s = 0;
  double f1 = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double err = 0.0;
  double wall_time = 0.0;  // seconds: path computation plus this c's selection
  std::string status = "ok";  // "ok" or the error code of a failed run
  std::string message;

  bool operator==(const ResultRow&) const = default;
};

struct ResultsTable {
  std::vector<ResultRow> rows;
};

/// Column names in output order.
const std::vector<std::string>& results_columns();

void write_results_csv(std::ostream& out, const ResultsTable& table);
void write_result_row(std::ostream& out, const ResultRow& row);
ResultsTable read_results_csv(std::istream& in);

/// Equal except for wall_time.
bool same_results(const ResultsTable& a, const ResultsTable& b);

/// Runs the sweep. Rows come out ordered by grid cell (covariance, p, k,
/// sigma, n, outermost first), then trial, regressor and c. A trial that
/// throws yields one error row per (regressor, c) instead of aborting the
/// sweep. When `sink` is set it receives every row in that same order as soon
/// as all earlier rows are complete.
ResultsTable run_experiment(const ExperimentConfig& cfg,
                            const std::function<void(const ResultRow&)>& sink = nullptr);

struct SummaryRow {
  std::string regressor;
  double c = 0.0;
  std::size_t n = 0;
  std::size_t p = 0;
  std::size_t k = 0;
  double sigma = 0.0;
  std::string covariance;
  std::size_t runs = 0;      // successful rows in the cell
  std::size_t failures = 0;
  double mean_f1 = 0.0, std_f1 = 0.0;
  double mean_precision = 0.0, std_precision = 0.0;
  double mean_recall = 0.0, std_recall = 0.0;
  double mean_err = 0.0, std_err = 0.0;
  double mean_log_err = 0.0, std_log_err = 0.0;
  double mean_stop_s = 0.0, std_stop_s = 0.0;
};

/// Per-cell mean and sample standard deviation over the successful rows, cells
/// in first-appearance order.
std::vector<SummaryRow> summarize(const ResultsTable& table);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows);

/// `results.csv` -> `results.summary.csv`
std::filesystem::path summary_path_for(const std::filesystem::path& results);

// Path dumps: one CSV row per path entry with columns s, loss, sigma2_hat,
// delta, support. delta is empty where undefined; support lists 1-based column
// indices separated by spaces.

struct PathDumpRow {
  std::size_t s = 0;
  double loss = 0.0;
  double sigma2_hat = 0.0;
  std::optional<double> delta;
  std::vector<Index> support;  // 0-based
};

/// Evaluates Delta at every entry of the cached path.
std::vector<PathDumpRow> dump_path(DeltaCache& deltas);
void write_path_dump(std::ostream& out, const std::vector<PathDumpRow>& rows);
std::vector<PathDumpRow> read_path_dump(std::istream& in);

/// The stopping rule replayed from a dump alone. The first row must be s = 0,
/// whose loss is ||y||^2.
StopPoint replay_path_dump(const std::vector<PathDumpRow>& rows, std::size_t n, std::size_t p,
                           const PathConfig& cfg);

}  // namespace paththresh
