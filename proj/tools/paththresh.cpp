// Command-line front end. Column indices are 1-based in all output.

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "paththresh/csv.hpp"
#include "paththresh/datagen.hpp"
#include "paththresh/errors.hpp"
#include "paththresh/experiment.hpp"
#include "paththresh/path_thresholding.hpp"
#include "paththresh/scaled_lasso.hpp"
#include "paththresh/simd/kernels.hpp"

namespace pt = paththresh;

namespace {

struct DataArgs {
  std::string x_path;
  std::string y_path;
};

struct SelectArgs {
  std::string regressor = "omp";
  double c = 1.0;
  std::string delta_mode = "ratio";
  std::string sigma_denominator = "n";
  double foba_ratio = 0.5;
  std::size_t lasso_points = 100;
  std::string out;
};

void add_data(CLI::App* cmd, DataArgs& d) {
  cmd->add_option("X", d.x_path, "Design matrix CSV, one row per observation")->required()->check(CLI::ExistingFile);
  cmd->add_option("y", d.y_path, "Response CSV, a single column")->required()->check(CLI::ExistingFile);
}

void add_select_flags(CLI::App* cmd, SelectArgs& a) {
  cmd->add_option("--regressor", a.regressor, "Regressor generating the solution path")
      ->check(CLI::IsMember({"omp", "foba", "marginal", "lasso"}))
      ->capture_default_str();
  cmd->add_option("--c", a.c, "Threshold constant")->check(CLI::PositiveNumber)->capture_default_str();
  cmd->add_option("--delta-mode", a.delta_mode, "Loss-decrease statistic")
      ->check(CLI::IsMember({"ratio", "correlation"}))
      ->capture_default_str();
  cmd->add_option("--sigma-denominator", a.sigma_denominator, "Noise-variance denominator")
      ->check(CLI::IsMember({"n", "n-s"}))
      ->capture_default_str();
  cmd->add_option("--foba-ratio", a.foba_ratio, "FoBa backward-step ratio")->capture_default_str();
  cmd->add_option("--lasso-points", a.lasso_points, "Lasso lambda grid size")->capture_default_str();
  cmd->add_option("--out", a.out, "Write the report here instead of stdout");
}

pt::RegressorSpec make_spec(const SelectArgs& a) {
  pt::RegressorSpec spec{*pt::parse_regressor(a.regressor)};
  spec.foba_backward_ratio = a.foba_ratio;
  spec.lasso_grid.num_points = a.lasso_points;
  spec.lasso_grid.decay = pt::LassoGrid::default_decay(a.lasso_points);
  pt::validate_spec(spec);
  return spec;
}

pt::PathConfig make_path_config(const SelectArgs& a) {
  pt::PathConfig cfg;
  cfg.c = a.c;
  cfg.delta_mode = *pt::parse_delta_mode(a.delta_mode);
  cfg.sigma_denominator = *pt::parse_sigma_denominator(a.sigma_denominator);
  return cfg;
}

pt::ProblemInstance load_instance(const DataArgs& d, pt::Vector& scale) {
  const pt::Matrix X = pt::csv::read_matrix(std::filesystem::path(d.x_path));
  pt::Vector y = pt::csv::read_vector(std::filesystem::path(d.y_path));
  return pt::make_instance(X, std::move(y), &scale);
}

// Output goes to --out when given, else stdout.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_ = std::make_unique<std::ofstream>(path);
      if (!*file_) throw pt::Error(pt::ErrorCode::InvalidArgument, "cannot write " + path);
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

std::string support_text(const pt::SupportSet& s) {
  std::string out;
  for (pt::Index j : s.sorted()) {
    if (!out.empty()) out += ' ';
    out += std::to_string(j + 1);
  }
  return out;
}

void write_coefficients(std::ostream& out, const pt::SupportSet& support, const pt::Vector& beta,
                        const pt::Vector& scale) {
  out << "\nindex,coefficient,coefficient_raw\n";
  for (pt::Index j : support.sorted())
    out << j + 1 << ',' << pt::csv::format_double(beta[j]) << ',' << pt::csv::format_double(beta[j] / scale[j])
        << '\n';
}

int cmd_select(const DataArgs& d, const SelectArgs& a) {
  pt::Vector scale;
  const pt::ProblemInstance inst = load_instance(d, scale);
  const pt::PathRun run = pt::run_path(make_spec(a), inst, make_path_config(a));
  const pt::PathSelection& sel = run.selection;
  Output o(a.out);
  std::ostream& out = o.stream();
  out << "key,value\n";
  out << "regressor," << a.regressor << '\n';
  out << "c," << pt::csv::format_double(sel.c) << '\n';
  out << "delta_mode," << a.delta_mode << '\n';
  out << "sigma_denominator," << a.sigma_denominator << '\n';
  out << "stop_s," << sel.stop_s << '\n';
  out << "stop_reason," << pt::to_string(sel.stop_reason) << '\n';
  out << "sigma2_hat," << pt::csv::format_double(sel.sigma2_at_stop) << '\n';
  out << "delta," << (std::isnan(sel.delta_at_stop) ? "" : pt::csv::format_double(sel.delta_at_stop)) << '\n';
  out << "threshold," << pt::csv::format_double(sel.threshold_at_stop) << '\n';
  out << "support," << support_text(sel.support) << '\n';
  write_coefficients(out, sel.support, sel.coefficients, scale);
  return 0;
}

int cmd_path(const DataArgs& d, const SelectArgs& a) {
  pt::Vector scale;
  const pt::ProblemInstance inst = load_instance(d, scale);
  const pt::SolutionPath path = pt::compute_path(make_spec(a), inst);
  pt::DeltaCache cache(path, inst, *pt::parse_delta_mode(a.delta_mode));
  Output o(a.out);
  pt::write_path_dump(o.stream(), pt::dump_path(cache));
  return 0;
}

struct ScaledArgs {
  std::optional<double> c;
  std::optional<double> lambda0;
  std::string out;
};

int cmd_scaled_lasso(const DataArgs& d, const ScaledArgs& a) {
  pt::Vector scale;
  const pt::ProblemInstance inst = load_instance(d, scale);
  const double lambda0 = a.lambda0 ? *a.lambda0 : pt::scaled_lasso_lambda0(a.c.value_or(1.0), inst.n(), inst.p());
  const pt::ScaledLassoResult res = pt::scaled_lasso(inst, lambda0);
  std::vector<pt::Index> nz;
  for (pt::Index j = 0; j < inst.p(); ++j)
    if (res.beta_hat[j] != 0.0) nz.push_back(j);
  const pt::SupportSet support(nz);
  Output o(a.out);
  std::ostream& out = o.stream();
  out << "key,value\n";
  out << "lambda0," << pt::csv::format_double(res.lambda0) << '\n';
  out << "lambda," << pt::csv::format_double(res.lambda) << '\n';
  out << "sigma_hat," << pt::csv::format_double(res.sigma_hat) << '\n';
  out << "iterations," << res.iterations << '\n';
  out << "converged," << (res.converged ? "true" : "false") << '\n';
  out << "objective," << pt::csv::format_double(res.objective_trace.back()) << '\n';
  out << "support," << support_text(support) << '\n';
  write_coefficients(out, support, res.beta_hat, scale);
  return 0;
}

struct ExperimentArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string out;
};

int cmd_experiment(const ExperimentArgs& a) {
  pt::ExperimentConfig cfg = pt::load_experiment_config(a.config);
  if (a.seed) cfg.seed = *a.seed;
  if (a.threads) cfg.threads = *a.threads;
  if (!a.out.empty()) cfg.output_path = a.out;

  std::ofstream out(cfg.output_path);
  if (!out) throw pt::Error(pt::ErrorCode::InvalidArgument, "cannot write " + cfg.output_path);
  const auto& cols = pt::results_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n' << std::flush;
  std::size_t failures = 0;
  const pt::ResultsTable table = pt::run_experiment(cfg, [&](const pt::ResultRow& r) {
    pt::write_result_row(out, r);
    out.flush();
    if (r.status != "ok") ++failures;
  });

  const auto summary_path = pt::summary_path_for(cfg.output_path);
  std::ofstream sum(summary_path);
  if (!sum) throw pt::Error(pt::ErrorCode::InvalidArgument, "cannot write " + summary_path.string());
  pt::write_summary_csv(sum, pt::summarize(table));

  std::cerr << table.rows.size() << " rows written to " << cfg.output_path << ", summary in "
            << summary_path.string();
  if (failures) std::cerr << " (" << failures << " failed runs)";
  std::cerr << '\n';
  return 0;
}

struct GenerateArgs {
  pt::GenConfig gen;
  std::string covariance = "identity";
  std::string signs = "random";
  std::string out_x = "X.csv";
  std::string out_y = "y.csv";
  std::string out_truth;
};

int cmd_generate(GenerateArgs a) {
  const auto cov = pt::parse_covariance(a.covariance);
  if (!cov) throw pt::Error(pt::ErrorCode::InvalidConfig, "unknown covariance '" + a.covariance + "'");
  a.gen.covariance = *cov;
  a.gen.signs = a.signs == "positive" ? pt::SignScheme::Positive : pt::SignScheme::Random;
  const pt::ProblemInstance inst = pt::generate(a.gen);
  auto open = [](const std::string& path) {
    std::ofstream f(path);
    if (!f) throw pt::Error(pt::ErrorCode::InvalidArgument, "cannot write " + path);
    return f;
  };
  {
    auto f = open(a.out_x);
    pt::csv::write_matrix(f, inst.X);
  }
  {
    auto f = open(a.out_y);
    pt::csv::write_vector(f, inst.y);
  }
  if (!a.out_truth.empty()) {
    auto f = open(a.out_truth);
    f << "index,beta\n";
    for (pt::Index j : inst.truth->support_star)
      f << j + 1 << ',' << pt::csv::format_double(inst.truth->beta_star[j]) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse regression with path thresholding"};
  app.require_subcommand(1);
  std::string kernel;
  app.add_option("--kernel", kernel, "Numeric kernel backend (scalar, avx2, neon)");

  DataArgs data;
  SelectArgs sel;
  auto* select = app.add_subcommand("select", "Select a support by path thresholding");
  add_data(select, data);
  add_select_flags(select, sel);

  auto* path = app.add_subcommand("path", "Dump the solution path with Delta at every level");
  add_data(path, data);
  add_select_flags(path, sel);

  ScaledArgs scaled;
  auto* sl = app.add_subcommand("scaled-lasso", "Fit the scaled Lasso");
  add_data(sl, data);
  auto* c_opt = sl->add_option("--c", scaled.c, "lambda0 = sqrt(2 c log p / n)")->check(CLI::PositiveNumber);
  sl->add_option("--lambda0", scaled.lambda0, "Penalty level")->check(CLI::PositiveNumber)->excludes(c_opt);
  sl->add_option("--out", scaled.out, "Write the report here instead of stdout");

  ExperimentArgs exp;
  auto* ex = app.add_subcommand("experiment", "Run a Monte-Carlo sweep from a config file");
  ex->add_option("config", exp.config, "Experiment config file")->required()->check(CLI::ExistingFile);
  ex->add_option("--seed", exp.seed, "Override the base seed");
  ex->add_option("--threads", exp.threads, "Worker threads (0 = all cores)");
  ex->add_option("--out", exp.out, "Override the results path");

  GenerateArgs gen;
  auto* g = app.add_subcommand("generate", "Write a synthetic instance as CSV");
  g->add_option("--n", gen.gen.n, "Observations")->capture_default_str();
  g->add_option("--p", gen.gen.p, "Columns")->capture_default_str();
  g->add_option("--k", gen.gen.k, "Support size")->capture_default_str();
  g->add_option("--sigma", gen.gen.sigma, "Noise level")->capture_default_str();
  g->add_option("--covariance", gen.covariance, "identity or equicorrelated:<a>")->capture_default_str();
  g->add_option("--beta-lo", gen.gen.beta_lo, "Smallest |beta|")->capture_default_str();
  g->add_option("--beta-hi", gen.gen.beta_hi, "Largest |beta|")->capture_default_str();
  g->add_option("--signs", gen.signs, "positive or random")
      ->check(CLI::IsMember({"positive", "random"}))
      ->capture_default_str();
  g->add_option("--seed", gen.gen.seed, "Random seed")->capture_default_str();
  g->add_option("--out-x", gen.out_x, "Design matrix output")->capture_default_str();
  g->add_option("--out-y", gen.out_y, "Response output")->capture_default_str();
  g->add_option("--out-truth", gen.out_truth, "Planted coefficients output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!kernel.empty()) {
      const auto b = pt::simd::parse_backend(kernel);
      if (!b || !pt::simd::set_backend(*b)) {
        std::cerr << "error: kernel backend '" << kernel << "' is not available\n";
        return 2;
      }
    }
    if (select->parsed()) return cmd_select(data, sel);
    if (path->parsed()) return cmd_path(data, sel);
    if (sl->parsed()) return cmd_scaled_lasso(data, scaled);
    if (ex->parsed()) return cmd_experiment(exp);
    if (g->parsed()) return cmd_generate(gen);
  } catch (const pt::Error& e) {
    std::cerr << "error: " << pt::to_string(e.code()) << ": " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
