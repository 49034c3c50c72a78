#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "oracles.hpp"
#include "paththresh/csv.hpp"
#include "paththresh/datagen.hpp"
#include "paththresh/errors.hpp"
#include "paththresh/evaluation.hpp"
#include "paththresh/experiment.hpp"
#include "paththresh/scaled_lasso.hpp"

using namespace paththresh;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

struct ScratchDir {
  fs::path path = fs::temp_directory_path() / ("paththresh_harness_" + std::to_string(::getpid()));
  ScratchDir() { fs::create_directories(path); }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch_dir() {
  static const ScratchDir dir;
  return dir.path;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Runs the CLI with stdout and stderr captured to files; returns the exit code.
int run_cli(const std::string& args, std::string* out = nullptr, std::string* err = nullptr) {
  const fs::path o = scratch_dir() / "cli_stdout.txt";
  const fs::path e = scratch_dir() / "cli_stderr.txt";
  const std::string cmd = std::string(PATHTHRESH_CLI) + " " + args + " >" + o.string() + " 2>" + e.string();
  const int status = std::system(cmd.c_str());
  if (out) *out = slurp(o);
  if (err) *err = slurp(e);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::map<std::string, std::string> report_keys(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line) && !line.empty()) {
    const auto comma = line.find(',');
    kv[line.substr(0, comma)] = line.substr(comma + 1);
  }
  return kv;
}

void write_instance(const ProblemInstance& inst, const fs::path& x, const fs::path& y) {
  std::ofstream fx(x), fy(y);
  csv::write_matrix(fx, inst.X);
  csv::write_vector(fy, inst.y);
}

ExperimentConfig small_config() {
  return parse_experiment_config(R"(# tiny sweep
name = unit
n = 40, 60
p = 50
k = 3
sigma = 0.5
covariance = identity, equicorrelated:0.2
regressors = omp, foba, lasso
c = 0.5, 1.0
trials = 2
seed = 11
lasso_points = 30
)");
}

}  // namespace

TEST_CASE("csv number formatting round-trips") {
  for (double v : {0.0, -0.0, 1.0, 0.1, -2.5e-300, 1.7976931348623157e308, 3.141592653589793, 1e-5}) {
    const std::string s = csv::format_double(v);
    CHECK(csv::parse_double(s) == v);
  }
  CHECK(csv::format_double(std::nan("")) == "nan");
  CHECK(csv::format_double(INFINITY) == "inf");
  CHECK(csv::format_double(-INFINITY) == "-inf");
  CHECK(csv::parse_double("+2.5") == 2.5);
  CHECK(csv::parse_double(" 7 ") == 7.0);
  CHECK(code_of([] { (void)csv::parse_double("1,5"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { (void)csv::parse_double("abc"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { (void)csv::parse_double(""); }) == ErrorCode::ParseError);
  CHECK(csv::split_fields("a, b,,c") == std::vector<std::string>{"a", "b", "", "c"});
}

TEST_CASE("csv matrices: header detection, blank lines, ragged rows") {
  std::istringstream with_header("x1,x2,x3\n1,2,3\n\n4,5,6\n");
  const Matrix m = csv::read_matrix(with_header);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  CHECK(m(1, 2) == 6.0);

  std::istringstream bare("1.5,-2\r\n3,4e2\n");
  const Matrix b = csv::read_matrix(bare);
  CHECK(b.rows() == 2);
  CHECK(b(0, 1) == -2.0);
  CHECK(b(1, 1) == 400.0);

  std::istringstream ragged("1,2\n3\n");
  CHECK(code_of([&] { (void)csv::read_matrix(ragged); }) == ErrorCode::ParseError);
  std::istringstream junk("1,2\n3,x\n");
  CHECK(code_of([&] { (void)csv::read_matrix(junk); }) == ErrorCode::ParseError);
  std::istringstream two_cols("y\n1,2\n");
  CHECK(code_of([&] { (void)csv::read_vector(two_cols); }) == ErrorCode::ParseError);

  const ProblemInstance inst = oracle::random_instance(9, 4, 2);
  std::stringstream ss;
  csv::write_matrix(ss, inst.X);
  CHECK(csv::read_matrix(ss) == inst.X);
  std::stringstream sv;
  csv::write_vector(sv, inst.y);
  CHECK(csv::read_vector(sv) == inst.y);
}

TEST_CASE("experiment config parsing") {
  const ExperimentConfig cfg = small_config();
  CHECK(cfg.name == "unit");
  CHECK(cfg.n_values == std::vector<std::size_t>{40, 60});
  CHECK(cfg.covariances.size() == 2);
  CHECK(cfg.covariances[1].a == 0.2);
  REQUIRE(cfg.regressors.size() == 3);
  CHECK(cfg.regressors[2].kind == RegressorKind::Lasso);
  CHECK(cfg.regressors[2].lasso_grid.num_points == 30);
  CHECK(cfg.c_values == std::vector<double>{0.5, 1.0});
  CHECK(cfg.trials == 2);
  CHECK(cfg.seed == 11);
  CHECK_NOTHROW(validate_experiment(cfg));

  const std::string base = "n = 10\np = 10\nk = 2\nregressors = omp\nc = 1\n";
  CHECK_NOTHROW(parse_experiment_config(base));
  CHECK(code_of([&] { (void)parse_experiment_config(base + "bogus = 1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { (void)parse_experiment_config(base + "n = 20\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { (void)parse_experiment_config(base + "trials\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { (void)parse_experiment_config(base + "trials = many\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { (void)parse_experiment_config(base + "regressors = lars\n"); }) != ErrorCode::InvalidArgument);
  CHECK(code_of([&] { (void)parse_experiment_config("p = 10\nk = 2\nregressors = omp\nc = 1\n"); }) ==
        ErrorCode::InvalidConfig);
  CHECK(code_of([&] { (void)parse_experiment_config(base + "trials = 0\n"); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { (void)parse_experiment_config("n = 10\np = 10\nk = 20\nregressors = omp\nc = 1\n"); }) ==
        ErrorCode::InvalidConfig);
}

TEST_CASE("results table round-trips through csv") {
  ResultsTable t;
  ResultRow r;
  r.experiment = "e";
  r.trial = 3;
  r.seed = 14;
  r.regressor = "foba";
  r.c = 1.5;
  r.n = 100;
  r.p = 500;
  r.k = 10;
  r.sigma = 1.0;
  r.covariance = "equicorrelated:0.2";
  r.stop_s = 9;
  r.f1 = 0.9473684210526315;
  r.precision = 1.0;
  r.recall = 0.9;
  r.err = 0.123456789;
  r.wall_time = 0.25;
  t.rows.push_back(r);
  r.status = "NonConverged";
  r.message = "cap, reached\nafter 5";
  r.f1 = r.precision = r.recall = r.err = std::nan("");
  t.rows.push_back(r);

  std::stringstream ss;
  write_results_csv(ss, t);
  const std::string text = ss.str();
  CHECK(text.rfind("experiment,trial,seed,regressor,c,n,p,k,sigma,covariance,stop_s,f1,precision,recall,err,wall_time", 0) == 0);
  const ResultsTable back = read_results_csv(ss);
  REQUIRE(back.rows.size() == 2);
  CHECK(back.rows[0] == t.rows[0]);
  CHECK(back.rows[1].status == "NonConverged");
  CHECK(back.rows[1].message.find('\n') == std::string::npos);
  CHECK(std::isnan(back.rows[1].f1));
  CHECK_FALSE(same_results(t, back));  // the message was sanitized
  ResultsTable t2 = t;
  t2.rows[1].message = back.rows[1].message;
  CHECK(same_results(t2, back));
  t2.rows[0].wall_time = 99.0;
  CHECK(same_results(t2, back));
  t2.rows[0].stop_s = 8;
  CHECK_FALSE(same_results(t2, back));
}

TEST_CASE("a single-trial experiment yields one row per regressor and c") {
  ExperimentConfig cfg = parse_experiment_config("n = 50\np = 40\nk = 3\nregressors = omp\nc = 1\n");
  const ResultsTable t = run_experiment(cfg);
  REQUIRE(t.rows.size() == 1);
  const ResultRow& r = t.rows[0];
  CHECK(r.status == "ok");
  CHECK(r.trial == 0);
  CHECK(r.seed == 1);
  CHECK(r.regressor == "omp");
  CHECK(r.n == 50);
  CHECK(r.f1 >= 0.0);
  CHECK(r.f1 <= 1.0);
  CHECK(r.wall_time >= 0.0);

  // The row agrees with running the pieces by hand.
  GenConfig g;
  g.n = 50;
  g.p = 40;
  g.k = 3;
  g.seed = 1;
  const ProblemInstance inst = generate(g);
  const PathRun run = run_path(RegressorSpec::omp(), inst, PathConfig{1.0});
  CHECK(r.stop_s == run.selection.stop_s);
  const Metrics m = evaluate(run.selection.support, run.selection.coefficients, *inst.truth);
  CHECK(r.f1 == m.f1);
  CHECK(r.err == m.err);
}

TEST_CASE("experiments are deterministic across runs and thread counts") {
  ExperimentConfig cfg = small_config();
  std::vector<ResultRow> streamed;
  const ResultsTable a = run_experiment(cfg, [&](const ResultRow& r) { streamed.push_back(r); });
  CHECK(a.rows.size() == 2 * 2 * 2 * 3 * 2);
  CHECK(streamed == a.rows);
  cfg.threads = 3;
  const ResultsTable b = run_experiment(cfg);
  CHECK(same_results(a, b));
  // Ordering: covariance outermost, then n; within a cell trial, regressor, c.
  CHECK(a.rows[0].covariance == "identity");
  CHECK(a.rows[0].n == 40);
  CHECK(a.rows[1].c == 1.0);
  CHECK(a.rows[2].regressor == "foba");
  CHECK(a.rows[6].trial == 1);
  CHECK(a.rows[6].seed == 12);
  CHECK(a.rows[12].n == 60);
  CHECK(a.rows[24].covariance == "equicorrelated:0.2");
  for (const auto& r : a.rows) CHECK(r.status == "ok");
}

TEST_CASE("summary statistics") {
  ResultsTable t;
  for (int i = 0; i < 3; ++i) {
    ResultRow r;
    r.regressor = "omp";
    r.c = 1.0;
    r.n = 10;
    r.p = 20;
    r.k = 2;
    r.sigma = 1.0;
    r.covariance = "identity";
    r.f1 = 0.5 * i;  // 0, 0.5, 1
    r.err = std::exp(static_cast<double>(i));
    r.stop_s = 2;
    t.rows.push_back(r);
  }
  ResultRow bad = t.rows[0];
  bad.status = "NonConverged";
  t.rows.push_back(bad);
  const auto s = summarize(t);
  REQUIRE(s.size() == 1);
  CHECK(s[0].runs == 3);
  CHECK(s[0].failures == 1);
  CHECK(s[0].mean_f1 == doctest::Approx(0.5));
  CHECK(s[0].std_f1 == doctest::Approx(0.5));
  CHECK(s[0].mean_log_err == doctest::Approx(1.0));
  CHECK(s[0].std_log_err == doctest::Approx(1.0));
  CHECK(s[0].mean_stop_s == 2.0);
  CHECK(s[0].std_stop_s == 0.0);
  CHECK(summary_path_for("out/results.csv") == fs::path("out/results.summary.csv"));
  std::stringstream ss;
  write_summary_csv(ss, s);
  CHECK(ss.str().find("mean_f1") != std::string::npos);
}

TEST_CASE("replaying a path dump reproduces the selection") {
  GenConfig g;
  g.n = 80;
  g.p = 120;
  g.k = 5;
  g.seed = 6;
  const ProblemInstance inst = generate(g);
  for (auto spec : {RegressorSpec::omp(), RegressorSpec::foba(), RegressorSpec::lasso()}) {
    const SolutionPath path = compute_path(spec, inst);
    DeltaCache cache(path, inst, DeltaMode::Ratio);
    const auto rows = dump_path(cache);
    std::stringstream ss;
    write_path_dump(ss, rows);
    CHECK(ss.str().rfind("s,loss,sigma2_hat,delta,support\n", 0) == 0);
    const auto back = read_path_dump(ss);
    REQUIRE(back.size() == rows.size());
    for (double c : {0.3, 1.0, 2.0}) {
      const PathSelection sel = select_on_path(cache, PathConfig{c});
      const StopPoint sp = replay_path_dump(back, inst.n(), inst.p(), PathConfig{c});
      CHECK(back[sp.index].s == sel.stop_s);
      CHECK(SupportSet(back[sp.index].support).same_set(sel.support));
      CHECK(sp.reason == sel.stop_reason);
    }
  }
}

TEST_CASE("cli: select on a noiseless instance returns the planted support") {
  GenConfig g;
  g.n = 60;
  g.p = 80;
  g.k = 3;
  g.sigma = 0.0;
  g.seed = 4;
  const ProblemInstance inst = generate(g);
  const fs::path x = scratch_dir() / "noiseless_X.csv";
  const fs::path y = scratch_dir() / "noiseless_y.csv";
  write_instance(inst, x, y);
  std::string expect;
  for (Index j : inst.truth->support_star) expect += (expect.empty() ? "" : " ") + std::to_string(j + 1);
  for (const char* reg : {"omp", "foba"}) {
    std::string out;
    REQUIRE(run_cli(std::string("select ") + x.string() + " " + y.string() + " --regressor " + reg + " --c 0.5",
                    &out) == 0);
    const auto kv = report_keys(out);
    CHECK(kv.at("stop_s") == "3");
    CHECK(kv.at("support") == expect);
    CHECK(out.find("index,coefficient,coefficient_raw") != std::string::npos);
  }
}

TEST_CASE("cli: generate, select with y = 0, error exits") {
  const fs::path x = scratch_dir() / "gen_X.csv";
  const fs::path y = scratch_dir() / "gen_y.csv";
  const fs::path truth = scratch_dir() / "gen_truth.csv";
  REQUIRE(run_cli("generate --n 30 --p 40 --k 3 --seed 9 --out-x " + x.string() + " --out-y " + y.string() +
                  " --out-truth " + truth.string()) == 0);
  GenConfig g;
  g.n = 30;
  g.p = 40;
  g.k = 3;
  g.seed = 9;
  const ProblemInstance inst = generate(g);
  CHECK(csv::read_matrix(x) == inst.X);
  CHECK(csv::read_vector(y) == inst.y);
  CHECK(slurp(truth).rfind("index,beta\n", 0) == 0);

  const fs::path zeros = scratch_dir() / "zeros_y.csv";
  {
    std::ofstream f(zeros);
    f << "y\n";
    for (int i = 0; i < 30; ++i) f << "0\n";
  }
  std::string out;
  REQUIRE(run_cli("select " + x.string() + " " + zeros.string(), &out) == 0);
  CHECK(report_keys(out).at("stop_s") == "0");
  CHECK(report_keys(out).at("support").empty());

  const fs::path short_y = scratch_dir() / "short_y.csv";
  {
    std::ofstream f(short_y);
    for (int i = 0; i < 29; ++i) f << "1\n";
  }
  std::string err;
  CHECK(run_cli("select " + x.string() + " " + short_y.string(), nullptr, &err) != 0);
  CHECK(err.find("ShapeMismatch") != std::string::npos);
  CHECK(run_cli("select " + x.string() + " " + y.string() + " --regressor lars") != 0);
  CHECK(run_cli("select " + x.string() + " " + y.string() + " --c -1") != 0);
  CHECK(run_cli("select " + x.string()) != 0);
}

TEST_CASE("cli: path dump and scaled lasso agree with the library") {
  GenConfig g;
  g.n = 50;
  g.p = 30;
  g.k = 3;
  g.seed = 10;
  const ProblemInstance gen = generate(g);
  const fs::path x = scratch_dir() / "sl_X.csv";
  const fs::path y = scratch_dir() / "sl_y.csv";
  write_instance(gen, x, y);
  // The CLI normalizes whatever it reads, so compare against the same ingestion.
  const ProblemInstance inst = make_instance(csv::read_matrix(x), csv::read_vector(y));

  std::string out;
  REQUIRE(run_cli("scaled-lasso " + x.string() + " " + y.string() + " --c 1.0", &out) == 0);
  const auto kv = report_keys(out);
  const ScaledLassoResult ref = scaled_lasso(inst, scaled_lasso_lambda0(1.0, 50, 30));
  CHECK(csv::parse_double(kv.at("sigma_hat")) == ref.sigma_hat);
  CHECK(csv::parse_double(kv.at("lambda")) == ref.lambda);
  CHECK(kv.at("converged") == "true");

  const fs::path dump = scratch_dir() / "path.csv";
  REQUIRE(run_cli("path " + x.string() + " " + y.string() + " --regressor omp --out " + dump.string()) == 0);
  std::ifstream in(dump);
  const auto rows = read_path_dump(in);
  const SolutionPath path = omp_path(inst, 30);
  REQUIRE(rows.size() == path.entries.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    CHECK(rows[i].loss == path.entries[i].loss);
    CHECK(rows[i].support == path.entries[i].support.indices());
  }
}

TEST_CASE("cli: experiment writes results and a summary") {
  const fs::path cfg = scratch_dir() / "exp.cfg";
  const fs::path out = scratch_dir() / "exp.csv";
  {
    std::ofstream f(cfg);
    f << "name = cli\nn = 40\np = 30\nk = 2\nregressors = omp, marginal\nc = 1\ntrials = 3\n";
  }
  REQUIRE(run_cli("experiment " + cfg.string() + " --seed 5 --threads 2 --out " + out.string()) == 0);
  std::ifstream in(out);
  const ResultsTable t = read_results_csv(in);
  CHECK(t.rows.size() == 6);
  CHECK(t.rows[0].seed == 5);
  CHECK(fs::exists(summary_path_for(out)));
  ExperimentConfig c = load_experiment_config(cfg);
  c.seed = 5;
  CHECK(same_results(t, run_experiment(c)));
}
