#include "paththresh/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "paththresh/csv.hpp"
#include "paththresh/errors.hpp"
#include "paththresh/evaluation.hpp"

namespace paththresh {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_list(std::string_view value) {
  std::vector<std::string> items = csv::split_fields(value);
  for (const auto& it : items)
    if (it.empty()) throw Error(ErrorCode::ParseError, "empty item in list '" + std::string(value) + "'");
  return items;
}

template <class T>
T parse_integer(std::string_view s, std::string_view key) {
  T v{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw Error(ErrorCode::ParseError, "key '" + std::string(key) + "': '" + std::string(s) + "' is not an integer");
  return v;
}

double parse_real(std::string_view s, std::string_view key) {
  return csv::parse_double(s, "key '" + std::string(key) + "'");
}

std::string single(const std::vector<std::string>& items, std::string_view key) {
  if (items.size() != 1) throw Error(ErrorCode::ParseError, "key '" + std::string(key) + "' takes one value");
  return items.front();
}

// Commas and line breaks would break the CSV layout.
std::string sanitize(std::string s) {
  for (char& ch : s)
    if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
  return s;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text) {
  ExperimentConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::optional<double> foba_ratio;
  std::optional<std::size_t> lasso_points;
  std::optional<double> lasso_decay;
  std::vector<std::string> regressor_names;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = csv::trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": expected 'key = value'");
    const std::string key(csv::trim(line.substr(0, eq)));
    const std::string_view value = csv::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": empty key or value");
    if (!seen.insert(key).second)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": repeated key '" + key + "'");

    const auto items = split_list(value);
    auto sizes = [&] {
      std::vector<std::size_t> out;
      for (const auto& it : items) out.push_back(parse_integer<std::size_t>(it, key));
      return out;
    };
    auto reals = [&] {
      std::vector<double> out;
      for (const auto& it : items) out.push_back(parse_real(it, key));
      return out;
    };

    if (key == "name") {
      cfg.name = std::string(value);
    } else if (key == "n") {
      cfg.n_values = sizes();
    } else if (key == "p") {
      cfg.p_values = sizes();
    } else if (key == "k") {
      cfg.k_values = sizes();
    } else if (key == "sigma") {
      cfg.sigma_values = reals();
    } else if (key == "covariance") {
      cfg.covariances.clear();
      for (const auto& it : items) {
        const auto cov = parse_covariance(it);
        if (!cov) throw Error(ErrorCode::ParseError, "unknown covariance '" + it + "'");
        cfg.covariances.push_back(*cov);
      }
    } else if (key == "beta_lo") {
      cfg.beta_lo = parse_real(single(items, key), key);
    } else if (key == "beta_hi") {
      cfg.beta_hi = parse_real(single(items, key), key);
    } else if (key == "signs") {
      const auto v = single(items, key);
      if (v == "positive") cfg.signs = SignScheme::Positive;
      else if (v == "random") cfg.signs = SignScheme::Random;
      else throw Error(ErrorCode::ParseError, "signs must be 'positive' or 'random'");
    } else if (key == "regressors") {
      regressor_names = items;
    } else if (key == "c") {
      cfg.c_values = reals();
    } else if (key == "trials") {
      cfg.trials = parse_integer<std::size_t>(single(items, key), key);
    } else if (key == "seed") {
      cfg.seed = parse_integer<std::uint64_t>(single(items, key), key);
    } else if (key == "delta_mode") {
      const auto m = parse_delta_mode(single(items, key));
      if (!m) throw Error(ErrorCode::ParseError, "delta_mode must be 'ratio' or 'correlation'");
      cfg.delta_mode = *m;
    } else if (key == "sigma_denominator") {
      const auto d = parse_sigma_denominator(single(items, key));
      if (!d) throw Error(ErrorCode::ParseError, "sigma_denominator must be 'n' or 'n-s'");
      cfg.sigma_denominator = *d;
    } else if (key == "output") {
      cfg.output_path = std::string(value);
    } else if (key == "foba_backward_ratio") {
      foba_ratio = parse_real(single(items, key), key);
    } else if (key == "lasso_points") {
      lasso_points = parse_integer<std::size_t>(single(items, key), key);
    } else if (key == "lasso_decay") {
      lasso_decay = parse_real(single(items, key), key);
    } else if (key == "threads") {
      cfg.threads = parse_integer<std::size_t>(single(items, key), key);
    } else {
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
  }

  LassoGrid grid;
  if (lasso_points) {
    grid.num_points = *lasso_points;
    grid.decay = LassoGrid::default_decay(*lasso_points);
  }
  if (lasso_decay) grid.decay = *lasso_decay;
  for (const auto& name : regressor_names) {
    const auto kind = parse_regressor(name);
    if (!kind) throw Error(ErrorCode::ParseError, "unknown regressor '" + name + "'");
    RegressorSpec spec{*kind};
    if (foba_ratio) spec.foba_backward_ratio = *foba_ratio;
    spec.lasso_grid = grid;
    cfg.regressors.push_back(spec);
  }

  validate_experiment(cfg);
  return cfg;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_experiment_config(ss.str());
}

void validate_experiment(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw Error(ErrorCode::InvalidConfig, msg); };
  if (cfg.trials < 1) fail("trials must be at least 1");
  if (cfg.n_values.empty()) fail("n list is empty");
  if (cfg.p_values.empty()) fail("p list is empty");
  if (cfg.k_values.empty()) fail("k list is empty");
  if (cfg.sigma_values.empty()) fail("sigma list is empty");
  if (cfg.covariances.empty()) fail("covariance list is empty");
  if (cfg.regressors.empty()) fail("regressors list is empty");
  if (cfg.c_values.empty()) fail("c list is empty");
  for (double c : cfg.c_values)
    if (!(c > 0.0)) fail("c values must be positive");
  if (cfg.name.find_first_of(",\n\r") != std::string::npos) fail("name must not contain commas or newlines");
  for (const auto& spec : cfg.regressors) validate_spec(spec);

  GenConfig probe;
  probe.beta_lo = cfg.beta_lo;
  probe.beta_hi = cfg.beta_hi;
  for (const auto& cov : cfg.covariances)
    for (std::size_t p : cfg.p_values)
      for (std::size_t k : cfg.k_values)
        for (double sigma : cfg.sigma_values)
          for (std::size_t n : cfg.n_values) {
            probe.covariance = cov;
            probe.p = p;
            probe.k = k;
            probe.sigma = sigma;
            probe.n = n;
            validate_config(probe);
          }
}

const std::vector<std::string>& results_columns() {
  static const std::vector<std::string> cols{
      "experiment", "trial",  "seed",      "regressor", "c",   "n",         "p",      "k",      "sigma",
      "covariance", "stop_s", "f1",        "precision", "recall", "err",    "wall_time", "status", "message"};
  return cols;
}

void write_result_row(std::ostream& out, const ResultRow& r) {
  using csv::format_double;
  out << r.experiment << ',' << r.trial << ',' << r.seed << ',' << r.regressor << ',' << format_double(r.c) << ','
      << r.n << ',' << r.p << ',' << r.k << ',' << format_double(r.sigma) << ',' << r.covariance << ',' << r.stop_s
      << ',' << format_double(r.f1) << ',' << format_double(r.precision) << ',' << format_double(r.recall) << ','
      << format_double(r.err) << ',' << format_double(r.wall_time) << ',' << r.status << ',' << sanitize(r.message)
      << '\n';
}

void write_results_csv(std::ostream& out, const ResultsTable& table) {
  const auto& cols = results_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : table.rows) write_result_row(out, r);
}

ResultsTable read_results_csv(std::istream& in) {
  ResultsTable table;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::ParseError, "results table is empty");
  if (csv::split_fields(line) != results_columns()) throw Error(ErrorCode::ParseError, "unexpected results header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split_fields(line);
    if (f.size() != results_columns().size())
      throw Error(ErrorCode::ParseError, "results line " + std::to_string(line_no) + ": wrong field count");
    const std::string ctx = "results line " + std::to_string(line_no);
    ResultRow r;
    r.experiment = f[0];
    r.trial = parse_integer<std::size_t>(f[1], ctx);
    r.seed = parse_integer<std::uint64_t>(f[2], ctx);
    r.regressor = f[3];
    r.c = csv::parse_double(f[4], ctx);
    r.n = parse_integer<std::size_t>(f[5], ctx);
    r.p = parse_integer<std::size_t>(f[6], ctx);
    r.k = parse_integer<std::size_t>(f[7], ctx);
    r.sigma = csv::parse_double(f[8], ctx);
    r.covariance = f[9];
    r.stop_s = parse_integer<std::size_t>(f[10], ctx);
    r.f1 = csv::parse_double(f[11], ctx);
    r.precision = csv::parse_double(f[12], ctx);
    r.recall = csv::parse_double(f[13], ctx);
    r.err = csv::parse_double(f[14], ctx);
    r.wall_time = csv::parse_double(f[15], ctx);
    r.status = f[16];
    r.message = f[17];
    table.rows.push_back(std::move(r));
  }
  return table;
}

namespace {

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

}  // namespace

bool same_results(const ResultsTable& a, const ResultsTable& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const ResultRow& x = a.rows[i];
    const ResultRow& y = b.rows[i];
    const bool same = x.experiment == y.experiment && x.trial == y.trial && x.seed == y.seed &&
                      x.regressor == y.regressor && same_double(x.c, y.c) && x.n == y.n && x.p == y.p &&
                      x.k == y.k && same_double(x.sigma, y.sigma) && x.covariance == y.covariance &&
                      x.stop_s == y.stop_s && same_double(x.f1, y.f1) && same_double(x.precision, y.precision) &&
                      same_double(x.recall, y.recall) && same_double(x.err, y.err) && x.status == y.status &&
                      x.message == y.message;
    if (!same) return false;
  }
  return true;
}

namespace {

struct Cell {
  Covariance covariance;
  std::size_t p, k, n;
  double sigma;
};

ResultRow base_row(const ExperimentConfig& cfg, const Cell& cell, std::size_t trial, const RegressorSpec& spec,
                   double c) {
  ResultRow r;
  r.experiment = cfg.name;
  r.trial = trial;
  r.seed = cfg.seed + trial;
  r.regressor = std::string(to_string(spec.kind));
  r.c = c;
  r.n = cell.n;
  r.p = cell.p;
  r.k = cell.k;
  r.sigma = cell.sigma;
  r.covariance = to_string(cell.covariance);
  return r;
}

void mark_failed(ResultRow& r, const std::string& status, const std::string& message) {
  r.stop_s = 0;
  r.f1 = r.precision = r.recall = r.err = kNaN;
  r.status = status;
  r.message = message;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<ResultRow> run_trial(const ExperimentConfig& cfg, const Cell& cell, std::size_t trial) {
  std::vector<ResultRow> rows;
  GenConfig gen;
  gen.p = cell.p;
  gen.n = cell.n;
  gen.k = cell.k;
  gen.sigma = cell.sigma;
  gen.covariance = cell.covariance;
  gen.beta_lo = cfg.beta_lo;
  gen.beta_hi = cfg.beta_hi;
  gen.signs = cfg.signs;
  gen.seed = cfg.seed + trial;

  std::optional<ProblemInstance> inst;
  std::string gen_status, gen_message;
  try {
    inst = generate(gen);
  } catch (const Error& e) {
    gen_status = std::string(to_string(e.code()));
    gen_message = e.what();
  }

  PathConfig pc;
  pc.delta_mode = cfg.delta_mode;
  pc.sigma_denominator = cfg.sigma_denominator;

  for (const auto& spec : cfg.regressors) {
    const std::size_t first = rows.size();
    for (double c : cfg.c_values) rows.push_back(base_row(cfg, cell, trial, spec, c));
    if (!inst) {
      for (std::size_t i = first; i < rows.size(); ++i) mark_failed(rows[i], gen_status, gen_message);
      continue;
    }
    try {
      const auto t0 = Clock::now();
      const SolutionPath path = compute_path(spec, *inst);
      DeltaCache cache(path, *inst, cfg.delta_mode);
      const double path_time = seconds_since(t0);
      for (std::size_t i = 0; i < cfg.c_values.size(); ++i) {
        ResultRow& r = rows[first + i];
        pc.c = cfg.c_values[i];
        const auto t1 = Clock::now();
        const PathSelection sel = select_on_path(cache, pc);
        r.wall_time = path_time + seconds_since(t1);
        const Metrics m = evaluate(sel.support, sel.coefficients, *inst->truth);
        r.stop_s = sel.stop_s;
        r.f1 = m.f1;
        r.precision = m.precision;
        r.recall = m.recall;
        r.err = m.err;
      }
    } catch (const Error& e) {
      for (std::size_t i = first; i < rows.size(); ++i)
        mark_failed(rows[i], std::string(to_string(e.code())), e.what());
    }
  }
  return rows;
}

}  // namespace

ResultsTable run_experiment(const ExperimentConfig& cfg, const std::function<void(const ResultRow&)>& sink) {
  validate_experiment(cfg);

  std::vector<Cell> cells;
  for (const auto& cov : cfg.covariances)
    for (std::size_t p : cfg.p_values)
      for (std::size_t k : cfg.k_values)
        for (double sigma : cfg.sigma_values)
          for (std::size_t n : cfg.n_values) cells.push_back({cov, p, k, n, sigma});

  const std::size_t num_tasks = cells.size() * cfg.trials;
  std::vector<std::vector<ResultRow>> results(num_tasks);
  std::vector<char> done(num_tasks, 0);
  std::size_t emitted = 0;
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    while (true) {
      const std::size_t t = next.fetch_add(1);
      if (t >= num_tasks) return;
      auto rows = run_trial(cfg, cells[t / cfg.trials], t % cfg.trials);
      std::lock_guard lock(mu);
      results[t] = std::move(rows);
      done[t] = 1;
      while (emitted < num_tasks && done[emitted]) {
        if (sink)
          for (const auto& r : results[emitted]) sink(r);
        ++emitted;
      }
    }
  };

  std::size_t threads = cfg.threads ? cfg.threads : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, num_tasks);
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  ResultsTable table;
  for (auto& rows : results)
    for (auto& r : rows) table.rows.push_back(std::move(r));
  return table;
}

namespace {

struct Accumulator {
  std::vector<double> values;

  void add(double v) { values.push_back(v); }

  double mean() const {
    if (values.empty()) return kNaN;
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
  }

  double stddev() const {
    if (values.empty()) return kNaN;
    if (values.size() == 1) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (double v : values) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(values.size() - 1));
  }
};

struct CellStats {
  SummaryRow row;
  Accumulator f1, precision, recall, err, log_err, stop_s;
};

}  // namespace

std::vector<SummaryRow> summarize(const ResultsTable& table) {
  using Key = std::tuple<std::string, double, std::size_t, std::size_t, std::size_t, double, std::string>;
  std::map<Key, std::size_t> index;
  std::vector<CellStats> cells;
  for (const auto& r : table.rows) {
    const Key key{r.regressor, r.c, r.n, r.p, r.k, r.sigma, r.covariance};
    auto it = index.find(key);
    if (it == index.end()) {
      it = index.emplace(key, cells.size()).first;
      CellStats st;
      st.row.regressor = r.regressor;
      st.row.c = r.c;
      st.row.n = r.n;
      st.row.p = r.p;
      st.row.k = r.k;
      st.row.sigma = r.sigma;
      st.row.covariance = r.covariance;
      cells.push_back(std::move(st));
    }
    CellStats& st = cells[it->second];
    if (r.status != "ok") {
      ++st.row.failures;
      continue;
    }
    ++st.row.runs;
    st.f1.add(r.f1);
    st.precision.add(r.precision);
    st.recall.add(r.recall);
    st.err.add(r.err);
    st.log_err.add(std::log(r.err));
    st.stop_s.add(static_cast<double>(r.stop_s));
  }
  std::vector<SummaryRow> out;
  for (auto& st : cells) {
    SummaryRow s = st.row;
    s.mean_f1 = st.f1.mean();
    s.std_f1 = st.f1.stddev();
    s.mean_precision = st.precision.mean();
    s.std_precision = st.precision.stddev();
    s.mean_recall = st.recall.mean();
    s.std_recall = st.recall.stddev();
    s.mean_err = st.err.mean();
    s.std_err = st.err.stddev();
    s.mean_log_err = st.log_err.mean();
    s.std_log_err = st.log_err.stddev();
    s.mean_stop_s = st.stop_s.mean();
    s.std_stop_s = st.stop_s.stddev();
    out.push_back(std::move(s));
  }
  return out;
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows) {
  using csv::format_double;
  out << "regressor,c,n,p,k,sigma,covariance,runs,failures,mean_f1,std_f1,mean_precision,std_precision,"
         "mean_recall,std_recall,mean_err,std_err,mean_log_err,std_log_err,mean_stop_s,std_stop_s\n";
  for (const auto& s : rows) {
    out << s.regressor << ',' << format_double(s.c) << ',' << s.n << ',' << s.p << ',' << s.k << ','
        << format_double(s.sigma) << ',' << s.covariance << ',' << s.runs << ',' << s.failures;
    for (double v : {s.mean_f1, s.std_f1, s.mean_precision, s.std_precision, s.mean_recall, s.std_recall, s.mean_err,
                     s.std_err, s.mean_log_err, s.std_log_err, s.mean_stop_s, s.std_stop_s})
      out << ',' << format_double(v);
    out << '\n';
  }
}

std::filesystem::path summary_path_for(const std::filesystem::path& results) {
  std::filesystem::path out = results;
  const std::string ext = results.has_extension() ? results.extension().string() : ".csv";
  out.replace_filename(results.stem().string() + ".summary" + ext);
  return out;
}

std::vector<PathDumpRow> dump_path(DeltaCache& deltas) {
  std::vector<PathDumpRow> rows;
  const auto& entries = deltas.path().entries;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const PathEntry& e = entries[i];
    rows.push_back({e.s, e.loss, e.sigma2_hat, deltas.at(i), e.support.indices()});
  }
  return rows;
}

void write_path_dump(std::ostream& out, const std::vector<PathDumpRow>& rows) {
  out << "s,loss,sigma2_hat,delta,support\n";
  for (const auto& r : rows) {
    out << r.s << ',' << csv::format_double(r.loss) << ',' << csv::format_double(r.sigma2_hat) << ','
        << (r.delta ? csv::format_double(*r.delta) : std::string{}) << ',';
    for (std::size_t i = 0; i < r.support.size(); ++i) out << (i ? " " : "") << r.support[i] + 1;
    out << '\n';
  }
}

std::vector<PathDumpRow> read_path_dump(std::istream& in) {
  std::vector<PathDumpRow> rows;
  std::string line;
  if (!std::getline(in, line) || csv::split_fields(line) != std::vector<std::string>{"s", "loss", "sigma2_hat",
                                                                                       "delta", "support"})
    throw Error(ErrorCode::ParseError, "unexpected path dump header");
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::trim(line).empty()) continue;
    const auto f = csv::split_fields(line);
    const std::string ctx = "path dump line " + std::to_string(line_no);
    if (f.size() != 5) throw Error(ErrorCode::ParseError, ctx + ": wrong field count");
    PathDumpRow r;
    r.s = parse_integer<std::size_t>(f[0], ctx);
    r.loss = csv::parse_double(f[1], ctx);
    r.sigma2_hat = csv::parse_double(f[2], ctx);
    if (!f[3].empty()) r.delta = csv::parse_double(f[3], ctx);
    std::istringstream idx(f[4]);
    std::string tok;
    while (idx >> tok) {
      const auto one_based = parse_integer<std::size_t>(tok, ctx);
      if (one_based == 0) throw Error(ErrorCode::ParseError, ctx + ": support indices are 1-based");
      r.support.push_back(one_based - 1);
    }
    rows.push_back(std::move(r));
  }
  return rows;
}

StopPoint replay_path_dump(const std::vector<PathDumpRow>& rows, std::size_t n, std::size_t p,
                           const PathConfig& cfg) {
  if (rows.empty() || rows.front().s != 0)
    throw Error(ErrorCode::InvalidArgument, "path dump must start at s = 0");
  std::vector<PathEntry> entries;
  entries.reserve(rows.size());
  for (const auto& r : rows) {
    PathEntry e;
    e.s = r.s;
    e.loss = r.loss;
    e.sigma2_hat = r.sigma2_hat;
    entries.push_back(std::move(e));
  }
  return find_stop(entries, n, p, rows.front().loss, cfg, [&](std::size_t i) { return rows[i].delta; });
}

}  // namespace paththresh
