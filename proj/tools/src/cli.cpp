#include "copulaeda_cli/cli.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <copulaeda/algorithms.hpp>
#include <copulaeda/eda.hpp>
#include <copulaeda/errors.hpp>
#include <copulaeda/objectives.hpp>

namespace copulaeda::cli {
namespace {

using nlohmann::ordered_json;

// Raw option values. Optional numeric thresholds are strings so "none" can
// switch a criterion off from the command line or the config file.
struct Options
{
  std::string algorithm = "gceda";
  std::string function = "sphere";
  int dim = 10;
  std::vector<double> lower;
  std::vector<double> upper;
  int pop_size = 100;
  std::string margin;
  std::vector<std::string> copulas;
  std::string vine;
  double sig_level = 0.01;
  std::string trunc_criterion = "AIC";
  std::string max_gen = "none";
  std::string max_evals = "300000";
  std::string target = "default";
  double tol = 1e-6;
  std::string stddev_floor = "1e-8";
  int runs = 30;
  std::uint64_t seed = 12345;
  int jobs = 1;
  std::string format = "table";
  std::string out_path;
  bool report = false;
  std::string dump_model;
  std::string copula_trace;
  int lower_pop = 50;
  int upper_pop = 2000;
  int success_runs = -1;
  double stop_percent = 10.0;
};

struct Experiment
{
  EdaSpec spec;
  BenchmarkSpec benchmark;
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;
  double target = 0.0;
};

template <typename T>
T parse_name(const std::optional<T>& parsed, const std::string& what, const std::string& value)
{
  if (!parsed)
    throw ConfigError("unknown " + what + " '" + value + "'");
  return *parsed;
}

std::optional<double> parse_threshold(const std::string& flag, const std::string& value)
{
  if (value == "none")
    return std::nullopt;
  try {
    std::size_t used = 0;
    const double x = std::stod(value, &used);
    if (used == value.size())
      return x;
  } catch (const std::exception&) {
  }
  throw ConfigError(flag + " expects a number or 'none', got '" + value + "'");
}

Eigen::VectorXd bounds(const std::vector<double>& given, double fallback, int dim, const char* flag)
{
  if (given.empty())
    return Eigen::VectorXd::Constant(dim, fallback);
  if (given.size() == 1)
    return Eigen::VectorXd::Constant(dim, given.front());
  if (static_cast<int>(given.size()) != dim)
    throw ConfigError(std::string(flag) + " needs 1 or " + std::to_string(dim) + " values");
  return Eigen::Map<const Eigen::VectorXd>(given.data(), dim);
}

Experiment resolve(const Options& o)
{
  const auto bench = find_benchmark(o.function);
  if (!bench)
    throw ConfigError("unknown function '" + o.function + "'; available: " + benchmark_names());
  if (o.dim < 1)
    throw ConfigError("--dim must be at least 1");

  Experiment e;
  e.benchmark = *bench;
  EdaSpec& s = e.spec;
  s.algorithm = parse_name(parse_algorithm(o.algorithm), "algorithm", o.algorithm);
  if (!o.vine.empty()) {
    if (s.algorithm != Algorithm::CVEDA && s.algorithm != Algorithm::DVEDA)
      throw ConfigError("--vine applies to cveda and dveda only");
    const auto type = parse_name(parse_vine_type(o.vine), "vine type", o.vine);
    s.algorithm = type == VineType::DVine ? Algorithm::DVEDA : Algorithm::CVEDA;
  }
  s.pop_size = o.pop_size;
  if (!o.margin.empty())
    s.margin = parse_name(parse_margin_kind(o.margin), "margin", o.margin);
  if (!o.copulas.empty()) {
    s.copulas.clear();
    for (const auto& name : o.copulas)
      s.copulas.push_back(parse_name(parse_copula_family(name), "copula", name));
  }
  s.sig_level = o.sig_level;
  s.trunc_criterion =
    parse_name(parse_truncation_criterion(o.trunc_criterion), "truncation criterion", o.trunc_criterion);

  TerminationSpec t;
  if (const auto g = parse_threshold("--max-gen", o.max_gen))
    t.max_gen = static_cast<int>(*g);
  if (const auto m = parse_threshold("--max-evals", o.max_evals))
    t.max_evals = static_cast<long long>(*m);
  e.target = bench->target_eval;
  if (o.target != "default") {
    const auto target = parse_threshold("--target", o.target);
    if (target)
      e.target = *target;
    t.target_eval = target;
  } else {
    t.target_eval = bench->target_eval;
  }
  t.eval_tol = o.tol;
  t.eval_stddev_floor = parse_threshold("--stddev-floor", o.stddev_floor);
  s.termination = t;
  s.report = o.report ? ReportMode::Simple : ReportMode::None;
  validate(s);

  e.lower = bounds(o.lower, bench->default_lower, o.dim, "--lower");
  e.upper = bounds(o.upper, bench->default_upper, o.dim, "--upper");
  if ((e.lower.array() >= e.upper.array()).any())
    throw ConfigError("every lower bound must be below its upper bound");
  if (o.runs < 1)
    throw ConfigError("--runs must be at least 1");
  if (o.jobs < 1)
    throw ConfigError("--jobs must be at least 1");
  return e;
}

std::string long_name(Algorithm a)
{
  switch (a) {
    case Algorithm::UMDA:
      return "Univariate Marginal Distribution Algorithm";
    case Algorithm::GCEDA:
      return "Gaussian Copula Estimation of Distribution Algorithm";
    case Algorithm::CVEDA:
      return "C-Vine Estimation of Distribution Algorithm";
    case Algorithm::DVEDA:
      return "D-Vine Estimation of Distribution Algorithm";
    case Algorithm::CopulaMIMIC:
      return "Copula MIMIC";
  }
  return "EDA";
}

std::string printf_string(const char* f, double x)
{
  char buf[64];
  std::snprintf(buf, sizeof buf, f, x);
  return buf;
}

// CSV numbers: scientific notation, 6 significant digits.
std::string sci(double x)
{
  return printf_string("%.5e", x);
}

// Copula-family counts of a learned model, for --copula-trace.
std::map<CopulaFamily, int> family_counts(const SearchModel& model)
{
  const int n = static_cast<int>(model.margins.size());
  const int pairs = n * (n - 1) / 2;
  std::map<CopulaFamily, int> counts;
  std::visit(
    [&](const auto& d) {
      using T = std::decay_t<decltype(d)>;
      if constexpr (std::is_same_v<T, ProductDep>)
        counts[CopulaFamily::Product] = pairs;
      else if constexpr (std::is_same_v<T, NormalDep>)
        counts[CopulaFamily::Normal] = pairs;
      else if constexpr (std::is_same_v<T, VineDep>)
        counts = count_families(d.vine);
      else
        for (const auto& c : d.copulas)
          ++counts[c.family()];
    },
    model.dependence);
  return counts;
}

constexpr CopulaFamily kTraceFamilies[] = { CopulaFamily::Product, CopulaFamily::Normal, CopulaFamily::Student,
                                            CopulaFamily::Clayton, CopulaFamily::Frank,  CopulaFamily::Gumbel };

std::unique_ptr<std::ofstream> open_file(const std::string& path)
{
  auto f = std::make_unique<std::ofstream>(path);
  if (!*f)
    throw ConfigError("cannot open '" + path + "' for writing");
  return f;
}

// Runs with observers attached. Without --dump-model or --copula-trace the
// runs go through eda_indep_runs (parallel); with them they run one by one
// from the same per-run seeds, so results do not depend on the flags.
IndepRuns execute(const Experiment& e, const Options& o, int runs, std::ostream* report)
{
  if (o.dump_model.empty() && o.copula_trace.empty() && !report)
    return eda_indep_runs(e.spec, e.benchmark.function, e.lower, e.upper, runs, o.seed, o.jobs);

  std::unique_ptr<std::ofstream> dump;
  std::unique_ptr<std::ofstream> trace;
  if (!o.dump_model.empty())
    dump = open_file(o.dump_model);
  if (!o.copula_trace.empty()) {
    trace = open_file(o.copula_trace);
    *trace << "run,generation";
    for (auto f : kTraceFamilies)
      *trace << ',' << to_string(f);
    *trace << '\n';
  }

  EdaSpec spec = e.spec;
  if (!report)
    spec.report = ReportMode::None;
  IndepRuns result;
  for (int i = 0; i < runs; ++i) {
    std::string last_model;
    RunHooks hooks;
    hooks.report = report;
    hooks.observer = [&](int gen, const Population&, const SearchModel* model) {
      if (!model)
        return;
      if (dump)
        last_model = describe(*model);
      if (trace) {
        const auto counts = family_counts(*model);
        *trace << i + 1 << ',' << gen;
        for (auto f : kTraceFamilies) {
          const auto it = counts.find(f);
          *trace << ',' << (it == counts.end() ? 0 : it->second);
        }
        *trace << '\n';
      }
    };
    Rng rng(derive_seed(o.seed, static_cast<std::uint64_t>(i)));
    try {
      result.runs.push_back(eda_run(spec, e.benchmark.function, e.lower, e.upper, rng, hooks));
    } catch (const std::exception& ex) {
      throw std::runtime_error("run " + std::to_string(i + 1) + ": " + ex.what());
    }
    if (dump)
      *dump << "# run " << i + 1 << ", final generation\n" << last_model << '\n';
  }
  result.summary = summarize_runs(result.runs);
  return result;
}

ordered_json run_json(int index, const RunResult& r)
{
  return { { "run", index },
           { "generations", r.num_gens },
           { "evaluations", r.f_evals },
           { "best_evaluation", r.best_eval },
           { "cpu_time_seconds", r.cpu_time },
           { "best_solution", std::vector<double>(r.best_sol.data(), r.best_sol.data() + r.best_sol.size()) } };
}

ordered_json metric_json(const MetricSummary& m)
{
  return { { "minimum", m.minimum },
           { "median", m.median },
           { "maximum", m.maximum },
           { "mean", m.mean },
           { "std_dev", m.std_dev } };
}

ordered_json runs_json(const IndepRuns& r)
{
  ordered_json runs = ordered_json::array();
  for (std::size_t i = 0; i < r.runs.size(); ++i)
    runs.push_back(run_json(static_cast<int>(i + 1), r.runs[i]));
  return { { "runs", runs },
           { "summary",
             { { "generations", metric_json(r.summary.generations) },
               { "evaluations", metric_json(r.summary.evaluations) },
               { "best_evaluation", metric_json(r.summary.best_evaluation) },
               { "cpu_time_seconds", metric_json(r.summary.cpu_time) } } } };
}

void write_csv(std::ostream& out, const IndepRuns& r)
{
  out << "run,generations,evaluations,best_evaluation,cpu_time_seconds\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& x = r.runs[i];
    out << i + 1 << ',' << sci(x.num_gens) << ',' << sci(static_cast<double>(x.f_evals)) << ','
        << sci(x.best_eval) << ',' << sci(x.cpu_time) << '\n';
  }
  const auto& s = r.summary;
  const std::pair<const char*, double MetricSummary::*> rows[] = {
    { "minimum", &MetricSummary::minimum }, { "median", &MetricSummary::median },
    { "maximum", &MetricSummary::maximum }, { "mean", &MetricSummary::mean },
    { "std_dev", &MetricSummary::std_dev },
  };
  for (const auto& [name, field] : rows)
    out << name << ',' << sci(s.generations.*field) << ',' << sci(s.evaluations.*field) << ','
        << sci(s.best_evaluation.*field) << ',' << sci(s.cpu_time.*field) << '\n';
}

void write_table(std::ostream& out, const IndepRuns& r)
{
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-8s %11s %11s %15s %9s\n", "", "Generations", "Evaluations", "Best Evaluation",
                "CPU Time");
  out << buf;
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    const auto& x = r.runs[i];
    const std::string label = "Run " + std::to_string(i + 1);
    std::snprintf(buf, sizeof buf, "%-8s %11d %11lld %15.6e %9.3f\n", label.c_str(), x.num_gens, x.f_evals,
                  x.best_eval, x.cpu_time);
    out << buf;
  }
  out << '\n';
  std::snprintf(buf, sizeof buf, "%-9s %11s %11s %15s %9s\n", "", "Generations", "Evaluations", "Best Evaluation",
                "CPU Time");
  out << buf;
  const auto& s = r.summary;
  const std::pair<const char*, double MetricSummary::*> rows[] = {
    { "Minimum", &MetricSummary::minimum }, { "Median", &MetricSummary::median },
    { "Maximum", &MetricSummary::maximum }, { "Mean", &MetricSummary::mean },
    { "Std. Dev.", &MetricSummary::std_dev },
  };
  for (const auto& [name, field] : rows) {
    std::snprintf(buf, sizeof buf, "%-9s %11.6f %11.4f %15.6e %9.7f\n", name, s.generations.*field,
                  s.evaluations.*field, s.best_evaluation.*field, s.cpu_time.*field);
    out << buf;
  }
}

void write_result_block(std::ostream& out, Algorithm a, const RunResult& r)
{
  char buf[128];
  out << "Results for " << long_name(a) << '\n';
  std::snprintf(buf, sizeof buf, "Best function evaluation    %g\n", r.best_eval);
  out << buf;
  out << "No. of generations          " << r.num_gens << '\n';
  out << "No. of function evaluations " << r.f_evals << '\n';
  std::snprintf(buf, sizeof buf, "CPU time                    %.3f seconds\n", r.cpu_time);
  out << buf;
}

void emit_runs(std::ostream& out, const Options& o, const Experiment& e, const IndepRuns& r, ordered_json extra = {})
{
  if (o.format == "csv") {
    write_csv(out, r);
  } else if (o.format == "json") {
    ordered_json doc = { { "algorithm", std::string(to_string(e.spec.algorithm)) },
                         { "function", e.benchmark.name },
                         { "dimension", e.lower.size() },
                         { "pop_size", e.spec.pop_size },
                         { "seed", o.seed } };
    if (!extra.is_null())
      doc.update(extra);
    doc.update(runs_json(r));
    out << doc.dump(2) << '\n';
  } else {
    write_table(out, r);
  }
}

int cmd_run(const Options& o, std::ostream& out, std::ostream& console)
{
  const auto e = resolve(o);
  const auto r = execute(e, o, 1, e.spec.report == ReportMode::Simple ? &console : nullptr);
  if (o.format == "table")
    write_result_block(out, e.spec.algorithm, r.runs.front());
  else
    emit_runs(out, o, e, r);
  return 0;
}

int cmd_indep_runs(const Options& o, std::ostream& out)
{
  auto e = resolve(o);
  e.spec.report = ReportMode::None;
  emit_runs(out, o, e, execute(e, o, o.runs, nullptr));
  return 0;
}

int cmd_critpop(const Options& o, std::ostream& out)
{
  auto e = resolve(o);
  e.spec.report = ReportMode::None;
  CriticalPopSettings cs;
  cs.target = e.target;
  cs.tol = o.tol;
  cs.lower_pop = o.lower_pop;
  cs.upper_pop = o.upper_pop;
  cs.total_runs = o.runs;
  cs.success_runs = o.success_runs < 0 ? o.runs : o.success_runs;
  cs.stop_percent = o.stop_percent;
  cs.base_seed = o.seed;
  cs.jobs = o.jobs;
  if (cs.lower_pop < 2 || cs.lower_pop >= cs.upper_pop)
    throw ConfigError("critical population interval must satisfy 2 <= lower < upper");
  if (cs.success_runs < 1 || cs.success_runs > cs.total_runs)
    throw ConfigError("--success-runs must lie in [1, --runs]");
  if (!(cs.stop_percent > 0.0 && cs.stop_percent < 100.0))
    throw ConfigError("--stop-percent must lie in (0, 100)");

  auto result = critical_pop_size(e.spec, e.benchmark.function, e.lower, e.upper, cs);
  int final_pop = 0;
  if (result.pop_size) {
    final_pop = *result.pop_size;
  } else {
    // Not found: fall back to runs at the upper bound.
    final_pop = cs.upper_pop;
    e.spec.pop_size = final_pop;
    result.runs = execute(e, o, o.runs, nullptr);
  }
  if (result.pop_size && (!o.dump_model.empty() || !o.copula_trace.empty())) {
    e.spec.pop_size = final_pop;
    result.runs = execute(e, o, o.runs, nullptr);
  }

  if (o.format == "json") {
    ordered_json trace = ordered_json::array();
    for (const auto& p : result.trace)
      trace.push_back({ { "pop_size", p.pop_size }, { "successes", p.successes }, { "total", p.total },
                        { "success", p.success } });
    ordered_json extra = { { "interval", { cs.lower_pop, cs.upper_pop } },
                           { "stop_percent", cs.stop_percent },
                           { "success_runs", cs.success_runs },
                           { "trace", trace },
                           { "critical_pop_size", result.pop_size ? ordered_json(*result.pop_size) : ordered_json() } };
    e.spec.pop_size = final_pop;
    emit_runs(out, o, e, result.runs, extra);
    return 0;
  }

  std::ostringstream head;
  head << "Critical population size search in [" << cs.lower_pop << ", " << cs.upper_pop << "], stop percent "
       << printf_string("%g", cs.stop_percent) << ", " << cs.success_runs << "/" << cs.total_runs
       << " successful runs required";
  const std::string prefix = o.format == "csv" ? "# " : "";
  out << prefix << head.str() << '\n';
  for (const auto& p : result.trace)
    out << prefix << "Population size " << p.pop_size << ": " << p.successes << "/" << p.total << " successful runs"
        << '\n';
  if (result.pop_size)
    out << prefix << "Critical population size: " << final_pop << '\n';
  else
    out << prefix << "Critical population size not found in interval [" << cs.lower_pop << ", " << cs.upper_pop
        << "]; results with population size " << final_pop << '\n';
  if (o.format == "table")
    out << '\n';
  e.spec.pop_size = final_pop;
  emit_runs(out, o, e, result.runs);
  return 0;
}

void add_options(CLI::App& app, Options& o)
{
  app.set_config("--config", "", "key=value config file; '#' starts a comment; flags take precedence");
  app.add_option("--algorithm", o.algorithm, "umda, gceda, cveda, dveda or copula-mimic")->capture_default_str();
  app.add_option("--function", o.function, "Benchmark function (" + benchmark_names() + ")")->capture_default_str();
  app.add_option("--dim", o.dim, "Problem dimension")->capture_default_str();
  app.add_option("--lower", o.lower, "Lower bound: one value or one per dimension (default: benchmark)")
    ->delimiter(',');
  app.add_option("--upper", o.upper, "Upper bound: one value or one per dimension (default: benchmark)")
    ->delimiter(',');
  app.add_option("--pop-size", o.pop_size, "Population size")->capture_default_str();
  app.add_option("--margin", o.margin, "norm, kernel, truncnorm or betamargin (default: algorithm's)");
  app.add_option("--copula", o.copulas, "Copula families: vine candidates or the MIMIC chain family")
    ->delimiter(',');
  app.add_option("--vine", o.vine, "cvine or dvine (selects cveda/dveda)");
  app.add_option("--sig-level", o.sig_level, "Independence test level")->capture_default_str();
  app.add_option("--trunc-criterion", o.trunc_criterion, "AIC, BIC or none")->capture_default_str();
  app.add_option("--max-gen", o.max_gen, "Maximum generations or 'none'")->capture_default_str();
  app.add_option("--max-evals", o.max_evals, "Maximum evaluations or 'none'")->capture_default_str();
  app.add_option("--target", o.target, "Target evaluation, 'none', or 'default' (benchmark optimum)")
    ->capture_default_str();
  app.add_option("--tol", o.tol, "Tolerance around the target")->capture_default_str();
  app.add_option("--stddev-floor", o.stddev_floor, "Stop when the evaluation std. dev. drops below, or 'none'")
    ->capture_default_str();
  app.add_option("--runs", o.runs, "Independent runs (indep-runs, critpop)")->capture_default_str();
  app.add_option("--seed", o.seed, "Base seed")->capture_default_str();
  app.add_option("--jobs", o.jobs, "Concurrent runs")->capture_default_str();
  app.add_option("--format", o.format, "Output format")
    ->check(CLI::IsMember({ "table", "csv", "json" }))
    ->capture_default_str();
  app.add_option("--out", o.out_path, "Write results to PATH instead of stdout");
  app.add_flag("--report", o.report, "Per-generation report (run only)");
  app.add_option("--dump-model", o.dump_model, "Write each run's final search model to PATH");
  app.add_option("--copula-trace", o.copula_trace, "Write per-generation copula family counts (CSV) to PATH");
  app.add_option("--lower-pop", o.lower_pop, "critpop: lower end of the interval")->capture_default_str();
  app.add_option("--upper-pop", o.upper_pop, "critpop: upper end of the interval")->capture_default_str();
  app.add_option("--success-runs", o.success_runs, "critpop: required successful runs (default: --runs)");
  app.add_option("--stop-percent", o.stop_percent, "critpop: bisection stop width, percent")->capture_default_str();
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
  CLI::App app{ "Copula-based estimation of distribution algorithms", "copulaeda" };
  Options o;
  add_options(app, o);
  auto* run_cmd = app.add_subcommand("run", "Single run");
  auto* indep_cmd = app.add_subcommand("indep-runs", "Independent runs with a summary");
  auto* crit_cmd = app.add_subcommand("critpop", "Critical population size by bisection");
  for (auto* sub : { run_cmd, indep_cmd, crit_cmd })
    sub->fallthrough();
  app.require_subcommand(1, 1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "copulaeda: " << e.what() << '\n';
    return 2;
  }

  try {
    std::unique_ptr<std::ofstream> file;
    if (!o.out_path.empty())
      file = open_file(o.out_path);
    std::ostream& dest = file ? *file : out;
    if (*run_cmd)
      return cmd_run(o, dest, out);
    if (*indep_cmd)
      return cmd_indep_runs(o, dest);
    return cmd_critpop(o, dest);
  } catch (const ConfigError& e) {
    err << "copulaeda: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "copulaeda: " << e.what() << '\n';
    return 1;
  }
}

} // namespace copulaeda::cli
