#include "copulaeda/eda.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "copulaeda/algorithms.hpp"
#include "copulaeda/errors.hpp"

namespace copulaeda {

std::string_view to_string(Algorithm algorithm)
{
  switch (algorithm) {
    case Algorithm::UMDA:
      return "umda";
    case Algorithm::GCEDA:
      return "gceda";
    case Algorithm::CVEDA:
      return "cveda";
    case Algorithm::DVEDA:
      return "dveda";
    case Algorithm::CopulaMIMIC:
      return "copula-mimic";
  }
  return "unknown";
}

std::optional<Algorithm> parse_algorithm(std::string_view name)
{
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
  if (lower == "umda")
    return Algorithm::UMDA;
  if (lower == "gceda")
    return Algorithm::GCEDA;
  if (lower == "cveda")
    return Algorithm::CVEDA;
  if (lower == "dveda")
    return Algorithm::DVEDA;
  if (lower == "copula-mimic" || lower == "copulamimic" || lower == "mimic")
    return Algorithm::CopulaMIMIC;
  return std::nullopt;
}

MarginKind effective_margin(const EdaSpec& spec)
{
  if (spec.margin)
    return *spec.margin;
  return spec.algorithm == Algorithm::CopulaMIMIC ? MarginKind::BetaRescaled : MarginKind::Normal;
}

void validate(const EdaSpec& spec)
{
  if (spec.pop_size < 2)
    throw ConfigError("pop_size must be at least 2");
  if (!(spec.truncation_factor > 0.0 && spec.truncation_factor <= 1.0))
    throw ConfigError("truncation_factor must lie in (0, 1]");
  if (!(spec.sig_level >= 0.0 && spec.sig_level <= 1.0))
    throw ConfigError("sig_level must lie in [0, 1]");
  if (spec.indep_replicates < 1)
    throw ConfigError("indep_replicates must be at least 1");
  if (spec.mi_samples < 1)
    throw ConfigError("mi_samples must be at least 1");
  if (spec.copulas.empty() && spec.algorithm != Algorithm::UMDA && spec.algorithm != Algorithm::GCEDA)
    throw ConfigError("copula family list is empty");
  if (spec.algorithm == Algorithm::CopulaMIMIC && spec.copulas.front() != CopulaFamily::Normal &&
      spec.copulas.front() != CopulaFamily::Frank)
    throw ConfigError("Copula MIMIC supports normal or frank copulas");
  const auto& t = spec.termination;
  if (!t.max_gen && !t.max_evals && !t.target_eval && !t.eval_stddev_floor)
    throw ConfigError("at least one termination criterion must be set");
  if (t.max_gen && *t.max_gen < 1)
    throw ConfigError("max_gen must be at least 1");
  if (t.max_evals && *t.max_evals < 1)
    throw ConfigError("max_evals must be at least 1");
  if (!(t.eval_tol >= 0.0))
    throw ConfigError("eval_tol must be nonnegative");
}

bool terminate_check(const TerminationSpec& spec, const TerminationState& state)
{
  if (spec.max_gen && state.gen >= *spec.max_gen)
    return true;
  if (spec.max_evals && state.evals >= *spec.max_evals)
    return true;
  if (spec.target_eval && std::abs(state.best_eval - *spec.target_eval) <= spec.eval_tol)
    return true;
  if (spec.eval_stddev_floor && state.eval_stddev < *spec.eval_stddev_floor)
    return true;
  return false;
}

Population seed_uniform(const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper,
                        int pop_size,
                        Rng& rng)
{
  if (lower.size() != upper.size() || lower.size() == 0)
    throw ConfigError("bounds must be nonempty and of equal length");
  for (Eigen::Index j = 0; j < lower.size(); ++j)
    if (!(lower[j] < upper[j]))
      throw ConfigError("lower bound must be below upper bound in every coordinate");
  if (pop_size < 1)
    throw ConfigError("pop_size must be positive");
  Population pop;
  pop.solutions.resize(pop_size, lower.size());
  for (Eigen::Index i = 0; i < pop_size; ++i)
    for (Eigen::Index j = 0; j < lower.size(); ++j)
      pop.solutions(i, j) = lower[j] + (upper[j] - lower[j]) * uniform_open(rng);
  return pop;
}

Population select_truncation(const Population& pop, double factor)
{
  if (!pop.evaluated())
    throw std::invalid_argument("select_truncation: population is not evaluated");
  const auto size = pop.size();
  const auto wanted = std::max<Eigen::Index>(2, std::lround(factor * static_cast<double>(size)));
  const auto count = std::min(size, wanted);
  std::vector<Eigen::Index> order(size);
  std::iota(order.begin(), order.end(), Eigen::Index{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) {
    return pop.evaluations[a] < pop.evaluations[b];
  });
  Population out;
  out.solutions.resize(count, pop.dimension());
  out.evaluations.resize(count);
  for (Eigen::Index k = 0; k < count; ++k) {
    out.solutions.row(k) = pop.solutions.row(order[k]);
    out.evaluations[k] = pop.evaluations[order[k]];
  }
  return out;
}

Population replace_complete(const Population& old_pop, Population sampled)
{
  if (old_pop.dimension() != sampled.dimension())
    throw std::invalid_argument("replace_complete: dimension mismatch");
  return sampled;
}

namespace {

double sample_sd(const Eigen::VectorXd& x)
{
  if (x.size() < 2)
    return 0.0;
  const double mean = x.mean();
  return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size() - 1));
}

std::string format_point(const Eigen::VectorXd& x)
{
  std::ostringstream os;
  os.precision(17);
  os << '(';
  for (Eigen::Index j = 0; j < x.size(); ++j)
    os << (j ? ", " : "") << x[j];
  os << ')';
  return os.str();
}

void evaluate(Population& pop, const Objective& f)
{
  pop.evaluations.resize(pop.size());
  Eigen::VectorXd x(pop.dimension());
  for (Eigen::Index i = 0; i < pop.size(); ++i) {
    x = pop.solutions.row(i).transpose();
    const double value = f(x);
    if (!std::isfinite(value))
      throw ObjectiveError("objective returned a non-finite value at " + format_point(x));
    pop.evaluations[i] = value;
  }
}

} // namespace

std::string report_header()
{
  return "  Generation      Minimum         Mean    Std. Dev.";
}

std::string report_line(int gen, const Eigen::VectorXd& evaluations)
{
  char buf[128];
  std::snprintf(buf,
                sizeof buf,
                "%12d %12.6e %12.6e %12.6e",
                gen,
                evaluations.minCoeff(),
                evaluations.mean(),
                sample_sd(evaluations));
  return buf;
}

RunResult eda_run(const EdaSpec& spec,
                  const Objective& f,
                  const Eigen::VectorXd& lower,
                  const Eigen::VectorXd& upper,
                  Rng& rng,
                  const RunHooks& hooks)
{
  validate(spec);
  if (lower.size() != upper.size() || lower.size() == 0)
    throw ConfigError("bounds must be nonempty and of equal length");

  const auto start = std::chrono::steady_clock::now();
  RunResult result;
  result.best_eval = std::numeric_limits<double>::infinity();
  std::ostream* report = spec.report == ReportMode::Simple ? hooks.report : nullptr;
  if (report)
    *report << report_header() << '\n';

  Population pop;
  TerminationState state;
  while (true) {
    ++state.gen;
    std::optional<SearchModel> model;
    if (state.gen == 1) {
      pop = seed_uniform(lower, upper, spec.pop_size, rng);
    } else {
      const Population selected = select_truncation(pop, spec.truncation_factor);
      model = learn_model(spec, selected, lower, upper, rng);
      pop = replace_complete(pop, sample_model(*model, spec.pop_size, rng));
    }
    evaluate(pop, f);
    state.evals += pop.size();
    if (hooks.local_optimizer)
      state.evals += hooks.local_optimizer(pop, f);

    Eigen::Index best_row = 0;
    const double gen_best = pop.evaluations.minCoeff(&best_row);
    if (gen_best < result.best_eval) {
      result.best_eval = gen_best;
      result.best_sol = pop.solutions.row(best_row).transpose();
    }
    state.best_eval = result.best_eval;
    state.eval_stddev = sample_sd(pop.evaluations);

    if (report)
      *report << report_line(state.gen, pop.evaluations) << '\n';
    if (hooks.observer)
      hooks.observer(state.gen, pop, model ? &*model : nullptr);
    if (terminate_check(spec.termination, state))
      break;
  }

  result.num_gens = state.gen;
  result.f_evals = state.evals;
  result.cpu_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

MetricSummary summarize_values(std::vector<double> values)
{
  if (values.empty())
    throw std::invalid_argument("summarize_values: no values");
  std::sort(values.begin(), values.end());
  const auto m = values.size();
  MetricSummary s;
  s.minimum = values.front();
  s.maximum = values.back();
  s.median = m % 2 ? values[m / 2] : 0.5 * (values[m / 2 - 1] + values[m / 2]);
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(m);
  if (m > 1) {
    double ss = 0.0;
    for (double v : values)
      ss += (v - s.mean) * (v - s.mean);
    s.std_dev = std::sqrt(ss / static_cast<double>(m - 1));
  }
  return s;
}

RunsSummary summarize_runs(const std::vector<RunResult>& results)
{
  if (results.empty())
    throw std::invalid_argument("summarize_runs: no results");
  std::vector<double> gens, evals, best, time;
  for (const auto& r : results) {
    gens.push_back(r.num_gens);
    evals.push_back(static_cast<double>(r.f_evals));
    best.push_back(r.best_eval);
    time.push_back(r.cpu_time);
  }
  return { summarize_values(gens), summarize_values(evals), summarize_values(best), summarize_values(time) };
}

IndepRuns eda_indep_runs(const EdaSpec& spec,
                         const Objective& f,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         int runs,
                         std::uint64_t base_seed,
                         int jobs)
{
  if (runs < 1)
    throw ConfigError("runs must be at least 1");
  validate(spec);
  EdaSpec quiet = spec;
  quiet.report = ReportMode::None;

  IndepRuns out;
  out.runs.resize(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<int> next{ 0 };
  auto worker = [&] {
    for (int i = next++; i < runs; i = next++) {
      try {
        Rng rng(derive_seed(base_seed, static_cast<std::uint64_t>(i)));
        out.runs[i] = eda_run(quiet, f, lower, upper, rng);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(jobs, 1, runs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int t = 0; t < workers; ++t)
      threads.emplace_back(worker);
    for (auto& t : threads)
      t.join();
  }

  for (int i = 0; i < runs; ++i) {
    if (!errors[i])
      continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const ObjectiveError& e) {
      throw ObjectiveError("run " + std::to_string(i + 1) + ": " + e.what());
    } catch (const std::exception& e) {
      throw std::runtime_error("run " + std::to_string(i + 1) + ": " + e.what());
    }
  }
  out.summary = summarize_runs(out.runs);
  return out;
}

std::optional<int> bisect_pop_size(const std::function<PopSizeProbe(int)>& probe,
                                   int lower_pop,
                                   int upper_pop,
                                   double stop_percent,
                                   std::vector<PopSizeProbe>* trace)
{
  if (!(lower_pop < upper_pop) || lower_pop < 1)
    throw ConfigError("population interval must satisfy 1 <= lower_pop < upper_pop");
  if (!(stop_percent >= 0.0))
    throw ConfigError("stop_percent must be nonnegative");

  std::map<int, bool> cache;
  auto test = [&](int size) {
    if (auto it = cache.find(size); it != cache.end())
      return it->second;
    const PopSizeProbe p = probe(size);
    if (trace)
      trace->push_back(p);
    cache[size] = p.success;
    return p.success;
  };

  if (!test(upper_pop))
    return std::nullopt;
  int fail_bound = lower_pop;
  int success_bound = upper_pop;
  while (static_cast<double>(success_bound - fail_bound) > stop_percent / 100.0 * success_bound &&
         success_bound - fail_bound > 1) {
    const int mid = fail_bound + (success_bound - fail_bound) / 2;
    if (test(mid))
      success_bound = mid;
    else
      fail_bound = mid;
  }
  return success_bound;
}

CriticalPopResult critical_pop_size(const EdaSpec& spec,
                                    const Objective& f,
                                    const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper,
                                    const CriticalPopSettings& settings)
{
  if (settings.total_runs < 1 || settings.success_runs < 0 || settings.success_runs > settings.total_runs)
    throw ConfigError("need 0 <= success_runs <= total_runs and total_runs >= 1");

  CriticalPopResult result;
  std::map<int, IndepRuns> runs_at;
  auto probe = [&](int size) {
    EdaSpec s = spec;
    s.pop_size = size;
    IndepRuns runs = eda_indep_runs(s, f, lower, upper, settings.total_runs, settings.base_seed, settings.jobs);
    PopSizeProbe p;
    p.pop_size = size;
    p.total = settings.total_runs;
    for (const auto& r : runs.runs)
      if (std::abs(r.best_eval - settings.target) <= settings.tol)
        ++p.successes;
    p.success = p.successes >= settings.success_runs;
    runs_at[size] = std::move(runs);
    return p;
  };
  result.pop_size =
    bisect_pop_size(probe, settings.lower_pop, settings.upper_pop, settings.stop_percent, &result.trace);
  if (result.pop_size)
    result.runs = std::move(runs_at[*result.pop_size]);
  return result;
}

} // namespace copulaeda
