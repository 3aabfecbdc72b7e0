#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "copulaeda/copula.hpp"
#include "copulaeda/margins.hpp"
#include "copulaeda/random.hpp"
#include "copulaeda/vine.hpp"

namespace copulaeda {

enum class Algorithm
{
  UMDA,
  GCEDA,
  CVEDA,
  DVEDA,
  CopulaMIMIC
};

std::string_view to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(std::string_view name);

//! Objective to minimize.
using Objective = std::function<double(const Eigen::VectorXd&)>;

//! popSize x n candidate solutions plus their objective values. The
//! evaluations vector is empty until the population is evaluated.
struct Population
{
  Eigen::MatrixXd solutions;
  Eigen::VectorXd evaluations;

  Eigen::Index size() const { return solutions.rows(); }
  Eigen::Index dimension() const { return solutions.cols(); }
  bool evaluated() const { return evaluations.size() == solutions.rows(); }
};

//! Termination criteria, OR-combined. At least one must be set.
struct TerminationSpec
{
  std::optional<int> max_gen;
  std::optional<long long> max_evals;
  std::optional<double> target_eval;
  double eval_tol = 1e-6;
  std::optional<double> eval_stddev_floor;
};

enum class ReportMode
{
  None,
  Simple
};

struct EdaSpec
{
  Algorithm algorithm = Algorithm::GCEDA;
  int pop_size = 100;
  //! Unset means the algorithm's default (beta margins for Copula MIMIC,
  //! normal margins otherwise).
  std::optional<MarginKind> margin;
  //! Candidate pair-copula families (vines) or the chain family (Copula
  //! MIMIC, first entry).
  std::vector<CopulaFamily> copulas{ CopulaFamily::Normal,
                                     CopulaFamily::Student,
                                     CopulaFamily::Clayton,
                                     CopulaFamily::Frank,
                                     CopulaFamily::Gumbel };
  double sig_level = 0.01;
  int indep_replicates = 100;
  TruncationCriterion trunc_criterion = TruncationCriterion::AIC;
  int mi_samples = 100;
  double truncation_factor = 0.3;
  TerminationSpec termination = [] {
    TerminationSpec t;
    t.max_gen = 100;
    return t;
  }();
  ReportMode report = ReportMode::None;
};

MarginKind effective_margin(const EdaSpec& spec);

//! Throws ConfigError on an invalid specification.
void validate(const EdaSpec& spec);

struct RunResult
{
  int num_gens = 0;
  long long f_evals = 0;
  Eigen::VectorXd best_sol;
  double best_eval = 0.0;
  double cpu_time = 0.0; // wall-clock seconds
};

struct TerminationState
{
  int gen = 0;
  long long evals = 0;
  double best_eval = 0.0;
  double eval_stddev = 0.0;
};

bool terminate_check(const TerminationSpec& spec, const TerminationState& state);

//! Population with entry (i, j) ~ U(lower_j, upper_j).
Population seed_uniform(const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper,
                        int pop_size,
                        Rng& rng);

//! The max(2, round(factor * popSize)) best rows (smallest evaluations),
//! ordered by evaluation then original index.
Population select_truncation(const Population& pop, double factor);

//! Complete replacement: the sampled population becomes the current one.
Population replace_complete(const Population& old_pop, Population sampled);

struct SearchModel;

//! Per-generation callback: generation index, current evaluated population
//! and the model learned this generation (null in generation 1).
using GenerationObserver = std::function<void(int, const Population&, const SearchModel*)>;

struct RunHooks
{
  //! Receives the simple report when spec.report is Simple.
  std::ostream* report = nullptr;
  GenerationObserver observer;
  //! Optional local optimization applied to each evaluated population. It
  //! must keep evaluations consistent with solutions and returns the number
  //! of extra objective evaluations it spent.
  std::function<long long(Population&, const Objective&)> local_optimizer;
};

//! Report header and row for the simple report.
std::string report_header();
std::string report_line(int gen, const Eigen::VectorXd& evaluations);

RunResult eda_run(const EdaSpec& spec,
                  const Objective& f,
                  const Eigen::VectorXd& lower,
                  const Eigen::VectorXd& upper,
                  Rng& rng,
                  const RunHooks& hooks = {});

struct MetricSummary
{
  double minimum = 0.0;
  double median = 0.0;
  double maximum = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
};

struct RunsSummary
{
  MetricSummary generations;
  MetricSummary evaluations;
  MetricSummary best_evaluation;
  MetricSummary cpu_time;
};

MetricSummary summarize_values(std::vector<double> values);
RunsSummary summarize_runs(const std::vector<RunResult>& results);

struct IndepRuns
{
  std::vector<RunResult> runs;
  RunsSummary summary;
};

//! `runs` independent runs; run i draws from Rng(derive_seed(base_seed, i)).
//! Up to `jobs` runs execute concurrently; results are ordered by run index.
IndepRuns eda_indep_runs(const EdaSpec& spec,
                         const Objective& f,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         int runs,
                         std::uint64_t base_seed,
                         int jobs = 1);

struct PopSizeProbe
{
  int pop_size = 0;
  int successes = 0;
  int total = 0;
  bool success = false;
};

//! Bisection on an integer population size given a monotone success oracle.
//! Evaluates `upper_pop` first (empty result if it fails), then halves
//! [fail_bound, success_bound] until the width is at most stop_percent % of
//! success_bound. Returns the smallest successful size probed.
std::optional<int> bisect_pop_size(const std::function<PopSizeProbe(int)>& probe,
                                   int lower_pop,
                                   int upper_pop,
                                   double stop_percent,
                                   std::vector<PopSizeProbe>* trace = nullptr);

struct CriticalPopSettings
{
  double target = 0.0;
  double tol = 1e-6;
  int lower_pop = 50;
  int upper_pop = 2000;
  int total_runs = 30;
  int success_runs = 30;
  double stop_percent = 10.0;
  std::uint64_t base_seed = 12345;
  int jobs = 1;
};

struct CriticalPopResult
{
  std::optional<int> pop_size;
  //! Runs at the critical size (empty when not found).
  IndepRuns runs;
  std::vector<PopSizeProbe> trace;
};

//! Smallest population size for which at least success_runs of total_runs
//! independent runs reach |best - target| <= tol.
CriticalPopResult critical_pop_size(const EdaSpec& spec,
                                    const Objective& f,
                                    const Eigen::VectorXd& lower,
                                    const Eigen::VectorXd& upper,
                                    const CriticalPopSettings& settings);

} // namespace copulaeda
