// Acceptance driver: `acceptance N` checks criterion N (1-9), prints one
// PASS/FAIL line and exits nonzero on failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <copulaeda/copula.hpp>
#include <copulaeda/dependence.hpp>
#include <copulaeda/eda.hpp>
#include <copulaeda/objectives.hpp>
#include <copulaeda/special.hpp>

using namespace copulaeda;

namespace {

constexpr std::uint64_t kSeed = 12345;
constexpr int kRuns = 30;

struct Outcome
{
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what)
  {
    if (!detail.empty())
      detail += "; ";
    detail += what + (ok ? "" : " [FAILED]");
    pass = pass && ok;
  }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0)
{
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

struct Study
{
  EdaSpec spec;
  Objective f;
  Eigen::VectorXd lower, upper;
  double target = 0.0;
};

// Table 3 protocol: 10-D, truncation 0.3, target tol 1e-6, 300000 evals cap,
// 1e-8 stddev floor.
Study table3(Algorithm a, int pop, bool summation)
{
  Study s;
  s.spec.algorithm = a;
  s.spec.pop_size = pop;
  s.spec.margin = MarginKind::Normal;
  s.spec.copulas = { CopulaFamily::Normal };
  s.spec.termination = TerminationSpec{};
  s.target = summation ? -1e5 : 0.0;
  s.spec.termination.target_eval = s.target;
  s.spec.termination.max_evals = 300000;
  s.spec.termination.eval_stddev_floor = 1e-8;
  s.f = summation ? Objective(f_summation_cancellation) : Objective(f_sphere);
  const double b = summation ? 0.16 : 600.0;
  s.lower = Eigen::VectorXd::Constant(10, -b);
  s.upper = Eigen::VectorXd::Constant(10, b);
  return s;
}

struct StudyResult
{
  int successes = 0;
  RunsSummary summary;
};

StudyResult run_study(const Study& s)
{
  const auto r = eda_indep_runs(s.spec, s.f, s.lower, s.upper, kRuns, kSeed);
  StudyResult out;
  out.summary = r.summary;
  for (const auto& run : r.runs)
    out.successes += std::abs(run.best_eval - s.target) <= 1e-6;
  return out;
}

void check_table3(Outcome& o, const std::string& name, const Study& s, int min_success, double reference_evals, double band)
{
  const auto r = run_study(s);
  const double mean = r.summary.evaluations.mean;
  o.require(r.successes >= min_success,
            name + " success " + std::to_string(r.successes) + "/30 (need >= " + std::to_string(min_success) + ")");
  o.require(std::abs(mean - reference_evals) <= band * reference_evals,
            name + fmt(" mean evals %.1f (reference %.1f, band +-%.0f%%)", mean, reference_evals, band * 100));
}

Outcome criterion1()
{
  Outcome o;
  Study s;
  s.spec.algorithm = Algorithm::GCEDA;
  s.spec.pop_size = 200;
  s.spec.margin = MarginKind::Kernel;
  s.spec.termination = TerminationSpec{};
  s.spec.termination.max_gen = 50;
  s.spec.termination.target_eval = 0.0;
  s.f = f_sphere;
  s.lower = Eigen::VectorXd::Constant(5, -300.0);
  s.upper = Eigen::VectorXd::Constant(5, 900.0);
  const auto r = run_study(s);
  const double gens = r.summary.generations.mean;
  o.require(r.successes == kRuns, "success " + std::to_string(r.successes) + "/30");
  o.require(gens >= 28 && gens <= 45, fmt("mean generations %.2f (reference 35.43, need [28, 45])", gens));
  return o;
}

Outcome criterion2()
{
  Outcome o;
  check_table3(o, "UMDA sphere", table3(Algorithm::UMDA, 81, false), 30, 3788.1, 0.20);
  return o;
}

Outcome criterion3()
{
  Outcome o;
  check_table3(o, "GCEDA summation-cancellation", table3(Algorithm::GCEDA, 325, true), 29, 38913.3, 0.20);
  return o;
}

Outcome criterion4()
{
  Outcome o;
  const auto r = run_study(table3(Algorithm::UMDA, 2000, true));
  o.require(r.successes == 0, "success " + std::to_string(r.successes) + "/30 (reference 0/30)");
  o.require(r.summary.best_evaluation.mean > -1e4, fmt("mean best %.4e (need worse than -1e4)", r.summary.best_evaluation.mean));
  return o;
}

Outcome criterion5()
{
  Outcome o;
  check_table3(o, "CVEDA", table3(Algorithm::CVEDA, 104, false), 30, 4804.8, 0.25);
  check_table3(o, "DVEDA", table3(Algorithm::DVEDA, 111, false), 30, 5080.1, 0.25);
  return o;
}

Outcome criterion6()
{
  Outcome o;
  check_table3(o, "Copula MIMIC", table3(Algorithm::CopulaMIMIC, 172, false), 27, 7441.8, 0.30);
  return o;
}

std::vector<BivariateCopula> property_grid()
{
  std::vector<BivariateCopula> out{ BivariateCopula::product() };
  for (double tau : { -0.8, -0.5, -0.2, 0.2, 0.5, 0.8 }) {
    out.push_back(tau_to_parameter(CopulaFamily::Normal, tau));
    out.push_back(BivariateCopula::student(std::sin(special::kPi * tau / 2.0), 5.0));
    out.push_back(tau_to_parameter(CopulaFamily::Frank, tau));
    if (tau > 0.0) {
      out.push_back(tau_to_parameter(CopulaFamily::Clayton, tau));
      out.push_back(tau_to_parameter(CopulaFamily::Gumbel, tau));
    }
  }
  return out;
}

Outcome criterion7()
{
  Outcome o;
  const auto grid = property_grid();
  std::vector<double> pts;
  for (int i = 0; i < 10; ++i)
    pts.push_back((i + 0.5) / 10.0);

  // h-inverse solves h(u, v) = p; measured in p on a 10x10 (p, v) grid.
  double worst_h = 0.0;
  double worst_fd = 0.0;
  for (const auto& c : grid)
    for (double a : pts)
      for (double v : pts) {
        worst_h = std::max(worst_h, std::abs(c.h(c.hinv(a, v), v) - a));
        // Mixed finite difference of the CDF against the density.
        const double d = 1e-4;
        const double fd =
          (c.cdf(a + d, v + d) - c.cdf(a + d, v - d) - c.cdf(a - d, v + d) + c.cdf(a - d, v - d)) / (4 * d * d);
        worst_fd = std::max(worst_fd, std::abs(fd - c.pdf(a, v)) / std::max(1.0, c.pdf(a, v)));
      }
  o.require(worst_h <= 1e-8, fmt("h/hinv max error %.2e", worst_h));
  o.require(worst_fd <= 1e-3, fmt("pdf vs CDF finite difference max rel error %.2e", worst_fd));

  double worst_tau = 0.0;
  for (auto family : { CopulaFamily::Normal, CopulaFamily::Student, CopulaFamily::Clayton, CopulaFamily::Frank,
                       CopulaFamily::Gumbel })
    for (double tau : { -0.8, -0.5, -0.2, 0.2, 0.5, 0.8 }) {
      if ((family == CopulaFamily::Clayton || family == CopulaFamily::Gumbel) && tau < 0)
        continue;
      worst_tau = std::max(worst_tau, std::abs(parameter_to_tau(tau_to_parameter(family, tau)) - tau));
    }
  o.require(worst_tau <= 1e-6, fmt("tau/parameter max error %.2e", worst_tau));

  double worst_sample = 0.0;
  Rng rng(kSeed);
  for (auto family : { CopulaFamily::Normal, CopulaFamily::Student, CopulaFamily::Clayton, CopulaFamily::Frank,
                       CopulaFamily::Gumbel })
    for (double tau : { 0.2, 0.5, 0.8 }) {
      const Eigen::MatrixXd x = copula_sample(tau_to_parameter(family, tau), 2000, rng);
      worst_sample = std::max(worst_sample, std::abs(kendall_tau(x.col(0), x.col(1)) - tau));
    }
  o.require(worst_sample <= 0.05, fmt("sampled tau max deviation %.3f", worst_sample));
  return o;
}

Outcome criterion8()
{
  Outcome o;
  const std::vector<CopulaFamily> candidates{ CopulaFamily::Normal, CopulaFamily::Student, CopulaFamily::Clayton,
                                              CopulaFamily::Frank, CopulaFamily::Gumbel };
  int recovered = 0;
  for (int s = 0; s < 20; ++s) {
    Rng rng(derive_seed(kSeed, s));
    const Eigen::MatrixXd x = copula_sample(BivariateCopula::clayton(2.0), 500, rng);
    const Eigen::MatrixXd u = pseudo_observations(x);
    recovered += gof_select_copula(u.col(0), u.col(1), candidates).family() == CopulaFamily::Clayton;
  }
  o.require(recovered >= 16, "Clayton recovered " + std::to_string(recovered) + "/20");

  int rejected = 0;
  for (int s = 0; s < 100; ++s) {
    Rng rng(derive_seed(kSeed + 1, s));
    Eigen::VectorXd u(200), v(200);
    for (int i = 0; i < 200; ++i) {
      u[i] = uniform_open(rng);
      v[i] = uniform_open(rng);
    }
    rejected += !indep_test_cvm(u, v, 100, rng, 0.01).independent;
  }
  o.require(rejected <= 5, "independence false positives " + std::to_string(rejected) + "/100");

  Rng rng(kSeed + 2);
  int repaired = 0;
  int tried = 0;
  while (tried < 100) {
    const int n = 3 + static_cast<int>(rng() % 6);
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < i; ++j)
        R(i, j) = R(j, i) = 2.0 * uniform_open(rng) - 1.0;
    if (Eigen::LLT<Eigen::MatrixXd>(R).info() == Eigen::Success)
      continue;
    ++tried;
    const Eigen::MatrixXd F = make_positive_definite(R);
    const double min_eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(F, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
    const bool ok = min_eig > 0.0 && F.diagonal().isOnes(1e-12) && F.isApprox(F.transpose()) &&
                    F.cwiseAbs().maxCoeff() <= 1.0 + 1e-12 && Eigen::LLT<Eigen::MatrixXd>(F).info() == Eigen::Success;
    repaired += ok;
  }
  o.require(repaired == 100, "PD repair invariants " + std::to_string(repaired) + "/100");
  return o;
}

Outcome criterion9()
{
  Outcome o;
  int within = 0;
  const std::vector<int> thresholds{ 60, 137, 500, 1234, 1999 };
  for (int t : thresholds) {
    const auto found = bisect_pop_size(
      [t](int s) { return PopSizeProbe{ s, s >= t ? 30 : 0, 30, s >= t }; }, 50, 2000, 10.0);
    within += found && *found >= t && *found <= 1.1 * t;
  }
  o.require(within == static_cast<int>(thresholds.size()),
            "synthetic threshold within 10%: " + std::to_string(within) + "/" + std::to_string(thresholds.size()));

  Rng rng(kSeed);
  const Algorithm algorithms[] = { Algorithm::UMDA, Algorithm::GCEDA, Algorithm::CVEDA, Algorithm::DVEDA,
                                   Algorithm::CopulaMIMIC };
  int consistent = 0;
  for (int k = 0; k < 10; ++k) {
    EdaSpec spec;
    spec.algorithm = algorithms[rng() % 5];
    spec.pop_size = 10 + static_cast<int>(rng() % 40);
    if (spec.algorithm == Algorithm::CopulaMIMIC)
      spec.copulas = { rng() % 2 ? CopulaFamily::Normal : CopulaFamily::Frank };
    spec.termination = TerminationSpec{};
    spec.termination.max_gen = 2 + static_cast<int>(rng() % 6);
    const int n = 2 + static_cast<int>(rng() % 4);
    const bool sc = rng() % 2;
    const Objective f = sc ? Objective(f_summation_cancellation) : Objective(f_sphere);
    const double b = sc ? 0.16 : 600.0;
    const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -b);
    const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, b);
    const std::uint64_t seed = rng();

    const auto a = eda_indep_runs(spec, f, lo, hi, 3, seed, 1);
    const auto c = eda_indep_runs(spec, f, lo, hi, 3, seed, 3);
    bool ok = true;
    for (int i = 0; i < 3; ++i) {
      const auto& r = a.runs[i];
      ok = ok && r.f_evals == static_cast<long long>(r.num_gens) * spec.pop_size;
      ok = ok && r.num_gens == *spec.termination.max_gen;
      ok = ok && r.best_eval == f(r.best_sol);
      ok = ok && r.best_eval == c.runs[i].best_eval && r.best_sol == c.runs[i].best_sol;
    }
    consistent += ok;
  }
  o.require(consistent == 10, "accounting/determinism configs " + std::to_string(consistent) + "/10");
  return o;
}

} // namespace

int main(int argc, char** argv)
{
  const std::map<int, std::pair<std::function<Outcome()>, double>> criteria{
    { 1, { criterion1, 120 } }, { 2, { criterion2, 60 } },  { 3, { criterion3, 180 } },
    { 4, { criterion4, 600 } }, { 5, { criterion5, 1200 } }, { 6, { criterion6, 300 } },
    { 7, { criterion7, 60 } },  { 8, { criterion8, 120 } },  { 9, { criterion9, 60 } },
  };
  std::vector<int> which;
  for (int i = 1; i < argc; ++i)
    which.push_back(std::atoi(argv[i]));
  if (which.empty())
    for (const auto& [k, v] : criteria)
      which.push_back(k);

  bool all = true;
  for (int k : which) {
    const auto it = criteria.find(k);
    if (it == criteria.end()) {
      std::fprintf(stderr, "unknown criterion %d\n", k);
      return 2;
    }
    const auto start = std::chrono::steady_clock::now();
    Outcome o = it->second.first();
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs <= it->second.second, fmt("time %.1fs (budget %.0fs)", secs, it->second.second));
    std::printf("criterion %d: %s  %s\n", k, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
