#include "doctest.h"

#include <algorithm>
#include <cmath>

#include <copulaeda/algorithms.hpp>
#include <copulaeda/dependence.hpp>
#include <copulaeda/errors.hpp>
#include <copulaeda/objectives.hpp>

#include "test_util.hpp"

using namespace copulaeda;
using doctest::Approx;

namespace {

Population correlated_population(int m, double rho, Rng& rng)
{
  Eigen::Matrix3d R;
  R << 1.0, rho, 0.0, rho, 1.0, 0.0, 0.0, 0.0, 1.0;
  Population pop;
  pop.solutions = mvnormal_copula_sample(R, m, rng);
  for (Eigen::Index i = 0; i < pop.solutions.size(); ++i)
    pop.solutions.data()[i] = 10.0 * pop.solutions.data()[i] - 5.0;
  return pop;
}

} // namespace

TEST_CASE("greedy_chain")
{
  Eigen::MatrixXd mi(4, 4);
  mi << 0, 0.1, 0.9, 0.2, 0.1, 0, 0.3, 0.8, 0.9, 0.3, 0, 0.05, 0.2, 0.8, 0.05, 0;
  const auto perm = greedy_chain(mi);
  REQUIRE(perm.size() == 4);
  // First column-major maximum is (row 2, col 0): perm starts {2, 0}. Head 2
  // prefers 1 (0.3), then head 1 prefers 3 (0.8).
  CHECK(perm == std::vector<int>{ 3, 1, 2, 0 });

  // Strict chain 2-0-3-1: recovered up to reversal.
  Eigen::MatrixXd chain = Eigen::MatrixXd::Constant(4, 4, 0.01);
  const std::vector<int> truth{ 2, 0, 3, 1 };
  for (int k = 0; k < 3; ++k)
    chain(truth[k], truth[k + 1]) = chain(truth[k + 1], truth[k]) = 1.0 + k;
  auto got = greedy_chain(chain);
  if (got.front() != truth.front())
    std::reverse(got.begin(), got.end());
  CHECK(got == truth);

  CHECK(greedy_chain(Eigen::MatrixXd::Zero(2, 2)).size() == 2);
}

TEST_CASE("correlation estimators")
{
  Rng rng(1);
  const auto pop = correlated_population(3000, 0.7, rng);
  const auto Rt = correlation_from_tau(pop.solutions);
  const auto Rp = pearson_correlation(pop.solutions);
  CHECK(Rt(0, 1) == Approx(0.7).epsilon(0.05));
  CHECK(Rp(0, 1) == Approx(0.7).epsilon(0.05));
  CHECK(std::abs(Rt(0, 2)) < 0.06);
  CHECK(Rt.diagonal().isOnes());

  Eigen::MatrixXd flat = pop.solutions;
  flat.col(2).setConstant(1.0);
  const auto Rf = pearson_correlation(flat);
  CHECK(Rf(0, 2) == 0.0);
  CHECK(std::isfinite(correlation_from_tau(flat).sum()));
}

TEST_CASE("margin plumbing round trip")
{
  Rng rng(2);
  const auto pop = correlated_population(200, 0.5, rng);
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -5.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 5.0);
  for (auto kind : { MarginKind::Normal, MarginKind::Kernel, MarginKind::TruncNormal, MarginKind::BetaRescaled }) {
    const auto margins = fit_margins(kind, pop.solutions, lo, hi);
    const Eigen::MatrixXd U = to_uniform(margins, pop.solutions);
    CHECK(U.minCoeff() > 0.0);
    CHECK(U.maxCoeff() < 1.0);
    const auto back = from_uniform(margins, U);
    CHECK((back.solutions - pop.solutions).cwiseAbs().maxCoeff() < 1e-4);
  }
}

TEST_CASE("learn and sample for every algorithm")
{
  Rng rng(3);
  const auto pop = correlated_population(300, 0.8, rng);
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -5.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 5.0);
  for (auto a : { Algorithm::UMDA, Algorithm::GCEDA, Algorithm::CVEDA, Algorithm::DVEDA, Algorithm::CopulaMIMIC }) {
    CAPTURE(to_string(a));
    EdaSpec spec;
    spec.algorithm = a;
    if (a == Algorithm::CopulaMIMIC)
      spec.copulas = { CopulaFamily::Normal };
    const auto model = learn_model(spec, pop, lo, hi, rng);
    CHECK(model.margins.size() == 3);
    CHECK(!describe(model).empty());
    const auto s = sample_model(model, 2000, rng);
    CHECK(s.size() == 2000);
    CHECK(s.dimension() == 3);
    CHECK(s.solutions.allFinite());
    const double t = kendall_tau(s.solutions.col(0), s.solutions.col(1));
    if (a == Algorithm::UMDA)
      CHECK(std::abs(t) < 0.05);
    else
      CHECK(t == Approx(kendall_tau(pop.solutions.col(0), pop.solutions.col(1))).epsilon(0.15));
  }
}

TEST_CASE("learned models are deterministic given the rng")
{
  Rng data(4);
  const auto pop = correlated_population(100, 0.6, data);
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(3, -5.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(3, 5.0);
  for (auto a : { Algorithm::CVEDA, Algorithm::DVEDA, Algorithm::CopulaMIMIC }) {
    EdaSpec spec;
    spec.algorithm = a;
    if (a == Algorithm::CopulaMIMIC)
      spec.copulas = { CopulaFamily::Frank };
    Rng r1(5), r2(5);
    CHECK(describe(learn_model(spec, pop, lo, hi, r1)) == describe(learn_model(spec, pop, lo, hi, r2)));
  }
}

TEST_CASE("fit_pair_ml")
{
  Rng rng(6);
  const Eigen::MatrixXd U = copula_sample(BivariateCopula::frank(6.0), 1000, rng);
  const auto c = fit_pair_ml(CopulaFamily::Frank, U.col(0), U.col(1));
  CHECK(c.family() == CopulaFamily::Frank);
  CHECK(c.theta() == Approx(6.0).epsilon(0.1));
  const auto moment = tau_to_parameter(CopulaFamily::Frank, kendall_tau(U.col(0), U.col(1)));
  CHECK(copula_loglik(c, U.col(0), U.col(1)) >= copula_loglik(moment, U.col(0), U.col(1)) - 1e-9);

  const Eigen::MatrixXd N = copula_sample(BivariateCopula::normal(0.5), 1000, rng);
  CHECK(fit_pair_ml(CopulaFamily::Normal, N.col(0), N.col(1)).theta() == Approx(0.5).epsilon(0.1));
}

TEST_CASE("cmimic chain sampling reproduces neighbour dependence")
{
  SearchModel model;
  for (int i = 0; i < 3; ++i)
    model.margins.push_back(fit_margin(MarginKind::Normal, Eigen::VectorXd::LinSpaced(50, -1, 1), -1, 1));
  ChainDep chain;
  chain.perm = { 2, 0, 1 };
  chain.copulas = { BivariateCopula::normal(0.707), BivariateCopula::normal(0.0) };
  model.dependence = chain;
  Rng rng(7);
  const auto s = cmimic_sample(model, 3000, rng);
  CHECK(kendall_tau(s.solutions.col(2), s.solutions.col(0)) == Approx(0.5).epsilon(0.1));
  CHECK(std::abs(kendall_tau(s.solutions.col(0), s.solutions.col(1))) < 0.05);
}
