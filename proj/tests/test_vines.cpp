#include "doctest.h"

#include <algorithm>
#include <cmath>

#include <copulaeda/dependence.hpp>
#include <copulaeda/special.hpp>
#include <copulaeda/vine.hpp>

#include "test_util.hpp"

using namespace copulaeda;

namespace {

Eigen::MatrixXd tau_to_corr(const Eigen::MatrixXd& tau)
{
  return (tau.array() * special::kPi / 2.0).sin().matrix();
}

double path_weight(const std::vector<int>& path, const Eigen::MatrixXd& w)
{
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < path.size(); ++i)
    s += w(path[i], path[i + 1]);
  return s;
}

bool same_up_to_reversal(std::vector<int> a, const std::vector<int>& b)
{
  if (a == b)
    return true;
  std::reverse(a.begin(), a.end());
  return a == b;
}

// Data whose pairwise Kendall taus match `tau` (normal copula).
Eigen::MatrixXd normal_data(const Eigen::MatrixXd& tau, int m, Rng& rng)
{
  return mvnormal_copula_sample(make_positive_definite(tau_to_corr(tau)), m, rng);
}

RVineModel cvine_normal3(double t12, double t13)
{
  RVineModel model = RVineModel::independent(VineType::CVine, 3);
  model.trees[0][0] = tau_to_parameter(CopulaFamily::Normal, t12);
  model.trees[0][1] = tau_to_parameter(CopulaFamily::Normal, t13);
  model.trunc_level = 1;
  return model;
}

} // namespace

TEST_CASE("select_cvine_order root by largest |tau| sum")
{
  Eigen::MatrixXd tau(3, 3);
  tau << 1.0, 0.8, 0.7, 0.8, 1.0, 0.1, 0.7, 0.1, 1.0;
  Rng rng(1);
  const Eigen::MatrixXd U = normal_data(tau, 3000, rng);
  CHECK(select_cvine_order(U).front() == 0);

  Eigen::MatrixXd two = normal_data(Eigen::Matrix2d::Identity(), 100, rng);
  CHECK(select_cvine_order(two) == std::vector<int>{ 0, 1 });

  // All taus equal (identical columns): tie goes to the first variable.
  Eigen::MatrixXd same(50, 3);
  for (int i = 0; i < 50; ++i)
    same.row(i).setConstant((i + 1) / 51.0);
  CHECK(select_cvine_order(same).front() == 0);
}

TEST_CASE("select_dvine_order")
{
  Eigen::MatrixXd tau(3, 3);
  tau << 1.0, 0.8, 0.7, 0.8, 1.0, 0.1, 0.7, 0.1, 1.0;
  Rng rng(2);
  const auto order = select_dvine_order(normal_data(tau, 3000, rng));
  CHECK(same_up_to_reversal(order, { 1, 0, 2 }));

  CHECK(select_dvine_order(normal_data(Eigen::Matrix2d::Identity(), 100, rng)).size() == 2);

  // Chain 0-1-2-3 with tau 0.9 between neighbours and 0 elsewhere, given as
  // a cost matrix; brute force over all paths confirms the optimum.
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(4, 4);
  for (int i = 0; i + 1 < 4; ++i)
    w(i, i + 1) = w(i + 1, i) = 0.9;
  const Eigen::MatrixXd cost = 1.0 - w.array();
  const auto path = cheapest_insertion_path(cost);
  std::vector<int> perm{ 0, 1, 2, 3 };
  double best = -1.0;
  do {
    best = std::max(best, path_weight(perm, w));
  } while (std::next_permutation(perm.begin(), perm.end()));
  CHECK(path_weight(path, w) == doctest::Approx(best));
  CHECK(same_up_to_reversal(path, { 0, 1, 2, 3 }));
}

TEST_CASE("fit_vine on independent data is mostly product")
{
  int product_edges = 0;
  int edges = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(100 + trial);
    Eigen::MatrixXd U(300, 4);
    for (Eigen::Index i = 0; i < U.size(); ++i)
      U.data()[i] = uniform_open(rng);
    VineFitOptions opt;
    const auto model = fit_vine(U, opt, rng);
    validate(model);
    for (const auto& c : model.trees[0]) {
      ++edges;
      product_edges += c.family() == CopulaFamily::Product;
    }
  }
  CHECK(product_edges >= 0.9 * edges);
}

TEST_CASE("fit_vine two variables recovers the normal copula")
{
  Rng rng(3);
  const Eigen::MatrixXd U = copula_sample(BivariateCopula::normal(0.707), 1000, rng);
  VineFitOptions opt;
  opt.candidates = { CopulaFamily::Normal };
  for (auto type : { VineType::CVine, VineType::DVine }) {
    opt.type = type;
    const auto model = fit_vine(U, opt, rng);
    REQUIRE(model.trees.size() == 1);
    CHECK(model.trees[0][0].family() == CopulaFamily::Normal);
    CHECK(std::abs(model.trees[0][0].theta() - 0.707) <= 0.05);
  }
}

TEST_CASE("fit_vine truncates a single-root C-vine")
{
  int small = 0;
  const auto truth = [] {
    RVineModel model = RVineModel::independent(VineType::CVine, 4);
    for (auto& c : model.trees[0])
      c = tau_to_parameter(CopulaFamily::Normal, 0.6);
    model.trunc_level = 1;
    return model;
  }();
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(200 + trial);
    const Eigen::MatrixXd U = vine_sample(truth, 300, rng);
    VineFitOptions opt;
    const auto model = fit_vine(U, opt, rng);
    validate(model);
    small += model.trunc_level <= 2;
  }
  CHECK(small >= 16);
}

TEST_CASE("vine_sample")
{
  Rng rng(4);
  for (auto type : { VineType::CVine, VineType::DVine }) {
    const Eigen::MatrixXd ind = vine_sample(RVineModel::independent(type, 4), 2000, rng);
    for (int i = 0; i < 4; ++i)
      for (int j = i + 1; j < 4; ++j)
        CHECK(std::abs(kendall_tau(ind.col(i), ind.col(j))) <= 0.05);

    RVineModel two = RVineModel::independent(type, 2);
    two.trees[0][0] = BivariateCopula::normal(0.707);
    two.trunc_level = 1;
    const Eigen::MatrixXd s = vine_sample(two, 2000, rng);
    CHECK(std::abs(kendall_tau(s.col(0), s.col(1)) - 0.5) <= 0.05);
  }
}

TEST_CASE("C-vine simulation and estimation round trip")
{
  Rng rng(5);
  const auto truth = cvine_normal3(0.6, 0.5);
  const Eigen::MatrixXd U = vine_sample(truth, 1000, rng);
  VineFitOptions opt;
  opt.candidates = { CopulaFamily::Normal };
  opt.type = VineType::CVine;
  const auto model = fit_vine(U, opt, rng);
  REQUIRE(model.order.front() == 0);
  // Pair (order[j+1+i], root) taus.
  for (int i = 0; i < 2; ++i) {
    const int var = model.order[1 + i];
    const double expected = var == 1 ? 0.6 : 0.5;
    CHECK(std::abs(parameter_to_tau(model.trees[0][i]) - expected) <= 0.1);
  }
  // Sample marginals stay uniform.
  for (int j = 0; j < 3; ++j)
    CHECK(testutil::ks_uniform_pvalue(U.col(j)) >= 0.01);
}

TEST_CASE("D-vine simulation and estimation round trip")
{
  Rng rng(6);
  RVineModel truth = RVineModel::independent(VineType::DVine, 3);
  truth.trees[0][0] = tau_to_parameter(CopulaFamily::Normal, 0.6);
  truth.trees[0][1] = tau_to_parameter(CopulaFamily::Normal, 0.5);
  // A negative conditional tau keeps tau(0, 2) well below the chain taus.
  truth.trees[1][0] = tau_to_parameter(CopulaFamily::Normal, -0.2);
  truth.trunc_level = 2;
  const Eigen::MatrixXd U = vine_sample(truth, 1000, rng);
  CHECK(std::abs(kendall_tau(U.col(0), U.col(1)) - 0.6) <= 0.05);
  CHECK(std::abs(kendall_tau(U.col(1), U.col(2)) - 0.5) <= 0.05);

  VineFitOptions opt;
  opt.candidates = { CopulaFamily::Normal };
  opt.type = VineType::DVine;
  opt.criterion = TruncationCriterion::None;
  const auto model = fit_vine(U, opt, rng);
  CHECK(same_up_to_reversal(model.order, { 0, 1, 2 }));
  const bool forward = model.order.front() == 0;
  CHECK(std::abs(parameter_to_tau(model.trees[0][forward ? 0 : 1]) - 0.6) <= 0.1);
  CHECK(std::abs(parameter_to_tau(model.trees[0][forward ? 1 : 0]) - 0.5) <= 0.1);
  CHECK(std::abs(parameter_to_tau(model.trees[1][0]) + 0.2) <= 0.1);
}

TEST_CASE("vine_loglik")
{
  Rng rng(7);
  Eigen::MatrixXd U(100, 3);
  for (Eigen::Index i = 0; i < U.size(); ++i)
    U.data()[i] = uniform_open(rng);
  CHECK(vine_loglik(RVineModel::independent(VineType::CVine, 3), U) == 0.0);

  RVineModel two = RVineModel::independent(VineType::DVine, 2);
  two.trees[0][0] = BivariateCopula::normal(0.6);
  two.trunc_level = 1;
  CHECK(vine_loglik(two, vine_sample(two, 500, rng)) > 0.0);

  // Nested fits: pair copulas come from tau inversion, not ML, so an extra
  // tree on data without conditional dependence changes the fit very little.
  const auto truth = cvine_normal3(0.6, 0.5);
  const Eigen::MatrixXd S = vine_sample(truth, 500, rng);
  VineFitOptions opt;
  opt.candidates = { CopulaFamily::Normal };
  opt.criterion = TruncationCriterion::None;
  opt.indep_test = false;
  opt.max_trees = 1;
  Rng r1(9);
  const double one_tree = vine_loglik(fit_vine(S, opt, r1), S);
  opt.max_trees = 2;
  Rng r2(9);
  const double two_trees = vine_loglik(fit_vine(S, opt, r2), S);
  CHECK(std::abs(two_trees - one_tree) <= 1.0);
}

TEST_CASE("candidate restriction and determinism")
{
  Eigen::MatrixXd tau(4, 4);
  tau << 1.0, 0.5, 0.3, 0.2, 0.5, 1.0, 0.4, 0.1, 0.3, 0.4, 1.0, 0.3, 0.2, 0.1, 0.3, 1.0;
  Rng data_rng(10);
  const Eigen::MatrixXd U = normal_data(tau, 400, data_rng);
  VineFitOptions opt;
  opt.candidates = { CopulaFamily::Frank, CopulaFamily::Clayton };
  for (auto type : { VineType::CVine, VineType::DVine }) {
    opt.type = type;
    Rng a(11), b(11);
    const auto m1 = fit_vine(U, opt, a);
    const auto m2 = fit_vine(U, opt, b);
    CHECK(serialize(m1) == serialize(m2));
    for (const auto& [family, count] : count_families(m1))
      CHECK((family == CopulaFamily::Frank || family == CopulaFamily::Clayton || family == CopulaFamily::Product));
    Rng s1(12), s2(12);
    CHECK(vine_sample(m1, 10, s1) == vine_sample(m2, 10, s2));
  }
}

TEST_CASE("serialize")
{
  const auto text = serialize(cvine_normal3(0.6, 0.5));
  CHECK(text.find("vine CVine") != std::string::npos);
  CHECK(text.find("order 1 2 3") != std::string::npos);
  CHECK(text.find("tree 2:") != std::string::npos);
}

TEST_CASE("validate rejects malformed models")
{
  auto m = RVineModel::independent(VineType::DVine, 3);
  m.trees[1][0] = BivariateCopula::normal(0.3);
  CHECK_THROWS(validate(m));
  m = RVineModel::independent(VineType::DVine, 3);
  m.order = { 0, 0, 1 };
  CHECK_THROWS(validate(m));
}
