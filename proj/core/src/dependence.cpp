#include "copulaeda/dependence.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include "copulaeda/errors.hpp"

namespace copulaeda {

namespace {

// Counts C_m at each sample point from integer-comparable ranks. O(m^2).
std::vector<double> empirical_copula_at_points(const Eigen::VectorXd& ru, const Eigen::VectorXd& rv)
{
  const auto m = ru.size();
  std::vector<double> out(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    int count = 0;
    for (Eigen::Index j = 0; j < m; ++j)
      count += (ru[j] <= ru[i] && rv[j] <= rv[i]) ? 1 : 0;
    out[i] = static_cast<double>(count) / static_cast<double>(m);
  }
  return out;
}

double independence_statistic(const Eigen::VectorXd& ru, const Eigen::VectorXd& rv)
{
  const auto m = ru.size();
  const double scale = 1.0 / static_cast<double>(m + 1);
  double s = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    int count = 0;
    for (Eigen::Index j = 0; j < m; ++j)
      count += (ru[j] <= ru[i] && rv[j] <= rv[i]) ? 1 : 0;
    const double diff = static_cast<double>(count) / static_cast<double>(m) - ru[i] * scale * rv[i] * scale;
    s += diff * diff;
  }
  return s;
}

} // namespace

double kendall_tau(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y,
                   bool* degenerate)
{
  if (x.size() != y.size())
    throw std::invalid_argument("kendall_tau: inputs differ in length");
  if (x.size() < 2)
    throw std::invalid_argument("kendall_tau: need at least 2 observations");
  const auto m = x.size();
  long long concordant_minus_discordant = 0;
  long long ties_x = 0;
  long long ties_y = 0;
  long long pairs = 0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = i + 1; j < m; ++j) {
      ++pairs;
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0.0)
        ++ties_x;
      if (dy == 0.0)
        ++ties_y;
      if (dx != 0.0 && dy != 0.0)
        concordant_minus_discordant += ((dx > 0.0) == (dy > 0.0)) ? 1 : -1;
    }
  }
  const double denom = std::sqrt(static_cast<double>(pairs - ties_x)) *
                       std::sqrt(static_cast<double>(pairs - ties_y));
  if (degenerate)
    *degenerate = denom == 0.0;
  if (denom == 0.0)
    return 0.0;
  return std::clamp(static_cast<double>(concordant_minus_discordant) / denom, -1.0, 1.0);
}

Eigen::MatrixXd kendall_tau_matrix(const Eigen::Ref<const Eigen::MatrixXd>& data)
{
  const auto n = data.cols();
  Eigen::MatrixXd tau = Eigen::MatrixXd::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j)
      tau(i, j) = tau(j, i) = kendall_tau(data.col(i), data.col(j));
  return tau;
}

Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& x)
{
  const auto m = x.size();
  std::vector<Eigen::Index> order(m);
  std::iota(order.begin(), order.end(), Eigen::Index{ 0 });
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return x[a] < x[b]; });
  Eigen::VectorXd ranks(m);
  Eigen::Index i = 0;
  while (i < m) {
    Eigen::Index j = i;
    while (j + 1 < m && x[order[j + 1]] == x[order[i]])
      ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (Eigen::Index k = i; k <= j; ++k)
      ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

Eigen::MatrixXd pseudo_observations(const Eigen::Ref<const Eigen::MatrixXd>& data)
{
  Eigen::MatrixXd out(data.rows(), data.cols());
  const double scale = 1.0 / static_cast<double>(data.rows() + 1);
  for (Eigen::Index j = 0; j < data.cols(); ++j)
    out.col(j) = average_ranks(data.col(j)) * scale;
  return out;
}

double empirical_copula_at(const Eigen::Ref<const Eigen::VectorXd>& u,
                           const Eigen::Ref<const Eigen::VectorXd>& v,
                           double a,
                           double b)
{
  if (u.size() != v.size() || u.size() == 0)
    throw std::invalid_argument("empirical_copula_at: bad sample");
  int count = 0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    count += (u[i] <= a && v[i] <= b) ? 1 : 0;
  return static_cast<double>(count) / static_cast<double>(u.size());
}

IndepTestResult indep_test_cvm(const Eigen::Ref<const Eigen::VectorXd>& u,
                               const Eigen::Ref<const Eigen::VectorXd>& v,
                               int replicates,
                               Rng& rng,
                               double sig_level)
{
  if (u.size() != v.size() || u.size() == 0)
    throw std::invalid_argument("indep_test_cvm: bad sample");
  if (replicates < 1)
    throw std::invalid_argument("indep_test_cvm: replicates must be >= 1");

  const Eigen::VectorXd ru = average_ranks(u);
  Eigen::VectorXd rv = average_ranks(v);
  IndepTestResult result;
  result.statistic = independence_statistic(ru, rv);

  int exceed = 0;
  for (int b = 0; b < replicates; ++b) {
    // Fisher-Yates with our own uniform draws keeps the stream portable.
    for (Eigen::Index i = rv.size() - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(uniform_open(rng) * static_cast<double>(i + 1));
      std::swap(rv[i], rv[std::min(j, i)]);
    }
    if (independence_statistic(ru, rv) >= result.statistic)
      ++exceed;
  }
  result.p_value = static_cast<double>(exceed + 1) / static_cast<double>(replicates + 1);
  result.independent = result.p_value >= sig_level;
  return result;
}

BivariateCopula gof_select_copula(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  const Eigen::Ref<const Eigen::VectorXd>& v,
                                  std::span<const CopulaFamily> candidates)
{
  if (candidates.empty())
    throw std::invalid_argument("gof_select_copula: no candidate families");
  const double tau = clip_tau(kendall_tau(u, v));

  std::vector<BivariateCopula> fitted;
  Eigen::VectorXd pu;
  Eigen::VectorXd pv;
  auto ensure_pseudo = [&] {
    if (pu.size() == 0) {
      const double scale = 1.0 / static_cast<double>(u.size() + 1);
      pu = average_ranks(u) * scale;
      pv = average_ranks(v) * scale;
    }
  };
  for (CopulaFamily family : candidates) {
    try {
      if (family == CopulaFamily::Student) {
        const auto start = tau_to_parameter(CopulaFamily::Normal, tau);
        if (start.family() == CopulaFamily::Product) {
          fitted.push_back(start);
          continue;
        }
        ensure_pseudo();
        fitted.push_back(fit_student_dof(pu, pv, start.theta()));
      } else {
        fitted.push_back(tau_to_parameter(family, tau));
      }
    } catch (const UnsupportedTauError&) {
      // Family cannot represent this dependence; leave it out.
    }
  }
  if (fitted.empty())
    return BivariateCopula::product();
  if (fitted.size() == 1)
    return fitted.front();

  ensure_pseudo();
  const std::vector<double> empirical = empirical_copula_at_points(pu, pv);
  std::size_t best = 0;
  double best_stat = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < fitted.size(); ++k) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < pu.size(); ++i) {
      const double d = empirical[i] - fitted[k].cdf(pu[i], pv[i]);
      s += d * d;
    }
    if (s < best_stat) {
      best_stat = s;
      best = k;
    }
  }
  return fitted[best];
}

double copula_mutual_information(const BivariateCopula& c, Rng& rng, int samples)
{
  switch (c.family()) {
    case CopulaFamily::Product:
      return 0.0;
    case CopulaFamily::Normal:
      return -0.5 * std::log1p(-c.theta() * c.theta());
    default:
      break;
  }
  if (samples < 1)
    throw std::invalid_argument("copula_mutual_information: samples must be >= 1");
  const Eigen::MatrixXd uv = copula_sample(c, samples, rng);
  return std::max(0.0, copula_loglik(c, uv) / static_cast<double>(samples));
}

CorrelationMatrix make_positive_definite(const CorrelationMatrix& R)
{
  if (R.rows() != R.cols())
    throw std::invalid_argument("make_positive_definite: matrix must be square");
  const auto n = R.rows();
  constexpr double kAcceptFloor = kEigenFloor / 10.0;

  auto min_eigenvalue = [](const Eigen::MatrixXd& A) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
  };
  if (n == 0 || min_eigenvalue(R) >= kAcceptFloor)
    return R;

  Eigen::MatrixXd A = 0.5 * (R + R.transpose());
  for (int pass = 0; pass < 20; ++pass) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
    Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(kEigenFloor);
    A = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
    const Eigen::VectorXd d = A.diagonal().cwiseSqrt().cwiseInverse();
    A = d.asDiagonal() * A * d.asDiagonal();
    A = 0.5 * (A + A.transpose()).eval();
    A.diagonal().setOnes();
    if (min_eigenvalue(A) >= kAcceptFloor && Eigen::LLT<Eigen::MatrixXd>(A).info() == Eigen::Success)
      break;
  }
  return A;
}

} // namespace copulaeda
