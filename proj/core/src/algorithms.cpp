#include "copulaeda/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/tools/minima.hpp>

#include "copulaeda/dependence.hpp"
#include "copulaeda/errors.hpp"
#include "copulaeda/special.hpp"

namespace copulaeda {

namespace {

template <class... Ts>
struct overloaded : Ts...
{
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;


BivariateCopula make_family(CopulaFamily family, double param)
{
  if (param == 0.0)
    return BivariateCopula::product();
  switch (family) {
    case CopulaFamily::Normal:
      return BivariateCopula::normal(param);
    case CopulaFamily::Frank:
      return BivariateCopula::frank(param);
    case CopulaFamily::Clayton:
      return BivariateCopula::clayton(param);
    case CopulaFamily::Gumbel:
      return BivariateCopula::gumbel(param);
    default:
      break;
  }
  throw std::invalid_argument("unsupported chain copula family");
}

} // namespace

std::vector<MarginModel> fit_margins(MarginKind kind,
                                     const Eigen::MatrixXd& selected,
                                     const Eigen::VectorXd& lower,
                                     const Eigen::VectorXd& upper)
{
  std::vector<MarginModel> margins;
  margins.reserve(selected.cols());
  for (Eigen::Index j = 0; j < selected.cols(); ++j)
    margins.push_back(fit_margin(kind, selected.col(j), lower[j], upper[j]));
  return margins;
}

Eigen::MatrixXd to_uniform(const std::vector<MarginModel>& margins, const Eigen::MatrixXd& x)
{
  Eigen::MatrixXd u(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    for (Eigen::Index i = 0; i < x.rows(); ++i)
      u(i, j) = clamp_unit(margins[j].cdf(x(i, j)));
  return u;
}

Population from_uniform(const std::vector<MarginModel>& margins, const Eigen::MatrixXd& u)
{
  Population pop;
  pop.solutions.resize(u.rows(), u.cols());
  for (Eigen::Index j = 0; j < u.cols(); ++j)
    for (Eigen::Index i = 0; i < u.rows(); ++i)
      pop.solutions(i, j) = margins[j].quantile(clamp_unit(u(i, j)));
  return pop;
}

CorrelationMatrix correlation_from_tau(const Eigen::MatrixXd& data)
{
  const auto n = data.cols();
  CorrelationMatrix R = CorrelationMatrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double tau = clip_tau(kendall_tau(data.col(i), data.col(j)));
      const double rho = std::clamp(std::sin(special::kPi * tau / 2.0), -kMaxCorrelation, kMaxCorrelation);
      R(i, j) = R(j, i) = rho;
    }
  }
  return make_positive_definite(R);
}

CorrelationMatrix pearson_correlation(const Eigen::MatrixXd& data)
{
  const auto n = data.cols();
  const Eigen::MatrixXd centered = data.rowwise() - data.colwise().mean();
  const Eigen::MatrixXd cov = centered.transpose() * centered;
  CorrelationMatrix R = CorrelationMatrix::Identity(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double denom = std::sqrt(cov(i, i) * cov(j, j));
      const double rho = denom > 0.0 ? cov(i, j) / denom : 0.0;
      R(i, j) = R(j, i) = std::clamp(rho, -kMaxCorrelation, kMaxCorrelation);
    }
  }
  return make_positive_definite(R);
}

SearchModel ceda_learn(const EdaSpec& spec,
                       const Population& selected,
                       const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper)
{
  if (selected.size() < 2)
    throw std::invalid_argument("ceda_learn: need at least 2 selected solutions");
  SearchModel model;
  model.margins = fit_margins(effective_margin(spec), selected.solutions, lower, upper);
  if (spec.algorithm == Algorithm::GCEDA) {
    // With normal margins the model is EMNA: the plain correlation matrix.
    const bool normal_margins = effective_margin(spec) == MarginKind::Normal;
    model.dependence = NormalDep{ normal_margins ? pearson_correlation(selected.solutions)
                                                 : correlation_from_tau(selected.solutions) };
  }
  else
    model.dependence = ProductDep{};
  return model;
}

Population ceda_sample(const SearchModel& model, int pop_size, Rng& rng)
{
  const auto n = static_cast<Eigen::Index>(model.margins.size());
  Eigen::MatrixXd u;
  if (const auto* dep = std::get_if<NormalDep>(&model.dependence)) {
    u = mvnormal_copula_sample(dep->R, pop_size, rng);
  } else if (std::holds_alternative<ProductDep>(model.dependence)) {
    u.resize(pop_size, n);
    for (Eigen::Index i = 0; i < pop_size; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        u(i, j) = uniform_open(rng);
  } else {
    throw std::invalid_argument("ceda_sample: model has no product or normal dependence");
  }
  return from_uniform(model.margins, u);
}

SearchModel veda_learn(const EdaSpec& spec,
                       const Population& selected,
                       const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper,
                       Rng& rng)
{
  if (selected.size() < 2)
    throw std::invalid_argument("veda_learn: need at least 2 selected solutions");
  SearchModel model;
  model.margins = fit_margins(effective_margin(spec), selected.solutions, lower, upper);
  const Eigen::MatrixXd u = to_uniform(model.margins, selected.solutions);

  VineFitOptions options;
  options.type = spec.algorithm == Algorithm::DVEDA ? VineType::DVine : VineType::CVine;
  options.candidates = spec.copulas;
  options.sig_level = spec.sig_level;
  options.indep_replicates = spec.indep_replicates;
  options.criterion = spec.trunc_criterion;
  model.dependence = VineDep{ fit_vine(u, options, rng) };
  return model;
}

Population veda_sample(const SearchModel& model, int pop_size, Rng& rng)
{
  const auto* dep = std::get_if<VineDep>(&model.dependence);
  if (!dep)
    throw std::invalid_argument("veda_sample: model has no vine dependence");
  return from_uniform(model.margins, vine_sample(dep->vine, pop_size, rng));
}

BivariateCopula fit_pair_ml(CopulaFamily family,
                            const Eigen::Ref<const Eigen::VectorXd>& u,
                            const Eigen::Ref<const Eigen::VectorXd>& v)
{
  const double tau = clip_tau(kendall_tau(u, v));
  BivariateCopula start = BivariateCopula::product();
  try {
    start = tau_to_parameter(family, tau);
  } catch (const UnsupportedTauError&) {
    return BivariateCopula::product();
  }

  double lo = 0.0;
  double hi = 0.0;
  switch (family) {
    case CopulaFamily::Normal:
      lo = -kMaxCorrelation;
      hi = kMaxCorrelation;
      break;
    case CopulaFamily::Frank:
      lo = -kMaxFrankTheta;
      hi = kMaxFrankTheta;
      break;
    case CopulaFamily::Clayton:
      lo = 1e-6;
      hi = kMaxClaytonTheta;
      break;
    case CopulaFamily::Gumbel:
      lo = 1.0;
      hi = kMaxGumbelTheta;
      break;
    default:
      return start;
  }

  auto negloglik = [&](double param) {
    try {
      const double ll = copula_loglik(make_family(family, param), u, v);
      return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
    } catch (const ParameterDomainError&) {
      return std::numeric_limits<double>::max();
    }
  };

  // Brent search on a bracket around the moment estimate, widened to the
  // full domain when the optimum sits on the bracket edge.
  const double start_param = start.family() == CopulaFamily::Product ? 0.0 : start.theta();
  const double start_nll = negloglik(start_param);
  double width = family == CopulaFamily::Normal ? 0.25 : std::max(1.0, std::abs(start_param));
  BivariateCopula best = start;
  double best_nll = start_nll;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double a = std::max(lo, start_param - width);
    const double b = std::min(hi, start_param + width);
    std::uintmax_t iters = 100;
    const auto [x, fx] = boost::math::tools::brent_find_minima(negloglik, a, b, 30, iters);
    if (std::isfinite(fx) && fx < best_nll) {
      best_nll = fx;
      best = make_family(family, x);
    }
    const bool interior = (x - a) > 1e-3 * (b - a) && (b - x) > 1e-3 * (b - a);
    if (interior || (a == lo && b == hi))
      break;
    width = std::max(hi - start_param, start_param - lo);
  }
  return best;
}

std::vector<int> greedy_chain(Eigen::MatrixXd mi)
{
  const auto n = mi.rows();
  if (n == 0)
    return {};
  if (n == 1)
    return { 0 };
  constexpr double kUsed = -std::numeric_limits<double>::infinity();
  mi.diagonal().setZero();

  // First maximum in column-major order, as (row, col).
  Eigen::Index best_row = 1;
  Eigen::Index best_col = 0;
  double best = kUsed;
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      if (r != c && mi(r, c) > best) {
        best = mi(r, c);
        best_row = r;
        best_col = c;
      }
  std::vector<int> perm{ static_cast<int>(best_row), static_cast<int>(best_col) };
  mi.row(best_row).setConstant(kUsed);
  mi.row(best_col).setConstant(kUsed);

  while (static_cast<Eigen::Index>(perm.size()) < n) {
    const int head = perm.front();
    Eigen::Index next = -1;
    double value = kUsed;
    for (Eigen::Index r = 0; r < n; ++r)
      if (mi(r, head) > value || (next < 0 && mi(r, head) == value && value > kUsed)) {
        value = mi(r, head);
        next = r;
      }
    if (next < 0) {
      // Every remaining MI is -inf; fall back to the lowest unused index.
      for (Eigen::Index r = 0; r < n; ++r)
        if (std::find(perm.begin(), perm.end(), static_cast<int>(r)) == perm.end()) {
          next = r;
          break;
        }
    }
    perm.insert(perm.begin(), static_cast<int>(next));
    mi.row(next).setConstant(kUsed);
  }
  return perm;
}

SearchModel cmimic_learn(const EdaSpec& spec,
                         const Population& selected,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         Rng& rng)
{
  if (selected.size() < 2)
    throw std::invalid_argument("cmimic_learn: need at least 2 selected solutions");
  const CopulaFamily family = spec.copulas.empty() ? CopulaFamily::Normal : spec.copulas.front();
  if (family != CopulaFamily::Normal && family != CopulaFamily::Frank)
    throw ConfigError("Copula MIMIC supports normal or frank copulas");

  SearchModel model;
  model.margins = fit_margins(effective_margin(spec), selected.solutions, lower, upper);
  const Eigen::MatrixXd u = to_uniform(model.margins, selected.solutions);
  const auto n = u.cols();

  std::vector<std::vector<BivariateCopula>> pair(n, std::vector<BivariateCopula>(n));
  Eigen::MatrixXd mi = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 1; i < n; ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      const BivariateCopula c = fit_pair_ml(family, u.col(i), u.col(j));
      pair[i][j] = pair[j][i] = c;
      mi(i, j) = mi(j, i) = copula_mutual_information(c, rng, spec.mi_samples);
    }
  }

  ChainDep chain;
  chain.perm = greedy_chain(mi);
  for (std::size_t k = 0; k + 1 < chain.perm.size(); ++k)
    chain.copulas.push_back(pair[chain.perm[k]][chain.perm[k + 1]]);
  model.dependence = std::move(chain);
  return model;
}

Population cmimic_sample(const SearchModel& model, int pop_size, Rng& rng)
{
  const auto* chain = std::get_if<ChainDep>(&model.dependence);
  if (!chain)
    throw std::invalid_argument("cmimic_sample: model has no chain dependence");
  const auto n = static_cast<Eigen::Index>(model.margins.size());
  Eigen::MatrixXd u(pop_size, n);
  const auto& perm = chain->perm;
  for (Eigen::Index i = 0; i < pop_size; ++i)
    u(i, perm.back()) = uniform_open(rng);
  for (int k = static_cast<int>(perm.size()) - 2; k >= 0; --k) {
    const auto& c = chain->copulas[k];
    for (Eigen::Index i = 0; i < pop_size; ++i)
      u(i, perm[k]) = c.hinv(uniform_open(rng), u(i, perm[k + 1]));
  }
  return from_uniform(model.margins, u);
}

SearchModel learn_model(const EdaSpec& spec,
                        const Population& selected,
                        const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper,
                        Rng& rng)
{
  switch (spec.algorithm) {
    case Algorithm::UMDA:
    case Algorithm::GCEDA:
      return ceda_learn(spec, selected, lower, upper);
    case Algorithm::CVEDA:
    case Algorithm::DVEDA:
      return veda_learn(spec, selected, lower, upper, rng);
    case Algorithm::CopulaMIMIC:
      return cmimic_learn(spec, selected, lower, upper, rng);
  }
  throw std::invalid_argument("learn_model: unknown algorithm");
}

Population sample_model(const SearchModel& model, int pop_size, Rng& rng)
{
  return std::visit(overloaded{
                      [&](const ProductDep&) { return ceda_sample(model, pop_size, rng); },
                      [&](const NormalDep&) { return ceda_sample(model, pop_size, rng); },
                      [&](const VineDep&) { return veda_sample(model, pop_size, rng); },
                      [&](const ChainDep&) { return cmimic_sample(model, pop_size, rng); },
                    },
                    model.dependence);
}

std::string describe(const SearchModel& model)
{
  std::ostringstream os;
  os.precision(6);
  os << "margins";
  for (const auto& m : model.margins) {
    os << "\n  " << to_string(m.kind());
    std::visit(overloaded{
                 [&](const NormalParams& p) { os << " mu=" << p.mu << " sigma=" << p.sigma; },
                 [&](const KernelParams& p) { os << " m=" << p.sample.size() << " h=" << p.bandwidth; },
                 [&](const TruncNormalParams& p) {
                   os << " mu=" << p.mu << " sigma=" << p.sigma << " lower=" << p.lower << " upper=" << p.upper;
                 },
                 [&](const BetaRescaledParams& p) {
                   os << " lower=" << p.lower << " upper=" << p.upper << " a=" << p.a << " b=" << p.b;
                 },
               },
               m.params());
  }
  os << '\n';
  std::visit(overloaded{
               [&](const ProductDep&) { os << "dependence product\n"; },
               [&](const NormalDep& d) { os << "dependence normal\n" << d.R << '\n'; },
               [&](const VineDep& d) { os << serialize(d.vine); },
               [&](const ChainDep& d) {
                 os << "dependence chain\nperm";
                 for (int p : d.perm)
                   os << ' ' << p + 1;
                 os << "\ncopulas";
                 for (const auto& c : d.copulas)
                   os << ' ' << c.describe();
                 os << '\n';
               },
             },
             model.dependence);
  return os.str();
}

} // namespace copulaeda
