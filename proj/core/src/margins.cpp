#include "copulaeda/margins.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

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

constexpr double kProbEps = 1e-15;
constexpr double kBetaDataEps = 1e-6;
// Kernel quantile bracket half-width in bandwidths. Phi(-8) ~ 6e-16, so the
// smoothed CDF is 0 and 1 to double precision at the bracket ends.
constexpr double kKernelBracket = 8.0;

double sample_mean(const Eigen::Ref<const Eigen::VectorXd>& x)
{
  return x.mean();
}

double ml_sd(const Eigen::Ref<const Eigen::VectorXd>& x, double mean)
{
  return std::sqrt((x.array() - mean).square().sum() / static_cast<double>(x.size()));
}

// The floor only replaces a degenerate (zero) scale. Tiny positive scales are
// kept: Summation Cancellation needs sum |y_i| near 1e-16 to hit its target.
double scale_or_floor(double s)
{
  return s > 0.0 && std::isfinite(s) ? s : kMinScale;
}

// Type-7 sample quantile of sorted data.
double sorted_quantile(const std::vector<double>& sorted, double p)
{
  const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

double kernel_cdf(const KernelParams& k, double x)
{
  double total = 0.0;
  for (double xi : k.sample)
    total += special::norm_cdf((x - xi) / k.bandwidth);
  return total / static_cast<double>(k.sample.size());
}

double kernel_pdf(const KernelParams& k, double x)
{
  double total = 0.0;
  for (double xi : k.sample)
    total += special::norm_pdf((x - xi) / k.bandwidth);
  return total / (static_cast<double>(k.sample.size()) * k.bandwidth);
}

// Normalizing pieces of a truncated normal, computed on whichever tail keeps
// precision.
struct TruncNormalFrame
{
  double alpha, beta;
  bool upper_tail;
  double lo_mass, mass;
};

TruncNormalFrame trunc_frame(const TruncNormalParams& t)
{
  TruncNormalFrame f{};
  f.alpha = (t.lower - t.mu) / t.sigma;
  f.beta = (t.upper - t.mu) / t.sigma;
  f.upper_tail = f.alpha > 0.0;
  if (f.upper_tail) {
    f.lo_mass = special::norm_cdf(-f.alpha);
    f.mass = f.lo_mass - special::norm_cdf(-f.beta);
  } else {
    f.lo_mass = special::norm_cdf(f.alpha);
    f.mass = special::norm_cdf(f.beta) - f.lo_mass;
  }
  return f;
}

double trunc_cdf(const TruncNormalParams& t, double x)
{
  if (x <= t.lower)
    return 0.0;
  if (x >= t.upper)
    return 1.0;
  const auto f = trunc_frame(t);
  if (!(f.mass > 0.0))
    return (x - t.lower) / (t.upper - t.lower);
  const double z = (x - t.mu) / t.sigma;
  const double r = f.upper_tail ? (f.lo_mass - special::norm_cdf(-z)) / f.mass
                                : (special::norm_cdf(z) - f.lo_mass) / f.mass;
  return std::clamp(r, 0.0, 1.0);
}

double trunc_pdf(const TruncNormalParams& t, double x)
{
  if (x < t.lower || x > t.upper)
    return 0.0;
  const auto f = trunc_frame(t);
  if (!(f.mass > 0.0))
    return 1.0 / (t.upper - t.lower);
  return special::norm_pdf((x - t.mu) / t.sigma) / (t.sigma * f.mass);
}

// Solve cdf(x) = p on [lo, hi] for a continuous nondecreasing cdf with
// density pdf. Newton steps, falling back to bisection when a step leaves
// the bracket.
template <typename Cdf, typename Pdf>
double invert_cdf(Cdf&& cdf, Pdf&& pdf, double p, double lo, double hi)
{
  double x = 0.5 * (lo + hi);
  for (int iter = 0; iter < 300; ++iter) {
    const double f = cdf(x) - p;
    if (std::abs(f) <= 1e-13)
      return x;
    if (f < 0.0)
      lo = x;
    else
      hi = x;
    if (hi - lo <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(lo), std::abs(hi)))
      return x;
    const double d = pdf(x);
    double next = d > 0.0 ? x - f / d : lo - 1.0;
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

// Two-parameter Nelder-Mead minimizer (standard coefficients), enough for
// the beta likelihood.
std::array<double, 2> nelder_mead_2d(const auto& f, std::array<double, 2> start, double step)
{
  using Point = std::array<double, 2>;
  std::array<Point, 3> p{ start, Point{ start[0] + step, start[1] }, Point{ start[0], start[1] + step } };
  std::array<double, 3> fv{ f(p[0]), f(p[1]), f(p[2]) };
  auto lerp = [](const Point& a, const Point& b, double t) {
    return Point{ a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]) };
  };
  for (int iter = 0; iter < 500; ++iter) {
    std::array<int, 3> idx{ 0, 1, 2 };
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return fv[a] < fv[b]; });
    const int best = idx[0], mid = idx[1], worst = idx[2];
    if (std::abs(fv[worst] - fv[best]) <= 1e-10 * (std::abs(fv[best]) + 1e-10))
      break;
    const Point centroid{ 0.5 * (p[best][0] + p[mid][0]), 0.5 * (p[best][1] + p[mid][1]) };
    const Point reflected = lerp(centroid, p[worst], -1.0);
    const double fr = f(reflected);
    if (fr < fv[best]) {
      const Point expanded = lerp(centroid, p[worst], -2.0);
      const double fe = f(expanded);
      if (fe < fr) {
        p[worst] = expanded;
        fv[worst] = fe;
      } else {
        p[worst] = reflected;
        fv[worst] = fr;
      }
    } else if (fr < fv[mid]) {
      p[worst] = reflected;
      fv[worst] = fr;
    } else {
      const bool outside = fr < fv[worst];
      const Point contracted = lerp(centroid, outside ? reflected : p[worst], 0.5);
      const double fc = f(contracted);
      if (fc < std::min(fr, fv[worst])) {
        p[worst] = contracted;
        fv[worst] = fc;
      } else {
        for (int i : { mid, worst }) {
          p[i] = lerp(p[best], p[i], 0.5);
          fv[i] = f(p[i]);
        }
      }
    }
  }
  const auto best = std::min_element(fv.begin(), fv.end()) - fv.begin();
  return p[best];
}

BetaRescaledParams fit_beta(const Eigen::Ref<const Eigen::VectorXd>& sample, double lower, double upper)
{
  std::vector<double> x(sample.size());
  for (Eigen::Index i = 0; i < sample.size(); ++i)
    x[i] = std::clamp((sample[i] - lower) / (upper - lower), kBetaDataEps, 1.0 - kBetaDataEps);

  double sum_log = 0.0;
  double sum_log1m = 0.0;
  for (double xi : x) {
    sum_log += std::log(xi);
    sum_log1m += std::log1p(-xi);
  }
  const double m = static_cast<double>(x.size());
  // Negative log-likelihood over (log a, log b); start at a = b = 1.
  auto negloglik = [&](const std::array<double, 2>& s) {
    const double a = std::exp(s[0]);
    const double b = std::exp(s[1]);
    const double ll = (a - 1.0) * sum_log + (b - 1.0) * sum_log1m +
                      m * (std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b));
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
  };
  const auto s = nelder_mead_2d(negloglik, { 0.0, 0.0 }, 0.1);
  double a = std::exp(s[0]);
  double b = std::exp(s[1]);
  if (!std::isfinite(a) || !std::isfinite(b) || a <= 0.0 || b <= 0.0) {
    a = 1.0;
    b = 1.0;
  }
  return { lower, upper, a, b };
}

} // namespace

std::string_view to_string(MarginKind kind)
{
  switch (kind) {
    case MarginKind::Normal:
      return "norm";
    case MarginKind::Kernel:
      return "kernel";
    case MarginKind::TruncNormal:
      return "truncnorm";
    case MarginKind::BetaRescaled:
      return "betamargin";
  }
  return "unknown";
}

std::optional<MarginKind> parse_margin_kind(std::string_view name)
{
  if (name == "norm" || name == "normal")
    return MarginKind::Normal;
  if (name == "kernel")
    return MarginKind::Kernel;
  if (name == "truncnorm")
    return MarginKind::TruncNormal;
  if (name == "betamargin" || name == "beta")
    return MarginKind::BetaRescaled;
  return std::nullopt;
}

MarginModel::MarginModel(Params params)
  : params_(std::move(params))
{
  std::visit(overloaded{
               [](const NormalParams& p) {
                 if (!(p.sigma > 0.0))
                   throw ParameterDomainError("normal margin requires sigma > 0");
               },
               [](KernelParams& p) {
                 if (p.sample.empty())
                   throw ParameterDomainError("kernel margin requires a sample");
                 if (!(p.bandwidth > 0.0))
                   throw ParameterDomainError("kernel margin requires bandwidth > 0");
                 std::sort(p.sample.begin(), p.sample.end());
               },
               [](const TruncNormalParams& p) {
                 if (!(p.sigma > 0.0) || !(p.lower < p.upper))
                   throw ParameterDomainError("truncated normal margin requires sigma > 0 and lower < upper");
               },
               [](const BetaRescaledParams& p) {
                 if (!(p.a > 0.0) || !(p.b > 0.0) || !(p.lower < p.upper))
                   throw ParameterDomainError("beta margin requires a, b > 0 and lower < upper");
               },
             },
             params_);
}

MarginKind MarginModel::kind() const
{
  return static_cast<MarginKind>(params_.index());
}

double MarginModel::cdf(double x) const
{
  return std::visit(overloaded{
                      [x](const NormalParams& p) { return special::norm_cdf((x - p.mu) / p.sigma); },
                      [x](const KernelParams& p) { return kernel_cdf(p, x); },
                      [x](const TruncNormalParams& p) { return trunc_cdf(p, x); },
                      [x](const BetaRescaledParams& p) {
                        return special::beta_cdf((x - p.lower) / (p.upper - p.lower), p.a, p.b);
                      },
                    },
                    params_);
}

double MarginModel::quantile(double p) const
{
  p = std::clamp(p, kProbEps, 1.0 - kProbEps);
  return std::visit(
    overloaded{
      [p](const NormalParams& m) { return m.mu + m.sigma * special::norm_quantile(p); },
      [p](const KernelParams& m) {
        const double lo = m.sample.front() - kKernelBracket * m.bandwidth;
        const double hi = m.sample.back() + kKernelBracket * m.bandwidth;
        return invert_cdf([&m](double x) { return kernel_cdf(m, x); },
                          [&m](double x) { return kernel_pdf(m, x); },
                          p,
                          lo,
                          hi);
      },
      [p](const TruncNormalParams& m) {
        const double x = invert_cdf([&m](double x) { return trunc_cdf(m, x); },
                                    [&m](double x) { return trunc_pdf(m, x); },
                                    p,
                                    m.lower,
                                    m.upper);
        return std::clamp(x, m.lower, m.upper);
      },
      [p](const BetaRescaledParams& m) {
        return m.lower + special::beta_quantile(p, m.a, m.b) * (m.upper - m.lower);
      },
    },
    params_);
}

double silverman_bandwidth(const Eigen::Ref<const Eigen::VectorXd>& sample)
{
  const auto m = sample.size();
  if (m < 2)
    return kMinScale;
  const double mean = sample.mean();
  const double sd = std::sqrt((sample.array() - mean).square().sum() / static_cast<double>(m - 1));
  std::vector<double> sorted(sample.data(), sample.data() + m);
  std::sort(sorted.begin(), sorted.end());
  const double iqr = sorted_quantile(sorted, 0.75) - sorted_quantile(sorted, 0.25);
  double lo = std::min(sd, iqr / 1.34);
  if (!(lo > 0.0))
    lo = sd;
  const double h = 0.9 * lo * std::pow(static_cast<double>(m), -0.2);
  return scale_or_floor(h);
}

MarginModel fit_margin(MarginKind kind,
                       const Eigen::Ref<const Eigen::VectorXd>& sample,
                       double lower,
                       double upper)
{
  if (sample.size() < 2)
    throw std::invalid_argument("fit_margin: sample needs at least 2 values");
  if (!(lower < upper))
    throw ConfigError("fit_margin: lower bound must be below upper bound");

  switch (kind) {
    case MarginKind::Normal: {
      const double mu = sample_mean(sample);
      return MarginModel(NormalParams{ mu, scale_or_floor(ml_sd(sample, mu)) });
    }
    case MarginKind::Kernel: {
      KernelParams k;
      k.sample.assign(sample.data(), sample.data() + sample.size());
      k.bandwidth = silverman_bandwidth(sample);
      return MarginModel(std::move(k));
    }
    case MarginKind::TruncNormal: {
      const double mu = sample_mean(sample);
      return MarginModel(TruncNormalParams{ mu, scale_or_floor(ml_sd(sample, mu)), lower, upper });
    }
    case MarginKind::BetaRescaled:
      return MarginModel(fit_beta(sample, lower, upper));
  }
  throw std::invalid_argument("fit_margin: unknown margin kind");
}

} // namespace copulaeda
