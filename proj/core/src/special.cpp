#include "copulaeda/special.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/expm1.hpp>

namespace copulaeda::special {

namespace {

using boost::math::policies::policy;
using boost::math::policies::overflow_error;
using boost::math::policies::errno_on_error;
using NoThrow = policy<overflow_error<errno_on_error>>;

constexpr double kSqrt2 = 1.414213562373095048801688724209698079;

} // namespace

double norm_pdf(double x)
{
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi);
}

double norm_cdf(double x)
{
  return 0.5 * std::erfc(-x / kSqrt2);
}

double norm_quantile(double p)
{
  if (p <= 0.0)
    return -std::numeric_limits<double>::infinity();
  if (p >= 1.0)
    return std::numeric_limits<double>::infinity();
  return -kSqrt2 * boost::math::erfc_inv(2.0 * p, NoThrow{});
}

double t_cdf(double x, double nu)
{
  boost::math::students_t_distribution<double, NoThrow> dist(nu);
  return boost::math::cdf(dist, x);
}

double t_quantile(double p, double nu)
{
  if (p <= 0.0)
    return -std::numeric_limits<double>::infinity();
  if (p >= 1.0)
    return std::numeric_limits<double>::infinity();
  boost::math::students_t_distribution<double, NoThrow> dist(nu);
  return boost::math::quantile(dist, p);
}

double t_log_pdf(double x, double nu)
{
  return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) -
         0.5 * std::log(nu * kPi) - 0.5 * (nu + 1.0) * std::log1p(x * x / nu);
}

double beta_cdf(double x, double a, double b)
{
  if (x <= 0.0)
    return 0.0;
  if (x >= 1.0)
    return 1.0;
  boost::math::beta_distribution<double, NoThrow> dist(a, b);
  return boost::math::cdf(dist, x);
}

double beta_quantile(double p, double a, double b)
{
  if (p <= 0.0)
    return 0.0;
  if (p >= 1.0)
    return 1.0;
  boost::math::beta_distribution<double, NoThrow> dist(a, b);
  return boost::math::quantile(dist, p);
}

double beta_log_pdf(double x, double a, double b)
{
  return (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) +
         std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b);
}

double debye1(double x)
{
  if (x == 0.0)
    return 1.0;
  if (x < 0.0)
    return debye1(-x) - 0.5 * x;
  auto integrand = [](double t) {
    return t == 0.0 ? 1.0 : t / boost::math::expm1(t);
  };
  double err = 0.0;
  const double integral =
    boost::math::quadrature::gauss_kronrod<double, 31>::integrate(
      integrand, 0.0, x, 15, 1e-14, &err);
  return integral / x;
}

double bvn_cdf(double x, double y, double rho)
{
  if (std::isinf(x) || std::isinf(y)) {
    if (x == -std::numeric_limits<double>::infinity() ||
        y == -std::numeric_limits<double>::infinity())
      return 0.0;
    if (std::isinf(x) && std::isinf(y))
      return 1.0;
    return std::isinf(x) ? norm_cdf(y) : norm_cdf(x);
  }

  // Upper orthant P(X > h, Y > k) evaluated at (-x, -y).
  static constexpr std::array<std::array<double, 10>, 3> w{ {
    { 0.1713244923791705, 0.3607615730481384, 0.4679139345726904 },
    { 0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
      0.2031674267230659, 0.2334925365383547, 0.2491470458134029 },
    { 0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
      0.08327674157670475, 0.1019301198172404, 0.1181945319615184,
      0.1316886384491766, 0.1420961093183821, 0.1491729864726037,
      0.1527533871307259 },
  } };
  static constexpr std::array<std::array<double, 10>, 3> gx{ {
    { 0.9324695142031522, 0.6612093864662647, 0.2386191860831970 },
    { 0.9815606342467191, 0.9041172563704750, 0.7699026741943050,
      0.5873179542866171, 0.3678314989981802, 0.1252334085114692 },
    { 0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
      0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
      0.5108670019508271, 0.3737060887154196, 0.2277858511416451,
      0.07652652113349733 },
  } };

  const double r = rho;
  int ng = 2;
  int lg = 10;
  if (std::abs(r) < 0.3) {
    ng = 0;
    lg = 3;
  } else if (std::abs(r) < 0.75) {
    ng = 1;
    lg = 6;
  }

  double h = -x;
  double k = -y;
  double hk = h * k;
  double bvn = 0.0;

  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (int i = 0; i < lg; ++i) {
      double sn = std::sin(asr * (1.0 - gx[ng][i]) / 2.0);
      bvn += w[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (1.0 + gx[ng][i]) / 2.0);
      bvn += w[ng][i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    bvn = bvn * asr / (4.0 * kPi) + norm_cdf(-h) * norm_cdf(-k);
  } else {
    if (r < 0.0) {
      k = -k;
      hk = -hk;
    }
    if (std::abs(r) < 1.0) {
      const double as = (1.0 - r) * (1.0 + r);
      double a = std::sqrt(as);
      const double bs = (h - k) * (h - k);
      const double c = (4.0 - hk) / 8.0;
      const double d = (12.0 - hk) / 16.0;
      double asr = -(bs / as + hk) / 2.0;
      if (asr > -100.0)
        bvn = a * std::exp(asr) *
              (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 +
               c * d * as * as / 5.0);
      if (hk > -100.0) {
        const double b = std::sqrt(bs);
        bvn -= std::exp(-hk / 2.0) * std::sqrt(2.0 * kPi) * norm_cdf(-b / a) *
               b * (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
      }
      a /= 2.0;
      for (int i = 0; i < lg; ++i) {
        for (int is = -1; is <= 1; is += 2) {
          const double xs = std::pow(a * (is * gx[ng][i] + 1.0), 2);
          const double rs = std::sqrt(1.0 - xs);
          asr = -(bs / xs + hk) / 2.0;
          if (asr > -100.0) {
            const double sp = 1.0 + c * xs * (1.0 + d * xs);
            const double ep =
              std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs;
            bvn += a * w[ng][i] * std::exp(asr) * (ep - sp);
          }
        }
      }
      bvn = -bvn / (2.0 * kPi);
    }
    if (r > 0.0) {
      bvn += norm_cdf(-std::max(h, k));
    } else if (h >= k) {
      bvn = -bvn;
    } else {
      const double l = h < 0.0 ? norm_cdf(k) - norm_cdf(h)
                               : norm_cdf(-h) - norm_cdf(-k);
      bvn = l - bvn;
    }
  }
  return std::clamp(bvn, 0.0, 1.0);
}

} // namespace copulaeda::special
