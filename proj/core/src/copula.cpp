#include "copulaeda/copula.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "copulaeda/errors.hpp"
#include "copulaeda/special.hpp"

namespace copulaeda {

namespace {

using special::kPi;

constexpr std::array<std::pair<CopulaFamily, std::string_view>, 6> kFamilyNames{ {
  { CopulaFamily::Product, "product" },
  { CopulaFamily::Normal, "normal" },
  { CopulaFamily::Student, "t" },
  { CopulaFamily::Clayton, "clayton" },
  { CopulaFamily::Frank, "frank" },
  { CopulaFamily::Gumbel, "gumbel" },
} };

// log(exp(a) + exp(b))
double log_add_exp(double a, double b)
{
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// ---------------------------------------------------------------- Normal

double normal_log_pdf(double rho, double u, double v)
{
  const double x = special::norm_quantile(u);
  const double y = special::norm_quantile(v);
  const double one_m = 1.0 - rho * rho;
  return -0.5 * std::log(one_m) -
         (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_m);
}

double normal_h(double rho, double u, double v)
{
  const double x = special::norm_quantile(u);
  const double y = special::norm_quantile(v);
  return special::norm_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

double normal_hinv(double rho, double p, double v)
{
  const double y = special::norm_quantile(v);
  const double z = special::norm_quantile(p);
  return special::norm_cdf(z * std::sqrt(1.0 - rho * rho) + rho * y);
}

// --------------------------------------------------------------- Student

double student_log_pdf(double rho, double nu, double u, double v)
{
  const double x = special::t_quantile(u, nu);
  const double y = special::t_quantile(v, nu);
  const double one_m = 1.0 - rho * rho;
  const double q = (x * x - 2.0 * rho * x * y + y * y) / (nu * one_m);
  const double log_joint = std::lgamma(0.5 * (nu + 2.0)) - std::lgamma(0.5 * nu) -
                           std::log(nu * kPi) - 0.5 * std::log(one_m) -
                           0.5 * (nu + 2.0) * std::log1p(q);
  return log_joint - special::t_log_pdf(x, nu) - special::t_log_pdf(y, nu);
}

double student_h(double rho, double nu, double u, double v)
{
  const double x = special::t_quantile(u, nu);
  const double y = special::t_quantile(v, nu);
  const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  return special::t_cdf((x - rho * y) / scale, nu + 1.0);
}

double student_hinv(double rho, double nu, double p, double v)
{
  const double y = special::t_quantile(v, nu);
  const double scale = std::sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0));
  const double x = special::t_quantile(p, nu + 1.0) * scale + rho * y;
  return special::t_cdf(x, nu);
}

// --------------------------------------------------------------- Clayton
// Evaluated in log space: with a = -theta*log(u), b = -theta*log(v),
// S = u^-theta + v^-theta - 1 = e^a + e^b - 1.

double clayton_log_s(double a, double b)
{
  const double hi = std::max(a, b);
  const double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi) - std::exp(-hi));
}

double clayton_log_pdf(double theta, double u, double v)
{
  const double lu = std::log(u);
  const double lv = std::log(v);
  const double log_s = clayton_log_s(-theta * lu, -theta * lv);
  return std::log1p(theta) - (theta + 1.0) * (lu + lv) - (2.0 + 1.0 / theta) * log_s;
}

double clayton_cdf(double theta, double u, double v)
{
  const double log_s = clayton_log_s(-theta * std::log(u), -theta * std::log(v));
  return std::exp(-log_s / theta);
}

double clayton_h(double theta, double u, double v)
{
  const double lv = std::log(v);
  const double log_s = clayton_log_s(-theta * std::log(u), -theta * lv);
  return std::exp(-(theta + 1.0) * lv - (1.0 / theta + 1.0) * log_s);
}

double clayton_hinv(double theta, double p, double v)
{
  const double b = -theta * std::log(v);
  const double a = b - theta / (theta + 1.0) * std::log(p);
  // S' = e^a + 1 - e^b with a >= b >= 0.
  const double log_s = a + std::log1p(std::exp(-a) - std::exp(b - a));
  return std::exp(-log_s / theta);
}

// ----------------------------------------------------------------- Frank
// Formulas below assume theta > 0. Negative parameters use the reflection
// C_{-theta}(u, v) = u - C_theta(u, 1 - v).

// log of -D where D = expm1(-theta) + expm1(-theta u) expm1(-theta v),
// returned as (-m, log(inner)) so that -D = exp(-m) * inner.
struct FrankDenominator
{
  double minus_m;
  double log_inner;
};

FrankDenominator frank_denominator(double theta, double u, double v)
{
  const double a = theta * u;
  const double b = theta * v;
  const double m = std::min(a, b);
  const double big = std::max(a, b);
  const double inner = -std::expm1(-big) + std::exp(-(big - m)) - std::exp(-(theta - m));
  return { -m, std::log(inner) };
}

double frank_log_pdf_pos(double theta, double u, double v)
{
  const auto den = frank_denominator(theta, u, v);
  return std::log(theta) + std::log(-std::expm1(-theta)) - theta * (u + v) -
         2.0 * (den.minus_m + den.log_inner);
}

double frank_cdf_pos(double theta, double u, double v)
{
  return -std::log1p(std::expm1(-theta * u) * std::expm1(-theta * v) /
                     std::expm1(-theta)) /
         theta;
}

double frank_h_pos(double theta, double u, double v)
{
  const auto den = frank_denominator(theta, u, v);
  return std::exp(-theta * v - den.minus_m - den.log_inner) * -std::expm1(-theta * u);
}

double frank_hinv_pos(double theta, double p, double v)
{
  // 1 + a = (e^{-theta v}(1 - p) + p e^{-theta}) / (p + e^{-theta v}(1 - p))
  const double log_num = log_add_exp(-theta * v + std::log1p(-p), -theta + std::log(p));
  const double log_den = log_add_exp(std::log(p), -theta * v + std::log1p(-p));
  return -(log_num - log_den) / theta;
}

// ---------------------------------------------------------------- Gumbel

struct GumbelTerms
{
  double x, y, log_a, a_pow; // x = -log u, y = -log v, A = x^t + y^t, A^{1/t}
};

GumbelTerms gumbel_terms(double theta, double u, double v)
{
  const double x = -std::log(u);
  const double y = -std::log(v);
  const double log_a = log_add_exp(theta * std::log(x), theta * std::log(y));
  return { x, y, log_a, std::exp(log_a / theta) };
}

double gumbel_log_pdf(double theta, double u, double v)
{
  const auto g = gumbel_terms(theta, u, v);
  return -g.a_pow + g.x + g.y + (theta - 1.0) * (std::log(g.x) + std::log(g.y)) +
         (2.0 / theta - 2.0) * g.log_a + std::log1p((theta - 1.0) / g.a_pow);
}

double gumbel_cdf(double theta, double u, double v)
{
  return std::exp(-gumbel_terms(theta, u, v).a_pow);
}

double gumbel_h(double theta, double u, double v)
{
  const auto g = gumbel_terms(theta, u, v);
  return std::exp(-g.a_pow + g.y + (theta - 1.0) * std::log(g.y) +
                  (1.0 / theta - 1.0) * g.log_a);
}

// Solve h(u, v) = p for u by Newton steps safeguarded with bisection.
// h is nondecreasing in u with derivative pdf(u, v).
template <typename H, typename Pdf>
double invert_h(H&& h, Pdf&& pdf, double p, double v)
{
  double lo = kUnitEps;
  double hi = 1.0 - kUnitEps;
  if (h(lo, v) >= p)
    return lo;
  if (h(hi, v) <= p)
    return hi;
  double u = 0.5;
  for (int iter = 0; iter < 200; ++iter) {
    const double f = h(u, v) - p;
    if (std::abs(f) <= 1e-12)
      break;
    if (f < 0.0)
      lo = u;
    else
      hi = u;
    const double d = pdf(u, v);
    double next = (d > 0.0 && std::isfinite(d)) ? u - f / d : lo - 1.0;
    if (!(next > lo && next < hi))
      next = 0.5 * (lo + hi);
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi)
      break;
    u = next;
  }
  return u;
}

void check_correlation(double rho)
{
  if (!(std::abs(rho) < 1.0))
    throw ParameterDomainError("correlation must lie in (-1, 1)");
}

} // namespace

std::string_view to_string(CopulaFamily family)
{
  for (const auto& [f, name] : kFamilyNames)
    if (f == family)
      return name;
  return "unknown";
}

std::optional<CopulaFamily> parse_copula_family(std::string_view name)
{
  for (const auto& [f, n] : kFamilyNames)
    if (n == name)
      return f;
  if (name == "indep" || name == "independence")
    return CopulaFamily::Product;
  if (name == "student")
    return CopulaFamily::Student;
  return std::nullopt;
}

BivariateCopula BivariateCopula::normal(double rho)
{
  check_correlation(rho);
  return { CopulaFamily::Normal, rho, 0.0 };
}

BivariateCopula BivariateCopula::student(double rho, double nu)
{
  check_correlation(rho);
  if (!(nu >= kMinStudentNu) || !std::isfinite(nu))
    throw ParameterDomainError("Student degrees of freedom must be >= 1");
  return { CopulaFamily::Student, rho, nu };
}

BivariateCopula BivariateCopula::clayton(double theta)
{
  if (!(theta > 0.0) || !std::isfinite(theta))
    throw ParameterDomainError("Clayton parameter must be > 0");
  return { CopulaFamily::Clayton, theta, 0.0 };
}

BivariateCopula BivariateCopula::frank(double theta)
{
  if (!std::isfinite(theta))
    throw ParameterDomainError("Frank parameter must be finite");
  if (theta == 0.0)
    return product();
  return { CopulaFamily::Frank, theta, 0.0 };
}

BivariateCopula BivariateCopula::gumbel(double theta)
{
  if (!(theta >= 1.0) || !std::isfinite(theta))
    throw ParameterDomainError("Gumbel parameter must be >= 1");
  return { CopulaFamily::Gumbel, theta, 0.0 };
}

int BivariateCopula::num_params() const
{
  switch (family_) {
    case CopulaFamily::Product:
      return 0;
    case CopulaFamily::Student:
      return 2;
    default:
      return 1;
  }
}

double BivariateCopula::log_pdf(double u, double v) const
{
  u = clamp_unit(u);
  v = clamp_unit(v);
  switch (family_) {
    case CopulaFamily::Product:
      return 0.0;
    case CopulaFamily::Normal:
      return normal_log_pdf(theta_, u, v);
    case CopulaFamily::Student:
      return student_log_pdf(theta_, nu_, u, v);
    case CopulaFamily::Clayton:
      return clayton_log_pdf(theta_, u, v);
    case CopulaFamily::Frank:
      return theta_ > 0.0 ? frank_log_pdf_pos(theta_, u, v)
                          : frank_log_pdf_pos(-theta_, u, 1.0 - v);
    case CopulaFamily::Gumbel:
      return theta_ == 1.0 ? 0.0 : gumbel_log_pdf(theta_, u, v);
  }
  return 0.0;
}

double BivariateCopula::pdf(double u, double v) const
{
  return std::exp(log_pdf(u, v));
}

double BivariateCopula::cdf(double u, double v) const
{
  if (u <= 0.0 || v <= 0.0)
    return 0.0;
  if (u >= 1.0)
    return std::min(v, 1.0);
  if (v >= 1.0)
    return u;
  switch (family_) {
    case CopulaFamily::Product:
      return u * v;
    case CopulaFamily::Normal:
      return special::bvn_cdf(special::norm_quantile(u), special::norm_quantile(v), theta_);
    case CopulaFamily::Student: {
      // C(u, v) = integral_0^v h(u | t) dt.
      thread_local boost::math::quadrature::tanh_sinh<double> integrator;
      const double rho = theta_;
      const double nu = nu_;
      auto f = [&](double t) { return student_h(rho, nu, u, clamp_unit(t)); };
      return std::clamp(integrator.integrate(f, 0.0, v, 1e-12), 0.0, std::min(u, v));
    }
    case CopulaFamily::Clayton:
      return clayton_cdf(theta_, u, v);
    case CopulaFamily::Frank:
      return theta_ > 0.0 ? frank_cdf_pos(theta_, u, v)
                          : u - frank_cdf_pos(-theta_, u, 1.0 - v);
    case CopulaFamily::Gumbel:
      return gumbel_cdf(theta_, u, v);
  }
  return u * v;
}

double BivariateCopula::h(double u, double v) const
{
  u = clamp_unit(u);
  v = clamp_unit(v);
  double r = u;
  switch (family_) {
    case CopulaFamily::Product:
      return u;
    case CopulaFamily::Normal:
      r = normal_h(theta_, u, v);
      break;
    case CopulaFamily::Student:
      r = student_h(theta_, nu_, u, v);
      break;
    case CopulaFamily::Clayton:
      r = clayton_h(theta_, u, v);
      break;
    case CopulaFamily::Frank:
      r = theta_ > 0.0 ? frank_h_pos(theta_, u, v) : frank_h_pos(-theta_, u, 1.0 - v);
      break;
    case CopulaFamily::Gumbel:
      r = gumbel_h(theta_, u, v);
      break;
  }
  return std::clamp(r, 0.0, 1.0);
}

double BivariateCopula::hinv(double p, double v) const
{
  p = clamp_unit(p);
  v = clamp_unit(v);
  double r = p;
  switch (family_) {
    case CopulaFamily::Product:
      return p;
    case CopulaFamily::Normal:
      r = normal_hinv(theta_, p, v);
      break;
    case CopulaFamily::Student:
      r = student_hinv(theta_, nu_, p, v);
      break;
    case CopulaFamily::Clayton:
      r = clayton_hinv(theta_, p, v);
      break;
    case CopulaFamily::Frank:
      r = theta_ > 0.0 ? frank_hinv_pos(theta_, p, v) : frank_hinv_pos(-theta_, p, 1.0 - v);
      break;
    case CopulaFamily::Gumbel: {
      const double t = theta_;
      r = invert_h([t](double uu, double vv) { return gumbel_h(t, uu, vv); },
                   [t](double uu, double vv) { return std::exp(gumbel_log_pdf(t, uu, vv)); },
                   p,
                   v);
      break;
    }
  }
  return clamp_unit(r);
}

std::string BivariateCopula::describe() const
{
  std::ostringstream os;
  os.precision(6);
  switch (family_) {
    case CopulaFamily::Product:
      os << "Product";
      break;
    case CopulaFamily::Normal:
      os << "Normal(rho=" << theta_ << ")";
      break;
    case CopulaFamily::Student:
      os << "Student(rho=" << theta_ << ", nu=" << nu_ << ")";
      break;
    case CopulaFamily::Clayton:
      os << "Clayton(theta=" << theta_ << ")";
      break;
    case CopulaFamily::Frank:
      os << "Frank(theta=" << theta_ << ")";
      break;
    case CopulaFamily::Gumbel:
      os << "Gumbel(theta=" << theta_ << ")";
      break;
  }
  return os.str();
}

Eigen::MatrixXd copula_sample(const BivariateCopula& c, int m, Rng& rng)
{
  if (m < 1)
    throw std::invalid_argument("copula_sample: m must be >= 1");
  Eigen::MatrixXd out(m, 2);
  for (int i = 0; i < m; ++i) {
    const double v = uniform_open(rng);
    const double w = uniform_open(rng);
    out(i, 0) = c.hinv(w, v);
    out(i, 1) = v;
  }
  return out;
}

namespace {

double frank_tau(double theta)
{
  if (theta == 0.0)
    return 0.0;
  return 1.0 - 4.0 / theta * (1.0 - special::debye1(theta));
}

} // namespace

BivariateCopula tau_to_parameter(CopulaFamily family, double tau, double student_nu)
{
  if (!(std::abs(tau) < 1.0))
    throw ParameterDomainError("Kendall's tau must lie in (-1, 1)");
  switch (family) {
    case CopulaFamily::Product:
      return BivariateCopula::product();
    case CopulaFamily::Normal:
    case CopulaFamily::Student: {
      if (tau == 0.0)
        return BivariateCopula::product();
      const double rho = std::clamp(std::sin(kPi * tau / 2.0), -kMaxCorrelation, kMaxCorrelation);
      return family == CopulaFamily::Normal ? BivariateCopula::normal(rho)
                                            : BivariateCopula::student(rho, student_nu);
    }
    case CopulaFamily::Clayton:
      if (!(tau > 0.0))
        throw UnsupportedTauError("Clayton copula requires positive tau");
      return BivariateCopula::clayton(std::min(2.0 * tau / (1.0 - tau), kMaxClaytonTheta));
    case CopulaFamily::Gumbel:
      if (!(tau > 0.0))
        throw UnsupportedTauError("Gumbel copula requires positive tau");
      return BivariateCopula::gumbel(std::min(1.0 / (1.0 - tau), kMaxGumbelTheta));
    case CopulaFamily::Frank: {
      if (tau == 0.0)
        return BivariateCopula::product();
      const double target = std::abs(tau);
      if (frank_tau(kMaxFrankTheta) <= target)
        return BivariateCopula::frank(std::copysign(kMaxFrankTheta, tau));
      auto f = [target](double t) { return frank_tau(t) - target; };
      boost::math::tools::eps_tolerance<double> tol(50);
      std::uintmax_t max_iter = 200;
      const auto [a, b] =
        boost::math::tools::toms748_solve(f, 1e-12, kMaxFrankTheta, tol, max_iter);
      return BivariateCopula::frank(std::copysign(0.5 * (a + b), tau));
    }
  }
  return BivariateCopula::product();
}

double parameter_to_tau(const BivariateCopula& c)
{
  switch (c.family()) {
    case CopulaFamily::Product:
      return 0.0;
    case CopulaFamily::Normal:
    case CopulaFamily::Student:
      return 2.0 * std::asin(c.theta()) / kPi;
    case CopulaFamily::Clayton:
      return c.theta() / (c.theta() + 2.0);
    case CopulaFamily::Frank:
      return frank_tau(c.theta());
    case CopulaFamily::Gumbel:
      return 1.0 - 1.0 / c.theta();
  }
  return 0.0;
}

double copula_loglik(const BivariateCopula& c,
                     const Eigen::Ref<const Eigen::VectorXd>& u,
                     const Eigen::Ref<const Eigen::VectorXd>& v)
{
  if (c.family() == CopulaFamily::Product)
    return 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    total += c.log_pdf(u[i], v[i]);
  return total;
}

double copula_loglik(const BivariateCopula& c, const Eigen::Ref<const Eigen::MatrixXd>& uv)
{
  if (uv.cols() != 2)
    throw std::invalid_argument("copula_loglik: expected an m x 2 matrix");
  return copula_loglik(c, uv.col(0), uv.col(1));
}

BivariateCopula fit_student_dof(const Eigen::Ref<const Eigen::VectorXd>& u,
                                const Eigen::Ref<const Eigen::VectorXd>& v,
                                double rho,
                                int* evaluations)
{
  check_correlation(rho);
  int count = 0;
  auto negloglik = [&](double log_nu) {
    ++count;
    const double ll = copula_loglik(BivariateCopula::student(rho, std::exp(log_nu)), u, v);
    return std::isfinite(ll) ? -ll : std::numeric_limits<double>::max();
  };

  // Golden-section search on log(nu), stopping when the bracket is narrower
  // than 1e-3 in nu units.
  constexpr double kInvPhi = 0.6180339887498949;
  double a = std::log(kMinStudentNu);
  double b = std::log(kMaxStudentNu);
  double c1 = b - kInvPhi * (b - a);
  double c2 = a + kInvPhi * (b - a);
  double f1 = negloglik(c1);
  double f2 = negloglik(c2);
  while (std::exp(b) - std::exp(a) > 1e-3 && count < 100) {
    if (f1 <= f2) {
      b = c2;
      c2 = c1;
      f2 = f1;
      c1 = b - kInvPhi * (b - a);
      f1 = negloglik(c1);
    } else {
      a = c1;
      c1 = c2;
      f1 = f2;
      c2 = a + kInvPhi * (b - a);
      f2 = negloglik(c2);
    }
  }
  if (evaluations)
    *evaluations = count;
  const double nu = std::clamp(std::exp(0.5 * (a + b)), kMinStudentNu, kMaxStudentNu);
  return BivariateCopula::student(rho, nu);
}

Eigen::MatrixXd mvnormal_copula_sample(const CorrelationMatrix& R, int m, Rng& rng)
{
  const Eigen::Index n = R.rows();
  if (R.cols() != n)
    throw std::invalid_argument("mvnormal_copula_sample: R must be square");
  Eigen::LLT<Eigen::MatrixXd> llt(R);
  if (llt.info() != Eigen::Success)
    throw std::logic_error("mvnormal_copula_sample: Cholesky factorization failed");
  const Eigen::MatrixXd L = llt.matrixL();

  Eigen::MatrixXd z(m, n);
  for (int i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      z(i, j) = standard_normal(rng);
  Eigen::MatrixXd out = z * L.transpose();
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out.data()[i] = clamp_unit(special::norm_cdf(out.data()[i]));
  return out;
}

} // namespace copulaeda
