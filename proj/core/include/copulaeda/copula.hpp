#pragma once

#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

#include "copulaeda/random.hpp"

namespace copulaeda {

//! Pseudo-observations are clamped to [kUnitEps, 1 - kUnitEps] before any
//! density or h-function evaluation.
inline constexpr double kUnitEps = 1e-10;

inline double clamp_unit(double u)
{
  return u < kUnitEps ? kUnitEps : (u > 1.0 - kUnitEps ? 1.0 - kUnitEps : u);
}

enum class CopulaFamily
{
  Product,
  Normal,
  Student,
  Clayton,
  Frank,
  Gumbel
};

std::string_view to_string(CopulaFamily family);
std::optional<CopulaFamily> parse_copula_family(std::string_view name);

// Largest parameter magnitudes produced by moment fitting. Beyond these the
// densities are numerically degenerate in double precision.
inline constexpr double kMaxCorrelation = 1.0 - 1e-8;
inline constexpr double kMaxClaytonTheta = 1000.0;
inline constexpr double kMaxGumbelTheta = 500.0;
inline constexpr double kMaxFrankTheta = 500.0;
inline constexpr double kMinStudentNu = 1.0;
inline constexpr double kMaxStudentNu = 100.0;

//! A parametric bivariate copula. The parameter domain is validated on
//! construction, so every instance is evaluable.
//!
//! Argument convention: `h(u, v)` is the conditional distribution of the
//! first argument given the second, dC(u, v)/dv. All families here are
//! exchangeable, so dC/du at (u, v) equals h(v, u).
class BivariateCopula
{
public:
  //! The independence copula.
  BivariateCopula() = default;

  static BivariateCopula product() { return {}; }
  static BivariateCopula normal(double rho);
  static BivariateCopula student(double rho, double nu);
  static BivariateCopula clayton(double theta);
  //! theta == 0 yields the product copula.
  static BivariateCopula frank(double theta);
  static BivariateCopula gumbel(double theta);

  CopulaFamily family() const { return family_; }
  //! Dependence parameter; the correlation for Normal and Student.
  double theta() const { return theta_; }
  //! Degrees of freedom (Student only, 0 otherwise).
  double nu() const { return nu_; }
  //! Number of free parameters: 0 for Product, 2 for Student, 1 otherwise.
  int num_params() const;

  double pdf(double u, double v) const;
  double log_pdf(double u, double v) const;
  double cdf(double u, double v) const;
  double h(double u, double v) const;
  double hinv(double p, double v) const;

  bool operator==(const BivariateCopula&) const = default;

  //! e.g. "Clayton(theta=2)" or "Student(rho=0.5, nu=4)".
  std::string describe() const;

private:
  BivariateCopula(CopulaFamily family, double theta, double nu)
    : family_(family)
    , theta_(theta)
    , nu_(nu)
  {}

  CopulaFamily family_ = CopulaFamily::Product;
  double theta_ = 0.0;
  double nu_ = 0.0;
};

//! Free-function spellings of the member operations.
inline double copula_pdf(const BivariateCopula& c, double u, double v)
{
  return c.pdf(u, v);
}
inline double copula_cdf(const BivariateCopula& c, double u, double v)
{
  return c.cdf(u, v);
}
inline double copula_h(const BivariateCopula& c, double u, double v)
{
  return c.h(u, v);
}
inline double copula_hinv(const BivariateCopula& c, double p, double v)
{
  return c.hinv(p, v);
}

//! m x 2 matrix of draws by the conditional distribution method.
Eigen::MatrixXd copula_sample(const BivariateCopula& c, int m, Rng& rng);

//! Method-of-moments parameter for `family` matching Kendall's `tau`.
//! `student_nu` is attached to Student copulas (tau does not depend on it).
//! Throws UnsupportedTauError for tau <= 0 with Clayton or Gumbel.
BivariateCopula tau_to_parameter(CopulaFamily family,
                                 double tau,
                                 double student_nu = 4.0);

//! Theoretical Kendall's tau of `c`.
double parameter_to_tau(const BivariateCopula& c);

//! Sum of log densities over the rows of an m x 2 matrix.
double copula_loglik(const BivariateCopula& c, const Eigen::Ref<const Eigen::MatrixXd>& uv);
double copula_loglik(const BivariateCopula& c,
                     const Eigen::Ref<const Eigen::VectorXd>& u,
                     const Eigen::Ref<const Eigen::VectorXd>& v);

//! Student copula with correlation `rho` and the maximum-likelihood degrees
//! of freedom over [1, 100], found by golden-section search on log(nu).
BivariateCopula fit_student_dof(const Eigen::Ref<const Eigen::VectorXd>& u,
                                const Eigen::Ref<const Eigen::VectorXd>& v,
                                double rho,
                                int* evaluations = nullptr);

//! Correlation matrices are dense symmetric matrices with unit diagonal.
using CorrelationMatrix = Eigen::MatrixXd;

//! m x n draws from the Gaussian copula with correlation `R`.
//! Throws std::logic_error when `R` has no Cholesky factor.
Eigen::MatrixXd mvnormal_copula_sample(const CorrelationMatrix& R, int m, Rng& rng);

} // namespace copulaeda
