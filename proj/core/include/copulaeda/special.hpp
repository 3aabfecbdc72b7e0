#pragma once

namespace copulaeda::special {

inline constexpr double kPi = 3.141592653589793238462643383279502884;

// Standard normal.
double norm_pdf(double x);
double norm_cdf(double x);
double norm_quantile(double p);

// Student t with `nu` degrees of freedom (nu may be fractional).
double t_cdf(double x, double nu);
double t_quantile(double p, double nu);
double t_log_pdf(double x, double nu);

// Beta(a, b) on [0, 1].
double beta_cdf(double x, double a, double b);
double beta_quantile(double p, double a, double b);
double beta_log_pdf(double x, double a, double b);

//! First Debye function D1(x) = (1/x) * integral_0^x t / (e^t - 1) dt,
//! extended to negative x by D1(-x) = D1(x) + x / 2.
double debye1(double x);

//! P(X <= x, Y <= y) for a standard bivariate normal with correlation rho.
//! Genz's BVND algorithm (Drezner-Wesolowsky with Gauss-Legendre rules),
//! absolute accuracy about 1e-15.
double bvn_cdf(double x, double y, double rho);

} // namespace copulaeda::special
