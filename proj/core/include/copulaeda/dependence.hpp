#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>

#include "copulaeda/copula.hpp"
#include "copulaeda/random.hpp"

namespace copulaeda {

//! Kendall's tau-b of two equal-length samples, O(m^2).
//! A constant input yields 0 and sets `*degenerate` when provided.
double kendall_tau(const Eigen::Ref<const Eigen::VectorXd>& x,
                   const Eigen::Ref<const Eigen::VectorXd>& y,
                   bool* degenerate = nullptr);

//! Symmetric matrix of pairwise Kendall's tau between the columns of `data`.
//! Tau clipped to +-(1 - 1e-8) so comonotone pairs still map to a valid
//! copula parameter.
inline double clip_tau(double tau)
{
  constexpr double kMaxTau = 1.0 - 1e-8;
  return tau > kMaxTau ? kMaxTau : (tau < -kMaxTau ? -kMaxTau : tau);
}

Eigen::MatrixXd kendall_tau_matrix(const Eigen::Ref<const Eigen::MatrixXd>& data);

//! Average ranks of `x`, 1-based.
Eigen::VectorXd average_ranks(const Eigen::Ref<const Eigen::VectorXd>& x);

//! Column-wise rank / (m + 1) transform, ties by average rank.
Eigen::MatrixXd pseudo_observations(const Eigen::Ref<const Eigen::MatrixXd>& data);

//! Empirical copula (1/m) #{i : u_i <= a and v_i <= b}.
double empirical_copula_at(const Eigen::Ref<const Eigen::VectorXd>& u,
                           const Eigen::Ref<const Eigen::VectorXd>& v,
                           double a,
                           double b);

struct IndepTestResult
{
  double statistic = 0.0;
  double p_value = 1.0;
  bool independent = true;
};

//! Cramer-von Mises test of independence based on the empirical copula,
//! S = sum_i (C_m(u_i, v_i) - u_i v_i)^2 on pseudo-observations, with a
//! permutation p-value (r + 1) / (B + 1).
IndepTestResult indep_test_cvm(const Eigen::Ref<const Eigen::VectorXd>& u,
                               const Eigen::Ref<const Eigen::VectorXd>& v,
                               int replicates,
                               Rng& rng,
                               double sig_level = 0.01);

//! Moment-fit every feasible candidate and return the one minimizing the
//! Cramer-von Mises distance to the empirical copula. Candidates whose
//! family cannot represent the sample tau are skipped; if none remain the
//! product copula is returned.
BivariateCopula gof_select_copula(const Eigen::Ref<const Eigen::VectorXd>& u,
                                  const Eigen::Ref<const Eigen::VectorXd>& v,
                                  std::span<const CopulaFamily> candidates);

//! Mutual information of the pair coupled by `c` (the negated copula
//! entropy). Closed form for Normal and Product; otherwise the Monte-Carlo
//! average of log c over `samples` draws from `c`.
double copula_mutual_information(const BivariateCopula& c, Rng& rng, int samples = 100);

inline constexpr double kEigenFloor = 1e-8;

//! Nearest usable correlation matrix: returned unchanged when its smallest
//! eigenvalue is already >= kEigenFloor / 10; otherwise eigenvalues below
//! kEigenFloor are raised to it and the result is rescaled to unit diagonal.
CorrelationMatrix make_positive_definite(const CorrelationMatrix& R);

} // namespace copulaeda
