#pragma once

#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "copulaeda/copula.hpp"
#include "copulaeda/eda.hpp"
#include "copulaeda/margins.hpp"
#include "copulaeda/vine.hpp"

namespace copulaeda {

struct ProductDep
{};

struct NormalDep
{
  CorrelationMatrix R;
};

struct VineDep
{
  RVineModel vine;
};

//! Chain structure: copulas[k] couples perm[k] (first argument) with
//! perm[k + 1] (second argument).
struct ChainDep
{
  std::vector<int> perm;
  std::vector<BivariateCopula> copulas;
};

//! Search distribution learned from a selected population: one margin per
//! variable plus the dependence structure.
struct SearchModel
{
  std::vector<MarginModel> margins;
  std::variant<ProductDep, NormalDep, VineDep, ChainDep> dependence;
};

//! Fit margins and map the selected population to (0, 1) through their CDFs.
std::vector<MarginModel> fit_margins(MarginKind kind,
                                     const Eigen::MatrixXd& selected,
                                     const Eigen::VectorXd& lower,
                                     const Eigen::VectorXd& upper);
Eigen::MatrixXd to_uniform(const std::vector<MarginModel>& margins, const Eigen::MatrixXd& x);
Population from_uniform(const std::vector<MarginModel>& margins, const Eigen::MatrixXd& u);

//! Normal-copula correlation from pairwise Kendall's tau, rho = sin(pi tau / 2),
//! clipped to +-(1 - 1e-8) and repaired to a positive-definite matrix.
CorrelationMatrix correlation_from_tau(const Eigen::MatrixXd& data);

//! Sample (Pearson) correlation, clipped and repaired the same way. Used by
//! GCEDA when every margin is normal.
CorrelationMatrix pearson_correlation(const Eigen::MatrixXd& data);

//! UMDA (product copula) and GCEDA (normal copula).
SearchModel ceda_learn(const EdaSpec& spec,
                       const Population& selected,
                       const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper);
Population ceda_sample(const SearchModel& model, int pop_size, Rng& rng);

//! CVEDA / DVEDA.
SearchModel veda_learn(const EdaSpec& spec,
                       const Population& selected,
                       const Eigen::VectorXd& lower,
                       const Eigen::VectorXd& upper,
                       Rng& rng);
Population veda_sample(const SearchModel& model, int pop_size, Rng& rng);

//! Copula MIMIC: maximum-likelihood pair copulas, copula-entropy mutual
//! information and a greedily built chain.
SearchModel cmimic_learn(const EdaSpec& spec,
                         const Population& selected,
                         const Eigen::VectorXd& lower,
                         const Eigen::VectorXd& upper,
                         Rng& rng);
Population cmimic_sample(const SearchModel& model, int pop_size, Rng& rng);

//! Greedy chain from a symmetric mutual-information matrix: start with the
//! maximizing pair as the last two elements, then repeatedly prepend the
//! unused variable with the largest MI to the current head.
std::vector<int> greedy_chain(Eigen::MatrixXd mi);

//! Moment fit refined by maximum likelihood over the family parameter.
//! Keeps the moment fit when the refinement does not improve it.
BivariateCopula fit_pair_ml(CopulaFamily family,
                            const Eigen::Ref<const Eigen::VectorXd>& u,
                            const Eigen::Ref<const Eigen::VectorXd>& v);

//! Dispatch on spec.algorithm.
SearchModel learn_model(const EdaSpec& spec,
                        const Population& selected,
                        const Eigen::VectorXd& lower,
                        const Eigen::VectorXd& upper,
                        Rng& rng);
Population sample_model(const SearchModel& model, int pop_size, Rng& rng);

//! Multi-line description of margins and dependence, for model dumps.
std::string describe(const SearchModel& model);

} // namespace copulaeda
