#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "copulaeda/copula.hpp"
#include "copulaeda/random.hpp"

namespace copulaeda {

enum class VineType
{
  CVine,
  DVine
};

enum class TruncationCriterion
{
  None,
  AIC,
  BIC
};

std::string_view to_string(VineType type);
std::optional<VineType> parse_vine_type(std::string_view name);
std::string_view to_string(TruncationCriterion criterion);
std::optional<TruncationCriterion> parse_truncation_criterion(std::string_view name);

//! A C-vine or D-vine on n variables.
//!
//! `order` lists variable indices (0-based): for a C-vine, order[j] is the
//! root of tree j + 1; for a D-vine it is the path of the first tree.
//! `trees[j]` holds the n - 1 - j pair copulas of tree j + 1:
//!   C-vine edge i pairs order[j + 1 + i] (first argument) with the root
//!   order[j] (second argument), conditioned on order[0..j-1];
//!   D-vine edge i pairs order[i] with order[i + j + 1], conditioned on the
//!   variables between them.
//! Trees with 1-based index greater than `trunc_level` hold only products.
struct RVineModel
{
  VineType type = VineType::CVine;
  std::vector<int> order;
  std::vector<std::vector<BivariateCopula>> trees;
  int trunc_level = 0;

  int dimension() const { return static_cast<int>(order.size()); }

  //! All-product vine on n variables with the identity order.
  static RVineModel independent(VineType type, int n);
};

//! Throws std::invalid_argument when the model breaks a structural invariant.
void validate(const RVineModel& model);

struct VineFitOptions
{
  VineType type = VineType::CVine;
  std::vector<CopulaFamily> candidates{ CopulaFamily::Normal,
                                        CopulaFamily::Student,
                                        CopulaFamily::Clayton,
                                        CopulaFamily::Frank,
                                        CopulaFamily::Gumbel };
  double sig_level = 0.01;
  //! Skip the independence pre-test when false.
  bool indep_test = true;
  int indep_replicates = 100;
  TruncationCriterion criterion = TruncationCriterion::AIC;
  //! Upper bound on the number of fitted trees; -1 means n - 1.
  int max_trees = -1;
};

//! Greedy C-vine root sequence: each tree's root maximizes the sum of
//! |tau| to the remaining variables, computed on the data transformed by
//! the previous trees (pair copulas fitted as Normal by tau inversion).
std::vector<int> select_cvine_order(const Eigen::Ref<const Eigen::MatrixXd>& U);

//! D-vine path by cheapest insertion on edge costs 1 - |tau|.
std::vector<int> select_dvine_order(const Eigen::Ref<const Eigen::MatrixXd>& U);

//! Open Hamiltonian path by cheapest insertion over a symmetric cost matrix,
//! seeded with the cheapest edge. Ties go to the lowest index.
std::vector<int> cheapest_insertion_path(const Eigen::Ref<const Eigen::MatrixXd>& cost);

//! Tree-wise fit: per edge, an independence test decides between the
//! product copula and goodness-of-fit selection among the candidates;
//! the information criterion, when enabled, truncates the vine at the
//! first tree that fails to decrease it.
RVineModel fit_vine(const Eigen::Ref<const Eigen::MatrixXd>& U, const VineFitOptions& options, Rng& rng);

//! m x n draws by the conditional distribution method. Columns are in
//! variable index order.
Eigen::MatrixXd vine_sample(const RVineModel& model, int m, Rng& rng);

double vine_loglik(const RVineModel& model, const Eigen::Ref<const Eigen::MatrixXd>& U);

//! Number of pair copulas per family over the whole vine.
std::map<CopulaFamily, int> count_families(const RVineModel& model);

//! Plain-text dump: type, truncation level, order and per-tree copulas.
std::string serialize(const RVineModel& model);

} // namespace copulaeda
