#include "copulaeda/vine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "copulaeda/dependence.hpp"

namespace copulaeda {

namespace {

using EdgeFitter = std::function<BivariateCopula(const Eigen::VectorXd&, const Eigen::VectorXd&)>;

// Penalized contribution of one tree to the information criterion.
struct TreeScore
{
  double loglik = 0.0;
  int params = 0;
};

double criterion_value(TruncationCriterion criterion, const TreeScore& s, Eigen::Index m)
{
  switch (criterion) {
    case TruncationCriterion::AIC:
      return -2.0 * s.loglik + 2.0 * s.params;
    case TruncationCriterion::BIC:
      return -2.0 * s.loglik + std::log(static_cast<double>(m)) * s.params;
    case TruncationCriterion::None:
      break;
  }
  return 0.0;
}

Eigen::VectorXd h_transform(const BivariateCopula& c, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
  if (c.family() == CopulaFamily::Product)
    return u;
  Eigen::VectorXd out(u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i)
    out[i] = clamp_unit(c.h(u[i], v[i]));
  return out;
}

Eigen::MatrixXd clamped(const Eigen::Ref<const Eigen::MatrixXd>& U)
{
  return U.unaryExpr([](double x) { return clamp_unit(x); });
}

int tree_limit(int n, int max_trees)
{
  return max_trees < 0 ? n - 1 : std::min(max_trees, n - 1);
}

RVineModel fit_cvine_impl(const Eigen::Ref<const Eigen::MatrixXd>& U,
                          const EdgeFitter& fit_edge,
                          TruncationCriterion criterion,
                          int max_trees)
{
  const int n = static_cast<int>(U.cols());
  const Eigen::Index m = U.rows();
  Eigen::MatrixXd cur = clamped(U);

  std::vector<int> remaining(n);
  std::iota(remaining.begin(), remaining.end(), 0);
  std::vector<int> roots;
  // Accepted trees: per tree, copula for each non-root variable.
  std::vector<std::vector<std::pair<int, BivariateCopula>>> accepted;

  const int limit = tree_limit(n, max_trees);
  for (int j = 0; j < limit; ++j) {
    // Root: largest sum of |tau| to the other remaining variables.
    int root_pos = 0;
    if (remaining.size() > 2) {
      double best = -1.0;
      for (std::size_t a = 0; a < remaining.size(); ++a) {
        double sum = 0.0;
        for (std::size_t b = 0; b < remaining.size(); ++b)
          if (a != b)
            sum += std::abs(kendall_tau(cur.col(remaining[a]), cur.col(remaining[b])));
        if (sum > best) {
          best = sum;
          root_pos = static_cast<int>(a);
        }
      }
    }
    const int root = remaining[root_pos];
    std::vector<int> others;
    for (int w : remaining)
      if (w != root)
        others.push_back(w);

    std::vector<std::pair<int, BivariateCopula>> tree;
    TreeScore score;
    const Eigen::VectorXd root_col = cur.col(root);
    for (int w : others) {
      const Eigen::VectorXd col = cur.col(w);
      BivariateCopula c = fit_edge(col, root_col);
      if (criterion != TruncationCriterion::None && c.family() != CopulaFamily::Product) {
        score.loglik += copula_loglik(c, col, root_col);
        score.params += c.num_params();
      }
      tree.emplace_back(w, c);
    }
    if (criterion != TruncationCriterion::None && !(criterion_value(criterion, score, m) < 0.0))
      break;

    roots.push_back(root);
    remaining = others;
    for (const auto& [w, c] : tree)
      cur.col(w) = h_transform(c, cur.col(w), root_col);
    accepted.push_back(std::move(tree));
  }

  RVineModel model;
  model.type = VineType::CVine;
  model.trunc_level = static_cast<int>(accepted.size());
  model.order = roots;
  std::sort(remaining.begin(), remaining.end());
  model.order.insert(model.order.end(), remaining.begin(), remaining.end());
  model.trees.resize(std::max(0, n - 1));
  for (int j = 0; j < n - 1; ++j) {
    model.trees[j].assign(n - 1 - j, BivariateCopula::product());
    if (j >= static_cast<int>(accepted.size()))
      continue;
    for (int i = 0; i < n - 1 - j; ++i) {
      const int var = model.order[j + 1 + i];
      for (const auto& [w, c] : accepted[j])
        if (w == var)
          model.trees[j][i] = c;
    }
  }
  return model;
}

// D-vine recursion state for tree j: a[i] = F(x_i | between), b[i] =
// F(x_{i+j+1} | between) for edges i = 0 .. n-j-2.
struct DVineLevel
{
  std::vector<Eigen::VectorXd> a;
  std::vector<Eigen::VectorXd> b;
};

DVineLevel dvine_first_level(const Eigen::MatrixXd& U, const std::vector<int>& order)
{
  const int n = static_cast<int>(order.size());
  DVineLevel level;
  for (int i = 0; i + 1 < n; ++i) {
    level.a.push_back(U.col(order[i]));
    level.b.push_back(U.col(order[i + 1]));
  }
  return level;
}

DVineLevel dvine_next_level(const DVineLevel& level, const std::vector<BivariateCopula>& tree)
{
  DVineLevel next;
  const std::size_t edges = level.a.size();
  for (std::size_t i = 0; i + 1 < edges; ++i) {
    next.a.push_back(h_transform(tree[i], level.a[i], level.b[i]));
    next.b.push_back(h_transform(tree[i + 1], level.b[i + 1], level.a[i + 1]));
  }
  return next;
}

RVineModel fit_dvine_impl(const Eigen::Ref<const Eigen::MatrixXd>& U,
                          const EdgeFitter& fit_edge,
                          TruncationCriterion criterion,
                          int max_trees)
{
  const int n = static_cast<int>(U.cols());
  const Eigen::Index m = U.rows();
  const Eigen::MatrixXd cur = clamped(U);

  RVineModel model = RVineModel::independent(VineType::DVine, n);
  model.order = select_dvine_order(cur);
  model.trunc_level = 0;

  const int limit = tree_limit(n, max_trees);
  DVineLevel level = dvine_first_level(cur, model.order);
  for (int j = 0; j < limit; ++j) {
    std::vector<BivariateCopula> tree;
    TreeScore score;
    for (std::size_t i = 0; i < level.a.size(); ++i) {
      BivariateCopula c = fit_edge(level.a[i], level.b[i]);
      if (criterion != TruncationCriterion::None && c.family() != CopulaFamily::Product) {
        score.loglik += copula_loglik(c, level.a[i], level.b[i]);
        score.params += c.num_params();
      }
      tree.push_back(c);
    }
    if (criterion != TruncationCriterion::None && !(criterion_value(criterion, score, m) < 0.0))
      break;
    model.trees[j] = tree;
    model.trunc_level = j + 1;
    if (j + 1 < limit)
      level = dvine_next_level(level, tree);
  }
  return model;
}

} // namespace

std::string_view to_string(VineType type)
{
  return type == VineType::CVine ? "CVine" : "DVine";
}

std::optional<VineType> parse_vine_type(std::string_view name)
{
  if (name == "CVine" || name == "cvine" || name == "C")
    return VineType::CVine;
  if (name == "DVine" || name == "dvine" || name == "D")
    return VineType::DVine;
  return std::nullopt;
}

std::string_view to_string(TruncationCriterion criterion)
{
  switch (criterion) {
    case TruncationCriterion::AIC:
      return "AIC";
    case TruncationCriterion::BIC:
      return "BIC";
    case TruncationCriterion::None:
      break;
  }
  return "none";
}

std::optional<TruncationCriterion> parse_truncation_criterion(std::string_view name)
{
  if (name == "AIC" || name == "aic")
    return TruncationCriterion::AIC;
  if (name == "BIC" || name == "bic")
    return TruncationCriterion::BIC;
  if (name == "none")
    return TruncationCriterion::None;
  return std::nullopt;
}

RVineModel RVineModel::independent(VineType type, int n)
{
  RVineModel model;
  model.type = type;
  model.order.resize(n);
  std::iota(model.order.begin(), model.order.end(), 0);
  model.trees.resize(std::max(0, n - 1));
  for (int j = 0; j < n - 1; ++j)
    model.trees[j].assign(n - 1 - j, BivariateCopula::product());
  model.trunc_level = 0;
  return model;
}

void validate(const RVineModel& model)
{
  const int n = model.dimension();
  std::vector<int> sorted = model.order;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < n; ++i)
    if (sorted[i] != i)
      throw std::invalid_argument("vine order is not a permutation");
  if (static_cast<int>(model.trees.size()) != std::max(0, n - 1))
    throw std::invalid_argument("vine must have n - 1 trees");
  for (int j = 0; j < n - 1; ++j) {
    if (static_cast<int>(model.trees[j].size()) != n - 1 - j)
      throw std::invalid_argument("vine tree has the wrong number of edges");
    if (j >= model.trunc_level)
      for (const auto& c : model.trees[j])
        if (c.family() != CopulaFamily::Product)
          throw std::invalid_argument("non-product copula beyond the truncation level");
  }
  if (model.trunc_level < 0 || model.trunc_level > std::max(0, n - 1))
    throw std::invalid_argument("vine truncation level out of range");
}

std::vector<int> cheapest_insertion_path(const Eigen::Ref<const Eigen::MatrixXd>& cost)
{
  const int n = static_cast<int>(cost.rows());
  if (n == 0)
    return {};
  if (n == 1)
    return { 0 };

  int s = 0;
  int t = 1;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (cost(i, j) < cost(s, t)) {
        s = i;
        t = j;
      }
  std::vector<int> path{ s, t };
  std::vector<bool> used(n, false);
  used[s] = used[t] = true;

  while (static_cast<int>(path.size()) < n) {
    double best = std::numeric_limits<double>::infinity();
    int best_node = -1;
    std::size_t best_pos = 0; // insert before path[best_pos]; path.size() appends
    for (int k = 0; k < n; ++k) {
      if (used[k])
        continue;
      auto consider = [&](double delta, std::size_t pos) {
        if (delta < best) {
          best = delta;
          best_node = k;
          best_pos = pos;
        }
      };
      consider(cost(k, path.front()), 0);
      for (std::size_t p = 0; p + 1 < path.size(); ++p)
        consider(cost(path[p], k) + cost(k, path[p + 1]) - cost(path[p], path[p + 1]), p + 1);
      consider(cost(path.back(), k), path.size());
    }
    path.insert(path.begin() + static_cast<std::ptrdiff_t>(best_pos), best_node);
    used[best_node] = true;
  }
  return path;
}

std::vector<int> select_dvine_order(const Eigen::Ref<const Eigen::MatrixXd>& U)
{
  const Eigen::MatrixXd tau = kendall_tau_matrix(U);
  const Eigen::MatrixXd cost = 1.0 - tau.array().abs();
  return cheapest_insertion_path(cost);
}

std::vector<int> select_cvine_order(const Eigen::Ref<const Eigen::MatrixXd>& U)
{
  EdgeFitter normal_by_tau = [](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return tau_to_parameter(CopulaFamily::Normal, clip_tau(kendall_tau(a, b)));
  };
  return fit_cvine_impl(U, normal_by_tau, TruncationCriterion::None, -1).order;
}

RVineModel fit_vine(const Eigen::Ref<const Eigen::MatrixXd>& U, const VineFitOptions& options, Rng& rng)
{
  if (U.cols() < 1)
    throw std::invalid_argument("fit_vine: no variables");
  if (U.rows() < 2)
    throw std::invalid_argument("fit_vine: need at least 2 observations");
  if (options.candidates.empty())
    throw std::invalid_argument("fit_vine: no candidate families");

  EdgeFitter fit_edge = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (options.indep_test) {
      const auto test = indep_test_cvm(a, b, options.indep_replicates, rng, options.sig_level);
      if (test.independent)
        return BivariateCopula::product();
    }
    return gof_select_copula(a, b, options.candidates);
  };
  return options.type == VineType::CVine
           ? fit_cvine_impl(U, fit_edge, options.criterion, options.max_trees)
           : fit_dvine_impl(U, fit_edge, options.criterion, options.max_trees);
}

Eigen::MatrixXd vine_sample(const RVineModel& model, int m, Rng& rng)
{
  const int n = model.dimension();
  Eigen::MatrixXd out(m, n);
  std::vector<double> w(n);
  std::vector<double> x(n);

  // D-vine scratch: a[j][i], b[j][i] for the current row.
  std::vector<std::vector<double>> a(n, std::vector<double>(n, 0.0));
  std::vector<std::vector<double>> b(n, std::vector<double>(n, 0.0));

  for (int row = 0; row < m; ++row) {
    for (int k = 0; k < n; ++k)
      w[k] = uniform_open(rng);

    if (model.type == VineType::CVine) {
      for (int i = 0; i < n; ++i) {
        double t = w[i];
        for (int k = std::min(i, model.trunc_level) - 1; k >= 0; --k)
          t = model.trees[k][i - k - 1].hinv(t, w[k]);
        x[i] = t;
      }
    } else {
      x[0] = w[0];
      if (n > 1)
        a[0][0] = x[0];
      for (int k = 1; k < n; ++k) {
        double t = w[k];
        for (int j = k - 1; j >= 0; --j) {
          const int i = k - j - 1;
          if (j < model.trunc_level)
            t = model.trees[j][i].hinv(t, a[j][i]);
          b[j][i] = t;
        }
        x[k] = t;
        if (k < n - 1) {
          a[0][k] = x[k];
          for (int j = 0; j < k; ++j) {
            const int i = k - j - 1;
            a[j + 1][i] = j < model.trunc_level ? model.trees[j][i].h(a[j][i], b[j][i]) : a[j][i];
          }
        }
      }
    }
    for (int i = 0; i < n; ++i)
      out(row, model.order[i]) = clamp_unit(x[i]);
  }
  return out;
}

double vine_loglik(const RVineModel& model, const Eigen::Ref<const Eigen::MatrixXd>& U)
{
  const int n = model.dimension();
  if (U.cols() != n)
    throw std::invalid_argument("vine_loglik: dimension mismatch");
  const Eigen::MatrixXd cur0 = clamped(U);
  double total = 0.0;

  if (model.type == VineType::CVine) {
    Eigen::MatrixXd cur = cur0;
    for (int j = 0; j < model.trunc_level; ++j) {
      const int root = model.order[j];
      const Eigen::VectorXd root_col = cur.col(root);
      for (int i = 0; i < n - 1 - j; ++i) {
        const int var = model.order[j + 1 + i];
        const auto& c = model.trees[j][i];
        const Eigen::VectorXd col = cur.col(var);
        total += copula_loglik(c, col, root_col);
        cur.col(var) = h_transform(c, col, root_col);
      }
    }
    return total;
  }

  DVineLevel level = dvine_first_level(cur0, model.order);
  for (int j = 0; j < model.trunc_level; ++j) {
    for (std::size_t i = 0; i < level.a.size(); ++i)
      total += copula_loglik(model.trees[j][i], level.a[i], level.b[i]);
    if (j + 1 < model.trunc_level)
      level = dvine_next_level(level, model.trees[j]);
  }
  return total;
}

std::map<CopulaFamily, int> count_families(const RVineModel& model)
{
  std::map<CopulaFamily, int> counts;
  for (const auto& tree : model.trees)
    for (const auto& c : tree)
      ++counts[c.family()];
  return counts;
}

std::string serialize(const RVineModel& model)
{
  std::ostringstream os;
  os << "vine " << to_string(model.type) << '\n';
  os << "dimension " << model.dimension() << '\n';
  os << "trunc_level " << model.trunc_level << '\n';
  os << "order";
  for (int v : model.order)
    os << ' ' << v + 1;
  os << '\n';
  for (std::size_t j = 0; j < model.trees.size(); ++j) {
    os << "tree " << j + 1 << ':';
    for (const auto& c : model.trees[j])
      os << ' ' << c.describe();
    os << '\n';
  }
  return os.str();
}

} // namespace copulaeda
