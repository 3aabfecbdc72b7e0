#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "copulaeda/eda.hpp"

namespace copulaeda {

//! Sum of squares. Optimum 0 at the origin.
double f_sphere(const Eigen::VectorXd& x);

//! Summation Cancellation in minimization form: -1 / (1e-5 + sum |y_i|) with
//! y_1 = x_1, y_i = y_{i-1} + x_i. Optimum -1e5 at the origin.
double f_summation_cancellation(const Eigen::VectorXd& x);

struct BenchmarkSpec
{
  std::string name;
  Objective function;
  double default_lower = 0.0; // same bound in every dimension
  double default_upper = 0.0;
  double target_eval = 0.0;
};

const std::vector<BenchmarkSpec>& benchmark_registry();
std::optional<BenchmarkSpec> find_benchmark(std::string_view name);

//! Comma-separated registry names, for diagnostics.
std::string benchmark_names();

} // namespace copulaeda
