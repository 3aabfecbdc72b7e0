#include "copulaeda/objectives.hpp"

#include <cmath>

namespace copulaeda {

double f_sphere(const Eigen::VectorXd& x)
{
  return x.squaredNorm();
}

double f_summation_cancellation(const Eigen::VectorXd& x)
{
  double y = 0.0;
  double total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    y += x[i];
    total += std::abs(y);
  }
  return -1.0 / (1e-5 + total);
}

const std::vector<BenchmarkSpec>& benchmark_registry()
{
  static const std::vector<BenchmarkSpec> registry{
    { "sphere", f_sphere, -600.0, 600.0, 0.0 },
    { "summation-cancellation", f_summation_cancellation, -0.16, 0.16, -1e5 },
  };
  return registry;
}

std::optional<BenchmarkSpec> find_benchmark(std::string_view name)
{
  for (const auto& b : benchmark_registry())
    if (b.name == name)
      return b;
  return std::nullopt;
}

std::string benchmark_names()
{
  std::string out;
  for (const auto& b : benchmark_registry())
    out += (out.empty() ? "" : ", ") + b.name;
  return out;
}

} // namespace copulaeda
