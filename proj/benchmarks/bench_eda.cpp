#include <benchmark/benchmark.h>

#include <copulaeda/algorithms.hpp>
#include <copulaeda/eda.hpp>
#include <copulaeda/objectives.hpp>

using namespace copulaeda;

namespace {

// One learn + sample step on a selected population of the Table 3 sizes.
void BM_LearnSample(benchmark::State& state)
{
  const auto algorithm = static_cast<Algorithm>(state.range(0));
  state.SetLabel(std::string(to_string(algorithm)));
  EdaSpec spec;
  spec.algorithm = algorithm;
  spec.copulas = { CopulaFamily::Normal };
  spec.margin = MarginKind::Normal;
  const int n = 10;
  const Eigen::VectorXd lo = Eigen::VectorXd::Constant(n, -600.0);
  const Eigen::VectorXd hi = Eigen::VectorXd::Constant(n, 600.0);
  Rng rng(5);
  auto pop = seed_uniform(lo, hi, 100, rng);
  pop.evaluations.resize(pop.size());
  for (Eigen::Index i = 0; i < pop.size(); ++i)
    pop.evaluations[i] = f_sphere(pop.solutions.row(i).transpose());
  const auto selected = select_truncation(pop, 0.3);
  for (auto _ : state) {
    const auto model = learn_model(spec, selected, lo, hi, rng);
    benchmark::DoNotOptimize(sample_model(model, 100, rng));
  }
}
BENCHMARK(BM_LearnSample)->DenseRange(0, 4)->Unit(benchmark::kMillisecond);

void BM_Objective(benchmark::State& state)
{
  Rng rng(6);
  const Eigen::VectorXd x = Eigen::VectorXd::Random(state.range(0)) * 0.16;
  for (auto _ : state)
    benchmark::DoNotOptimize(f_summation_cancellation(x));
}
BENCHMARK(BM_Objective)->Arg(10)->Arg(100);

} // namespace
