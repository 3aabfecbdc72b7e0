#include <benchmark/benchmark.h>

#include <copulaeda/copula.hpp>
#include <copulaeda/dependence.hpp>
#include <copulaeda/vine.hpp>

using namespace copulaeda;

namespace {

BivariateCopula family(int index)
{
  switch (index) {
    case 0:
      return BivariateCopula::normal(0.5);
    case 1:
      return BivariateCopula::student(0.5, 5.0);
    case 2:
      return BivariateCopula::clayton(2.0);
    case 3:
      return BivariateCopula::frank(5.0);
    default:
      return BivariateCopula::gumbel(2.0);
  }
}

void BM_HInverse(benchmark::State& state)
{
  const auto c = family(static_cast<int>(state.range(0)));
  state.SetLabel(c.describe());
  double p = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(c.hinv(p, 0.3));
    p = p < 0.9 ? p + 0.01 : 0.1;
  }
}
BENCHMARK(BM_HInverse)->DenseRange(0, 4);

void BM_Cdf(benchmark::State& state)
{
  const auto c = family(static_cast<int>(state.range(0)));
  state.SetLabel(c.describe());
  for (auto _ : state)
    benchmark::DoNotOptimize(c.cdf(0.3, 0.7));
}
BENCHMARK(BM_Cdf)->DenseRange(0, 4);

void BM_KendallTau(benchmark::State& state)
{
  Rng rng(1);
  const Eigen::MatrixXd x = copula_sample(BivariateCopula::normal(0.5), static_cast<int>(state.range(0)), rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(kendall_tau(x.col(0), x.col(1)));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_KendallTau)->RangeMultiplier(4)->Range(64, 4096)->Complexity(benchmark::oNSquared);

void BM_IndepTest(benchmark::State& state)
{
  Rng rng(2);
  const Eigen::MatrixXd x = copula_sample(BivariateCopula::product(), static_cast<int>(state.range(0)), rng);
  for (auto _ : state)
    benchmark::DoNotOptimize(indep_test_cvm(x.col(0), x.col(1), 100, rng));
}
BENCHMARK(BM_IndepTest)->Arg(30)->Arg(100)->Unit(benchmark::kMillisecond);

void BM_GofSelect(benchmark::State& state)
{
  Rng rng(3);
  const Eigen::MatrixXd x = copula_sample(BivariateCopula::clayton(2.0), static_cast<int>(state.range(0)), rng);
  const std::vector<CopulaFamily> candidates{ CopulaFamily::Normal, CopulaFamily::Student, CopulaFamily::Clayton,
                                              CopulaFamily::Frank, CopulaFamily::Gumbel };
  for (auto _ : state)
    benchmark::DoNotOptimize(gof_select_copula(x.col(0), x.col(1), candidates));
}
BENCHMARK(BM_GofSelect)->Arg(30)->Arg(300)->Unit(benchmark::kMillisecond);

void BM_VineFit(benchmark::State& state)
{
  const int n = static_cast<int>(state.range(0));
  Rng rng(4);
  Eigen::MatrixXd R = Eigen::MatrixXd::Constant(n, n, 0.5);
  R.diagonal().setOnes();
  const Eigen::MatrixXd U = mvnormal_copula_sample(R, 60, rng);
  VineFitOptions opt;
  opt.type = state.range(1) ? VineType::DVine : VineType::CVine;
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_vine(U, opt, rng));
}
BENCHMARK(BM_VineFit)->Args({ 5, 0 })->Args({ 5, 1 })->Args({ 10, 0 })->Args({ 10, 1 })->Unit(benchmark::kMillisecond);

} // namespace
