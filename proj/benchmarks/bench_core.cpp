#include <benchmark/benchmark.h>

#include "powalm/alm.hpp"
#include "powalm/inner_dispatch.hpp"
#include "powalm/power.hpp"
#include "powalm/problems.hpp"
#include "powalm/rng.hpp"

namespace {

powalm::NormFamily norm_of(int64_t id) {
  return id == 0 ? powalm::NormFamily::Euclidean : powalm::NormFamily::SeparablePower;
}

void BM_PhiConjGrad(benchmark::State& state) {
  powalm::Rng rng(1, 1);
  const powalm::Vector v = rng.normal_vector(state.range(0));
  const powalm::PowerParams params(1.25, 0.1, norm_of(state.range(1)));
  for (auto _ : state) benchmark::DoNotOptimize(powalm::phi_conj_grad(v, params));
}
BENCHMARK(BM_PhiConjGrad)->ArgsProduct({{100, 1000}, {0, 1}});

void BM_MultiplierArgmaxBox(benchmark::State& state) {
  powalm::Rng rng(2, 1);
  const powalm::Vector s = rng.normal_vector(state.range(0));
  const powalm::Vector y = rng.uniform_vector(state.range(0), -1.0, 1.0);
  const powalm::PowerParams params(1.25, 0.1, norm_of(state.range(1)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        powalm::multiplier_argmax(s, y, params, powalm::ConstraintKind::UnitBoxDual));
  }
}
BENCHMARK(BM_MultiplierArgmaxBox)->ArgsProduct({{100, 1000}, {0, 1}});

void BM_AugLagrangian(benchmark::State& state) {
  const powalm::ProblemInstance p = powalm::gen_qp_eq_box(50, 100, 0);
  const powalm::Vector x = powalm::Vector::Constant(p.n(), 0.1);
  const powalm::Vector y = powalm::Vector::Zero(p.m());
  const powalm::PowerParams params = powalm::PowerParams::from_dual_power(0.8, 0.1);
  powalm::Vector grad;
  for (auto _ : state) benchmark::DoNotOptimize(powalm::aug_lagrangian(x, y, p, params, &grad));
}
BENCHMARK(BM_AugLagrangian);

void BM_InnerSolveApg(benchmark::State& state) {
  const powalm::ProblemInstance p = powalm::gen_qp_eq_box(50, 100, 0);
  const powalm::Vector y = powalm::Vector::Zero(p.m());
  const powalm::Vector x0 = powalm::Vector::Zero(p.n());
  const powalm::PowerParams params = powalm::PowerParams::from_dual_power(0.8, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(powalm::solve_inner(p, y, params, powalm::LagrangianForm::Power,
                                                 1e-6, x0, {}));
  }
}
BENCHMARK(BM_InnerSolveApg)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
