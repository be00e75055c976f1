#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "kelvin/config.hpp"
#include "kelvin/field.hpp"
#include "kelvin/objective.hpp"

namespace {

using namespace kelvin;

void BM_SampleField(benchmark::State& state) {
  DipoleArray dipoles = DipoleArray::ring(8, 1.2);
  Eigen::Vector2d x(0.3, -0.2);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sample_field(dipoles, x));
  }
}
BENCHMARK(BM_SampleField);

void BM_KelvinForceJacobianRoute(benchmark::State& state) {
  DipoleArray dipoles = DipoleArray::ring(8, 1.2);
  Eigen::Vector2d x(0.3, -0.2);
  Eigen::VectorXd alpha = Eigen::VectorXd::Ones(8);
  for (auto _ : state) {
    benchmark::DoNotOptimize(kelvin_force_via_jacobian(dipoles, x, alpha));
  }
}
BENCHMARK(BM_KelvinForceJacobianRoute);

void BM_Problem1ValueAndGrad(benchmark::State& state) {
  RunConfig cfg = load_preset("paper_p1_f1");
  cfg.problem1.N = static_cast<int>(state.range(0));
  Problem1Objective obj(cfg.problem1);
  Eigen::VectorXd x = Eigen::VectorXd::Constant(obj.num_free(), 0.5);
  Eigen::VectorXd g(obj.num_free());
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.value_and_grad(x, &g));
  }
}
BENCHMARK(BM_Problem1ValueAndGrad)->Arg(10)->Arg(80);

void BM_Problem2ValueAndGrad(benchmark::State& state) {
  RunConfig cfg = load_preset("paper_p2");
  Problem2Objective obj(cfg.problem2);
  Eigen::VectorXd x =
      0.5 * (obj.lower_bounds().cwiseMax(-1.0) + obj.upper_bounds().cwiseMin(1.0));
  Eigen::VectorXd g(obj.num_free());
  for (auto _ : state) {
    benchmark::DoNotOptimize(obj.value_and_grad(x, &g));
  }
}
BENCHMARK(BM_Problem2ValueAndGrad);

}  // namespace

BENCHMARK_MAIN();
