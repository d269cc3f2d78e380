#include <benchmark/benchmark.h>

#include <perturbex/expand.hpp>
#include <perturbex/smoothness.hpp>
#include <perturbex/solver.hpp>
#include <perturbex/zoo.hpp>

using namespace perturbex;

namespace {

Problem logistic(Eigen::Index p) {
  ProblemDescriptor d;
  d.kind = "logistic";
  d.dim = p;
  d.n = 10 * p;
  d.seed = 1;
  return make_problem(d);
}

void BM_SpdFactor(benchmark::State& state) {
  Rng rng(1);
  const Matrix m = random_spd(state.range(0), 1e3, rng);
  for (auto _ : state) benchmark::DoNotOptimize(SpdOperator::from_dense(m));
}
BENCHMARK(BM_SpdFactor)->Arg(10)->Arg(50)->Arg(200);

void BM_NewtonLogistic(benchmark::State& state) {
  const Problem p = logistic(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(newton_minimize(*p.oracle, Vector::Zero(state.range(0))));
}
BENCHMARK(BM_NewtonLogistic)->Arg(10)->Arg(50);

void BM_Tau3Estimate(benchmark::State& state) {
  const Problem p = logistic(state.range(0));
  const Vector x = newton_minimize(*p.oracle, Vector::Zero(state.range(0))).xhat;
  const SpdOperator d = SpdOperator::from_dense(p.oracle->hessian(x)).power(Power::kSqrt);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_tau3(*p.oracle, x, d, 0.5, 100, 2));
}
BENCHMARK(BM_Tau3Estimate)->Arg(10)->Arg(50);

void BM_FourthOrderExpansion(benchmark::State& state) {
  const Problem p = logistic(state.range(0));
  const Vector x = newton_minimize(*p.oracle, Vector::Zero(state.range(0))).xhat;
  const SpdOperator F = SpdOperator::from_dense(p.oracle->hessian(x));
  const Vector a = 0.01 * Vector::Ones(state.range(0));
  const SmoothnessCertificate c = declared_certificate(F.power(Power::kSqrt), 1.0, 1.0, 0.1, 1.0, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(fourth_order_expansion(*p.oracle, x, F, a, c));
}
BENCHMARK(BM_FourthOrderExpansion)->Arg(10)->Arg(50);

}  // namespace

BENCHMARK_MAIN();
