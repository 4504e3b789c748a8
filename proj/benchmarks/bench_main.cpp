#include <benchmark/benchmark.h>

#include "snar/diagnostics.hpp"
#include "snar/likelihood.hpp"
#include "snar/qmle.hpp"
#include "snar/simulate.hpp"
#include "snar/tagging.hpp"

using namespace snar;

namespace {

const SnarParams kTheta = validate_params(1.05, 0.9, 1.0);
const InnovationFamily kNormal = InnovationFamily::make(InnovationKind::Normal, 1.0);

std::vector<double> path(std::size_t n) { return simulate(kTheta, n, kNormal, 17).y; }

void BM_Simulate(benchmark::State& state) {
    const auto n = static_cast<std::size_t>(state.range(0));
    std::uint64_t seed = 0;
    for (auto _ : state) benchmark::DoNotOptimize(simulate(kTheta, n, kNormal, ++seed));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Simulate)->Arg(400)->Arg(10000);

void BM_LikelihoodGradient(benchmark::State& state) {
    const auto y = path(static_cast<std::size_t>(state.range(0)));
    const QuasiLikelihood ql(y);
    const Vec3 x = as_vector(kTheta);
    Vec3 g;
    for (auto _ : state) benchmark::DoNotOptimize(ql.value_and_gradient(x, g));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_LikelihoodGradient)->Arg(400)->Arg(10000);

void BM_LikelihoodHessian(benchmark::State& state) {
    const auto y = path(static_cast<std::size_t>(state.range(0)));
    const QuasiLikelihood ql(y);
    const Vec3 x = as_vector(kTheta);
    for (auto _ : state) benchmark::DoNotOptimize(ql.hessian(x));
}
BENCHMARK(BM_LikelihoodHessian)->Arg(400);

void BM_Fit(benchmark::State& state) {
    const auto y = path(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(fit(y));
}
BENCHMARK(BM_Fit)->Arg(200)->Arg(800)->Unit(benchmark::kMillisecond);

void BM_QStatistic(benchmark::State& state) {
    const auto y = path(800);
    const FitResult f = fit(y);
    for (auto _ : state) benchmark::DoNotOptimize(q_statistic(y, f, static_cast<int>(state.range(0)), TuningMode::Q95));
}
BENCHMARK(BM_QStatistic)->Arg(6)->Arg(24);

void BM_TagAll(benchmark::State& state) {
    const auto y = path(200);
    const FitResult f = fit(y);
    const TagMethod methods[] = {TagMethod::RBT1, TagMethod::RBT2, TagMethod::RBT3, TagMethod::RBT4, TagMethod::NBT};
    for (auto _ : state) benchmark::DoNotOptimize(tag_all(y, f.theta_hat, methods));
}
BENCHMARK(BM_TagAll);

}  // namespace
BENCHMARK_MAIN();
