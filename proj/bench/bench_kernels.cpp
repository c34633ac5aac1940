#include <benchmark/benchmark.h>

#include "woldlab/examples.hpp"
#include "woldlab/kernels.hpp"

using namespace woldlab;

namespace {

Eigen::MatrixXcd random_matrix(Eigen::Index n) {
    std::srand(7);
    return Eigen::MatrixXcd::Random(n, n);
}

kernels::Exec exec_of(const benchmark::State& state) {
    return state.range(1) == 0 ? kernels::Exec::Serial : kernels::Exec::Parallel;
}

void BM_Gemm(benchmark::State& state) {
    Eigen::MatrixXcd a = random_matrix(state.range(0)), b = random_matrix(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::gemm(a, b, exec_of(state)));
}

void BM_Gram(benchmark::State& state) {
    Eigen::MatrixXcd a = random_matrix(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(kernels::gram(a, exec_of(state)));
}

void BM_Decomposition(benchmark::State& state) {
    PipelineInput in = constructed_input(construct_demo(static_cast<int>(state.range(0)), 8));
    DecompositionOptions opts;
    opts.exec = exec_of(state);
    for (auto _ : state)
        benchmark::DoNotOptimize(wold_multi_induction(in.tuple, in.interior, in.decomposition_depth, {}, opts));
}

}  // namespace

BENCHMARK(BM_Gemm)->ArgsProduct({{128, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Gram)->ArgsProduct({{128, 256}, {0, 1}})->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Decomposition)->ArgsProduct({{16, 24}, {0, 1}})->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
