// Serial reference vs OpenMP kernels. Arg is (dimension, depth).

#include <benchmark/benchmark.h>

#include <random>

#include "dyadlab/operators.hpp"

using namespace dyadlab;

namespace {

GridFunction noise(const Mesh& m) {
    std::mt19937_64 g(42);
    GridFunction f(m, 0.0);
    for (auto& v : f.values()) v = double(g() >> 11) * 0x1.0p-53;
    return f;
}

template <Exec ex>
void BM_cube_integrals(benchmark::State& st) {
    Mesh m(int(st.range(0)), int(st.range(1)));
    GridFunction f = noise(m);
    std::vector<double> out(m.cube_count());
    for (auto _ : st) {
        cube_integrals(m, f.values().data(), out.data(), ex);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * std::int64_t(m.cells()));
}

template <Exec ex>
void BM_prefix_max(benchmark::State& st) {
    Mesh m(int(st.range(0)), int(st.range(1)));
    GridFunction f = noise(m);
    std::vector<double> slots = cube_integrals(m, f.values(), Exec::Serial);
    std::vector<double> out(m.cells());
    for (auto _ : st) {
        prefix_max(m, slots.data(), nullptr, out.data(), 0.0, ex);
        benchmark::DoNotOptimize(out.data());
    }
    st.SetItemsProcessed(st.iterations() * std::int64_t(m.cells()));
}

template <Exec ex>
void BM_maximal(benchmark::State& st) {
    Mesh m(int(st.range(0)), int(st.range(1)));
    GridFunction f = noise(m);
    OperatorSpec M = dyadic_maximal();
    for (auto _ : st) benchmark::DoNotOptimize(apply(M, f, ex));
    st.SetItemsProcessed(st.iterations() * std::int64_t(m.cells()));
}

void shapes(benchmark::internal::Benchmark* b) {
    b->Args({1, 12})->Args({1, 18})->Args({2, 9})->Args({3, 6});
}

}  // namespace

BENCHMARK(BM_cube_integrals<Exec::Serial>)->Apply(shapes);
BENCHMARK(BM_cube_integrals<Exec::Parallel>)->Apply(shapes);
BENCHMARK(BM_prefix_max<Exec::Serial>)->Apply(shapes);
BENCHMARK(BM_prefix_max<Exec::Parallel>)->Apply(shapes);
BENCHMARK(BM_maximal<Exec::Serial>)->Apply(shapes);
BENCHMARK(BM_maximal<Exec::Parallel>)->Apply(shapes);

BENCHMARK_MAIN();
