#include <benchmark/benchmark.h>

#include <map>
#include <random>

#include "epishear/harness.hpp"
#include "epishear/lightfield.hpp"
#include "epishear/parallel.hpp"
#include "epishear/shearlet.hpp"

using namespace epishear;

namespace {

Grid noise(int rows, int cols) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0, 1);
    Grid g(rows, cols);
    for (double& v : g.data) v = U(rng);
    return g;
}

const ShearletSystem& system_for(int n) {
    static std::map<int, ShearletSystem> cache;
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_system(n, n, 4, reconstruction_config())).first;
    return it->second;
}

void BM_analyze_serial(benchmark::State& st) {
    const auto& sys = system_for(int(st.range(0)));
    const Grid f = noise(sys.rows, sys.cols);
    for (auto _ : st) benchmark::DoNotOptimize(analyze_serial(sys, f));
}
void BM_analyze_omp(benchmark::State& st) {
    const auto& sys = system_for(int(st.range(0)));
    const Grid f = noise(sys.rows, sys.cols);
    for (auto _ : st) benchmark::DoNotOptimize(analyze(sys, f));
}
void BM_synthesize_serial(benchmark::State& st) {
    const auto& sys = system_for(int(st.range(0)));
    const CoefficientStack c = analyze(sys, noise(sys.rows, sys.cols));
    for (auto _ : st) benchmark::DoNotOptimize(synthesize_serial(sys, c));
}
void BM_synthesize_omp(benchmark::State& st) {
    const auto& sys = system_for(int(st.range(0)));
    const CoefficientStack c = analyze(sys, noise(sys.rows, sys.cols));
    for (auto _ : st) benchmark::DoNotOptimize(synthesize(sys, c));
}

void BM_digital_shear(benchmark::State& st) {
    const Grid f = noise(int(st.range(0)), int(st.range(0)));
    for (auto _ : st) benchmark::DoNotOptimize(digital_shear(f, 3, 2));
}

// whole-driver scaling: 16 scanlines, 5 views -> 17 at d=4
void BM_hpo(benchmark::State& st) {
    const int prev = worker_count();
    set_worker_count(int(st.range(0)));
    const LightField lf = make_synthetic_lightfield(5, 16, 128, 6, 4.0, 2);
    IterationParams p;
    p.n_iter = 20;
    for (auto _ : st) benchmark::DoNotOptimize(reconstruct_hpo(lf, 4, p));
    set_worker_count(prev);
}

}  // namespace

BENCHMARK(BM_analyze_serial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_analyze_omp)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_synthesize_serial)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_synthesize_omp)->Arg(128)->Arg(256)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_digital_shear)->Arg(256)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_hpo)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond)->UseRealTime();

BENCHMARK_MAIN();
