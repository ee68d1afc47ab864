// Serial vs OpenMP kernels, a full integrator step, and realizations per
// second for the ensemble.

#include <benchmark/benchmark.h>

#include <random>

#include "gcsge/ensemble.hpp"
#include "gcsge/integrator.hpp"
#include "gcsge/kernels.hpp"
#include "gcsge/potential.hpp"

using namespace gcsge;

namespace {

struct Fields {
    ComplexBuffer phi, phix, phixx, out, e1, e2, k1, k2, k3, k4;
    RealBuffer V;
    explicit Fields(std::size_t n)
        : phi(n), phix(n), phixx(n), out(n), e1(n), e2(n), k1(n), k2(n), k3(n), k4(n), V(n) {
        std::mt19937_64 rng(1);
        std::uniform_real_distribution<double> u(-0.3, 0.3);
        for (auto* b : {&phi, &phix, &phixx, &e1, &e2, &k1, &k2, &k3, &k4}) {
            for (auto& z : *b) z = {u(rng), u(rng)};
        }
        for (auto& v : V) v = u(rng);
    }
};

template <kernels::Exec E>
void BM_nonlinear(benchmark::State& st) {
    Fields f(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        benchmark::DoNotOptimize(kernels::gcsge_nonlinear(E, f.phi, f.phix, f.phixx, f.V, f.out));
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <kernels::Exec E>
void BM_rk4_combine(benchmark::State& st) {
    Fields f(static_cast<std::size_t>(st.range(0)));
    for (auto _ : st) {
        kernels::rk4_combine(E, f.out, f.k1, f.k2, f.k3, f.k4, f.e1, f.e2, 1e-3);
        benchmark::ClobberMemory();
    }
    st.SetItemsProcessed(st.iterations() * st.range(0));
}

template <kernels::Exec E>
void BM_step(benchmark::State& st) {
    const Grid g = make_grid(628.32, static_cast<std::size_t>(st.range(0)));
    EvolutionConfig cfg;
    cfg.dt = 0.01;
    cfg.exec = E;
    GcsgeIntegrator integ(g, RealField(g), cfg);
    ComplexField phi = soliton_profile({0.2, 0.1, 0.0}, 0.0, g);
    double t = 0.0;
    for (auto _ : st) {
        integ.step(phi, t);
        t += cfg.dt;
    }
    st.SetItemsProcessed(st.iterations());
}

void BM_realization(benchmark::State& st) {
    EnsembleConfig ec;
    ec.grid = make_grid(1256.636, 1024);
    ec.soliton = {0.1, 0.0604, -110.0};
    ec.potential = make_potential(GaussianBarrier{1e-3, 20.0, 0.0}, ec.grid);
    ec.evolution.dt = 0.2;
    ec.evolution.t_end = 200.0;
    ec.evolution.output_stride = 5;
    ec.observation_times = {200.0};
    ec.window = {default_window(0.1, 0.01, ec.grid.length()), 0.01, 0.1};
    ec.noise = 0.01;
    std::size_t i = 0;
    for (auto _ : st) benchmark::DoNotOptimize(run_realization(ec, i++));
}

}  // namespace

BENCHMARK(BM_nonlinear<kernels::Exec::serial>)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);
BENCHMARK(BM_nonlinear<kernels::Exec::parallel>)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);
BENCHMARK(BM_rk4_combine<kernels::Exec::serial>)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);
BENCHMARK(BM_rk4_combine<kernels::Exec::parallel>)->RangeMultiplier(4)->Range(1 << 10, 1 << 16);
BENCHMARK(BM_step<kernels::Exec::serial>)->Arg(1024)->Arg(4096)->Arg(16384);
BENCHMARK(BM_step<kernels::Exec::parallel>)->Arg(1024)->Arg(4096)->Arg(16384);
BENCHMARK(BM_realization)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
