#include "xbarsim/analysis.hpp"
#include "xbarsim/neuron.hpp"
#include "xbarsim/solver.hpp"

#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

using namespace xbarsim;

namespace {

struct Case {
    CrossbarConfig cfg;
    std::vector<double> drive;
};

Case make_case(std::size_t n) {
    std::mt19937_64 rng(n);
    std::uniform_real_distribution<double> ug(1e-5, 1e-3);
    std::uniform_real_distribution<double> ud(0.1, 1.0);
    Case c;
    c.cfg.g.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < c.cfg.g.rows(); ++i) {
        for (Eigen::Index j = 0; j < c.cfg.g.cols(); ++j) {
            c.cfg.g(i, j) = ug(rng);
        }
    }
    c.cfg.parasitics = {1.0, 1e-15, 100.0};
    for (std::size_t i = 0; i < n; ++i) {
        c.drive.push_back(ud(rng));
    }
    return c;
}

void BM_Assemble(benchmark::State& state) {
    const auto c = make_case(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(assemble(c.cfg, c.drive));
    }
}

void BM_SolveDc(benchmark::State& state) {
    const auto c = make_case(static_cast<std::size_t>(state.range(0)));
    const auto sys = assemble(c.cfg, c.drive);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_dc(sys));
    }
}

void BM_SolveAc(benchmark::State& state) {
    const auto c = make_case(static_cast<std::size_t>(state.range(0)));
    const auto sys = assemble(c.cfg, c.drive);
    for (auto _ : state) {
        benchmark::DoNotOptimize(solve_ac(sys, 1e9));
    }
}

void BM_Bandwidth(benchmark::State& state) {
    const auto c = make_case(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) {
        benchmark::DoNotOptimize(compute_bandwidth(c.cfg, c.drive, 0));
    }
}

void BM_FitSigmoid(benchmark::State& state) {
    std::vector<double> x;
    std::vector<double> y;
    const SigmoidParams p = find_preset("cm-1.8").params;
    for (int k = 0; k < 200; ++k) {
        x.push_back(10e-6 * k / 199.0);
        y.push_back(sigmoid(p, x.back()));
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(fit_sigmoid(x, y));
    }
}

}  // namespace

BENCHMARK(BM_Assemble)->Arg(8)->Arg(32)->Arg(64);
BENCHMARK(BM_SolveDc)->Arg(8)->Arg(32)->Arg(64);
BENCHMARK(BM_SolveAc)->Arg(8)->Arg(32)->Arg(64);
BENCHMARK(BM_Bandwidth)->Arg(8)->Arg(32);
BENCHMARK(BM_FitSigmoid);

BENCHMARK_MAIN();
