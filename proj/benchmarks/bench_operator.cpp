#include "mlnl/kernels.hpp"
#include "mlnl/nonlocal.hpp"
#include "mlnl/solver.hpp"

#include <benchmark/benchmark.h>

using namespace mlnl;

namespace {

DiscreteOperator make_mixed(double h) {
    static Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    auto k = make_fractional(1.5, 1.0, 2);
    return DiscreteOperator::assemble(b1, &k, 0.5, h);
}

} // namespace

static void BM_NonlocalApply(benchmark::State& state) {
    double h = 1.0 / state.range(0);
    auto A = make_mixed(h);
    std::vector<double> x(static_cast<size_t>(A.rows()), 1.0), y;
    for (auto _ : state) {
        A.apply_neg(x, y, nullptr);
        benchmark::DoNotOptimize(y.data());
    }
    state.SetItemsProcessed(state.iterations() * A.rows());
}
BENCHMARK(BM_NonlocalApply)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

static void BM_MixedSolve(benchmark::State& state) {
    double h = 1.0 / state.range(0);
    Domain b1 = Domain::ball(2, {0, 0}, 1.0);
    auto k = make_fractional(1.5, 1.0, 2);
    for (auto _ : state) {
        auto A = DiscreteOperator::assemble(b1, &k, 0.5, h);
        GridFunction f(A.lattice(), 0.0);
        for (int r = 0; r < A.rows(); ++r)
            f.v[static_cast<size_t>(
                A.nodes().interior[static_cast<size_t>(r)])] = -1.0;
        auto rep = solve_linear(A, f);
        benchmark::DoNotOptimize(rep.u.v.data());
    }
}
BENCHMARK(BM_MixedSolve)->Arg(32)->Unit(benchmark::kMillisecond);

static void BM_SchemeBuild(benchmark::State& state) {
    auto k = make_fractional(1.5, 1.0, 2);
    double h = 1.0 / state.range(0);
    for (auto _ : state) {
        auto q = QuadratureScheme::build(k, 2, h, 3.0);
        benchmark::DoNotOptimize(q.total_mass());
    }
}
BENCHMARK(BM_SchemeBuild)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
