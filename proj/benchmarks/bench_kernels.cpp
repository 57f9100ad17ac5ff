// Times the OpenMP assembly kernels against the serial reference versions,
// and the deterministic fixed-chunk reduction against the plain OpenMP one.
// Run with --benchmark_filter=... to narrow; grid edge length is the arg.

#include <map>
#include <memory>

#include <benchmark/benchmark.h>

#include "cellhom/material.hpp"
#include "cellhom/parallel.hpp"
#include "cellhom/random_fields.hpp"
#include "cellhom/serial_ref.hpp"

using namespace cellhom;

namespace {

struct Setup {
    Grid grid;
    SymGradOp op;
    MaterialMap mat;
    VecField v;
    SymField s;

    explicit Setup(int n)
        : grid(n, n, n),
          op(grid, Lattice::unit_cube()),
          mat(make_random_two_phase(grid, 7, 0.5, Phase::isotropic(1.0, 1.0),
                                    Phase::isotropic(10.0, 5.0), Lattice::unit_cube())),
          v(random_periodic(grid, 11)),
          s(random_sym_field(grid, Lattice::unit_cube(), 12)) {}
};

const Setup& setup(int n) {
    static std::map<int, std::unique_ptr<Setup>> cache;
    auto& p = cache[n];
    if (!p) p = std::make_unique<Setup>(n);
    return *p;
}

void items(benchmark::State& st, const Grid& g) {
    st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(g.element_count()));
}

void bm_sym_gradient(benchmark::State& st) {
    const Setup& x = setup(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        SymField e = x.op.sym_gradient(x.v);
        benchmark::DoNotOptimize(e.s.data());
    }
    items(st, x.grid);
}

void bm_sym_gradient_serial(benchmark::State& st) {
    const Setup& x = setup(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        SymField e = ref::sym_gradient(x.op, MandelVec6::Zero(), x.v);
        benchmark::DoNotOptimize(e.s.data());
    }
    items(st, x.grid);
}

void bm_weak_divergence(benchmark::State& st) {
    const Setup& x = setup(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        NodalCovector d = x.op.weak_divergence(x.s);
        benchmark::DoNotOptimize(d.v.data());
    }
    items(st, x.grid);
}

void bm_weak_divergence_serial(benchmark::State& st) {
    const Setup& x = setup(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        NodalCovector d = ref::weak_divergence(x.op, x.s);
        benchmark::DoNotOptimize(d.v.data());
    }
    items(st, x.grid);
}

void bm_apply_stiffness(benchmark::State& st) {
    const Setup& x = setup(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        NodalCovector k = x.op.apply_stiffness(x.mat, x.v);
        benchmark::DoNotOptimize(k.v.data());
    }
    items(st, x.grid);
}

void bm_apply_stiffness_serial(benchmark::State& st) {
    const Setup& x = setup(static_cast<int>(st.range(0)));
    for (auto _ : st) {
        NodalCovector k = ref::apply_stiffness(x.op, x.mat, x.v);
        benchmark::DoNotOptimize(k.v.data());
    }
    items(st, x.grid);
}

void bm_inner_deterministic(benchmark::State& st) {
    const Setup& x = setup(static_cast<int>(st.range(0)));
    par::set_deterministic(true);
    for (auto _ : st) {
        double r = inner(x.s, x.s);
        benchmark::DoNotOptimize(r);
    }
    items(st, x.grid);
}

void bm_inner_plain(benchmark::State& st) {
    const Setup& x = setup(static_cast<int>(st.range(0)));
    par::set_deterministic(false);
    for (auto _ : st) {
        double r = inner(x.s, x.s);
        benchmark::DoNotOptimize(r);
    }
    par::set_deterministic(true);
    items(st, x.grid);
}

} // namespace

BENCHMARK(bm_sym_gradient)->Arg(16)->Arg(32)->Arg(48)->UseRealTime();
BENCHMARK(bm_sym_gradient_serial)->Arg(16)->Arg(32)->Arg(48);
BENCHMARK(bm_weak_divergence)->Arg(16)->Arg(32)->Arg(48)->UseRealTime();
BENCHMARK(bm_weak_divergence_serial)->Arg(16)->Arg(32)->Arg(48);
BENCHMARK(bm_apply_stiffness)->Arg(16)->Arg(32)->Arg(48)->UseRealTime();
BENCHMARK(bm_apply_stiffness_serial)->Arg(16)->Arg(32)->Arg(48);
BENCHMARK(bm_inner_deterministic)->Arg(32)->UseRealTime();
BENCHMARK(bm_inner_plain)->Arg(32)->UseRealTime();

BENCHMARK_MAIN();
