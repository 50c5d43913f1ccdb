// Serial reference vs OpenMP versions of the two grid kernels.
#include <benchmark/benchmark.h>

#include <map>

#include "renorm/analysis/analysis.hpp"
#include "renorm/martingale/martingale.hpp"
#include "renorm/numerics/grid.hpp"

using namespace renorm;

namespace {

using T = long double;

std::shared_ptr<const Giem<T>> ko_map() {
    return std::make_shared<const Giem<T>>(ko_iem<T>(golden_lengths<T>(),
                                                     CombinatorialPair::from_orders({"A", "B"}, {"B", "A"}),
                                                     {{0.1L, 0.37L, 0.4L, false}, {-0.08L, 0.61L, -0.35L, false}}));
}

const RauzyState<T>& state(std::size_t depth) {
    static std::map<std::size_t, RauzyState<T>> cache;
    auto it = cache.find(depth);
    if (it == cache.end()) it = cache.emplace(depth, renormalize(ko_map(), depth)).first;
    return it->second;
}

template <bool Parallel>
void zoom_kernel(benchmark::State& st) {
    const auto& s = state(static_cast<std::size_t>(st.range(0)));
    const auto grid = num::uniform_grid(T(0), T(1), 1025);
    for (auto _ : st) {
        auto zs = Parallel ? zoom(s, 0, std::span<const T>(grid)) : zoom_serial(s, 0, std::span<const T>(grid));
        benchmark::DoNotOptimize(zs.value.data());
    }
}

template <bool Parallel>
void phi_kernel(benchmark::State& st) {
    const auto f = ko_map();
    auto p = std::make_shared<const DynamicalPartition<T>>(build_partition(state(static_cast<std::size_t>(st.range(0)))));
    PrecisionContext ctx = PrecisionContext::extended(64);
    ctx.quad_tol = 1e-14L;
    const num::Integrand<T> g = [&f](const T& x) { return f->nonlinearity(x); };
    const auto cuts = f->singular_points();
    for (auto _ : st) {
        auto phi = Parallel ? phi_n(g, p, ctx, cuts) : phi_n_serial(g, p, ctx, cuts);
        benchmark::DoNotOptimize(phi.values.data());
    }
}

}  // namespace

BENCHMARK(zoom_kernel<false>)->Name("zoom/serial")->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(zoom_kernel<true>)->Name("zoom/openmp")->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(phi_kernel<false>)->Name("phi_n/serial")->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);
BENCHMARK(phi_kernel<true>)->Name("phi_n/openmp")->Arg(6)->Arg(10)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
