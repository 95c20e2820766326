#include "steklov/fem.hpp"
#include "steklov/geometry.hpp"
#include "steklov/mesh.hpp"
#include "steklov/optimizer.hpp"
#include "steklov/shape_gradient.hpp"

#include <benchmark/benchmark.h>

#include <cmath>

using namespace steklov;

namespace {

BoundaryPolyline ellipse(std::size_t n) {
    return reconstruct_boundary(SupportVector::sample(n, [](double t) {
        return std::sqrt(std::cos(t) * std::cos(t) + 0.36 * std::sin(t) * std::sin(t));
    }));
}

} // namespace

static void BM_Triangulate(benchmark::State& state) {
    const BoundaryPolyline b = ellipse(200);
    const double h = 1.0 / static_cast<double>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(triangulate(b, h));
}
BENCHMARK(BM_Triangulate)->Arg(10)->Arg(20)->Arg(40)->Unit(benchmark::kMillisecond);

static void BM_Assemble(benchmark::State& state) {
    const FemSpace space(triangulate(ellipse(200), 0.1), static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(assemble(space));
}
BENCHMARK(BM_Assemble)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

static void BM_Spectrum(benchmark::State& state) {
    const FemSpace space(triangulate(ellipse(static_cast<std::size_t>(state.range(0))), 0.1), 2);
    const SteklovMatrices mats = assemble(space);
    const auto method = state.range(1) == 0 ? EigenMethod::Krylov : EigenMethod::Dense;
    for (auto _ : state) benchmark::DoNotOptimize(solve_spectrum(space, mats, 6, method));
    state.SetLabel(method == EigenMethod::Krylov ? "krylov" : "dense");
}
BENCHMARK(BM_Spectrum)->Args({200, 0})->Args({200, 1})->Args({400, 0})->Args({400, 1})->Unit(benchmark::kMillisecond);

static void BM_SupportGradient(benchmark::State& state) {
    const BoundaryPolyline b = ellipse(200);
    const TriangleMesh mesh = triangulate(b, 0.1);
    const SteklovSpectrum spec = steklov_spectrum(mesh, 4);
    const ShapeSensitivity s(b, mesh, spec);
    for (auto _ : state) benchmark::DoNotOptimize(support_gradient(s, 1));
}
BENCHMARK(BM_SupportGradient)->Unit(benchmark::kMillisecond);

static void BM_Project(benchmark::State& state) {
    OptimOptions o;
    o.n_angles = static_cast<std::size_t>(state.range(0));
    const LinearConstraintSet cons = build_constraints(o);
    Eigen::VectorXd x(static_cast<Eigen::Index>(o.n_angles));
    for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.3 * std::cos(3.0 * i) + 0.1 * std::sin(7.0 * i);
    for (auto _ : state) benchmark::DoNotOptimize(project(x, cons));
}
BENCHMARK(BM_Project)->Arg(100)->Arg(200)->Unit(benchmark::kMillisecond);

static void BM_Calipers(benchmark::State& state) {
    const BoundaryPolyline b = ellipse(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compute_diameter(b));
}
BENCHMARK(BM_Calipers)->Arg(200)->Arg(2000);

static void BM_CalipersBruteForce(benchmark::State& state) {
    const BoundaryPolyline b = ellipse(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(compute_diameter_brute_force(b));
}
BENCHMARK(BM_CalipersBruteForce)->Arg(200)->Arg(2000);
BENCHMARK_MAIN();
