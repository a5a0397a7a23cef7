#include <benchmark/benchmark.h>

#include "chemostat/asymptotics.hpp"
#include "chemostat/fokker_planck.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/rng.hpp"
#include "chemostat/sde.hpp"

namespace {

using namespace chemostat;

ChemostatParams table1(double theta, double z_f, NoiseSpec noise = NoNoise{}) {
    return ChemostatParams{theta, z_f, GrowthCurve{2.911, 1.911, 0.0},
                           GrowthCurve{1.636, 0.636, 0.0}, noise};
}

void BM_Rhs(benchmark::State& state) {
    const ChemostatParams p = table1(1.0, 15000.0);
    State s{7499.0, 7500.0, 1.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(rhs(p, s));
    }
}
BENCHMARK(BM_Rhs);

void BM_PhiloxNormal(benchmark::State& state) {
    std::uint64_t step = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(rng::standard_normal(42, 7, step++, 0));
    }
}
BENCHMARK(BM_PhiloxNormal);

void BM_EulerMaruyamaStep(benchmark::State& state) {
    const ChemostatParams p = table1(1.0, 1500.0, DilutionNoise{0.001});
    State s{749.0, 750.0, 1.0};
    const double dt = 1e-3;
    std::uint64_t n = 0;
    for (auto _ : state) {
        const double dw = 0.0316 * rng::standard_normal(1, 0, n++, 0);
        s = step_euler_maruyama(p, s, dt, std::span<const double>(&dw, 1));
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_EulerMaruyamaStep);

void BM_Stage5Substrate(benchmark::State& state) {
    const ChemostatParams p = table1(1.0, 15000.0);
    double x = 0.8;
    for (auto _ : state) {
        benchmark::DoNotOptimize(stage5_zbar(p, x, 0.4));
        x = x < 2.0 ? x + 1e-6 : 0.8;
    }
}
BENCHMARK(BM_Stage5Substrate);

void BM_FpOperatorApply(benchmark::State& state) {
    const ChemostatParams p = table1(1.0, 15000.0, DilutionNoise{0.03});
    const PolygonDomain dom = build_domain(p, 3.0, 3.0, 1e-2, 0.02, 0.02);
    const FpOperator op = apply_boundaries(assemble_operator(p, dom), dom);
    const Eigen::SparseMatrix<double> L = op.matrix();
    DensityField f = gaussian_initial(dom);
    Eigen::VectorXd out(f.p.size());
    for (auto _ : state) {
        out.noalias() = L * f.p;
        benchmark::DoNotOptimize(out);
    }
}
BENCHMARK(BM_FpOperatorApply);

void BM_FpImplicitStep(benchmark::State& state) {
    const ChemostatParams p = table1(1.0, 15000.0, DilutionNoise{0.03});
    const PolygonDomain dom = build_domain(p, 3.0, 3.0, 1e-2, 0.02, 0.02);
    const FpOperator op = apply_boundaries(assemble_operator(p, dom), dom);
    DensityField f = gaussian_initial(dom);
    FpStepper stepper(op, dom, 0.05, FpScheme::implicit_euler);
    for (auto _ : state) {
        stepper.step(f);
        benchmark::DoNotOptimize(f.p);
    }
}
BENCHMARK(BM_FpImplicitStep);

} // namespace

BENCHMARK_MAIN();
