#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chemostat/errors.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/rng.hpp"
#include "chemostat/sde.hpp"
#include "support/oracles.hpp"

using namespace chemostat;

namespace {

ChemostatParams table1(double theta = 1.0, double z_f = 15000.0) {
    ChemostatParams p;
    p.curve_x = GrowthCurve{2.911, 1.911, 0.0};
    p.curve_y = GrowthCurve{1.636, 0.636, 0.0};
    p.theta = theta;
    p.z_f = z_f;
    return p;
}

} // namespace

TEST_CASE("counter generator is addressable and reproducible") {
    const double a = rng::standard_normal(1, 2, 3, 0);
    CHECK(a == rng::standard_normal(1, 2, 3, 0));
    CHECK(a != rng::standard_normal(1, 2, 3, 1));
    CHECK(a != rng::standard_normal(1, 2, 4, 0));
    CHECK(a != rng::standard_normal(1, 3, 3, 0));
    CHECK(a != rng::standard_normal(2, 2, 3, 0));
    // moments sanity over a block of draws
    double sum = 0.0, sum2 = 0.0;
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
        const double v = rng::standard_normal(99, 0, static_cast<std::uint64_t>(i), 0);
        sum += v;
        sum2 += v * v;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum2 / n - 1.0) < 0.02);
}

TEST_CASE("diffusion columns carry the two noise structures") {
    ChemostatParams p = table1();

    SUBCASE("dilution noise: one shared column, zero z entry at the feed level") {
        p.noise = DilutionNoise{0.001};
        const DriftDiffusion at_feed = drift_diffusion(p, State{1.0, 1.0, p.z_f});
        REQUIRE(at_feed.n_wieners == 1);
        CHECK(at_feed.columns[0].z == 0.0);

        const DriftDiffusion dd = drift_diffusion(p, State{1.0, 1.0, 1.0});
        CHECK(dd.columns[0].x == doctest::Approx(-0.001).epsilon(1e-12));
        CHECK(dd.columns[0].y == doctest::Approx(-0.001).epsilon(1e-12));
        CHECK(dd.columns[0].z == doctest::Approx(14.999).epsilon(1e-12));
    }

    SUBCASE("general noise: diagonal columns vanish with their populations") {
        p.noise = GeneralNoise{0.1, 0.2, 0.3};
        const DriftDiffusion dd = drift_diffusion(p, State{0.0, 2.0, 3.0});
        REQUIRE(dd.n_wieners == 3);
        CHECK(dd.columns[0].x == 0.0); // absorbing at x = 0
        CHECK(dd.columns[1].y == doctest::Approx(0.4));
        CHECK(dd.columns[2].z == doctest::Approx(0.9));
    }

    SUBCASE("drift equals the deterministic right-hand side") {
        p.noise = DilutionNoise{0.5};
        const State s{10.0, 20.0, 2.0};
        const DriftDiffusion dd = drift_diffusion(p, s);
        const State d = rhs(p, s);
        CHECK(dd.drift.x == d.x);
        CHECK(dd.drift.y == d.y);
        CHECK(dd.drift.z == d.z);
    }
}

TEST_CASE("zero noise collapses both schemes to explicit Euler") {
    ChemostatParams p = table1();
    p.noise = DilutionNoise{0.0};
    const State s{100.0, 50.0, 2.0};
    const double dt = 1e-3;
    const double dw = 0.017;
    const State euler = s + dt * rhs(p, s);
    const State em = step_euler_maruyama(p, s, dt, std::span<const double>(&dw, 1));
    const State mil = step_milstein(p, s, dt, std::span<const double>(&dw, 1));
    CHECK(em.x == euler.x);
    CHECK(em.y == euler.y);
    CHECK(em.z == euler.z);
    CHECK(mil.x == euler.x);
    CHECK(mil.y == euler.y);
    CHECK(mil.z == euler.z);
}

TEST_CASE("general noise with a single active increment only perturbs x") {
    ChemostatParams p = table1();
    p.noise = GeneralNoise{0.2, 0.3, 0.4};
    const State s{10.0, 20.0, 5.0};
    const double dt = 1e-3;
    const double dw[3] = {0.05, 0.0, 0.0};
    const State base = s + dt * rhs(p, s);
    const State em = step_euler_maruyama(p, s, dt, std::span<const double>(dw, 3));
    CHECK(em.x == doctest::Approx(base.x + 0.2 * s.x * 0.05).epsilon(1e-14));
    CHECK(em.y == base.y);
    CHECK(em.z == base.z);
}

TEST_CASE("the dilution deficit contracts exactly per step") {
    ChemostatParams p = table1();
    p.noise = DilutionNoise{0.0006};
    const State s{7499.0, 7400.0, 3.0}; // off the invariant plane: w != 0
    const double dt = 1e-3;
    for (double dw : {0.04, -0.02, 0.0}) {
        const State next = step_euler_maruyama(p, s, dt, std::span<const double>(&dw, 1));
        const double w = p.z_f - (s.x + s.y + s.z);
        const double w_next = p.z_f - (next.x + next.y + next.z);
        const double predicted = w * (1.0 - p.theta * dt - 0.0006 * dw);
        CHECK(std::abs(w_next - predicted) < 1e-12 * p.z_f);
    }
}

TEST_CASE("milstein equals euler-maruyama when dW^2 = dt") {
    ChemostatParams p = table1();
    const double dt = 1e-3;
    const double dw1 = std::sqrt(dt);

    p.noise = DilutionNoise{0.3};
    const State s{10.0, 20.0, 5.0};
    State em = step_euler_maruyama(p, s, dt, std::span<const double>(&dw1, 1));
    State mil = step_milstein(p, s, dt, std::span<const double>(&dw1, 1));
    CHECK(mil.x == doctest::Approx(em.x).epsilon(1e-15));
    CHECK(mil.y == doctest::Approx(em.y).epsilon(1e-15));
    CHECK(mil.z == doctest::Approx(em.z).epsilon(1e-15));

    p.noise = GeneralNoise{0.2, 0.3, 0.4};
    const double dw3[3] = {dw1, -dw1, dw1};
    em = step_euler_maruyama(p, s, dt, std::span<const double>(dw3, 3));
    mil = step_milstein(p, s, dt, std::span<const double>(dw3, 3));
    CHECK(mil.x == doctest::Approx(em.x).epsilon(1e-15));
    CHECK(mil.y == doctest::Approx(em.y).epsilon(1e-15));
    CHECK(mil.z == doctest::Approx(em.z).epsilon(1e-15));
}

TEST_CASE("milstein dilution correction follows (b.grad)b") {
    ChemostatParams p = table1();
    const double sigma = 0.25;
    p.noise = DilutionNoise{sigma};
    const State s{3.0, 7.0, 2.0};
    const double dt = 1e-3;
    const double dw = 0.08;
    const State em = step_euler_maruyama(p, s, dt, std::span<const double>(&dw, 1));
    const State mil = step_milstein(p, s, dt, std::span<const double>(&dw, 1));
    const double corr = 0.5 * sigma * sigma * (dw * dw - dt);
    CHECK(mil.x - em.x == doctest::Approx(corr * s.x).epsilon(1e-12));
    CHECK(mil.y - em.y == doctest::Approx(corr * s.y).epsilon(1e-12));
    CHECK(mil.z - em.z == doctest::Approx(-corr * (p.z_f - s.z)).epsilon(1e-12));
}

TEST_CASE("a zero-noise path started on the line is constant") {
    // fixed-step explicit stepping needs dt inside the stiff stability bound
    // kappa = z_f (x f' + y g') ~ 780 at this scale
    ChemostatParams p = table1(1.0, 1500.0);
    p.noise = DilutionNoise{0.0};
    SimOptions o;
    o.dt = 1e-4;
    o.t_end = 2.0;
    o.output_stride = 100;
    const State s0{749.0, 750.0, 1.0};
    const SdeTrajectory traj = simulate(p, s0, o);
    for (const State& s : traj.states) {
        CHECK(std::abs(s.x - s0.x) < 1e-7 * p.z_f);
        CHECK(std::abs(s.y - s0.y) < 1e-7 * p.z_f);
        CHECK(std::abs(s.z - s0.z) < 1e-6);
    }
}

TEST_CASE("identical options reproduce bit-identical paths") {
    ChemostatParams p = table1(1.0, 1500.0);
    p.noise = DilutionNoise{0.001};
    SimOptions o;
    o.dt = 1e-3;
    o.t_end = 5.0;
    o.seed = 77;
    o.path_index = 3;
    o.output_stride = 10;
    const SdeTrajectory a = simulate(p, State{749.0, 750.0, 1.0}, o);
    const SdeTrajectory b = simulate(p, State{749.0, 750.0, 1.0}, o);
    REQUIRE(a.states.size() == b.states.size());
    for (std::size_t i = 0; i < a.states.size(); ++i) {
        CHECK(a.states[i].x == b.states[i].x);
        CHECK(a.states[i].y == b.states[i].y);
        CHECK(a.states[i].z == b.states[i].z);
    }
    // a different path index gives a different realisation
    SimOptions o2 = o;
    o2.path_index = 4;
    const SdeTrajectory c = simulate(p, State{749.0, 750.0, 1.0}, o2);
    CHECK(c.final_state().x != a.final_state().x);
}

TEST_CASE("a population clamped at zero is absorbed") {
    ChemostatParams p = table1(1.0, 10.0);
    p.noise = GeneralNoise{6.0, 0.0, 0.0}; // violent x noise forces a negative step
    SimOptions o;
    o.dt = 0.05;
    o.t_end = 50.0;
    o.seed = 5;
    o.output_stride = 1;
    const SdeTrajectory traj = simulate(p, State{1.0, 1.0, 1.0}, o);
    REQUIRE(traj.clamp_count > 0);
    bool absorbed = false;
    for (const State& s : traj.states) {
        if (absorbed) CHECK(s.x == 0.0);
        if (s.x == 0.0) absorbed = true;
    }
    CHECK(absorbed);
    // the extinction event fired exactly once for x
    int x_events = 0;
    for (const auto& ev : traj.events) x_events += ev.population == 0 ? 1 : 0;
    CHECK(x_events == 1);
}

TEST_CASE("ensemble of one equals the single path") {
    ChemostatParams p = table1(1.0, 1500.0);
    p.noise = DilutionNoise{0.0006};
    SimOptions o;
    o.dt = 1e-3;
    o.t_end = 2.0;
    o.seed = 11;
    o.output_stride = 100;
    const SdeTrajectory single = simulate(p, State{749.0, 750.0, 1.0}, o);
    const Ensemble ens = simulate_ensemble(p, State{749.0, 750.0, 1.0}, o, 1);
    REQUIRE(ens.trajectories.size() == 1);
    CHECK(ens.trajectories[0].final_state().x == single.final_state().x);
    CHECK(ens.trajectories[0].final_state().y == single.final_state().y);
}

TEST_CASE("a zero-noise ensemble has no spread") {
    ChemostatParams p = table1(1.0, 1500.0);
    p.noise = DilutionNoise{0.0};
    SimOptions o;
    o.dt = 1e-3;
    o.t_end = 1.0;
    o.output_stride = 200;
    const Ensemble ens = simulate_ensemble(p, State{700.0, 750.0, 1.0}, o, 8);
    for (const auto& row : ens.summary) {
        for (int c = 0; c < 3; ++c) {
            CHECK(row.q05[c] == doctest::Approx(row.mean[c]).epsilon(1e-14));
            CHECK(row.q95[c] == doctest::Approx(row.mean[c]).epsilon(1e-14));
        }
    }
}

TEST_CASE("mean deficit decays like exp(-theta t) within three standard errors") {
    ChemostatParams p = table1(1.0, 50.0);
    p.noise = DilutionNoise{0.05};
    SimOptions o;
    o.dt = 1e-3;
    o.t_end = 1.0;
    o.seed = 2024;
    const auto n_steps = static_cast<std::uint64_t>(std::llround(o.t_end / o.dt));
    o.output_stride = n_steps;
    const int n_paths = 400;
    const Ensemble ens = simulate_ensemble(p, State{1.0, 1.0, 0.0}, o, n_paths);

    const double w0 = p.z_f - 2.0;
    double sum = 0.0, sum2 = 0.0;
    for (const auto& traj : ens.trajectories) {
        const State& fin = traj.final_state();
        const double w = p.z_f - (fin.x + fin.y + fin.z);
        sum += w;
        sum2 += w * w;
    }
    const double mean = sum / n_paths;
    const double var = (sum2 - n_paths * mean * mean) / (n_paths - 1);
    const double se = std::sqrt(var / n_paths);
    const double exact = w0 * std::exp(-p.theta * o.t_end);
    // Euler-Maruyama bias on the mean is (1-dt)^n vs e^{-t}
    const double bias = std::abs(w0 * (std::pow(1.0 - p.theta * o.dt, static_cast<double>(n_steps)) -
                                       std::exp(-p.theta * o.t_end)));
    CHECK(std::abs(mean - exact) <= 3.0 * se + bias);
}

TEST_CASE("per-path blowups are recorded, not fatal") {
    // violent substrate noise: some paths overflow, others get absorbed at
    // z = 0 by the clamping policy; either way the ensemble survives and the
    // failures carry diagnostics
    ChemostatParams p = table1(1.0, 10.0);
    p.noise = GeneralNoise{0.0, 0.0, 1e200};
    SimOptions o;
    o.dt = 1.0;
    o.t_end = 10.0;
    o.output_stride = 1;
    o.seed = 3;
    const Ensemble ens = simulate_ensemble(p, State{1.0, 1.0, 1.0}, o, 3);
    CHECK(ens.tally.failed >= 1);
    CHECK(ens.tally.total() == 3);
    int diagnostics = 0;
    for (const auto& traj : ens.trajectories) {
        if (!traj.completed) {
            CHECK(traj.failure.find("non-finite") != std::string::npos);
            ++diagnostics;
        }
    }
    CHECK(diagnostics == ens.tally.failed);
}

TEST_CASE("deficit replay stays at machine precision over a full path") {
    ChemostatParams p = table1();
    p.noise = DilutionNoise{0.0006};
    SimOptions o;
    o.dt = 1e-4;
    o.t_end = 5.0;
    o.seed = 99;
    o.output_stride = 100;
    const SdeTrajectory traj = simulate(p, State{7499.0, 7500.0, 1.0}, o);
    CHECK(deficit_diagnostic(traj, p) <= 1e-9 * p.z_f);

    SUBCASE("sigma = 0 path: w decays as (1 - theta dt)^n") {
        ChemostatParams p0 = p;
        p0.noise = DilutionNoise{0.0};
        SimOptions o0 = o;
        o0.t_end = 1.0;
        const auto n = static_cast<std::uint64_t>(std::llround(o0.t_end / o0.dt));
        o0.output_stride = n;
        const SdeTrajectory t0 = simulate(p0, State{7499.0, 7400.0, 3.0}, o0);
        const double w0 = p.z_f - (7499.0 + 7400.0 + 3.0);
        const State& fin = t0.final_state();
        const double w_fin = p.z_f - (fin.x + fin.y + fin.z);
        CHECK(w_fin == doctest::Approx(w0 * std::pow(1.0 - o0.dt, static_cast<double>(n)))
                           .epsilon(1e-9));
    }

    SUBCASE("general-noise paths are rejected") {
        ChemostatParams pg = table1();
        pg.noise = GeneralNoise{0.0006, 0.0007, 9.0};
        SimOptions og = o;
        og.t_end = 0.01;
        const SdeTrajectory tg = simulate(pg, State{7499.0, 7500.0, 1.0}, og);
        CHECK_THROWS_AS(deficit_diagnostic(tg, pg), InvalidArgument);
    }

    SUBCASE("milstein paths are rejected") {
        SimOptions om = o;
        om.t_end = 0.01;
        om.scheme = SdeScheme::milstein;
        const SdeTrajectory tm = simulate(p, State{7499.0, 7500.0, 1.0}, om);
        CHECK_THROWS_AS(deficit_diagnostic(tm, p), InvalidArgument);
    }
}

TEST_CASE("strong order: euler-maruyama halves, milstein is first order") {
    // quick versions; the acceptance suite runs the full ladders
    const OrderStudyResult em_gbm =
        strong_order_gbm(1.5, 1.0, 1.0, 1.0, 1.0 / 32.0, 4, 100, SdeScheme::euler_maruyama, 3);
    CHECK(em_gbm.slope > 0.3);
    CHECK(em_gbm.slope < 0.7);

    const OrderStudyResult mil_gbm =
        strong_order_gbm(1.5, 1.0, 1.0, 1.0, 1.0 / 32.0, 4, 100, SdeScheme::milstein, 3);
    CHECK(mil_gbm.slope > 0.8);
    CHECK(mil_gbm.slope < 1.2);

    // errors decrease monotonically along the ladder
    for (std::size_t i = 1; i < mil_gbm.errors.size(); ++i) {
        CHECK(mil_gbm.errors[i] < mil_gbm.errors[i - 1]);
    }
}

TEST_CASE("zero-noise order study measures the deterministic Euler rate") {
    ChemostatParams p = table1(1.0, 10.0);
    p.noise = DilutionNoise{0.0};
    const OrderStudyResult det = strong_order_chemostat(
        p, State{2.0, 3.0, 4.0}, 1.0, 1.0 / 64.0, 4, 4, SdeScheme::euler_maruyama, 7);
    CHECK(det.slope > 0.85);
    CHECK(det.slope < 1.3);
}

TEST_CASE("order studies reject thin ladders") {
    ChemostatParams p = table1(1.0, 10.0);
    p.noise = DilutionNoise{0.1};
    CHECK_THROWS_AS(strong_order_chemostat(p, State{2, 3, 4}, 1.0, 0.1, 2, 10,
                                           SdeScheme::euler_maruyama, 1),
                    InvalidArgument);
    CHECK_THROWS_AS(strong_order_gbm(1.0, 1.0, 1.0, 1.0, 0.1, 2, 10, SdeScheme::milstein, 1),
                    InvalidArgument);
}
