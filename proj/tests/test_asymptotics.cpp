#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "chemostat/asymptotics.hpp"
#include "chemostat/errors.hpp"
#include "chemostat/ode.hpp"
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

TEST_CASE("matching constants for the reference configuration") {
    const ChemostatParams p = table1();
    const MatchingConstants mc = matching_constants(p, 1.0, 1.0);
    // L = log(z_f / M1)/(a1 - theta)
    CHECK(mc.L == doctest::Approx(std::log(15000.0) / 1.911).epsilon(1e-12));
    CHECK(mc.L == doctest::Approx(5.0318).epsilon(1e-3));
    CHECK(mc.mu1 == doctest::Approx(1.0).epsilon(1e-12));
    // mu2 = M2 z_f^{(a2-theta)/(a1-theta) - 1}, two algebraic routes agree
    CHECK(mc.mu2 ==
          doctest::Approx(std::pow(15000.0, 0.636 / 1.911 - 1.0)).epsilon(1e-12));
    // the M2-based L differs: the residual reports the mismatch
    CHECK(mc.residual ==
          doctest::Approx(mc.L - std::log(15000.0) / 0.636).epsilon(1e-12));
}

TEST_CASE("choosing M2 from the shared L zeroes the residual and mu2 -> 1") {
    const ChemostatParams p = table1();
    const MatchingConstants first = matching_constants(p, 1.0, 1.0);
    const double m2 = p.z_f * std::exp(-(p.curve_y.a - p.theta) * first.L);
    const MatchingConstants mc = matching_constants(p, 1.0, m2);
    CHECK(mc.mu2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(mc.residual) < 1e-9);
}

TEST_CASE("matching constants reject the no-growth regime") {
    CHECK_THROWS_AS(matching_constants(table1(2.0), 1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(matching_constants(table1(), -1.0, 1.0), InvalidArgument);
    CHECK_THROWS_AS(matching_constants(table1(1.0, 100.0), 200.0, 1.0), InvalidArgument);
}

TEST_CASE("stage 2 starts at the initial data and saturates at the feed") {
    const ChemostatParams p = table1();
    const State at0 = stage2_solution(p, 1.5, 0.7, 1.0, 0.0);
    CHECK(at0.x == doctest::Approx(1.5));
    CHECK(at0.y == doctest::Approx(0.7));
    CHECK(at0.z == doctest::Approx(1.0));
    const State late = stage2_solution(p, 1.5, 0.7, 1.0, 60.0);
    CHECK(late.z == doctest::Approx(p.z_f).epsilon(1e-9));
    // population ratio grows like e^{(a1-a2) t}
    const State t1 = stage2_solution(p, 1.0, 1.0, 1.0, 1.0);
    const State t2 = stage2_solution(p, 1.0, 1.0, 1.0, 2.0);
    CHECK(t2.x / t2.y / (t1.x / t1.y) == doctest::Approx(std::exp(1.275)).epsilon(1e-9));
}

TEST_CASE("stage 3 matches the saturated stage 2 in the far past") {
    const ChemostatParams p = table1();
    const Stage3Point far = stage3_solution(p, 0.3, 0.3, -40.0);
    CHECK(std::abs(far.x) < 1e-11);
    CHECK(std::abs(far.y) < 1e-11);
    CHECK(std::abs(far.z - 1.0) < 1e-11);
}

TEST_CASE("stage-3 substrate decreases monotonically and crosses zero once") {
    const ChemostatParams p = table1();
    double prev = stage3_solution(p, 0.3, 0.3, -30.0).z;
    int crossings = 0;
    for (int i = 1; i <= 600; ++i) {
        const double t = -30.0 + i * 0.1;
        const double z = stage3_solution(p, 0.3, 0.3, t).z;
        CHECK(z < prev);
        if (prev > 0.0 && z <= 0.0) ++crossings;
        prev = z;
    }
    CHECK(crossings == 1);
}

TEST_CASE("mu1 + mu2 = 1 places the crossing exactly at t' = 0") {
    const ChemostatParams p = table1();
    const Stage3Point at0 = stage3_solution(p, 0.4, 0.6, 0.0);
    CHECK(at0.z == doctest::Approx(0.0).epsilon(1e-14));
    const Stage3Terminal term = find_t0_prime(p, 0.4, 0.6);
    CHECK(term.t0_prime == doctest::Approx(0.0).epsilon(1e-10));
    CHECK(term.x0_prime == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(term.y0_prime == doctest::Approx(0.6).epsilon(1e-9));
}

TEST_CASE("the stage-3 terminal point satisfies the crash condition") {
    const ChemostatParams p = table1();
    const Stage3Terminal term = find_t0_prime(p, 0.3, 0.3);
    CHECK(term.t0_prime > 0.0);
    const double z_at = stage3_solution(p, 0.3, 0.3, term.t0_prime).z;
    CHECK(std::abs(z_at) < 1e-12);
    CHECK(p.theta - term.x0_prime * p.curve_x.a - term.y0_prime * p.curve_y.a < 0.0);
    CHECK_THROWS_AS(find_t0_prime(p, 0.0, 0.0), InvalidArgument);
}

TEST_CASE("stage 4 relaxes onto the root of the consumed-rate balance") {
    const ChemostatParams p = table1();

    SUBCASE("x0'+y0' = 1 forces the break-even substrate") {
        const Stage4Result r = stage4_evolve(p, 0.6, 0.4, 90.0, 20.0);
        CHECK(r.z_infinity_root == doctest::Approx(1.0).epsilon(1e-10));
        CHECK(std::abs(r.z_infinity_ode - r.z_infinity_root) < 1e-8);
    }
    SUBCASE("x-only balance also lands on z = 1") {
        const Stage4Result r = stage4_evolve(p, 1.0, 0.0, 90.0, 20.0);
        CHECK(r.z_infinity_root == doctest::Approx(1.0).epsilon(1e-10));
    }
    SUBCASE("the reference asymmetric point") {
        const Stage4Result r = stage4_evolve(p, 0.8, 0.4, 90.0, 20.0);
        CHECK(r.z_infinity_root == doctest::Approx(0.7377).epsilon(2e-4));
        CHECK(std::abs(r.z_infinity_ode - r.z_infinity_root) < 1e-8);
        // agrees with the independent scan oracle
        const double scan = oracles::brute_force_substrate_root(p, 0.8, 0.4);
        CHECK(r.z_infinity_root == doctest::Approx(scan).epsilon(1e-7));
    }
    SUBCASE("the crash condition is enforced") {
        CHECK_THROWS_AS(stage4_evolve(p, 0.05, 0.05, 10.0, 20.0), InvalidArgument);
    }
}

TEST_CASE("stage-5 substrate solve: reference values and residuals") {
    const ChemostatParams p = table1();
    CHECK(stage5_zbar(p, 0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(stage5_zbar(p, 1.0, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
    const double z = stage5_zbar(p, 0.8, 0.4);
    CHECK(z == doctest::Approx(0.73770).epsilon(2e-4));
    const auto [kept, discarded] = stage5_zbar_roots(p, 0.8, 0.4);
    CHECK(kept == doctest::Approx(z).epsilon(1e-14));
    CHECK(discarded == doctest::Approx(-0.83083).epsilon(1e-3));
    CHECK(discarded < 0.0);
}

TEST_CASE("stage-5 roots: residual small, companion negative, scan agreement") {
    const ChemostatParams p = table1();
    oracles::ParamSampler sampler(41);
    int accepted = 0;
    for (int trial = 0; trial < 2000; ++trial) {
        const double x = sampler.uniform(0.0, 3.0);
        const double y = sampler.uniform(0.0, 3.0);
        if (x * p.curve_x.a + y * p.curve_y.a <= p.theta + 1e-3) continue;
        const auto [z, other] = stage5_zbar_roots(p, x, y);
        const double residual = x * p.curve_x.rate(z) + y * p.curve_y.rate(z) - p.theta;
        CHECK(std::abs(residual) <= 1e-10);
        CHECK(other <= 0.0);
        ++accepted;
    }
    CHECK(accepted > 1500);

    // spot-check the scan oracle on a few points
    for (auto [x, y] : {std::pair{0.9, 0.1}, {0.3, 0.7}, {2.5, 2.5}, {0.05, 0.7}}) {
        const double z = stage5_zbar(p, x, y);
        const double scan = oracles::brute_force_substrate_root(p, x, y);
        CHECK(z == doctest::Approx(scan).epsilon(1e-7));
    }
}

TEST_CASE("stage-5 solve with death rates matches the scan oracle") {
    ChemostatParams p;
    p.curve_x = GrowthCurve{2.512, 0.041, 1.41306};
    p.curve_y = GrowthCurve{1.411, 0.204, 0.171927};
    p.theta = 1.0;
    p.z_f = 15000.0;
    for (auto [x, y] : {std::pair{0.5, 0.5}, {0.9, 0.3}, {1.5, 0.2}}) {
        const double z = stage5_zbar(p, x, y);
        const double scan = oracles::brute_force_substrate_root(p, x, y);
        CHECK(z == doctest::Approx(scan).epsilon(1e-7));
        const double residual = x * p.curve_x.rate(z) + y * p.curve_y.rate(z) - p.theta;
        CHECK(std::abs(residual) <= 1e-10);
    }
    // the balanced point still sits at the break-even substrate
    CHECK(stage5_zbar(p, 0.5, 0.5) == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("the singularity line bounds the solvable region") {
    const ChemostatParams p = table1();
    CHECK(singularity_line(p, 0.0) == doctest::Approx(1.0 / 1.636).epsilon(1e-12));
    const double x_intercept = p.theta / p.curve_x.a;
    CHECK(singularity_line(p, x_intercept) == doctest::Approx(0.0).epsilon(1e-12));
    // on the line the quadratic's leading coefficient vanishes
    for (double x : {0.05, 0.2, 0.3}) {
        const double y = singularity_line(p, x);
        CHECK(p.theta - x * p.curve_x.a - y * p.curve_y.a ==
              doctest::Approx(0.0).epsilon(1e-12));
        CHECK_THROWS_AS(stage5_zbar(p, x, y), NumericalFailure);
        CHECK_THROWS_AS(stage5_zbar(p, x, std::max(0.0, y - 1e-3)), NumericalFailure);
        CHECK_NOTHROW(stage5_zbar(p, x, y + 1e-3));
    }
}

TEST_CASE("stage-5 flow: balanced points rest, theta above one kills y") {
    const ChemostatParams p = table1();

    SUBCASE("(0.5, 0.5) is stationary") {
        Stage5Options opt;
        opt.output_dt = 1.0;
        const ReducedTrajectory traj = stage5_integrate(p, ReducedState{0.5, 0.5}, 10.0, opt);
        for (const auto& s : traj.states) {
            CHECK(std::abs(s.x - 0.5) < 1e-8);
            CHECK(std::abs(s.y - 0.5) < 1e-8);
        }
        for (double z : traj.zbars) CHECK(z == doctest::Approx(1.0).epsilon(1e-9));
    }

    SUBCASE("(0.8, 0.4) converges onto the line image x + y = 1") {
        Stage5Options opt;
        opt.output_dt = 2.0;
        const ReducedTrajectory traj = stage5_integrate(p, ReducedState{0.8, 0.4}, 40.0, opt);
        const ReducedState& fin = traj.final_state();
        CHECK(fin.x + fin.y == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(fin.x > 0.0);
        CHECK(fin.y > 0.0);
        CHECK(traj.zbars.back() == doctest::Approx(1.0).epsilon(1e-6));
        // d(x+y)/dt carries the sign of 1-(x+y) along the path
        for (std::size_t i = 1; i < traj.states.size(); ++i) {
            const double before = traj.states[i - 1].x + traj.states[i - 1].y;
            const double after = traj.states[i].x + traj.states[i].y;
            if (std::abs(before - 1.0) > 1e-9) {
                CHECK((after - before) * (1.0 - before) >= 0.0);
            }
        }
    }

    SUBCASE("theta = 1.02 drives y out") {
        ChemostatParams p2 = table1(1.02);
        Stage5Options opt;
        const ReducedTrajectory traj =
            stage5_integrate(p2, ReducedState{0.6, 0.6}, 3000.0, opt);
        CHECK(traj.final_state().y < 1e-4);
        CHECK(traj.final_state().x > 0.9);
    }

    SUBCASE("initial states violating the growth restriction are rejected") {
        CHECK_THROWS_AS(stage5_integrate(p, ReducedState{0.05, 0.05}, 1.0, {}),
                        InvalidArgument);
    }
}

TEST_CASE("crash condition and stage-5 restriction are the same inequality") {
    const ChemostatParams p = table1();
    oracles::ParamSampler sampler(42);
    for (int trial = 0; trial < 200; ++trial) {
        const double x = sampler.uniform(0.0, 1.5);
        const double y = sampler.uniform(0.0, 1.5);
        const bool crash = p.theta - x * p.curve_x.a - y * p.curve_y.a < 0.0;
        const bool restriction = x * p.curve_x.a + y * p.curve_y.a > p.theta;
        CHECK(crash == restriction);
    }
}

TEST_CASE("stage plan glues the stages continuously") {
    const ChemostatParams p = table1();
    const StagePlan plan = make_stage_plan(p, 1.0, 1.0);

    // stage-3 value at its terminal time feeds stage 5's initial condition
    const Stage3Point terminal =
        stage3_solution(p, plan.matching.mu1, plan.matching.mu2, plan.terminal.t0_prime);
    CHECK(terminal.x == doctest::Approx(plan.terminal.x0_prime).epsilon(1e-10));
    CHECK(terminal.y == doctest::Approx(plan.terminal.y0_prime).epsilon(1e-10));
    CHECK(std::abs(terminal.z) < 1e-10);

    // stage-4 limit solves the constraint that stage 5 starts from
    const double residual = plan.terminal.x0_prime * p.curve_x.rate(plan.z_infinity) +
                            plan.terminal.y0_prime * p.curve_y.rate(plan.z_infinity) - p.theta;
    CHECK(std::abs(residual) <= 1e-10);
    CHECK(plan.z_infinity ==
          doctest::Approx(stage5_zbar(p, plan.terminal.x0_prime, plan.terminal.y0_prime))
              .epsilon(1e-9));
}

TEST_CASE("composite solution approaches the full system as z_f grows") {
    const ChemostatParams p = table1();
    const std::vector<double> ladder{1e3, 1e4};
    const auto rows = composite_vs_full(p, 1.0, 1.0, 1.0, ladder, 8.0);
    REQUIRE(rows.size() == 2);
    for (const auto& r : rows) {
        CHECK(std::abs(r.slope_x - r.slope_x_target) < 0.01 * std::abs(r.slope_x_target));
        CHECK(std::abs(r.slope_y - r.slope_y_target) < 0.01 * std::abs(r.slope_y_target));
    }
    CHECK(rows[1].endpoint_distance < rows[0].endpoint_distance);
    CHECK(rows[1].substrate_min_rel_err < rows[0].substrate_min_rel_err);
}

TEST_CASE("reduced endpoint tracks the rescaled full system") {
    const ChemostatParams p = table1();
    // start both descriptions at the same scaled state and compare at t = 10
    const double zf = p.z_f;
    const ReducedState r0{0.8, 0.4};
    Stage5Options opt;
    const ReducedTrajectory reduced = stage5_integrate(p, r0, 10.0, opt);

    OdeControls c;
    const State s0{0.8 * zf, 0.4 * zf, stage5_zbar(p, 0.8, 0.4)};
    const OdeTrajectory full = integrate_ode(p, s0, 10.0, c);
    const State& fin = full.final_state();
    const ReducedState& rfin = reduced.final_state();
    CHECK(std::abs(fin.x / zf - rfin.x) < 10.0 / zf);
    CHECK(std::abs(fin.y / zf - rfin.y) < 10.0 / zf);
}
