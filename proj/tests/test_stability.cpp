#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "chemostat/errors.hpp"
#include "chemostat/stability.hpp"
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

/// Appendix-style washout pair exactly as printed, (y-direction, x-direction).
std::pair<double, double> washout_verbatim(const ChemostatParams& p) {
    const double a1 = p.curve_x.a, b1 = p.curve_x.b, g1 = p.curve_x.gamma;
    const double a2 = p.curve_y.a, b2 = p.curve_y.b, g2 = p.curve_y.gamma;
    const double th = p.theta, zf = p.z_f;
    return {(a2 * zf - (b2 + zf) * (g2 + th)) / (b2 + zf),
            (a1 * zf - (b1 + zf) * (g1 + th)) / (b1 + zf)};
}

/// y-survivor pair exactly as printed.
std::pair<double, double> y_survivor_verbatim(const ChemostatParams& p) {
    const double a1 = p.curve_x.a, b1 = p.curve_x.b, g1 = p.curve_x.gamma;
    const double a2 = p.curve_y.a, b2 = p.curve_y.b, g2 = p.curve_y.gamma;
    const double th = p.theta, zf = p.z_f;
    const double l1 = -(a2 - g2 - th) * (a2 * zf - (b2 + zf) * (g2 + th)) / (a2 * b2);
    const double l2 = ((g2 + th) * (a1 * b2 + (b1 - b2) * (g1 + th)) - a2 * b1 * (g1 + th)) /
                      (a2 * b1 - (b1 - b2) * (g2 + th));
    return {l1, l2};
}

/// x-survivor pair exactly as printed.
std::pair<double, double> x_survivor_verbatim(const ChemostatParams& p) {
    const double a1 = p.curve_x.a, b1 = p.curve_x.b, g1 = p.curve_x.gamma;
    const double a2 = p.curve_y.a, b2 = p.curve_y.b, g2 = p.curve_y.gamma;
    const double th = p.theta, zf = p.z_f;
    const double l1 = -(a1 - g1 - th) * (a1 * zf - (b1 + zf) * (g1 + th)) / (a1 * b1);
    const double l2 = ((g2 + th) * (b2 * (-a1 + g1 + th) - b1 * (g1 + th)) +
                       a2 * b1 * (g1 + th)) /
                      (a1 * b2 + (b1 - b2) * (g1 + th));
    return {l1, l2};
}

/// Line-point pair exactly as printed, position measured as the y-coordinate.
double line_verbatim(const ChemostatParams& p, double a_pos) {
    const double a1 = p.curve_x.a, b1 = p.curve_x.b;
    const double a2 = p.curve_y.a, b2 = p.curve_y.b;
    const double zf = p.z_f;
    const double b2p = (b2 + 1.0) * (b2 + 1.0);
    const double b1p = (b1 + 1.0) * (b1 + 1.0);
    return (2.0 * a1 * b1 * b2p * (a_pos - zf + 1.0) - 2.0 * a_pos * a2 * b1p * b2) /
           (2.0 * b1p * b2p);
}

bool close_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace

TEST_CASE("washout eigenvalues match the reference values") {
    const ChemostatParams p = table1();
    const auto [l1, l2] = eigenvalues_washout(p);
    CHECK(l1 == doctest::Approx(0.63593).epsilon(1e-4));
    CHECK(l2 == doctest::Approx(1.91063).epsilon(1e-4));
    CHECK(l1 > 0.0); // unstable: both growth rates exceed theta at the feed level
}

TEST_CASE("washout is stable once theta exceeds both net maximum rates") {
    ChemostatParams p = table1();
    p.theta = 3.0; // > max(a1, a2)
    const auto [l1, l2] = eigenvalues_washout(p);
    CHECK(l1 < 0.0);
    CHECK(l2 < 0.0);
}

TEST_CASE("washout pair reduces to growth-at-feed minus theta when gamma = 0") {
    oracles::ParamSampler sampler(31);
    for (int trial = 0; trial < 50; ++trial) {
        ChemostatParams p;
        p.curve_x = GrowthCurve{sampler.uniform(1.2, 4.0), sampler.uniform(0.2, 3.0), 0.0};
        p.curve_y = GrowthCurve{sampler.uniform(1.2, 4.0), sampler.uniform(0.2, 3.0), 0.0};
        p.theta = sampler.uniform(0.3, 2.0);
        p.z_f = sampler.uniform(10.0, 1e4);
        const auto [l1, l2] = eigenvalues_washout(p);
        CHECK(close_rel(l1, growth_rate(p.curve_y, p.z_f) - p.theta, 1e-12));
        CHECK(close_rel(l2, growth_rate(p.curve_x, p.z_f) - p.theta, 1e-12));
    }
}

TEST_CASE("survivor stability flips across theta = 1") {
    {
        const ChemostatParams p = table1(0.98);
        const auto [y1, y2] = eigenvalues_single_survivor(p, Survivor::population_y);
        CHECK(y1 < 0.0);
        CHECK(y2 < 0.0); // stable: theta < 1
        const auto [x1, x2] = eigenvalues_single_survivor(p, Survivor::population_x);
        CHECK(x1 < 0.0);
        CHECK(x2 > 0.0); // invader grows: theta < 1 destabilises the x state
    }
    {
        const ChemostatParams p = table1(1.02);
        const auto [y1, y2] = eigenvalues_single_survivor(p, Survivor::population_y);
        CHECK(y2 > 0.0);
        const auto [x1, x2] = eigenvalues_single_survivor(p, Survivor::population_x);
        CHECK(x1 < 0.0);
        CHECK(x2 < 0.0);
    }
}

TEST_CASE("absent steady states are rejected") {
    ChemostatParams p = table1();
    p.theta = 2.0; // above a2 = 1.636: no y break-even
    CHECK_THROWS_AS(eigenvalues_single_survivor(p, Survivor::population_y), InvalidArgument);
    CHECK_NOTHROW(eigenvalues_single_survivor(p, Survivor::population_x));
}

TEST_CASE("closed forms equal the verbatim appendix expressions") {
    oracles::ParamSampler sampler(32);
    for (int trial = 0; trial < 200; ++trial) {
        ChemostatParams p;
        const double b1 = sampler.uniform(0.1, 3.0), b2 = sampler.uniform(0.1, 3.0);
        const double g1 = sampler.uniform(0.0, 1.0), g2 = sampler.uniform(0.0, 1.0);
        p.curve_x = GrowthCurve{(b1 + 1.0) * (1.0 + g1), b1, g1};
        p.curve_y = GrowthCurve{(b2 + 1.0) * (1.0 + g2), b2, g2};
        p.theta = sampler.uniform(0.3, 1.6);
        p.z_f = sampler.uniform(10.0, 1e4);

        const auto w = eigenvalues_washout(p);
        const auto wv = washout_verbatim(p);
        CHECK(close_rel(w.first, wv.first, 1e-12));
        CHECK(close_rel(w.second, wv.second, 1e-12));

        if (p.curve_y.a - p.curve_y.gamma > p.theta) {
            const double z_star = break_even_substrate(p.curve_y, p.theta);
            if (z_star < p.z_f) {
                const auto s = eigenvalues_single_survivor(p, Survivor::population_y);
                const auto sv = y_survivor_verbatim(p);
                CHECK(close_rel(s.first, sv.first, 1e-10));
                CHECK(close_rel(s.second, sv.second, 1e-10));
            }
        }
        if (p.curve_x.a - p.curve_x.gamma > p.theta) {
            const double z_star = break_even_substrate(p.curve_x, p.theta);
            if (z_star < p.z_f) {
                const auto s = eigenvalues_single_survivor(p, Survivor::population_x);
                const auto sv = x_survivor_verbatim(p);
                CHECK(close_rel(s.first, sv.first, 1e-10));
                CHECK(close_rel(s.second, sv.second, 1e-10));
            }
        }
    }
}

TEST_CASE("closed-form eigenvalues match the numerical Jacobian to 1e-6") {
    oracles::ParamSampler sampler(33);
    int washout_checked = 0, survivor_checked = 0;
    for (int draw = 0; draw < 300; ++draw) {
        // free curves: the washout/survivor formulas need no break-even tie
        ChemostatParams p;
        p.curve_x = GrowthCurve{sampler.uniform(0.8, 4.0), sampler.uniform(0.1, 3.0),
                                draw % 2 == 0 ? 0.0 : sampler.uniform(0.05, 1.0)};
        p.curve_y = GrowthCurve{sampler.uniform(0.8, 4.0), sampler.uniform(0.1, 3.0),
                                draw % 2 == 0 ? 0.0 : sampler.uniform(0.05, 1.0)};
        p.theta = sampler.uniform(0.3, 1.6);
        p.z_f = sampler.uniform(20.0, 2e4);

        auto near_degenerate = [](std::pair<double, double> lam) {
            const double scale = std::max({1.0, std::abs(lam.first), std::abs(lam.second)});
            return std::abs(lam.first) < 1e-4 * scale || std::abs(lam.second) < 1e-4 * scale ||
                   std::abs(lam.first - lam.second) < 1e-4 * scale;
        };
        auto check_pair = [&](std::pair<double, double> closed,
                              std::pair<double, double> numeric) {
            if (closed.first > closed.second) std::swap(closed.first, closed.second);
            CHECK(close_rel(closed.first, numeric.first, 1e-6));
            CHECK(close_rel(closed.second, numeric.second, 1e-6));
        };

        {
            const auto lam = eigenvalues_washout(p);
            if (!near_degenerate(lam)) {
                const auto jac = oracles::numerical_jacobian(p, 0.0, 0.0);
                check_pair(lam, oracles::eigenvalues_2x2(jac));
                ++washout_checked;
            }
        }
        for (Survivor which : {Survivor::population_y, Survivor::population_x}) {
            const GrowthCurve& curve =
                which == Survivor::population_x ? p.curve_x : p.curve_y;
            if (!(curve.a - curve.gamma > p.theta)) continue;
            const double z_star = break_even_substrate(curve, p.theta);
            if (!(z_star < 0.9 * p.z_f)) continue;
            const auto lam = eigenvalues_single_survivor(p, which);
            if (near_degenerate(lam)) continue;
            const double pop = p.z_f - z_star;
            const auto jac = which == Survivor::population_x
                                 ? oracles::numerical_jacobian(p, pop, 0.0)
                                 : oracles::numerical_jacobian(p, 0.0, pop);
            check_pair(lam, oracles::eigenvalues_2x2(jac));
            ++survivor_checked;
        }
    }
    CHECK(washout_checked > 150);
    CHECK(survivor_checked > 150);
}

TEST_CASE("coexistence line: paper formula, Jacobian, and rank deficiency") {
    oracles::ParamSampler sampler(34);
    for (int draw = 0; draw < 60; ++draw) {
        ChemostatParams p;
        const double b1 = sampler.uniform(0.1, 3.0), b2 = sampler.uniform(0.1, 3.0);
        const double g1 = draw % 2 == 0 ? 0.0 : sampler.uniform(0.05, 1.0);
        const double g2 = draw % 2 == 0 ? 0.0 : sampler.uniform(0.05, 1.0);
        p.curve_x = GrowthCurve{(b1 + 1.0) * (1.0 + g1), b1, g1};
        p.curve_y = GrowthCurve{(b2 + 1.0) * (1.0 + g2), b2, g2};
        p.theta = 1.0;
        p.z_f = sampler.uniform(10.0, 2e4);
        const double a_pos = sampler.uniform(1e-3, 1.0) * (p.z_f - 1.0);

        const double l1 = eigenvalue_coexistence_line(p, a_pos);
        CHECK(l1 < 0.0);
        if (g1 == 0.0 && g2 == 0.0) {
            CHECK(close_rel(l1, line_verbatim(p, a_pos), 1e-12));
        }

        // numerical Jacobian at (z_f - 1 - a_pos, a_pos): one eigenvalue l1,
        // one zero (rank deficiency along the line)
        const auto jac = oracles::numerical_jacobian(p, p.z_f - 1.0 - a_pos, a_pos);
        const auto lam = oracles::eigenvalues_2x2(jac);
        const double jac_norm = oracles::matrix_norm_2x2(jac);
        CHECK(close_rel(std::min(lam.first, lam.second), l1, 1e-5));
        CHECK(oracles::smallest_singular_value_2x2(jac) < 1e-8 * jac_norm);
    }
}

TEST_CASE("line limits at the endpoints") {
    const ChemostatParams p = table1();
    const double f_slope = p.curve_x.rate_derivative(1.0);
    const double g_slope = p.curve_y.rate_derivative(1.0);
    // a_pos -> 0: the x population fills the line, lambda -> -(z_f-1) f'(1)
    CHECK(eigenvalue_coexistence_line(p, 1e-9) ==
          doctest::Approx(-(p.z_f - 1.0) * f_slope).epsilon(1e-6));
    // a_pos -> z_f - 1: lambda -> -(z_f-1) g'(1) = -a_pos a2 b2/(b2+1)^2
    CHECK(eigenvalue_coexistence_line(p, p.z_f - 1.0 - 1e-9) ==
          doctest::Approx(-(p.z_f - 1.0) * g_slope).epsilon(1e-6));
    // reference point from the on-line initial condition
    CHECK(eigenvalue_coexistence_line(p, 7499.0) < 0.0);
}

TEST_CASE("line requires theta = 1") {
    ChemostatParams p = table1(1.0001);
    CHECK_THROWS_AS(eigenvalue_coexistence_line(p, 10.0), InvalidArgument);
}

TEST_CASE("stability report covers all four states") {
    const StabilityReport rep = stability_report(table1());
    REQUIRE(rep.states.size() == 4);
    CHECK(rep.states[0].name == "washout");
    CHECK(rep.states[0].verdict == "unstable");
    CHECK(rep.states[3].line);
    CHECK(rep.states[3].eigenvalues[1] == 0.0);
}
