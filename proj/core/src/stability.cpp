#include "chemostat/stability.hpp"

#include <cmath>
#include <sstream>

#include "chemostat/errors.hpp"

namespace chemostat {

std::pair<double, double> eigenvalues_washout(const ChemostatParams& params) {
    const GrowthCurve& fx = params.curve_x;
    const GrowthCurve& gy = params.curve_y;
    const double th = params.theta, zf = params.z_f;
    const double lam_y = (gy.a * zf - (gy.b + zf) * (gy.gamma + th)) / (gy.b + zf);
    const double lam_x = (fx.a * zf - (fx.b + zf) * (fx.gamma + th)) / (fx.b + zf);
    return {lam_y, lam_x};
}

double break_even_substrate(const GrowthCurve& curve, double theta) {
    const double over = theta + curve.gamma; // a z/(b+z) must reach this
    if (!(curve.a > over)) {
        throw InvalidArgument("break_even_substrate: theta + gamma >= a, steady state absent");
    }
    return curve.b * over / (curve.a - over);
}

std::pair<double, double> eigenvalues_single_survivor(const ChemostatParams& params,
                                                      Survivor which) {
    const bool x_survives = which == Survivor::population_x;
    const GrowthCurve& surv = x_survives ? params.curve_x : params.curve_y;
    const GrowthCurve& other = x_survives ? params.curve_y : params.curve_x;
    const double th = params.theta;

    const double z_star = break_even_substrate(surv, th);
    if (!(z_star < params.z_f)) {
        throw InvalidArgument("eigenvalues_single_survivor: break-even substrate exceeds feed");
    }
    const double pop = params.z_f - z_star; // survivor population on the invariant plane

    // survivor direction: -population * (growth slope at the steady state)
    const double lam1 = -pop * surv.rate_derivative(z_star);
    // transverse direction: invader's net growth at z*
    const double lam2 = other.rate(z_star) - th;
    return {lam1, lam2};
}

double eigenvalue_coexistence_line(const ChemostatParams& params, double a_pos) {
    if (std::abs(params.theta - 1.0) > 1e-9) {
        throw InvalidArgument("eigenvalue_coexistence_line: line exists only at theta = 1");
    }
    if (!(a_pos > 0.0) || !(a_pos < params.z_f - 1.0)) {
        throw InvalidArgument("eigenvalue_coexistence_line: position must lie in (0, z_f - 1)");
    }
    const double x = params.z_f - 1.0 - a_pos;
    const double y = a_pos;
    return -x * params.curve_x.rate_derivative(1.0) - y * params.curve_y.rate_derivative(1.0);
}

namespace {

std::string stability_verdict(double lam1, double lam2) {
    if (lam1 < 0.0 && lam2 < 0.0) return "stable";
    if (lam1 > 0.0 || lam2 > 0.0) return "unstable";
    return "marginal";
}

} // namespace

StabilityReport stability_report(const ChemostatParams& params) {
    validate_params(params);
    StabilityReport report;

    {
        SteadyStateReport s;
        s.name = "washout";
        auto [l1, l2] = eigenvalues_washout(params);
        s.eigenvalues = {l1, l2};
        s.verdict = stability_verdict(l1, l2);
        s.conditions.push_back("stable iff f(z_f) < theta and g(z_f) < theta");
        report.states.push_back(std::move(s));
    }

    auto survivor_entry = [&](Survivor which, const char* name) {
        SteadyStateReport s;
        s.name = name;
        try {
            auto [l1, l2] = eigenvalues_single_survivor(params, which);
            s.eigenvalues = {l1, l2};
            s.verdict = stability_verdict(l1, l2);
        } catch (const InvalidArgument& e) {
            s.exists = false;
            s.verdict = "absent";
            s.conditions.push_back(e.what());
        }
        report.states.push_back(std::move(s));
    };
    survivor_entry(Survivor::population_y, "x extinct, y survives");
    survivor_entry(Survivor::population_x, "y extinct, x survives");

    {
        SteadyStateReport s;
        s.name = "coexistence line";
        s.line = true;
        if (std::abs(params.theta - 1.0) <= 1e-9 && params.z_f > 1.0) {
            const double mid = 0.5 * (params.z_f - 1.0);
            const double l1 = eigenvalue_coexistence_line(params, mid);
            s.eigenvalues = {l1, 0.0};
            s.verdict = l1 < 0.0 ? "neutrally stable along line" : "unstable";
            s.conditions.push_back("exists iff z_f > 1 and theta = 1; lambda2 = 0 along the line");
        } else {
            s.exists = false;
            s.verdict = "absent";
            s.conditions.push_back("requires theta = 1 (within 1e-9)");
        }
        report.states.push_back(std::move(s));
    }
    return report;
}

} // namespace chemostat
