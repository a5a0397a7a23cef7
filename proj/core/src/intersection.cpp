#include "chemostat/intersection.hpp"

#include <algorithm>
#include <cmath>

#include "chemostat/errors.hpp"

namespace chemostat {

std::string to_string(IntersectionCase c) {
    switch (c) {
        case IntersectionCase::both_upper_right: return "a";
        case IntersectionCase::lower_right_then_upper: return "b";
        case IntersectionCase::lower_left_then_upper: return "c";
        case IntersectionCase::degenerate: return "degenerate";
    }
    return "degenerate";
}

IntersectionReport intersection_points(const DimensionalCurve& c1, const DimensionalCurve& c2) {
    if (c1.mu_max == c2.mu_max && c1.half_sat == c2.half_sat && c1.death == c2.death) {
        throw InvalidArgument("intersection_points: curves must not be identical");
    }

    const double mu1 = c1.mu_max, mu2 = c2.mu_max;
    const double k1 = c1.half_sat, k2 = c2.half_sat;
    const double d1 = c1.death, d2 = c2.death;

    const double qa = mu1 - d1 + d2 - mu2;
    const double qb = k2 * (mu1 - d1 + d2) - k1 * (mu2 - d2 + d1);
    const double qc = k1 * k2 * (d2 - d1);

    IntersectionReport report;
    report.quadratic_a = qa;

    const double scale = std::max(std::abs(mu1 - d1 + d2), std::abs(mu2));
    if (std::abs(qa) < 1e-12 * scale) {
        // effectively linear: one crossing at most, classification not attempted
        report.case_label = IntersectionCase::degenerate;
        if (std::abs(qb) > 0.0) {
            const double s = -qc / qb;
            report.roots.push_back(s);
            report.growth_at_roots.push_back(c1.rate(s));
        }
        return report;
    }

    const double disc = qb * qb - 4.0 * qa * qc;
    if (disc < 0.0) {
        report.case_label = IntersectionCase::degenerate;
        return report;
    }

    // larger-magnitude root first, companion from C/(A q): avoids the
    // cancellation that Table-1-scale coefficients produce
    const double sq = std::sqrt(disc);
    const double q = -0.5 * (qb + std::copysign(sq, qb));
    double r1 = q / qa;
    double r2 = (q != 0.0) ? qc / q : -qb / qa - r1;
    if (r1 > r2) std::swap(r1, r2);

    report.roots = {r1, r2};
    report.growth_at_roots = {c1.rate(r1), c1.rate(r2)};

    const double g1 = report.growth_at_roots[0];
    const double g2 = report.growth_at_roots[1];
    if (r1 > 0.0 && g1 > 0.0 && r2 > 0.0 && g2 > 0.0) {
        report.case_label = IntersectionCase::both_upper_right;
    } else if (r1 > 0.0 && g1 < 0.0 && r2 > 0.0 && g2 > 0.0) {
        report.case_label = IntersectionCase::lower_right_then_upper;
    } else if (r1 < 0.0 && g1 < 0.0 && r2 > 0.0 && g2 > 0.0) {
        report.case_label = IntersectionCase::lower_left_then_upper;
    } else {
        report.case_label = IntersectionCase::degenerate;
    }
    return report;
}

std::vector<CaseCondition> check_case_conditions(const DimensionalCurve& c1,
                                                 const DimensionalCurve& c2) {
    const double mu1 = c1.mu_max, mu2 = c2.mu_max;
    const double k1 = c1.half_sat, k2 = c2.half_sat;
    const double d1 = c1.death, d2 = c2.death;

    // axis crossings K d/(mu-d) are defined only for mu > d
    const bool positive_ends = mu1 > d1 && mu2 > d2;
    const bool c52 = positive_ends && k1 * d1 / (mu1 - d1) > k2 * d2 / (mu2 - d2);

    return {
        {48, mu1 - d1 > mu2 - d2, "mu1 - d1 > mu2 - d2 (curve 1 dominates as s -> inf)"},
        {49, mu1 > d1, "mu1 > d1 (curve 1 end-value positive)"},
        {50, mu2 > d2, "mu2 > d2 (curve 2 end-value positive)"},
        {51, d2 > d1, "d2 > d1 (C > 0)"},
        {52, c52, "K1 d1/(mu1-d1) > K2 d2/(mu2-d2) (curve 2 crosses the s-axis first)"},
        {53, k1 > k2, "K1 > K2"},
        {54, d1 > d2, "d1 > d2"},
        {55, mu1 > mu2, "mu1 > mu2"},
    };
}

} // namespace chemostat
