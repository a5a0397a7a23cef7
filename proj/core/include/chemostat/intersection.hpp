#ifndef CHEMOSTAT_INTERSECTION_HPP
#define CHEMOSTAT_INTERSECTION_HPP

#include <string>
#include <vector>

namespace chemostat {

/// One dimensional Monod-with-death growth curve mu(s) = mu_max s/(K+s) - d.
struct DimensionalCurve {
    double mu_max;
    double half_sat;
    double death = 0.0;

    double rate(double s) const noexcept { return mu_max * s / (half_sat + s) - death; }
};

/// Geometry of the crossing points of two growth curves in the (s, mu) plane.
enum class IntersectionCase {
    both_upper_right,       ///< (a): both roots at s > 0 with positive growth
    lower_right_then_upper, ///< (b): both roots at s > 0, growth negative then positive
    lower_left_then_upper,  ///< (c): one root at s < 0 (negative growth), one upper-right
    degenerate,             ///< linear equation, no real crossing, or any other geometry
};

std::string to_string(IntersectionCase c);

struct IntersectionReport {
    std::vector<double> roots;           ///< ascending substrate values with mu1 = mu2
    std::vector<double> growth_at_roots; ///< common growth value at each root
    IntersectionCase case_label = IntersectionCase::degenerate;
    double quadratic_a = 0.0; ///< leading coefficient of the crossing quadratic
};

/**
 * Solve mu1(s) = mu2(s), a quadratic A s^2 + B s + C = 0 with
 *   A = mu1 - d1 + d2 - mu2,
 *   B = K2 (mu1 - d1 + d2) - K1 (mu2 - d2 + d1),
 *   C = K1 K2 (d2 - d1),
 * (mu_i the maximum rates) and classify the crossing geometry from root
 * signs and growth signs. With d1 = d2 = 0 one root is exactly zero.
 * |A| below 1e-12 * max(|mu1 - d1 + d2|, |mu2|) is treated as linear and
 * reported degenerate, as is a negative discriminant.
 */
IntersectionReport intersection_points(const DimensionalCurve& c1, const DimensionalCurve& c2);

/// One numbered parameter inequality from the crossing-case analysis.
struct CaseCondition {
    int id;
    bool satisfied;
    std::string description;
};

/**
 * Evaluate the eight case inequalities:
 *   48: mu1 - d1 > mu2 - d2      49: mu1 > d1        50: mu2 > d2
 *   51: d2 > d1                  52: K1 d1/(mu1-d1) > K2 d2/(mu2-d2)
 *   53: K1 > K2                  54: d1 > d2         55: mu1 > mu2
 * (52) requires mu_i > d_i; it is reported unsatisfied otherwise.
 */
std::vector<CaseCondition> check_case_conditions(const DimensionalCurve& c1,
                                                 const DimensionalCurve& c2);

} // namespace chemostat

#endif
