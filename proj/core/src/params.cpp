#include "chemostat/params.hpp"

#include <cmath>
#include <sstream>

#include "chemostat/errors.hpp"

namespace chemostat {

int wiener_dimension(const NoiseSpec& noise) noexcept {
    if (std::holds_alternative<GeneralNoise>(noise)) return 3;
    if (std::holds_alternative<DilutionNoise>(noise)) return 1;
    return 0;
}

namespace {

void validate_curve(const GrowthCurve& c, const char* name) {
    if (!(std::isfinite(c.a) && std::isfinite(c.b) && std::isfinite(c.gamma))) {
        throw InvalidArgument(std::string(name) + ": parameters must be finite");
    }
    if (c.a <= 0.0 || c.b <= 0.0 || c.gamma < 0.0) {
        throw InvalidArgument(std::string(name) + ": requires a > 0, b > 0, gamma >= 0");
    }
}

void validate_noise(const NoiseSpec& noise) {
    if (const auto* g = std::get_if<GeneralNoise>(&noise)) {
        if (g->sigma1 < 0.0 || g->sigma2 < 0.0 || g->sigma3 < 0.0) {
            throw InvalidArgument("general noise intensities must be >= 0");
        }
    } else if (const auto* d = std::get_if<DilutionNoise>(&noise)) {
        if (d->sigma < 0.0) throw InvalidArgument("dilution noise intensity must be >= 0");
    }
}

} // namespace

void validate_params(const ChemostatParams& params) {
    validate_curve(params.curve_x, "curve_x");
    validate_curve(params.curve_y, "curve_y");
    if (!(params.theta > 0.0) || !std::isfinite(params.theta)) {
        throw InvalidArgument("theta > 0 required");
    }
    if (!(params.z_f > 1.0) || !std::isfinite(params.z_f)) {
        throw InvalidArgument("z_f > 1 required");
    }
    validate_noise(params.noise);
}

std::vector<std::string> parameter_warnings(const ChemostatParams& params) {
    std::vector<std::string> warnings;
    auto check = [&](const GrowthCurve& c, const char* name) {
        if (!c.on_break_even_manifold()) {
            std::ostringstream os;
            os << name << ": gamma deviates from a/(b+1)-1 by " << c.break_even_residual()
               << "; curve does not break even at z=1";
            warnings.push_back(os.str());
        }
    };
    check(params.curve_x, "curve_x");
    check(params.curve_y, "curve_y");
    return warnings;
}

void validate_dimensional(const DimensionalParams& dim) {
    for (int i = 0; i < 2; ++i) {
        if (!(dim.mu_max[i] > 0.0)) throw InvalidArgument("mu_max must be > 0");
        if (!(dim.half_sat[i] > 0.0)) throw InvalidArgument("half_sat must be > 0");
        if (!(dim.death[i] >= 0.0)) throw InvalidArgument("death rates must be >= 0");
        if (!(dim.yield[i] > 0.0)) throw InvalidArgument("yields must be > 0");
    }
    if (!(dim.feed_concentration > 0.0)) throw InvalidArgument("feed concentration must be > 0");
    if (!(dim.dilution_rate > 0.0)) throw InvalidArgument("dilution rate must be > 0");
}

double dimensional_growth(const DimensionalParams& dim, int population, double s) {
    if (population < 0 || population > 1) throw InvalidArgument("population index must be 0 or 1");
    return dim.mu_max[population] * s / (dim.half_sat[population] + s) - dim.death[population];
}

ChemostatParams nondimensionalise(const DimensionalParams& dim, double s_c) {
    validate_dimensional(dim);
    if (!(s_c > 0.0)) throw InvalidArgument("nondimensionalise: s_c must be > 0");

    const double mu1 = dimensional_growth(dim, 0, s_c);
    const double mu2 = dimensional_growth(dim, 1, s_c);
    const double scale = std::max(std::abs(mu1), std::abs(mu2));
    if (std::abs(mu1 - mu2) > 1e-6 * std::max(scale, 1e-300)) {
        std::ostringstream os;
        os << "nondimensionalise: s_c=" << s_c << " is not a crossing point (mu1=" << mu1
           << ", mu2=" << mu2 << ")";
        throw InvalidArgument(os.str());
    }
    const double mu_c = mu1;
    if (!(mu_c > 0.0)) throw InvalidArgument("nondimensionalise: crossing growth rate must be > 0");

    ChemostatParams out;
    out.curve_x = GrowthCurve{dim.mu_max[0] / mu_c, dim.half_sat[0] / s_c, dim.death[0] / mu_c};
    out.curve_y = GrowthCurve{dim.mu_max[1] / mu_c, dim.half_sat[1] / s_c, dim.death[1] / mu_c};
    out.z_f = dim.feed_concentration / s_c;
    out.theta = dim.dilution_rate / mu_c;
    out.noise = NoNoise{};
    return out;
}

} // namespace chemostat
