#include "chemostat/fokker_planck.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <sstream>
#include <thread>

#include <Eigen/SparseLU>

#include "chemostat/asymptotics.hpp"
#include "chemostat/errors.hpp"
#include "chemostat/rng.hpp"

namespace chemostat {

PolygonDomain build_domain(const ChemostatParams& params, double x_max, double y_max,
                           double cut_offset, double hx, double hy) {
    validate_params(params);
    if (!(hx > 0.0) || !(hy > 0.0)) throw InvalidArgument("build_domain: hx, hy must be > 0");
    if (!(cut_offset > 0.0)) {
        throw InvalidArgument("build_domain: cut_offset must be > 0 (cells would touch the "
                              "singularity line)");
    }
    if (!(x_max > 0.0) || !(y_max > 0.0)) {
        throw InvalidArgument("build_domain: box extents must be > 0");
    }

    PolygonDomain d;
    d.x_max = x_max;
    d.y_max = y_max;
    d.hx = hx;
    d.hy = hy;
    d.cut_offset = cut_offset;
    d.theta = params.theta;

    const double a1 = params.curve_x.a - params.curve_x.gamma;
    const double a2 = params.curve_y.a - params.curve_y.gamma;
    if (!(a2 > 0.0)) throw InvalidArgument("build_domain: requires a2 - gamma2 > 0");
    d.line_intercept = params.theta / a2;
    d.line_slope = -a1 / a2;

    d.nx = static_cast<int>(std::lround(x_max / hx));
    d.ny = static_cast<int>(std::lround(y_max / hy));
    if (d.nx < 2 || d.ny < 2) throw InvalidArgument("build_domain: grid too coarse");

    d.index_of.assign(static_cast<std::size_t>(d.nx) * d.ny, -1);
    for (int j = 0; j < d.ny; ++j) {
        for (int i = 0; i < d.nx; ++i) {
            const double xc = d.x_center(i);
            const double yc = d.y_center(j);
            if (yc > d.cut_line(xc)) {
                d.index_of[static_cast<std::size_t>(i) + static_cast<std::size_t>(d.nx) * j] =
                    static_cast<std::int32_t>(d.cells.size());
                d.cells.push_back(static_cast<std::int32_t>(i + d.nx * j));
            }
        }
    }
    if (d.cells.empty()) throw InvalidArgument("build_domain: active cell set is empty");

    // connectivity sweep over the active mask
    std::vector<char> seen(d.cells.size(), 0);
    std::deque<std::int32_t> queue{0};
    seen[0] = 1;
    std::size_t reached = 1;
    while (!queue.empty()) {
        const std::int32_t idx = queue.front();
        queue.pop_front();
        const int flat = d.cells[static_cast<std::size_t>(idx)];
        const int i = flat % d.nx;
        const int j = flat / d.nx;
        const int di[4] = {1, -1, 0, 0};
        const int dj[4] = {0, 0, 1, -1};
        for (int k = 0; k < 4; ++k) {
            const std::int32_t nb = d.index(i + di[k], j + dj[k]);
            if (nb >= 0 && !seen[static_cast<std::size_t>(nb)]) {
                seen[static_cast<std::size_t>(nb)] = 1;
                ++reached;
                queue.push_back(nb);
            }
        }
    }
    if (reached != d.cells.size()) {
        throw InvalidArgument("build_domain: active cell set is disconnected");
    }
    return d;
}

namespace {

struct NoiseCoeffs {
    double dxx = 0.0;   ///< sigma_x^2 / 2
    double dyy = 0.0;   ///< sigma_y^2 / 2
    double cross = 0.0; ///< sigma^2 for the shared-noise mixed term, else 0
};

NoiseCoeffs noise_coefficients(const ChemostatParams& params) {
    NoiseCoeffs nc;
    if (const auto* g = std::get_if<GeneralNoise>(&params.noise)) {
        nc.dxx = 0.5 * g->sigma1 * g->sigma1;
        nc.dyy = 0.5 * g->sigma2 * g->sigma2;
    } else if (const auto* d = std::get_if<DilutionNoise>(&params.noise)) {
        nc.dxx = 0.5 * d->sigma * d->sigma;
        nc.dyy = nc.dxx;
        nc.cross = d->sigma * d->sigma;
    }
    return nc;
}

enum class FaceKind { interior, outer, axis, cut };

/// Bernoulli function z/(e^z - 1), the exponential-fitting face weight.
double bernoulli(double z) noexcept {
    if (std::abs(z) < 1e-10) return 1.0 - 0.5 * z;
    if (z > 500.0) return 0.0;
    if (z < -500.0) return -z;
    return z / std::expm1(z);
}

struct Assembler {
    const ChemostatParams& params;
    const PolygonDomain& domain;
    FpAssemblyOptions options;
    NoiseCoeffs nc;
    bool close_outer = false, close_axis = false, close_cut = false;
    bool build_cross = false;

    std::vector<Eigen::Triplet<double>> base;
    std::vector<Eigen::Triplet<double>> cross;

    double drift_velocity_x(double x, double y) const {
        if (options.constant_coefficient_calibration) return 0.0;
        const double z = stage5_zbar(params, x, y);
        return x * (params.curve_x.rate(z) - params.theta);
    }
    double drift_velocity_y(double x, double y) const {
        if (options.constant_coefficient_calibration) return 0.0;
        const double z = stage5_zbar(params, x, y);
        return y * (params.curve_y.rate(z) - params.theta);
    }
    double xy_weight(double x, double y) const {
        return options.constant_coefficient_calibration ? 0.0 : x * y;
    }

    bool closed(FaceKind kind) const {
        switch (kind) {
            case FaceKind::interior: return false;
            case FaceKind::outer: return close_outer;
            case FaceKind::axis: return close_axis;
            case FaceKind::cut: return close_cut;
        }
        return false;
    }

    /// Average of sigma^2 x y p over the (up to two) active cells of a row
    /// segment; used by the mixed-flux stencil.
    int gather_pair(int ia, int ib, int j, std::array<std::pair<std::int32_t, double>, 2>& out) const {
        int count = 0;
        for (int i : {ia, ib}) {
            const std::int32_t idx = domain.index(i, j);
            if (idx >= 0) {
                out[static_cast<std::size_t>(count)] = {
                    idx, xy_weight(domain.x_center(i), domain.y_center(j))};
                ++count;
            }
        }
        if (count == 2) {
            out[0].second *= 0.5;
            out[1].second *= 0.5;
        }
        return count;
    }

    void add_flux_pair(std::vector<Eigen::Triplet<double>>& dst, std::int32_t row_from,
                       std::int32_t row_to, std::int32_t col, double flux_coeff, double inv_h) {
        // F flows from `row_from` toward `row_to`; either may be absent (boundary)
        if (row_from >= 0) dst.emplace_back(row_from, col, -flux_coeff * inv_h);
        if (row_to >= 0) dst.emplace_back(row_to, col, flux_coeff * inv_h);
    }

    /// One-dimensional drift-diffusion flux through a face at coordinate c_f:
    /// J = u p - d/ds [D(s) p] with D(s) = dcoef s^2 (or constant dcoef in the
    /// calibration variant). Missing cells act as zero-density ghosts; the
    /// closed boundary rules simply skip the face.
    void axis_flux(std::vector<Eigen::Triplet<double>>& dst, std::int32_t lo, std::int32_t hi,
                   double u, double c_f, double h, double inv_h, double dcoef) {
        const bool calibrated = options.constant_coefficient_calibration;
        const double d_face = calibrated ? dcoef : dcoef * c_f * c_f;
        const double d_slope = calibrated ? 0.0 : 2.0 * dcoef * c_f;
        // J = u_eff p - D p' with the conservative form folded into u_eff
        const double u_eff = u - d_slope;

        if (options.advection == FpAdvection::first_order_upwind || d_face <= 0.0) {
            // donor-cell on the full velocity plus a centered difference of D p
            const std::int32_t donor = u > 0.0 ? lo : hi;
            if (donor >= 0) add_flux_pair(dst, lo, hi, donor, u, inv_h);
            if (d_face <= 0.0) return;
            const double cm = c_f - 0.5 * h, cp = c_f + 0.5 * h; // cell centers
            const double dm = calibrated ? dcoef : dcoef * cm * cm;
            const double dp = calibrated ? dcoef : dcoef * cp * cp;
            if (hi >= 0) add_flux_pair(dst, lo, hi, hi, -dp * inv_h, inv_h);
            if (lo >= 0) add_flux_pair(dst, lo, hi, lo, dm * inv_h, inv_h);
            return;
        }

        const double peclet = u_eff * h / d_face;
        const double scale = d_face * inv_h;
        if (lo >= 0) add_flux_pair(dst, lo, hi, lo, scale * bernoulli(-peclet), inv_h);
        if (hi >= 0) add_flux_pair(dst, lo, hi, hi, -scale * bernoulli(peclet), inv_h);
    }

    /// Face with normal +x between cells (i, j) and (i+1, j); i may be -1
    /// (west box edge) or nx-1 (east box edge).
    void x_face(int i, int j) {
        const std::int32_t left = domain.index(i, j);
        const std::int32_t right = domain.index(i + 1, j);
        if (left < 0 && right < 0) return;

        FaceKind kind = FaceKind::interior;
        if (left >= 0 && right >= 0) {
            kind = FaceKind::interior;
        } else if (i < 0 || i + 1 >= domain.nx) {
            kind = (i < 0) ? FaceKind::axis : FaceKind::outer;
        } else {
            kind = FaceKind::cut;
        }
        if (closed(kind)) return;

        const double x_f = (i + 1) * domain.hx;
        const double yc = domain.y_center(j);
        const double inv_h = 1.0 / domain.hx;

        // drift coefficient at the face; the x = 0 face velocity is exactly
        // zero through its x factor, and cut faces evaluate one-sided at the
        // active center (the face midpoint can sit below the singularity line)
        double u;
        if (kind == FaceKind::axis) {
            u = 0.0;
        } else if (kind == FaceKind::cut) {
            u = drift_velocity_x(domain.x_center(left >= 0 ? i : i + 1), yc);
        } else {
            u = drift_velocity_x(x_f, yc);
        }
        axis_flux(base, left, right, u, x_f, domain.hx, inv_h, nc.dxx);

        // mixed term (shared noise only): F = -(sigma^2/2) d/dy [x y p] at the face
        if (build_cross && nc.cross != 0.0 && kind == FaceKind::interior) {
            std::array<std::pair<std::int32_t, double>, 2> north{}, south{}, mid{};
            const int n_north = gather_pair(i, i + 1, j + 1, north);
            const int n_south = gather_pair(i, i + 1, j - 1, south);
            const double c = -0.5 * nc.cross;
            auto emit = [&](const std::array<std::pair<std::int32_t, double>, 2>& row, int n,
                            double w) {
                for (int k = 0; k < n; ++k) {
                    add_flux_pair(cross, left, right, row[static_cast<std::size_t>(k)].first,
                                  c * w * row[static_cast<std::size_t>(k)].second, inv_h);
                }
            };
            if (n_north > 0 && n_south > 0) {
                const double w = 1.0 / (2.0 * domain.hy);
                emit(north, n_north, w);
                emit(south, n_south, -w);
            } else if (n_north > 0 || n_south > 0) {
                const int n_mid = gather_pair(i, i + 1, j, mid);
                const double w = 1.0 / domain.hy;
                if (n_north > 0) {
                    emit(north, n_north, w);
                    emit(mid, n_mid, -w);
                } else {
                    emit(mid, n_mid, w);
                    emit(south, n_south, -w);
                }
            }
        }
    }

    /// Face with normal +y between cells (i, j) and (i, j+1).
    void y_face(int i, int j) {
        const std::int32_t south = domain.index(i, j);
        const std::int32_t north = domain.index(i, j + 1);
        if (south < 0 && north < 0) return;

        FaceKind kind = FaceKind::interior;
        if (south >= 0 && north >= 0) {
            kind = FaceKind::interior;
        } else if (j < 0 || j + 1 >= domain.ny) {
            kind = (j < 0) ? FaceKind::axis : FaceKind::outer;
        } else {
            kind = FaceKind::cut;
        }
        if (closed(kind)) return;

        const double y_f = (j + 1) * domain.hy;
        const double xc = domain.x_center(i);
        const double inv_h = 1.0 / domain.hy;

        double v;
        if (kind == FaceKind::axis) {
            v = 0.0;
        } else if (kind == FaceKind::cut) {
            v = drift_velocity_y(xc, domain.y_center(south >= 0 ? j : j + 1));
        } else {
            v = drift_velocity_y(xc, y_f);
        }
        axis_flux(base, south, north, v, y_f, domain.hy, inv_h, nc.dyy);

        if (build_cross && nc.cross != 0.0 && kind == FaceKind::interior) {
            std::array<std::pair<std::int32_t, double>, 2> east{}, west{}, mid{};
            const int n_east = gather_pair_col(i + 1, j, east);
            const int n_west = gather_pair_col(i - 1, j, west);
            const double c = -0.5 * nc.cross;
            auto emit = [&](const std::array<std::pair<std::int32_t, double>, 2>& col, int n,
                            double w) {
                for (int k = 0; k < n; ++k) {
                    add_flux_pair(cross, south, north, col[static_cast<std::size_t>(k)].first,
                                  c * w * col[static_cast<std::size_t>(k)].second, inv_h);
                }
            };
            if (n_east > 0 && n_west > 0) {
                const double w = 1.0 / (2.0 * domain.hx);
                emit(east, n_east, w);
                emit(west, n_west, -w);
            } else if (n_east > 0 || n_west > 0) {
                const int n_mid = gather_pair_col(i, j, mid);
                const double w = 1.0 / domain.hx;
                if (n_east > 0) {
                    emit(east, n_east, w);
                    emit(mid, n_mid, -w);
                } else {
                    emit(mid, n_mid, w);
                    emit(west, n_west, -w);
                }
            }
        }
    }

    /// Column analogue of gather_pair: cells (i, j) and (i, j+1).
    int gather_pair_col(int i, int j, std::array<std::pair<std::int32_t, double>, 2>& out) const {
        int count = 0;
        for (int jj : {j, j + 1}) {
            const std::int32_t idx = domain.index(i, jj);
            if (idx >= 0) {
                out[static_cast<std::size_t>(count)] = {
                    idx, xy_weight(domain.x_center(i), domain.y_center(jj))};
                ++count;
            }
        }
        if (count == 2) {
            out[0].second *= 0.5;
            out[1].second *= 0.5;
        }
        return count;
    }

    void run() {
        for (int j = 0; j < domain.ny; ++j) {
            for (int i = -1; i < domain.nx; ++i) x_face(i, j);
        }
        for (int i = 0; i < domain.nx; ++i) {
            for (int j = -1; j < domain.ny; ++j) y_face(i, j);
        }
    }
};

FpOperator assemble_impl(const ChemostatParams& params, const PolygonDomain& domain,
                         const FpAssemblyOptions& options, bool close_outer, bool close_axis,
                         bool close_cut, bool applied) {
    validate_params(params);
    const int n = domain.n_active();
    if (n == 0) throw InvalidArgument("assemble_operator: empty domain");

    Assembler a{params, domain, options, noise_coefficients(params), close_outer, close_axis,
                close_cut, std::holds_alternative<DilutionNoise>(params.noise), {}, {}};
    a.run();

    FpOperator op;
    op.params = params;
    op.assembly = options;
    op.boundaries_applied = applied;
    op.base.resize(n, n);
    op.base.setFromTriplets(a.base.begin(), a.base.end());
    op.cross.resize(n, n);
    op.cross.setFromTriplets(a.cross.begin(), a.cross.end());
    op.base.makeCompressed();
    op.cross.makeCompressed();
    return op;
}

} // namespace

Eigen::SparseMatrix<double> FpOperator::matrix() const {
    if (cross.nonZeros() == 0) return base;
    Eigen::SparseMatrix<double> sum = base + cross;
    sum.makeCompressed();
    return sum;
}

FpOperator assemble_operator(const ChemostatParams& params, const PolygonDomain& domain,
                             const FpAssemblyOptions& options) {
    return assemble_impl(params, domain, options, false, false, false, false);
}

FpOperator apply_boundaries(const FpOperator& op, const PolygonDomain& domain,
                            const FpBoundaryOptions& options) {
    return assemble_impl(op.params, domain, op.assembly, options.outer_reflecting,
                         options.axis_reflecting, options.cut_reflecting, true);
}

DensityField gaussian_initial(const PolygonDomain& domain, double mean_x, double mean_y,
                              double sd_x, double sd_y, double mass_tol) {
    if (!(sd_x > 0.0) || !(sd_y > 0.0)) {
        throw InvalidArgument("gaussian_initial: standard deviations must be > 0");
    }
    DensityField field;
    field.p.resize(domain.n_active());
    constexpr double two_pi = 6.283185307179586477;
    const double norm = 1.0 / (two_pi * sd_x * sd_y);
    for (int idx = 0; idx < domain.n_active(); ++idx) {
        const int flat = domain.cells[static_cast<std::size_t>(idx)];
        const double dx = (domain.x_center(flat % domain.nx) - mean_x) / sd_x;
        const double dy = (domain.y_center(flat / domain.nx) - mean_y) / sd_y;
        field.p[idx] = norm * std::exp(-0.5 * (dx * dx + dy * dy));
    }
    const double m0 = field.p.sum() * domain.cell_area();
    if (1.0 - m0 > mass_tol) {
        std::ostringstream os;
        os << "gaussian_initial: " << 1.0 - m0
           << " of the unit mass falls outside the polygon (tolerance " << mass_tol << ")";
        throw InvalidArgument(os.str());
    }
    field.p /= m0;
    field.time = 0.0;
    field.ledger.push_back({0.0, field.p.sum() * domain.cell_area(), 0.0});
    return field;
}

double total_mass(const PolygonDomain& domain, const DensityField& field) {
    return field.p.sum() * domain.cell_area();
}

struct FpStepper::Impl {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> solver;
    Eigen::SparseMatrix<double> rhs_matrix; ///< identity (implicit Euler) or I + dt/2 L
    const PolygonDomain* domain;
    double dt;
    FpScheme scheme;
    bool use_rhs_matrix;
};

FpStepper::FpStepper(const FpOperator& op, const PolygonDomain& domain, double dt,
                     FpScheme scheme)
    : impl_(std::make_unique<Impl>()) {
    if (!(dt > 0.0)) throw InvalidArgument("FpStepper: dt must be > 0");
    if (!op.boundaries_applied) {
        throw InvalidArgument("FpStepper: operator has open boundary faces; apply_boundaries "
                              "before stepping");
    }
    impl_->domain = &domain;
    impl_->dt = dt;
    impl_->scheme = scheme;

    const Eigen::SparseMatrix<double> L = op.matrix();
    Eigen::SparseMatrix<double> eye(L.rows(), L.cols());
    eye.setIdentity();

    const double w = scheme == FpScheme::implicit_euler ? dt : 0.5 * dt;
    Eigen::SparseMatrix<double> lhs = eye - w * L;
    lhs.makeCompressed();
    impl_->use_rhs_matrix = scheme == FpScheme::crank_nicolson;
    if (impl_->use_rhs_matrix) {
        impl_->rhs_matrix = eye + 0.5 * dt * L;
        impl_->rhs_matrix.makeCompressed();
    }
    impl_->solver.compute(lhs);
    if (impl_->solver.info() != Eigen::Success) {
        throw NumericalFailure("FpStepper: sparse factorization failed");
    }
}

FpStepper::~FpStepper() = default;
FpStepper::FpStepper(FpStepper&&) noexcept = default;
FpStepper& FpStepper::operator=(FpStepper&&) noexcept = default;

double FpStepper::dt() const { return impl_->dt; }

void FpStepper::step(DensityField& field) {
    const Eigen::VectorXd rhs =
        impl_->use_rhs_matrix ? Eigen::VectorXd(impl_->rhs_matrix * field.p) : field.p;
    Eigen::VectorXd next = impl_->solver.solve(rhs);
    if (impl_->solver.info() != Eigen::Success) {
        throw NumericalFailure("FpStepper: linear solve failed", field.time);
    }

    double clipped = 0.0;
    for (Eigen::Index i = 0; i < next.size(); ++i) {
        if (next[i] < -1e-12) {
            clipped += -next[i];
            next[i] = 0.0;
        }
    }
    field.p = std::move(next);
    field.time += impl_->dt;
    field.ledger.push_back({field.time, field.p.sum() * impl_->domain->cell_area(),
                            clipped * impl_->domain->cell_area()});
}

void FpStepper::advance(DensityField& field, double t_target) {
    while (field.time + 0.5 * impl_->dt < t_target) step(field);
}

void step_density(DensityField& field, const FpOperator& op, const PolygonDomain& domain,
                  double dt, FpScheme scheme) {
    FpStepper stepper(op, domain, dt, scheme);
    stepper.step(field);
}

FpDiagnostics diagnostics(const PolygonDomain& domain, const DensityField& field) {
    FpDiagnostics diag;
    diag.total_mass = total_mass(domain, field);
    diag.marginal_x.coordinate.resize(static_cast<std::size_t>(domain.nx));
    diag.marginal_x.density.assign(static_cast<std::size_t>(domain.nx), 0.0);
    diag.marginal_y.coordinate.resize(static_cast<std::size_t>(domain.ny));
    diag.marginal_y.density.assign(static_cast<std::size_t>(domain.ny), 0.0);
    for (int i = 0; i < domain.nx; ++i) diag.marginal_x.coordinate[static_cast<std::size_t>(i)] = domain.x_center(i);
    for (int j = 0; j < domain.ny; ++j) diag.marginal_y.coordinate[static_cast<std::size_t>(j)] = domain.y_center(j);
    for (int idx = 0; idx < domain.n_active(); ++idx) {
        const int flat = domain.cells[static_cast<std::size_t>(idx)];
        const int i = flat % domain.nx;
        const int j = flat / domain.nx;
        diag.marginal_x.density[static_cast<std::size_t>(i)] += field.p[idx] * domain.hy;
        diag.marginal_y.density[static_cast<std::size_t>(j)] += field.p[idx] * domain.hx;
    }
    return diag;
}

namespace {

template <typename Pred>
RegionMass mass_where(const PolygonDomain& domain, const DensityField& field, Pred&& pred) {
    RegionMass rm;
    for (int idx = 0; idx < domain.n_active(); ++idx) {
        const int flat = domain.cells[static_cast<std::size_t>(idx)];
        const double x = domain.x_center(flat % domain.nx);
        const double y = domain.y_center(flat / domain.nx);
        if (pred(x, y)) {
            rm.mass += field.p[idx] * domain.cell_area();
            ++rm.cells;
        }
    }
    return rm;
}

} // namespace

RegionMass mass_in_rectangle(const PolygonDomain& domain, const DensityField& field, double x0,
                             double x1, double y0, double y1) {
    return mass_where(domain, field, [&](double x, double y) {
        return x >= x0 && x <= x1 && y >= y0 && y <= y1;
    });
}

RegionMass mass_in_halfplane(const PolygonDomain& domain, const DensityField& field, double a,
                             double b, double c) {
    return mass_where(domain, field, [&](double x, double y) { return a * x + b * y <= c; });
}

CrosscheckReport fp_vs_sde_crosscheck(const ChemostatParams& params, const PolygonDomain& domain,
                                      const CrosscheckConfig& config) {
    if (config.n_paths < 1 || config.bins < 2) {
        throw InvalidArgument("fp_vs_sde_crosscheck: need n_paths >= 1 and bins >= 2");
    }
    if (std::holds_alternative<NoNoise>(params.noise)) {
        throw InvalidArgument("fp_vs_sde_crosscheck: a noise spec is required");
    }

    CrosscheckReport report;
    const int bins = config.bins;
    report.fp_hist.assign(static_cast<std::size_t>(bins) * bins, 0.0);
    report.sde_hist.assign(static_cast<std::size_t>(bins) * bins, 0.0);

    const double bx = config.bin_extent / bins;
    const double by = config.bin_extent / bins;
    auto bin_of = [&](double x, double y) {
        const int bi = std::clamp(static_cast<int>(x / bx), 0, bins - 1);
        const int bj = std::clamp(static_cast<int>(y / by), 0, bins - 1);
        return static_cast<std::size_t>(bi) + static_cast<std::size_t>(bins) * bj;
    };

    // Fokker-Planck side
    {
        const FpOperator open_op = assemble_operator(params, domain);
        const FpOperator op = apply_boundaries(open_op, domain);
        DensityField field =
            gaussian_initial(domain, config.mean_x, config.mean_y, config.sd, config.sd);
        FpStepper stepper(op, domain, config.fp_dt, config.scheme);
        stepper.advance(field, config.t_end);
        double total = 0.0;
        for (int idx = 0; idx < domain.n_active(); ++idx) {
            const int flat = domain.cells[static_cast<std::size_t>(idx)];
            const double m = field.p[idx] * domain.cell_area();
            report.fp_hist[bin_of(domain.x_center(flat % domain.nx),
                                  domain.y_center(flat / domain.nx))] += m;
            total += m;
        }
        for (double& v : report.fp_hist) v /= total;
    }

    // stage-5 Langevin side, endpoints binned on the same grid
    {
        std::atomic<int> failed{0};
        std::atomic<int> next{0};
        const unsigned workers =
            config.n_threads > 0
                ? static_cast<unsigned>(config.n_threads)
                : std::max(1u, std::thread::hardware_concurrency());
        std::vector<std::vector<double>> partial(
            workers, std::vector<double>(static_cast<std::size_t>(bins) * bins, 0.0));

        auto worker = [&](unsigned w) {
            for (int path = next.fetch_add(1); path < config.n_paths; path = next.fetch_add(1)) {
                // draw the initial point inside the polygon (channels >= 100)
                double x0 = 0.0, y0 = 0.0;
                bool placed = false;
                for (std::uint32_t attempt = 0; attempt < 64 && !placed; ++attempt) {
                    x0 = config.mean_x + config.sd *
                             rng::standard_normal(config.seed, static_cast<std::uint64_t>(path),
                                                  0, 100 + 2 * attempt);
                    y0 = config.mean_y + config.sd *
                             rng::standard_normal(config.seed, static_cast<std::uint64_t>(path),
                                                  0, 101 + 2 * attempt);
                    placed = x0 > 0.0 && y0 > 0.0 && x0 < domain.x_max && y0 < domain.y_max &&
                             y0 > domain.cut_line(x0);
                }
                if (!placed) {
                    ++failed;
                    continue;
                }
                try {
                    const ReducedTrajectory traj = stage5_simulate_sde(
                        params, ReducedState{x0, y0}, config.sde_dt, config.t_end, config.seed,
                        static_cast<std::uint64_t>(path),
                        static_cast<std::uint64_t>(std::llround(config.t_end / config.sde_dt)));
                    const ReducedState& fin = traj.final_state();
                    partial[w][bin_of(std::min(fin.x, domain.x_max), std::min(fin.y, domain.y_max))] += 1.0;
                } catch (const NumericalFailure&) {
                    ++failed;
                }
            }
        };

        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(worker, w);
        for (auto& th : pool) th.join();

        double total = 0.0;
        for (const auto& part : partial) {
            for (std::size_t k = 0; k < part.size(); ++k) {
                report.sde_hist[k] += part[k];
                total += part[k];
            }
        }
        if (total == 0.0) throw NumericalFailure("fp_vs_sde_crosscheck: all paths failed");
        for (double& v : report.sde_hist) v /= total;
        report.failed_paths = failed.load();
    }

    double tv = 0.0;
    for (std::size_t k = 0; k < report.fp_hist.size(); ++k) {
        tv += std::abs(report.fp_hist[k] - report.sde_hist[k]);
    }
    report.tv_distance = 0.5 * tv;
    return report;
}

} // namespace chemostat
