#ifndef CHEMOSTAT_FOKKER_PLANCK_HPP
#define CHEMOSTAT_FOKKER_PLANCK_HPP

#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/SparseCore>

#include "chemostat/params.hpp"

namespace chemostat {

/**
 * Masked cell-centered grid over [0, x_max] x [0, y_max] with the corner
 * below the singularity line removed. A cell is active when its center
 * lies strictly above y = line(x) + cut_offset; the cut is resolved as a
 * staircase of cell faces. Fluxes live on faces, so the finite-volume
 * operator conserves discrete mass by construction.
 */
struct PolygonDomain {
    double x_max = 3.0, y_max = 3.0;
    double hx = 0.01, hy = 0.01;
    double cut_offset = 1e-2;
    double line_intercept = 0.0; ///< singularity line y = intercept + slope x
    double line_slope = 0.0;
    int nx = 0, ny = 0; ///< cell counts per direction

    std::vector<std::int32_t> index_of; ///< flat (i + nx j) -> active index or -1
    std::vector<std::int32_t> cells;    ///< active index -> flat cell id
    double theta = 1.0;                 ///< copied from the params used to build

    int n_active() const { return static_cast<int>(cells.size()); }
    double x_center(int i) const { return (i + 0.5) * hx; }
    double y_center(int j) const { return (j + 0.5) * hy; }
    double cell_area() const { return hx * hy; }
    bool in_grid(int i, int j) const { return i >= 0 && i < nx && j >= 0 && j < ny; }
    std::int32_t index(int i, int j) const {
        return in_grid(i, j) ? index_of[static_cast<std::size_t>(i) + static_cast<std::size_t>(nx) * j]
                             : -1;
    }
    /// Cut boundary height at x: singularity line plus the offset.
    double cut_line(double x) const { return line_intercept + line_slope * x + cut_offset; }
};

/// Mask the box to the region above the offset singularity line. Throws on
/// an empty or disconnected active set, or cut_offset <= 0.
PolygonDomain build_domain(const ChemostatParams& params, double x_max, double y_max,
                           double cut_offset, double hx, double hy);

enum class FpScheme { implicit_euler, crank_nicolson };

enum class FpAdvection {
    exponential_fitting, ///< Scharfetter-Gummel faces: exact local drift-diffusion balance
    first_order_upwind,  ///< donor-cell advection with centered diffusion
};

struct FpAssemblyOptions {
    /// Replace the degenerate coefficients by unit diffusion and zero drift;
    /// calibration variant for which constants are exact steady states.
    bool constant_coefficient_calibration = false;
    /// Exponential fitting keeps the scheme positivity-preserving while
    /// removing most of the donor-cell numerical diffusion, which otherwise
    /// dominates the slow drift along the coexistence-line image.
    FpAdvection advection = FpAdvection::exponential_fitting;
};

struct FpBoundaryOptions {
    bool outer_reflecting = true; ///< zero flux through x = x_max, y = y_max
    bool axis_reflecting = true;  ///< zero flux through x = 0, y = 0 (vanishing coefficients)
    bool cut_reflecting = true;   ///< n . J = 0 on the staircase cut faces
};

/**
 * Discrete drift-diffusion generator dp/dt = L p on the active cells.
 * `base` holds upwinded advection plus the diagonal diffusion; `cross`
 * holds the mixed-derivative dilution term and is empty for general noise,
 * so the two noise structures differ by exactly the cross stencil.
 * Boundary faces are open (ghost density zero) until apply_boundaries.
 */
struct FpOperator {
    Eigen::SparseMatrix<double> base;
    Eigen::SparseMatrix<double> cross;
    bool boundaries_applied = false;
    FpAssemblyOptions assembly{};
    ChemostatParams params{};

    Eigen::SparseMatrix<double> matrix() const;
};

FpOperator assemble_operator(const ChemostatParams& params, const PolygonDomain& domain,
                             const FpAssemblyOptions& options = {});

/// Close the requested boundary faces with zero normal flux. Leaving
/// cut_reflecting off reproduces the leaky no-rule variant.
FpOperator apply_boundaries(const FpOperator& op, const PolygonDomain& domain,
                            const FpBoundaryOptions& options = {});

struct MassLedgerEntry {
    double t = 0.0;
    double mass = 0.0;
    double clipped = 0.0; ///< negative mass clipped at this step
};

struct DensityField {
    Eigen::VectorXd p; ///< cell-centered density on active cells
    double time = 0.0;
    std::vector<MassLedgerEntry> ledger;
};

/// Cell-centered bivariate Gaussian, renormalised to discrete mass one.
/// Rejects placements whose discrete mass misses more than mass_tol of the
/// analytic unit mass (initial support escaping the polygon).
DensityField gaussian_initial(const PolygonDomain& domain, double mean_x = 0.5,
                              double mean_y = 0.5, double sd_x = 0.05, double sd_y = 0.05,
                              double mass_tol = 1e-6);

double total_mass(const PolygonDomain& domain, const DensityField& field);

/**
 * Time stepper owning one factorization of (I - dt L); requires a closed
 * operator. Negative densities beyond -1e-12 are clipped to zero and the
 * clipped mass recorded in the field's ledger.
 */
class FpStepper {
public:
    FpStepper(const FpOperator& op, const PolygonDomain& domain, double dt, FpScheme scheme);
    ~FpStepper();
    FpStepper(FpStepper&&) noexcept;
    FpStepper& operator=(FpStepper&&) noexcept;

    void step(DensityField& field);
    void advance(DensityField& field, double t_target);
    double dt() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// One-shot step; prefer FpStepper for runs (the factorization is reused).
void step_density(DensityField& field, const FpOperator& op, const PolygonDomain& domain,
                  double dt, FpScheme scheme = FpScheme::implicit_euler);

struct Marginal {
    std::vector<double> coordinate;
    std::vector<double> density;
};

struct FpDiagnostics {
    double total_mass = 0.0;
    Marginal marginal_x;
    Marginal marginal_y;
};

FpDiagnostics diagnostics(const PolygonDomain& domain, const DensityField& field);

struct RegionMass {
    double mass = 0.0;
    long cells = 0; ///< 0 means the region misses the domain entirely
};

RegionMass mass_in_rectangle(const PolygonDomain& domain, const DensityField& field, double x0,
                             double x1, double y0, double y1);

/// Mass in the half-plane a x + b y <= c.
RegionMass mass_in_halfplane(const PolygonDomain& domain, const DensityField& field, double a,
                             double b, double c);

struct CrosscheckConfig {
    double t_end = 500.0;
    double fp_dt = 0.05;
    FpScheme scheme = FpScheme::implicit_euler;
    double sde_dt = 0.01;
    int n_paths = 10000;
    std::uint64_t seed = 0;
    int bins = 30;
    double bin_extent = 3.0; ///< histogram covers [0, bin_extent]^2 regardless of the grid box
    double mean_x = 0.5, mean_y = 0.5, sd = 0.05;
    int n_threads = 0;
};

struct CrosscheckReport {
    double tv_distance = 0.0;
    std::vector<double> fp_hist;  ///< bins x bins row-major, sums to 1
    std::vector<double> sde_hist; ///< same binning over path endpoints
    int failed_paths = 0;
};

/// Fokker-Planck density against an ensemble of stage-5 Langevin endpoints
/// with the same parameters, compared by total variation on a coarse grid.
CrosscheckReport fp_vs_sde_crosscheck(const ChemostatParams& params, const PolygonDomain& domain,
                                      const CrosscheckConfig& config);

} // namespace chemostat

#endif
