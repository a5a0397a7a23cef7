#ifndef CHEMOSTAT_RECIPES_HPP
#define CHEMOSTAT_RECIPES_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "chemostat/asymptotics.hpp"
#include "chemostat/config.hpp"
#include "chemostat/fokker_planck.hpp"
#include "chemostat/ode.hpp"
#include "chemostat/sde.hpp"
#include "chemostat/stability.hpp"
#include "chemostat/sweep.hpp"

namespace chemostat {

struct ManifestEntry {
    std::string path; ///< relative to the run directory
    std::uint64_t bytes = 0;
    std::string checksum; ///< fnv1a64 hex of the file content
};

struct RunManifest {
    int schema_version = 1;
    std::string artifact_version;
    std::string recipe;
    std::string config_hash;
    std::vector<ManifestEntry> outputs;
    long wall_clock_ms = 0;
    std::string status; ///< "complete"; the manifest is only written on success
};

/**
 * Collects output files in memory and commits them in one pass: files
 * first, manifest.json last as the completion marker. A failed commit
 * removes the partial manifest so interrupted runs are recognisable.
 */
class OutputSession {
public:
    void add(const std::string& relpath, std::string content);
    bool has(const std::string& relpath) const;

    /// Writes everything under dir and returns the manifest (also written
    /// to dir/manifest.json).
    RunManifest commit(const std::string& dir, const std::string& recipe,
                       const std::string& config_hash, long wall_clock_ms);

private:
    std::vector<std::pair<std::string, std::string>> files_;
};

std::string manifest_json(const RunManifest& manifest);

/// Verify every manifest entry against the files on disk; returns the
/// relative paths that are missing or whose checksum differs.
std::vector<std::string> verify_manifest(const std::string& dir, const RunManifest& manifest);
RunManifest load_manifest(const std::string& dir);

// ---- CSV renderers shared by recipes and the CLI ----
std::string trajectory_csv(const OdeTrajectory& traj);
std::string trajectory_csv(const SdeTrajectory& traj);
std::string ensemble_summary_csv(const Ensemble& ensemble);
std::string events_csv(const Ensemble& ensemble);
std::string sweep_csv(const SweepResult& sweep);
std::string density_csv(const PolygonDomain& domain, const DensityField& field);
std::string density_metadata_json(const PolygonDomain& domain, const DensityField& field,
                                  const ChemostatParams& params);
std::string marginal_csv(const Marginal& marginal, const std::string& coordinate_name);
std::string mass_ledger_csv(const DensityField& field);
std::string order_study_csv(const OrderStudyResult& result, const std::string& label);
std::string composite_csv(const std::vector<CompositeRow>& rows);
std::string stability_text(const StabilityReport& report);
std::string reduced_trajectory_csv(const ReducedTrajectory& traj);

/// Names accepted by run_recipe.
std::vector<std::string> recipe_names();

/**
 * Execute one of the paper-keyed experiment recipes. Figure-pinned values
 * (dilution rates, noise intensities, path counts, the Table-3 death-rate
 * curves) live in the recipe; the configuration supplies z_f, seed, step
 * sizes and the Fokker-Planck grid. `full_scale` switches from the desk
 * horizons to the figure horizons. Unknown names raise ConfigError listing
 * the available recipes.
 */
RunManifest run_recipe(const std::string& name, const ExperimentConfig& config,
                       bool full_scale = false);

} // namespace chemostat

#endif
