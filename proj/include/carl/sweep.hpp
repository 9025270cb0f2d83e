#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carl/config.hpp"
#include "carl/diagnostics.hpp"

namespace carl {

struct SweepSpec {
    double delta21_min = -10.0;
    double delta21_max = 25.0;
    std::size_t n_points = 141;
    RunConfig base; ///< params, initial conditions, dtau, tau_end, motion
    SeedPolicy seed_policy = SeedPolicy::Shared;

    /// Grid and seed policy taken from base.sweep.
    static SweepSpec from_config(const RunConfig& cfg);
};

/// delta21[i] = min + i (max - min) / (n_points - 1).
std::vector<double> sweep_grid(const SweepSpec& spec);

/// Worker count from CARL_THREADS, else the hardware concurrency (at least 1).
std::size_t default_workers();

/// Gain after base.schedule.tau_end at every grid point, each from a fresh
/// ensemble. Points run on `workers` threads and are assembled by index, so
/// the result does not depend on the worker count. Diverged points are
/// flagged and carry NaN gain.
Spectrum run_sweep(const SweepSpec& spec, std::size_t workers);

struct CombThresholds {
    double min_height = 0.0;     ///< passed to find_peaks
    double max_offset = -1.0;    ///< |delta21 - n nu| limit; < 0 means one grid step
    double min_contrast = 10.0;  ///< G(peak) / G(nearest half-integer multiple)
    std::size_t min_peaks = 5;
    bool positive_only = true;   ///< only n >= 1 counts toward the comb
};

/// Contrast values are capped here; a non-positive midpoint gain also caps.
inline constexpr double kContrastCap = 1e6;

struct CombEntry {
    double delta21 = 0.0;
    double gain = 0.0;
    long nearest_n = 0;
    double offset = 0.0;
    double midpoint_gain = 0.0;
    double contrast = 0.0;
    bool capped = false;
    bool on_comb = false;   ///< within max_offset of an eligible n nu
    bool qualified = false; ///< on_comb and contrast >= min_contrast
};

struct CombReport {
    double nu = 0.0;
    double grid_step = 0.0;
    CombThresholds thresholds;
    std::vector<CombEntry> peaks;
    std::size_t on_comb = 0;
    std::size_t qualified = 0;
    bool pass = false;
    std::string summary;
};

/// Matches detected peaks to the resonances n nu. Passes when at least
/// min_peaks peaks sit on the comb and every one of them meets min_contrast.
CombReport compare_comb(const Spectrum& spectrum, double nu, const CombThresholds& thresholds = {});

nlohmann::json comb_report_json(const CombReport& report);

} // namespace carl
