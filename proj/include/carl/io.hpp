#pragma once

// CSV and JSON artifacts. CSV files start with '#'-prefixed metadata lines
// (tool version and config digest); readers skip them. Reals are written
// with 17 significant digits so they round-trip exactly.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "carl/analytics.hpp"
#include "carl/dynamics.hpp"
#include "carl/sweep.hpp"

namespace carl {

inline constexpr const char* kVersion = "0.1.0";

std::string format_real(double x);

void write_csv_preamble(std::ostream& out, const std::string& digest);

/// tau,re_a1,im_a1,abs_a1_sq,re_c,im_c,r,phi
void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const std::string& digest);

/// tau,atom,theta,p,re_sigma,im_sigma,sigma_z,z_over_lambda_mod1
void write_snapshots_csv(std::ostream& out, const std::vector<Snapshot>& snapshots,
                         const std::string& digest);

/// delta21,gain
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

/// delta21,gain,nearest_n,offset
void write_peaks_csv(std::ostream& out, const CombReport& report, const std::string& digest);

/// Reads a spectrum CSV; the digest comes from the preamble when present.
Spectrum read_spectrum_csv(std::istream& in);

/// Reads snapshot rows grouped by tau, in file order. The probe amplitude is
/// not part of the format and is left at zero.
std::vector<Snapshot> read_snapshots_csv(std::istream& in);

struct PredictorReport {
    double tau = 0.0;
    cplx s0{0.0, 0.0};
    OrderParameter r0;
    GainTerms terms;          ///< secular order parameter form
    GainTerms terms_c0;       ///< per-atom asymptotic coherence form
    cplx c0{0.0, 0.0};
    CtildeResult ctilde;
    double gain_ctilde = 0.0; ///< gain written through the predicted C~
    HarmonicCheck harmonic;
    double center_offset = 0.0;
};

/// Analytic gain estimates from a late-time snapshot. Needs nu > 0.
/// n_max = 0 selects the truncation rule from the largest amplitude.
PredictorReport make_predictor_report(const SystemParams& params, const EnsembleState& snapshot,
                                      cplx a1_0, cplx a1_now, int n_max = 0,
                                      double center_offset = 0.0);

nlohmann::json predictor_report_json(const PredictorReport& report);

} // namespace carl
