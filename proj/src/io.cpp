#include "carl/io.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace carl {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) out.push_back(cell);
    return out;
}

double parse_real(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        throw InvalidParameter("csv: cannot parse number '" + s + "'");
    }
    if (used != s.size() && s.find_first_not_of(" \r", used) != std::string::npos)
        throw InvalidParameter("csv: trailing characters in '" + s + "'");
    return v;
}

// Returns data rows; fills digest from a "# config_digest=" line.
std::vector<std::vector<std::string>> read_rows(std::istream& in, const std::string& header,
                                                std::string* digest) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool seen_header = false;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            const std::string key = "# config_digest=";
            if (digest && line.rfind(key, 0) == 0) *digest = line.substr(key.size());
            continue;
        }
        if (!seen_header) {
            if (line != header) throw InvalidParameter("csv: expected header '" + header + "'");
            seen_header = true;
            continue;
        }
        rows.push_back(split(line));
    }
    if (!seen_header) throw InvalidParameter("csv: missing header '" + header + "'");
    return rows;
}

constexpr const char* kSpectrumHeader = "delta21,gain";
constexpr const char* kSnapshotHeader =
    "tau,atom,theta,p,re_sigma,im_sigma,sigma_z,z_over_lambda_mod1";

} // namespace

std::string format_real(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void write_csv_preamble(std::ostream& out, const std::string& digest) {
    out << "# carl " << kVersion << "\n# config_digest=" << digest << "\n";
}

void write_trajectory_csv(std::ostream& out, const Trajectory& t, const std::string& digest) {
    write_csv_preamble(out, digest);
    if (t.diverged) out << "# diverged: " << t.divergence_reason << "\n";
    out << "tau,re_a1,im_a1,abs_a1_sq,re_c,im_c,r,phi\n";
    for (std::size_t i = 0; i < t.size(); ++i) {
        out << format_real(t.times[i]) << ',' << format_real(t.a1_series[i].real()) << ','
            << format_real(t.a1_series[i].imag()) << ',' << format_real(std::norm(t.a1_series[i]))
            << ',' << format_real(t.c_series[i].real()) << ','
            << format_real(t.c_series[i].imag()) << ',' << format_real(t.r_series[i]) << ','
            << format_real(t.phi_series[i]) << '\n';
    }
}

void write_snapshots_csv(std::ostream& out, const std::vector<Snapshot>& snaps,
                         const std::string& digest) {
    write_csv_preamble(out, digest);
    out << kSnapshotHeader << '\n';
    for (const auto& s : snaps) {
        const auto& e = s.state;
        for (std::size_t j = 0; j < e.size(); ++j) {
            out << format_real(s.tau) << ',' << j << ',' << format_real(e.theta[j]) << ','
                << format_real(e.p[j]) << ',' << format_real(e.sigma_re[j]) << ','
                << format_real(e.sigma_im[j]) << ',' << format_real(e.sigma_z[j]) << ','
                << format_real(position_mod1(e.theta[j])) << '\n';
        }
    }
}

void write_spectrum_csv(std::ostream& out, const Spectrum& s) {
    write_csv_preamble(out, s.config_digest);
    out << kSpectrumHeader << '\n';
    for (std::size_t i = 0; i < s.size(); ++i)
        out << format_real(s.delta21[i]) << ',' << format_real(s.gain[i]) << '\n';
}

void write_peaks_csv(std::ostream& out, const CombReport& r, const std::string& digest) {
    write_csv_preamble(out, digest);
    out << "delta21,gain,nearest_n,offset\n";
    for (const auto& e : r.peaks)
        out << format_real(e.delta21) << ',' << format_real(e.gain) << ',' << e.nearest_n << ','
            << format_real(e.offset) << '\n';
}

Spectrum read_spectrum_csv(std::istream& in) {
    Spectrum s;
    for (const auto& row : read_rows(in, kSpectrumHeader, &s.config_digest)) {
        if (row.size() != 2) throw InvalidParameter("spectrum csv: expected 2 columns");
        s.delta21.push_back(parse_real(row[0]));
        s.gain.push_back(parse_real(row[1]));
        s.diverged.push_back(!std::isfinite(s.gain.back()));
    }
    for (std::size_t i = 1; i < s.size(); ++i)
        if (!(s.delta21[i] > s.delta21[i - 1]))
            throw InvalidParameter("spectrum csv: delta21 must be strictly increasing");
    return s;
}

std::vector<Snapshot> read_snapshots_csv(std::istream& in) {
    std::vector<Snapshot> out;
    for (const auto& row : read_rows(in, kSnapshotHeader, nullptr)) {
        if (row.size() != 8) throw InvalidParameter("snapshot csv: expected 8 columns");
        const double tau = parse_real(row[0]);
        if (out.empty() || out.back().tau != tau) {
            out.push_back({tau, EnsembleState{}});
            out.back().state.tau = tau;
        }
        auto& e = out.back().state;
        const auto idx = static_cast<std::size_t>(parse_real(row[1]));
        if (idx != e.size()) throw InvalidParameter("snapshot csv: atoms out of order");
        e.resize(idx + 1);
        e.set_atom(idx, {parse_real(row[2]), parse_real(row[3]),
                         {parse_real(row[4]), parse_real(row[5])}, parse_real(row[6])});
    }
    return out;
}

PredictorReport make_predictor_report(const SystemParams& params, const EnsembleState& snap,
                                      cplx a1_0, cplx a1_now, int n_max,
                                      double center_offset) {
    if (!(params.nu > 0))
        throw InvalidParameter("predictor: needs a trap (nu > 0) for secular oscillations");
    PredictorReport r;
    r.tau = snap.tau;
    r.center_offset = center_offset;
    r.s0 = steady_polarization(params).s0;
    const auto osc = extract_oscillations(snap, params.nu, center_offset);
    r.r0 = secular_order_parameter(osc);
    r.terms = predict_gain_resonant_terms(params, r.tau, r.r0, r.s0, a1_0);
    r.c0 = asymptotic_coherence(osc, r.s0);
    r.terms_c0 = resonant_gain_terms(r.c0, params.kappa, r.tau, a1_0);

    double max_amp = 0.0;
    for (const auto& o : osc) max_amp = std::max(max_amp, o.amp);
    PredictorInput in;
    in.oscillations = osc;
    in.s0 = r.s0;
    in.tau = r.tau;
    in.n_max = n_max > 0 ? n_max : n_max_rule(max_amp);
    r.ctilde = predict_ctilde(in, params.kappa, params.delta21, params.nu);
    r.gain_ctilde = gain_from_ctilde(r.ctilde.value, params.kappa, r.tau, a1_0);

    auto check = validate_params(params, std::abs(a1_now));
    if (check.harmonic) r.harmonic = *check.harmonic;
    return r;
}

nlohmann::json predictor_report_json(const PredictorReport& r) {
    auto pair = [](cplx z) { return nlohmann::json::array({z.real(), z.imag()}); };
    return {{"tau", r.tau},
            {"s0", pair(r.s0)},
            {"r0", r.r0.r},
            {"phi0", r.r0.phi},
            {"gain_terms",
             {{"coherent", r.terms.coherent},
              {"cross", r.terms.cross},
              {"decay", r.terms.decay},
              {"total", r.terms.total()}}},
            {"c0", pair(r.c0)},
            {"gain_terms_c0",
             {{"coherent", r.terms_c0.coherent},
              {"cross", r.terms_c0.cross},
              {"decay", r.terms_c0.decay},
              {"total", r.terms_c0.total()}}},
            {"ctilde", pair(r.ctilde.value)},
            {"gain_ctilde", r.gain_ctilde},
            {"n_max", r.ctilde.n_max},
            {"n_required", r.ctilde.n_required},
            {"truncation_warning", r.ctilde.truncation_warning},
            {"truncation_residual", r.ctilde.truncation_residual},
            {"harmonic_condition",
             {{"threshold", r.harmonic.threshold}, {"holds", r.harmonic.holds}}},
            {"center_offset", r.center_offset}};
}

} // namespace carl
