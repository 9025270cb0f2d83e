#include "carl/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "carl/config.hpp"
#include "carl/io.hpp"
#include "carl/selftest.hpp"
#include "carl/svg.hpp"
#include "carl/sweep.hpp"

namespace carl::cli {

namespace fs = std::filesystem;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SimulateArgs {
    std::string config;
    std::string out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau_end;
    std::optional<double> delta21;
    std::optional<std::size_t> n_atoms;
};

struct SweepArgs {
    std::string config;
    std::string out_dir;
    std::optional<double> delta21_min, delta21_max;
    std::optional<std::size_t> points;
    std::optional<std::size_t> workers;
    std::optional<std::uint64_t> seed;
    std::optional<double> tau_end;
    std::optional<std::string> motion;
    std::optional<double> nu;
};

struct PredictArgs {
    std::string config;
    std::string snapshots;
    std::string out_dir;
    std::optional<double> tau;
    std::optional<int> n_max;
};

struct PeaksArgs {
    std::string spectrum;
    double nu = 0.0;
    double min_height = 0.0;
    std::string out_dir;
};

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    fn(f);
}

std::string svg_with_digest(const std::string& svg, const std::string& digest) {
    return "<!-- # carl " + std::string(kVersion) + " config_digest=" + digest + " -->\n" + svg;
}

std::string json_text(const nlohmann::json& j) { return j.dump(2) + "\n"; }

void require_config_valid(const RunConfig& cfg) {
    const auto errs = validate_config(cfg);
    if (errs.empty()) return;
    std::string msg = "invalid config:";
    for (const auto& e : errs) msg += "\n  " + e;
    throw ConfigError(msg);
}

fs::path prepare_out(const RunConfig& cfg) {
    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    return dir;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    RunConfig cfg = load_config(a.config);
    if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    if (a.seed) cfg.initial.seed = *a.seed;
    if (a.tau_end) cfg.schedule.tau_end = *a.tau_end;
    if (a.delta21) cfg.params.delta21 = *a.delta21;
    if (a.n_atoms) cfg.params.n_atoms = *a.n_atoms;

    auto& times = cfg.schedule.snapshot_times;
    if (a.tau_end) {
        // a shortened run keeps the snapshots that still fit and ends with one
        std::erase_if(times, [&](double t) { return t > *a.tau_end; });
        if (!times.empty()) times.push_back(*a.tau_end);
        if (cfg.predict_at && *cfg.predict_at > *a.tau_end) cfg.predict_at.reset();
    }
    if (times.empty()) times = {0.0, cfg.schedule.tau_end};
    if (cfg.predict_at) times.push_back(*cfg.predict_at);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    require_config_valid(cfg);

    const fs::path dir = prepare_out(cfg);
    const std::string digest = config_digest(cfg);
    const auto init = init_ensemble(cfg.initial, cfg.params);
    const Trajectory traj = integrate(init, cfg.params, cfg.schedule, cfg.motion);

    write_with(dir / "trajectory.csv", [&](std::ostream& f) { write_trajectory_csv(f, traj, digest); });
    write_with(dir / "snapshots.csv",
               [&](std::ostream& f) { write_snapshots_csv(f, traj.snapshots, digest); });

    nlohmann::json report;
    if (cfg.params.nu <= 0.0) {
        report = {{"skipped", "secular oscillations need nu > 0"}};
    } else if (traj.diverged) {
        report = {{"skipped", "run diverged"}};
    } else {
        const EnsembleState* snap = &traj.final_state;
        if (cfg.predict_at) {
            for (const auto& s : traj.snapshots)
                if (std::abs(s.tau - *cfg.predict_at) <= 0.5 * cfg.schedule.dtau) snap = &s.state;
        }
        report = predictor_report_json(make_predictor_report(
            cfg.params, *snap, cfg.initial.a1_0, snap->a1, cfg.n_max));
    }
    report["config_digest"] = digest;
    write_file(dir / "predictor.json", json_text(report));

    std::vector<double> t = traj.times, intensity, r = traj.r_series;
    for (const auto& a1 : traj.a1_series) intensity.push_back(std::norm(a1));
    write_file(dir / "a1_intensity.svg",
               svg_with_digest(svg::line_plot({"probe intensity", "tau", "|A1|^2", true}, t,
                                              intensity),
                               digest));
    write_file(dir / "order_parameter.svg",
               svg_with_digest(svg::line_plot({"order parameter", "tau", "R", false}, t, r),
                               digest));
    for (std::size_t i = 0; i < traj.snapshots.size(); ++i) {
        const auto& s = traj.snapshots[i];
        std::vector<double> z, p(s.state.p.begin(), s.state.p.end());
        for (double th : s.state.theta) z.push_back(position_mod1(th));
        std::ostringstream title;
        title << "phase space, tau = " << s.tau;
        write_file(dir / ("phase_space_" + std::to_string(i) + ".svg"),
                   svg_with_digest(svg::scatter_plot({title.str(), "z/lambda mod 1", "p", false},
                                                     z, p),
                                   digest));
    }

    out << "simulate: " << traj.size() << " samples, " << traj.snapshots.size()
        << " snapshots -> " << dir.string() << "\n";
    if (traj.diverged) {
        out << "simulate: diverged: " << traj.divergence_reason << "\n";
        return kDiverged;
    }
    return kOk;
}

int cmd_sweep(const SweepArgs& a, std::ostream& out) {
    RunConfig cfg = load_config(a.config);
    if (!a.out_dir.empty()) cfg.out_dir = a.out_dir;
    if (a.delta21_min) cfg.sweep.delta21_min = *a.delta21_min;
    if (a.delta21_max) cfg.sweep.delta21_max = *a.delta21_max;
    if (a.points) cfg.sweep.points = *a.points;
    if (a.seed) cfg.initial.seed = *a.seed;
    if (a.tau_end) cfg.schedule.tau_end = *a.tau_end;
    if (a.nu) cfg.params.nu = *a.nu;
    if (a.motion) {
        if (*a.motion == "full") cfg.motion = MotionMode::Full;
        else if (*a.motion == "motionless") cfg.motion = MotionMode::Motionless;
        else throw UsageError("--motion must be 'full' or 'motionless'");
    }
    if (cfg.sweep.points < 2) throw UsageError("--points must be at least 2");
    if (a.workers && *a.workers == 0) throw UsageError("--workers must be at least 1");
    // snapshots play no part in a sweep
    cfg.schedule.snapshot_times.clear();
    cfg.predict_at.reset();
    require_config_valid(cfg);

    const fs::path dir = prepare_out(cfg);
    const std::size_t workers = a.workers ? *a.workers : default_workers();
    const SweepSpec spec = SweepSpec::from_config(cfg);
    const Spectrum s = run_sweep(spec, workers);

    write_with(dir / "spectrum.csv", [&](std::ostream& f) { write_spectrum_csv(f, s); });

    std::size_t n_diverged = 0;
    for (bool d : s.diverged) n_diverged += d;

    nlohmann::json comb;
    if (cfg.params.nu > 0.0 && s.size() >= 3) {
        const CombReport report = compare_comb(s, cfg.params.nu);
        comb = comb_report_json(report);
        write_with(dir / "peaks.csv",
                   [&](std::ostream& f) { write_peaks_csv(f, report, s.config_digest); });
        out << "sweep: " << report.summary << "\n";
    } else {
        comb = {{"skipped", "comb analysis needs nu > 0 and at least 3 points"}};
    }
    comb["config_digest"] = s.config_digest;
    write_file(dir / "comb_report.json", json_text(comb));

    write_file(dir / "spectrum.svg",
               svg_with_digest(svg::line_plot({"gain spectrum", "delta21", "G", false},
                                              s.delta21, s.gain),
                               s.config_digest));

    const nlohmann::json manifest = {{"config", config_to_json(cfg)},
                                     {"seed", cfg.initial.seed},
                                     {"seed_policy", to_string(cfg.sweep.seed_policy)},
                                     {"version", kVersion},
                                     {"config_digest", s.config_digest},
                                     {"workers", workers},
                                     {"points", s.size()},
                                     {"diverged_points", n_diverged},
                                     {"wall_seconds", s.wall_seconds}};
    write_file(dir / "manifest.json", json_text(manifest));

    out << "sweep: " << s.size() << " points on " << workers << " worker(s) in "
        << std::fixed << std::setprecision(1) << s.wall_seconds << " s -> " << dir.string()
        << "\n";
    out.unsetf(std::ios::floatfield);
    if (n_diverged > 0) {
        out << "sweep: " << n_diverged << " point(s) diverged\n";
        return kDiverged;
    }
    return kOk;
}

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    RunConfig cfg = load_config(a.config);
    require_config_valid(cfg);
    std::ifstream in(a.snapshots);
    if (!in) throw ConfigError("cannot read snapshot file " + a.snapshots);
    const auto snaps = read_snapshots_csv(in);
    if (snaps.empty()) throw ConfigError("snapshot file holds no rows");

    const Snapshot* pick = &snaps.back();
    if (a.tau) {
        pick = nullptr;
        for (const auto& s : snaps)
            if (!pick || std::abs(s.tau - *a.tau) < std::abs(pick->tau - *a.tau)) pick = &s;
    }
    if (pick->state.size() == 0) throw ConfigError("selected snapshot is empty");
    SystemParams params = cfg.params;
    params.n_atoms = pick->state.size();
    if (!(params.nu > 0.0)) throw ConfigError("predict needs nu > 0");

    // the snapshot format carries no probe amplitude; its initial value stands in
    auto report = predictor_report_json(make_predictor_report(
        params, pick->state, cfg.initial.a1_0, cfg.initial.a1_0, a.n_max.value_or(cfg.n_max)));
    report["config_digest"] = config_digest(cfg);
    const std::string text = json_text(report);
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        write_file(fs::path(a.out_dir) / "predictor.json", text);
    }
    out << text;
    return kOk;
}

int cmd_peaks(const PeaksArgs& a, std::ostream& out) {
    std::ifstream in(a.spectrum);
    if (!in) throw ConfigError("cannot read spectrum file " + a.spectrum);
    const Spectrum s = read_spectrum_csv(in);
    if (s.size() < 3) throw UsageError("spectrum needs at least 3 points");
    CombThresholds th;
    th.min_height = a.min_height;
    const CombReport report = compare_comb(s, a.nu, th);
    auto j = comb_report_json(report);
    j["config_digest"] = s.config_digest;
    const std::string text = json_text(j);
    if (!a.out_dir.empty()) {
        fs::create_directories(a.out_dir);
        write_file(fs::path(a.out_dir) / "comb_report.json", text);
        write_with(fs::path(a.out_dir) / "peaks.csv",
                   [&](std::ostream& f) { write_peaks_csv(f, report, s.config_digest); });
    }
    out << text;
    return kOk;
}

int cmd_selftest(bool perturb, std::ostream& out) {
    SelfTestOptions opt;
    opt.perturb_inversion_coupling = perturb;
    const auto results = run_selftest(opt);
    bool all = true;
    double total = 0.0;
    out << std::left << std::setw(24) << "check" << std::setw(7) << "result" << std::setw(14)
        << "value" << std::setw(12) << "threshold" << "seconds\n";
    for (const auto& r : results) {
        all = all && r.passed;
        total += r.seconds;
        char value[32], thr[32], secs[32];
        std::snprintf(value, sizeof value, "%.3e", r.value);
        std::snprintf(thr, sizeof thr, "%.1e", r.threshold);
        std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
        out << std::setw(24) << r.name << std::setw(7) << (r.passed ? "PASS" : "FAIL")
            << std::setw(14) << value << std::setw(12) << thr << secs << "\n";
        if (!r.passed) out << "    " << r.detail << "\n";
    }
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.2f", total);
    out << (all ? "all checks passed" : "some checks FAILED") << " in " << secs << " s\n";
    return all ? kOk : kFailure;
}

} // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"carl: collective atomic recoil laser in a harmonic trap"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "integrate one run, write trajectory, snapshots, predictor report and plots");
    simulate->add_option("config", sim.config, "JSON config file")->required();
    simulate->add_option("--out", sim.out_dir, "output directory (overrides out_dir)");
    simulate->add_option("--seed", sim.seed, "initial-condition seed");
    simulate->add_option("--tau-end", sim.tau_end, "final time");
    simulate->add_option("--delta21", sim.delta21, "probe detuning");
    simulate->add_option("--n-atoms", sim.n_atoms, "ensemble size");

    SweepArgs sw;
    auto* sweep = app.add_subcommand("sweep", "gain spectrum over a delta21 grid");
    sweep->add_option("config", sw.config, "JSON config file")->required();
    sweep->add_option("--delta21-min", sw.delta21_min, "grid start");
    sweep->add_option("--delta21-max", sw.delta21_max, "grid end");
    sweep->add_option("--points", sw.points, "grid points (at least 2)");
    sweep->add_option("--workers", sw.workers, "worker threads (default: CARL_THREADS or all cores)");
    sweep->add_option("--out", sw.out_dir, "output directory (overrides out_dir)");
    sweep->add_option("--seed", sw.seed, "initial-condition seed");
    sweep->add_option("--tau-end", sw.tau_end, "gain evaluation time");
    sweep->add_option("--motion", sw.motion, "full | motionless");
    sweep->add_option("--nu", sw.nu, "trap frequency");

    PredictArgs pr;
    auto* predict = app.add_subcommand("predict", "analytic gain estimate from a snapshot CSV");
    predict->add_option("config", pr.config, "JSON config file")->required();
    predict->add_option("snapshots", pr.snapshots, "snapshots.csv from simulate")->required();
    predict->add_option("--tau", pr.tau, "snapshot time (default: last)");
    predict->add_option("--n-max", pr.n_max, "Bessel truncation order");
    predict->add_option("--out", pr.out_dir, "also write predictor.json here");

    PeaksArgs pk;
    auto* peaks = app.add_subcommand("peaks", "comb analysis of a spectrum CSV");
    peaks->add_option("spectrum", pk.spectrum, "spectrum.csv from sweep")->required();
    peaks->add_option("--nu", pk.nu, "trap frequency")->required();
    peaks->add_option("--min-height", pk.min_height, "minimum peak gain");
    peaks->add_option("--out", pk.out_dir, "also write comb_report.json and peaks.csv here");

    bool perturb = false;
    auto* selftest = app.add_subcommand("selftest", "run the invariant checks");
    selftest->add_flag("--perturb-rhs", perturb,
                       "negate the inversion coupling (the Bloch check must then fail)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*simulate) return cmd_simulate(sim, out);
        if (*sweep) return cmd_sweep(sw, out);
        if (*predict) return cmd_predict(pr, out);
        if (*peaks) return cmd_peaks(pk, out);
        if (*selftest) return cmd_selftest(perturb, out);
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << "\n";
        return kUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kFailure;
    }
    return kUsage;
}

} // namespace carl::cli
