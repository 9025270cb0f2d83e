#include "carl/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <sstream>
#include <thread>

namespace carl {

SweepSpec SweepSpec::from_config(const RunConfig& cfg) {
    SweepSpec s;
    s.delta21_min = cfg.sweep.delta21_min;
    s.delta21_max = cfg.sweep.delta21_max;
    s.n_points = cfg.sweep.points;
    s.seed_policy = cfg.sweep.seed_policy;
    s.base = cfg;
    return s;
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
    if (spec.n_points < 2) throw InvalidParameter("sweep: n_points must be at least 2");
    if (!(spec.delta21_min < spec.delta21_max))
        throw InvalidParameter("sweep: delta21_min must be below delta21_max");
    std::vector<double> grid(spec.n_points);
    const double span = spec.delta21_max - spec.delta21_min;
    const double last = static_cast<double>(spec.n_points - 1);
    for (std::size_t i = 0; i < spec.n_points; ++i)
        grid[i] = spec.delta21_min + static_cast<double>(i) * span / last;
    return grid;
}

std::size_t default_workers() {
    if (const char* env = std::getenv("CARL_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

Spectrum run_sweep(const SweepSpec& spec, std::size_t workers) {
    if (workers == 0) throw InvalidParameter("sweep: workers must be at least 1");
    const auto grid = sweep_grid(spec);
    const RunConfig& base = spec.base;
    require_valid(base.params);
    if (auto errs = validate_schedule(base.schedule); !errs.empty())
        throw InvalidParameter("sweep: " + errs.front());

    const auto started = std::chrono::steady_clock::now();
    const EnsembleState shared = init_ensemble(base.initial, base.params);

    Spectrum out;
    out.delta21 = grid;
    out.gain.assign(grid.size(), 0.0);
    out.diverged.assign(grid.size(), false);
    out.config_digest = config_digest(base);

    auto run_point = [&](std::size_t i) {
        SystemParams params = base.params;
        params.delta21 = grid[i];
        std::optional<EnsembleState> final_state;
        if (spec.seed_policy == SeedPolicy::Shared) {
            final_state = evolve(shared, params, base.schedule.dtau, base.schedule.tau_end,
                                 base.motion);
        } else {
            InitialConditionSpec ic = base.initial;
            ic.seed = derive_seed(base.initial.seed, i);
            final_state = evolve(init_ensemble(ic, params), params, base.schedule.dtau,
                                 base.schedule.tau_end, base.motion);
        }
        if (final_state) {
            out.gain[i] = gain(final_state->a1, base.initial.a1_0);
        } else {
            out.gain[i] = std::numeric_limits<double>::quiet_NaN();
            out.diverged[i] = true;
        }
    };

    const std::size_t n_threads = std::min(workers, grid.size());
    if (n_threads <= 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) run_point(i);
    } else {
        // each index is claimed once; distinct indices write distinct slots
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::atomic<bool> failed{false};
        {
            std::vector<std::jthread> pool;
            pool.reserve(n_threads);
            for (std::size_t t = 0; t < n_threads; ++t) {
                pool.emplace_back([&] {
                    for (std::size_t i = next++; i < grid.size() && !failed; i = next++) {
                        try {
                            run_point(i);
                        } catch (...) {
                            if (!failed.exchange(true)) failure = std::current_exception();
                        }
                    }
                });
            }
        }
        if (failure) std::rethrow_exception(failure);
    }
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return out;
}

CombReport compare_comb(const Spectrum& spectrum, double nu, const CombThresholds& th) {
    if (!(nu > 0)) throw InvalidParameter("compare_comb: nu must be positive");
    CombReport r;
    r.nu = nu;
    r.thresholds = th;
    r.grid_step = spectrum.size() > 1 ? spectrum.delta21[1] - spectrum.delta21[0] : 0.0;
    const double max_offset = th.max_offset < 0 ? r.grid_step : th.max_offset;

    for (const auto& pk : find_peaks(spectrum, th.min_height)) {
        CombEntry e;
        e.delta21 = pk.delta21;
        e.gain = pk.gain;
        e.nearest_n = std::lround(pk.delta21 / nu);
        e.offset = pk.delta21 - static_cast<double>(e.nearest_n) * nu;

        const double below = interpolate_gain(spectrum, (e.nearest_n - 0.5) * nu);
        const double above = interpolate_gain(spectrum, (e.nearest_n + 0.5) * nu);
        if (e.offset > 0) e.midpoint_gain = above;
        else if (e.offset < 0) e.midpoint_gain = below;
        else e.midpoint_gain = std::max(below, above);

        if (e.gain <= 0) {
            e.contrast = 0.0;
        } else if (e.midpoint_gain <= 0 || e.gain / e.midpoint_gain >= kContrastCap) {
            e.contrast = kContrastCap;
            e.capped = true;
        } else {
            e.contrast = e.gain / e.midpoint_gain;
        }
        e.on_comb = std::abs(e.offset) <= max_offset * (1 + 1e-9) &&
                    (!th.positive_only || e.nearest_n >= 1);
        e.qualified = e.on_comb && e.contrast >= th.min_contrast;
        r.on_comb += e.on_comb;
        r.qualified += e.qualified;
        r.peaks.push_back(e);
    }

    std::ostringstream msg;
    if (r.peaks.empty()) {
        r.pass = false;
        msg << "no comb";
    } else {
        r.pass = r.on_comb >= th.min_peaks && r.qualified == r.on_comb;
        msg << r.peaks.size() << " peaks, " << r.on_comb << " on the comb, " << r.qualified
            << " meet contrast " << th.min_contrast << ": " << (r.pass ? "comb" : "no comb");
    }
    r.summary = msg.str();
    return r;
}

nlohmann::json comb_report_json(const CombReport& r) {
    nlohmann::json peaks = nlohmann::json::array();
    for (const auto& e : r.peaks) {
        peaks.push_back({{"delta21", e.delta21},
                         {"gain", e.gain},
                         {"nearest_n", e.nearest_n},
                         {"offset", e.offset},
                         {"midpoint_gain", e.midpoint_gain},
                         {"contrast", e.contrast},
                         {"contrast_capped", e.capped},
                         {"on_comb", e.on_comb},
                         {"qualified", e.qualified}});
    }
    return {{"nu", r.nu},
            {"grid_step", r.grid_step},
            {"thresholds",
             {{"min_height", r.thresholds.min_height},
              {"max_offset", r.thresholds.max_offset < 0 ? r.grid_step : r.thresholds.max_offset},
              {"min_contrast", r.thresholds.min_contrast},
              {"min_peaks", r.thresholds.min_peaks},
              {"positive_only", r.thresholds.positive_only}}},
            {"peaks", peaks},
            {"on_comb", r.on_comb},
            {"qualified", r.qualified},
            {"pass", r.pass},
            {"summary", r.summary}};
}

} // namespace carl
