#include "carl/dynamics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "carl/diagnostics.hpp"

namespace carl {

namespace {

// x * 0 is NaN exactly when x is NaN or infinite, so one sum per array
// detects any non-finite entry without branching in the loop.
bool all_finite(std::span<const double> v) {
    double acc = 0.0;
    for (double x : v) acc += x * 0.0;
    return acc == 0.0;
}

bool all_finite(const EnsembleState& s) {
    return all_finite(s.theta) && all_finite(s.p) && all_finite(s.sigma_re) &&
           all_finite(s.sigma_im) && all_finite(s.sigma_z) && std::isfinite(s.a1.real()) &&
           std::isfinite(s.a1.imag());
}

std::optional<std::size_t> first_bad_atom(const EnsembleState& s) {
    for (std::size_t j = 0; j < s.size(); ++j) {
        if (!std::isfinite(s.theta[j]) || !std::isfinite(s.p[j]) ||
            !std::isfinite(s.sigma_re[j]) || !std::isfinite(s.sigma_im[j]) ||
            !std::isfinite(s.sigma_z[j]))
            return j;
    }
    return std::nullopt;
}

double max_abs(const EnsembleState& s) {
    double m = std::abs(s.a1);
    for (const auto* v : {&s.theta, &s.p, &s.sigma_re, &s.sigma_im, &s.sigma_z})
        for (double x : *v) m = std::max(m, std::abs(x));
    return m;
}

// dst = base + h * k, per component. tau is carried along.
void axpy(EnsembleState& dst, const EnsembleState& base, double h, const EnsembleState& k) {
    const std::size_t n = base.size();
    dst.resize(n);
    for (std::size_t j = 0; j < n; ++j) {
        dst.theta[j] = base.theta[j] + h * k.theta[j];
        dst.p[j] = base.p[j] + h * k.p[j];
        dst.sigma_re[j] = base.sigma_re[j] + h * k.sigma_re[j];
        dst.sigma_im[j] = base.sigma_im[j] + h * k.sigma_im[j];
        dst.sigma_z[j] = base.sigma_z[j] + h * k.sigma_z[j];
    }
    dst.a1 = base.a1 + h * k.a1;
    dst.tau = base.tau + h;
}

std::string describe_atom(std::size_t j) {
    std::ostringstream o;
    o << "non-finite state at atom " << j;
    return o.str();
}

// Eight-point Gauss-Legendre nodes and weights on [-1, 1].
constexpr std::array<double, 4> kGlNode{0.1834346424956498, 0.5255324099163290,
                                        0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGlWeight{0.3626837833783620, 0.3137066458778873,
                                          0.2223810344533745, 0.1012285362903763};

// Lagrange interpolation through the four samples starting at `first`.
cplx cubic_at(std::span<const cplx> c, std::span<const double> t, std::size_t first, double x) {
    cplx sum{0.0, 0.0};
    for (std::size_t j = first; j < first + 4; ++j) {
        double w = 1.0;
        for (std::size_t m = first; m < first + 4; ++m)
            if (m != j) w *= (x - t[m]) / (t[j] - t[m]);
        sum += w * c[j];
    }
    return sum;
}

} // namespace

void evaluate_rhs(const EnsembleState& s, const SystemParams& prm, MotionMode mode,
                  ProbeMode probe, EnsembleState& out) {
    const std::size_t n = s.size();
    out.resize(n);
    const double a1r = s.a1.real();
    const double a1i = s.a1.imag();
    const double a2 = prm.a2;
    const double rho = prm.rho;
    const double gam = prm.gamma;
    const double nu2 = prm.nu * prm.nu;
    const bool moving = mode == MotionMode::Full;

    double c_re = 0.0, c_im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double th = s.theta[j];
        const double c = std::cos(th);
        const double sn = std::sin(th);
        const double sr = s.sigma_re[j];
        const double si = s.sigma_im[j];
        const double sz = s.sigma_z[j];

        // f = A1 e^{i theta}; g = f + A2 is the total field seen by atom j
        const double fr = a1r * c - a1i * sn;
        const double fi = a1r * sn + a1i * c;
        const double gr = fr + a2;
        const double gi = fi;

        if (moving) {
            out.theta[j] = s.p[j];
            // -nu^2 theta - 2 Re(conj(f) sigma) + 2 A2 Re(sigma)
            out.p[j] = -nu2 * th - 2.0 * (fr * sr + fi * si) + 2.0 * a2 * sr;
        } else {
            out.theta[j] = 0.0;
            out.p[j] = 0.0;
        }
        // 4 rho Re(conj(g) sigma) - Gamma (sigma_z - 1)
        out.sigma_z[j] = 4.0 * rho * (gr * sr + gi * si) - gam * (sz - 1.0);
        // i (D20 + p/2) sigma - rho sigma_z g - Gamma sigma
        const double w = prm.delta20 + 0.5 * s.p[j];
        out.sigma_re[j] = -w * si - rho * sz * gr - gam * sr;
        out.sigma_im[j] = w * sr - rho * sz * gi - gam * si;

        // sigma e^{-i theta}
        c_re += sr * c + si * sn;
        c_im += si * c - sr * sn;
    }

    if (probe == ProbeMode::Dynamic) {
        const double inv_n = 1.0 / static_cast<double>(n);
        const cplx drive{-prm.kappa, prm.delta21};
        out.a1 = drive * s.a1 + cplx{c_re * inv_n, c_im * inv_n};
    } else {
        out.a1 = 0.0;
    }
    out.tau = 1.0;
}

EnsembleState rhs(const EnsembleState& state, const SystemParams& params, MotionMode mode,
                  ProbeMode probe) {
    if (state.size() == 0) throw InvalidParameter("rhs: empty ensemble");
    if (auto bad = first_bad_atom(state)) throw NumericalError(describe_atom(*bad), bad, {});
    if (!std::isfinite(state.a1.real()) || !std::isfinite(state.a1.imag()))
        throw NumericalError("non-finite probe amplitude", std::nullopt, std::nullopt);
    EnsembleState out;
    evaluate_rhs(state, params, mode, probe, out);
    return out;
}

VectorField model_field(const SystemParams& params, MotionMode mode, ProbeMode probe) {
    return [params, mode, probe](const EnsembleState& s, EnsembleState& out) {
        evaluate_rhs(s, params, mode, probe, out);
    };
}

void Rk4Stepper::step(EnsembleState& state, double dtau, const VectorField& field) {
    if (!(dtau > 0) || !std::isfinite(dtau))
        throw InvalidParameter("step_rk4: dtau must be positive and finite");

    auto check = [](const EnsembleState& k, int stage) {
        if (!all_finite(k)) {
            auto bad = first_bad_atom(k);
            std::ostringstream msg;
            msg << "non-finite derivative in RK4 stage " << stage;
            if (bad) msg << " at atom " << *bad;
            throw NumericalError(msg.str(), bad, stage);
        }
    };

    field(state, k1_);
    check(k1_, 1);
    axpy(tmp_, state, 0.5 * dtau, k1_);
    field(tmp_, k2_);
    check(k2_, 2);
    axpy(tmp_, state, 0.5 * dtau, k2_);
    field(tmp_, k3_);
    check(k3_, 3);
    axpy(tmp_, state, dtau, k3_);
    field(tmp_, k4_);
    check(k4_, 4);

    const double h6 = dtau / 6.0;
    const std::size_t n = state.size();
    auto combine = [&](std::vector<double>& y, const std::vector<double>& a,
                       const std::vector<double>& b, const std::vector<double>& c,
                       const std::vector<double>& d) {
        for (std::size_t j = 0; j < n; ++j) y[j] += h6 * (a[j] + 2.0 * (b[j] + c[j]) + d[j]);
    };
    combine(state.theta, k1_.theta, k2_.theta, k3_.theta, k4_.theta);
    combine(state.p, k1_.p, k2_.p, k3_.p, k4_.p);
    combine(state.sigma_re, k1_.sigma_re, k2_.sigma_re, k3_.sigma_re, k4_.sigma_re);
    combine(state.sigma_im, k1_.sigma_im, k2_.sigma_im, k3_.sigma_im, k4_.sigma_im);
    combine(state.sigma_z, k1_.sigma_z, k2_.sigma_z, k3_.sigma_z, k4_.sigma_z);
    state.a1 += h6 * (k1_.a1 + 2.0 * (k2_.a1 + k3_.a1) + k4_.a1);
    state.tau += dtau;
}

EnsembleState step_rk4(const EnsembleState& state, const SystemParams& params, double dtau,
                       MotionMode mode, ProbeMode probe) {
    EnsembleState next = state;
    Rk4Stepper stepper;
    stepper.step(next, dtau, model_field(params, mode, probe));
    return next;
}

std::vector<std::string> validate_schedule(const RunSchedule& s) {
    std::vector<std::string> errs;
    if (!(s.dtau > 0) || !std::isfinite(s.dtau)) errs.emplace_back("dtau must be positive");
    if (!(s.tau_end >= 0) || !std::isfinite(s.tau_end))
        errs.emplace_back("tau_end must be finite and non-negative");
    if (s.record_stride == 0) errs.emplace_back("record_stride must be at least 1");
    if (!std::is_sorted(s.snapshot_times.begin(), s.snapshot_times.end()))
        errs.emplace_back("snapshot_times must be sorted");
    for (double t : s.snapshot_times) {
        if (!(t >= 0) || !(t <= s.tau_end)) {
            errs.emplace_back("snapshot_times must lie in [0, tau_end]");
            break;
        }
    }
    return errs;
}

namespace {

struct StepPlan {
    std::size_t full_steps = 0;
    double last_step = 0.0; // > 0 when a shortened final step is needed

    std::size_t total() const { return full_steps + (last_step > 0 ? 1 : 0); }
};

StepPlan plan_steps(double dtau, double tau_end) {
    StepPlan plan;
    const double ratio = tau_end / dtau;
    const double whole = std::floor(ratio + 1e-9);
    plan.full_steps = static_cast<std::size_t>(whole);
    const double rest = tau_end - whole * dtau;
    if (rest > 1e-9 * dtau) plan.last_step = rest;
    return plan;
}

} // namespace

Trajectory integrate_field(const EnsembleState& initial, const VectorField& field,
                           const RunSchedule& schedule, MotionMode mode) {
    if (auto errs = validate_schedule(schedule); !errs.empty())
        throw InvalidParameter("invalid schedule: " + errs.front());
    if (initial.size() == 0) throw InvalidParameter("integrate: empty ensemble");

    EnsembleState state = initial;
    state.tau = 0.0;
    if (mode == MotionMode::Motionless) std::fill(state.p.begin(), state.p.end(), 0.0);

    const StepPlan plan = plan_steps(schedule.dtau, schedule.tau_end);
    const std::size_t total = plan.total();

    std::vector<std::size_t> snap_steps;
    for (double t : schedule.snapshot_times) {
        auto k = static_cast<std::size_t>(std::llround(t / schedule.dtau));
        snap_steps.push_back(std::min(k, total));
    }

    Trajectory traj;
    auto record = [&] {
        const OrderParameter op = order_parameter(state);
        traj.times.push_back(state.tau);
        traj.a1_series.push_back(state.a1);
        traj.c_series.push_back(coherence(state));
        traj.r_series.push_back(op.r);
        traj.phi_series.push_back(op.phi);
    };
    std::size_t next_snap = 0;
    auto snapshot = [&](std::size_t step) {
        while (next_snap < snap_steps.size() && snap_steps[next_snap] == step) {
            traj.snapshots.push_back({state.tau, state});
            ++next_snap;
        }
    };

    record();
    snapshot(0);

    Rk4Stepper stepper;
    for (std::size_t step = 1; step <= total; ++step) {
        const bool short_step = step > plan.full_steps;
        const double h = short_step ? plan.last_step : schedule.dtau;
        try {
            stepper.step(state, h, field);
        } catch (const NumericalError& e) {
            traj.diverged = true;
            traj.divergence_reason = e.what();
            break;
        }
        state.tau = short_step ? schedule.tau_end : static_cast<double>(step) * schedule.dtau;
        if (max_abs(state) > kDivergenceThreshold) {
            traj.diverged = true;
            std::ostringstream msg;
            msg << "state exceeded " << kDivergenceThreshold << " at tau=" << state.tau;
            traj.divergence_reason = msg.str();
            break;
        }
        if (step % schedule.record_stride == 0 || step == total) record();
        snapshot(step);
    }
    traj.final_state = std::move(state);
    return traj;
}

Trajectory integrate(const EnsembleState& initial, const SystemParams& params,
                     const RunSchedule& schedule, MotionMode mode, ProbeMode probe) {
    require_valid(params);
    if (initial.size() != params.n_atoms)
        throw InvalidParameter("integrate: ensemble size does not match n_atoms");
    return integrate_field(initial, model_field(params, mode, probe), schedule, mode);
}

std::optional<EnsembleState> evolve(const EnsembleState& initial, const SystemParams& params,
                                    double dtau, double tau_end, MotionMode mode) {
    require_valid(params);
    if (!(dtau > 0) || !(tau_end >= 0)) throw InvalidParameter("evolve: invalid step or span");
    EnsembleState state = initial;
    state.tau = 0.0;
    if (mode == MotionMode::Motionless) std::fill(state.p.begin(), state.p.end(), 0.0);
    const StepPlan plan = plan_steps(dtau, tau_end);
    const auto field = model_field(params, mode, ProbeMode::Dynamic);
    Rk4Stepper stepper;
    for (std::size_t step = 1; step <= plan.total(); ++step) {
        const bool short_step = step > plan.full_steps;
        try {
            stepper.step(state, short_step ? plan.last_step : dtau, field);
        } catch (const NumericalError&) {
            return std::nullopt;
        }
        state.tau = short_step ? tau_end : static_cast<double>(step) * dtau;
        if (std::abs(state.a1) > kDivergenceThreshold) return std::nullopt;
    }
    if (max_abs(state) > kDivergenceThreshold) return std::nullopt;
    return state;
}

std::vector<cplx> reconstruct_probe(std::span<const cplx> c_series,
                                    std::span<const double> times, cplx a1_0,
                                    const SystemParams& params) {
    if (c_series.size() != times.size())
        throw InvalidParameter("reconstruct_probe: series lengths differ");
    std::vector<cplx> out;
    if (times.empty()) return out;
    out.reserve(times.size());

    // Homogeneous solution relative to the first sample time.
    const cplx growth{-params.kappa, params.delta21}; // i D21 - kappa
    cplx a = a1_0 * std::exp(growth * times[0]);
    out.push_back(a);
    const std::size_t n = times.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double t0 = times[i - 1], t1 = times[i];
        const double h = t1 - t0;
        if (!(h > 0)) throw InvalidParameter("reconstruct_probe: times must increase");
        // A(t1) = e^{g h} A(t0) + int_t0^t1 C(t) e^{g (t1 - t)} dt, C cubic
        // through the samples around the interval (linear with two samples).
        const std::size_t first = n < 4 ? 0 : std::clamp<std::size_t>(i, 2, n - 2) - 2;
        const std::size_t pieces = 1 + static_cast<std::size_t>(std::abs(growth * h) / 2.0);
        const double sub = h / static_cast<double>(pieces);
        cplx integral{0.0, 0.0};
        for (std::size_t k = 0; k < pieces; ++k) {
            const double mid = t0 + (static_cast<double>(k) + 0.5) * sub;
            for (std::size_t q = 0; q < kGlNode.size(); ++q)
                for (double sign : {-1.0, 1.0}) {
                    const double x = mid + sign * 0.5 * sub * kGlNode[q];
                    const cplx cx = n < 4 ? c_series[i - 1] + (x - t0) / h * (c_series[i] - c_series[i - 1])
                                          : cubic_at(c_series, times, first, x);
                    integral += 0.5 * sub * kGlWeight[q] * cx * std::exp(growth * (t1 - x));
                }
        }
        a = std::exp(growth * h) * a + integral;
        out.push_back(a);
    }
    return out;
}

} // namespace carl
