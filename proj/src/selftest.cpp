#include "carl/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "carl/analytics.hpp"
#include "carl/dynamics.hpp"

namespace carl {

namespace {

VectorField field_for(const SystemParams& params, MotionMode mode, ProbeMode probe,
                      const SelfTestOptions& opt) {
    if (!opt.perturb_inversion_coupling) return model_field(params, mode, probe);
    return [params, mode, probe](const EnsembleState& s, EnsembleState& out) {
        evaluate_rhs(s, params, mode, probe, out);
        for (std::size_t j = 0; j < s.size(); ++j) {
            const double relax = -params.gamma * (s.sigma_z[j] - 1.0);
            out.sigma_z[j] = -(out.sigma_z[j] - relax) + relax;
        }
    };
}

SelfTestResult timed(const std::string& name, const std::function<void(SelfTestResult&)>& body) {
    SelfTestResult r;
    r.name = name;
    const auto t0 = std::chrono::steady_clock::now();
    try {
        body(r);
    } catch (const std::exception& e) {
        r.passed = false;
        r.detail = std::string("exception: ") + e.what();
    }
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

// Random points on the Bloch sphere, random positions and momenta.
EnsembleState bloch_ensemble(std::size_t n, std::uint64_t seed) {
    EnsembleState s(n);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        const double polar = std::acos(1.0 - 2.0 * u(rng));
        const double azimuth = 2.0 * kPi * u(rng);
        s.theta[j] = 4.0 * kPi * u(rng);
        s.p[j] = 1.6 * (u(rng) - 0.5);
        s.sigma_re[j] = 0.5 * std::sin(polar) * std::cos(azimuth);
        s.sigma_im[j] = 0.5 * std::sin(polar) * std::sin(azimuth);
        s.sigma_z[j] = std::cos(polar);
    }
    s.a1 = {0.05, 0.02};
    return s;
}

double bloch_norm(const EnsembleState& s, std::size_t j) {
    return s.sigma_re[j] * s.sigma_re[j] + s.sigma_im[j] * s.sigma_im[j] +
           0.25 * s.sigma_z[j] * s.sigma_z[j];
}

// Phase-space error; theta alone is superconvergent at the turning point.
double harmonic_error(std::size_t steps) {
    SystemParams p;
    p.n_atoms = 1;
    p.a2 = 0.0;
    p.nu = 2.0;
    EnsembleState s(1);
    s.theta[0] = 1.0;
    s.a1 = 0.0;
    const double h = (0.5 * kPi) / static_cast<double>(steps);
    Rk4Stepper stepper;
    const auto field = model_field(p, MotionMode::Full);
    for (std::size_t i = 0; i < steps; ++i) stepper.step(s, h, field);
    const double t = 0.5 * kPi;
    return std::hypot(s.theta[0] - std::cos(p.nu * t), (s.p[0] + p.nu * std::sin(p.nu * t)) / p.nu);
}

} // namespace

std::vector<SelfTestResult> run_selftest(const SelfTestOptions& opt) {
    std::vector<SelfTestResult> out;

    out.push_back(timed("bloch_conservation", [&](SelfTestResult& r) {
        SystemParams p;
        p.gamma = 0.0;
        p.n_atoms = 16;
        const auto init = bloch_ensemble(p.n_atoms, 7);
        // classical RK4 damps the ~19 rad/tau precession by O(h^5) per unit time,
        // so the step is refined until that damping sits well below the bound
        RunSchedule sched{0.001, 50.0, 10000, {}};
        auto traj = integrate_field(init, field_for(p, MotionMode::Full, ProbeMode::Dynamic, opt),
                                    sched, MotionMode::Full);
        double drift = 0.0;
        for (std::size_t j = 0; j < p.n_atoms; ++j)
            drift = std::max(drift, std::abs(bloch_norm(traj.final_state, j) - bloch_norm(init, j)));
        r.value = traj.diverged ? INFINITY : drift;
        r.threshold = 1e-6;
        r.passed = r.value < r.threshold;
        r.detail = "max |d(|sigma|^2 + sigma_z^2/4)| over tau=50, Gamma=0, N=16, dtau=0.001";
    }));

    out.push_back(timed("rk4_order", [&](SelfTestResult& r) {
        const double coarse = harmonic_error(16);
        const double fine = harmonic_error(32);
        r.value = coarse / fine;
        r.threshold = 12.0;
        r.passed = r.value >= 12.0 && r.value <= 20.0;
        std::ostringstream d;
        d << "error ratio for h vs h/2 on the free trap orbit (errors " << coarse << ", " << fine
          << "), expected in [12, 20]";
        r.detail = d.str();
    }));

    out.push_back(timed("probe_quadrature", [&](SelfTestResult& r) {
        SystemParams p;
        p.n_atoms = 32;
        InitialConditionSpec ic;
        ic.seed = 3;
        const auto init = init_ensemble(ic, p);
        RunSchedule sched{0.005, 20.0, 1, {}};
        auto traj = integrate_field(init, field_for(p, MotionMode::Full, ProbeMode::Dynamic, opt),
                                    sched, MotionMode::Full);
        const auto rebuilt = reconstruct_probe(traj.c_series, traj.times, ic.a1_0, p);
        double worst = 0.0, scale = 0.0;
        for (std::size_t i = 0; i < rebuilt.size(); ++i) {
            worst = std::max(worst, std::abs(rebuilt[i] - traj.a1_series[i]));
            scale = std::max(scale, std::abs(traj.a1_series[i]));
        }
        r.value = worst / scale;
        r.threshold = 1e-3;
        r.passed = !traj.diverged && r.value < r.threshold;
        r.detail = "max |A1 direct - A1 quadrature| / max |A1|, N=32, tau=20";
    }));

    out.push_back(timed("jacobi_anger", [&](SelfTestResult& r) {
        double worst = 0.0;
        for (double amp : {0.5, 2.0, 10.0})
            worst = std::max(worst, jacobi_anger_residual(amp, n_max_rule(amp), 32));
        r.value = worst;
        r.threshold = 1e-8;
        r.passed = worst < r.threshold;
        r.detail = "truncated expansion vs exp(-i a cos(x)), a in {0.5, 2, 10}";
    }));

    out.push_back(timed("kernel_limit", [&](SelfTestResult& r) {
        const double expected = std::expm1(1.0) / 0.01;
        const cplx k0 = resonance_kernel(0.01, 0.0, 100.0);
        const double rel = std::abs(k0 - expected) / expected;
        const double jump = std::max(std::abs(resonance_kernel(0.01, 1e-9, 100.0) - k0),
                                     std::abs(resonance_kernel(0.01, -1e-9, 100.0) - k0)) /
                            std::abs(k0);
        r.value = std::max(rel, jump);
        r.threshold = 1e-6;
        r.passed = r.value < r.threshold;
        r.detail = "K(0.01, 0, 100) vs (e - 1)/0.01 and continuity at delta = +-1e-9";
    }));

    out.push_back(timed("adiabatic_polarization", [&](SelfTestResult& r) {
        SystemParams p;
        p.n_atoms = 1;
        EnsembleState s(1);
        s.a1 = 0.0;
        RunSchedule sched{0.005, 50.0, 1, {}};
        auto traj = integrate_field(
            s, field_for(p, MotionMode::Motionless, ProbeMode::Frozen, opt), sched,
            MotionMode::Motionless);
        // sigma itself is not recorded; C = sigma e^{-i theta} with theta = 0
        cplx mean{0.0, 0.0};
        std::size_t n = 0;
        for (std::size_t i = 0; i < traj.size(); ++i) {
            if (traj.times[i] < 20.0) continue;
            mean += traj.c_series[i];
            ++n;
        }
        mean /= static_cast<double>(n);
        const cplx s0 = steady_polarization(p).s0;
        r.value = std::max(std::abs(mean.real() - s0.real()) / std::abs(s0.real()),
                           std::abs(mean.imag() - s0.imag()) / std::abs(s0.imag()));
        r.threshold = 0.2;
        r.passed = r.value < r.threshold;
        r.detail = "time-averaged sigma over tau in [20, 50] vs S0, per component";
    }));

    return out;
}

} // namespace carl
