#include "carl/model.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace carl {

namespace {

double unit_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

bool finite(cplx z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

std::string join(const std::vector<std::string>& items) {
    std::ostringstream out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out << "; ";
        out << items[i];
    }
    return out.str();
}

} // namespace

void EnsembleState::resize(std::size_t n) {
    theta.resize(n, 0.0);
    p.resize(n, 0.0);
    sigma_re.resize(n, 0.0);
    sigma_im.resize(n, 0.0);
    sigma_z.resize(n, 1.0);
}

Nondimensionalized nondimensionalize(const PhysicalParams& phys, const SystemParams& base) {
    if (!(phys.k > 0) || !(phys.m > 0) || !(phys.g > 0) || !(phys.n_atoms > 0) ||
        !(phys.hbar > 0)) {
        throw InvalidParameter("k, m, g, n_atoms and hbar must be strictly positive");
    }
    if (!(phys.nu_z >= 0)) throw InvalidParameter("nu_z must be non-negative");

    Nondimensionalized out;
    out.omega_r = 2.0 * phys.hbar * phys.k * phys.k / phys.m;
    out.params = base;
    SystemParams& sp = out.params;
    sp.rho = std::cbrt(std::pow(phys.g * std::sqrt(phys.n_atoms) / out.omega_r, 2));
    const double scale = out.omega_r * sp.rho;
    sp.delta21 = (phys.omega2 - phys.omega1) / scale;
    sp.delta20 = (phys.omega2 - phys.omega0) / scale;
    sp.nu = phys.nu_z / scale;
    sp.n_atoms = static_cast<std::size_t>(std::llround(phys.n_atoms));
    return out;
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept {
    std::uint64_t z = base + (index + 1) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

EnsembleState init_ensemble(const InitialConditionSpec& spec, const SystemParams& params) {
    if (params.n_atoms == 0) throw InvalidParameter("n_atoms must be at least 1");
    if (auto errs = validate_initial(spec); !errs.empty()) throw InvalidParameter(join(errs));

    EnsembleState s(params.n_atoms);
    std::mt19937_64 rng(spec.seed);
    for (std::size_t j = 0; j < params.n_atoms; ++j) {
        const double u0 = unit_uniform(rng);
        const double u1 = 1.0 - unit_uniform(rng);
        const double u2 = unit_uniform(rng);
        const double cell = spec.loading == ThetaLoading::Lattice
                                ? (static_cast<double>(j) + 0.5) / static_cast<double>(params.n_atoms)
                                : u0;
        s.theta[j] = spec.theta_span * cell;
        // rounding can land exactly on the upper bound
        if (s.theta[j] >= spec.theta_span) s.theta[j] = std::nextafter(spec.theta_span, 0.0);
        s.p[j] = spec.p_mean +
                 spec.p_sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
    s.a1 = spec.a1_0;
    s.tau = 0.0;
    return s;
}

double position_mod1(double theta) noexcept {
    double z = theta_to_position(theta);
    z -= std::floor(z);
    return z >= 1.0 ? 0.0 : z;
}

ValidationReport validate_params(const SystemParams& p, std::optional<double> a1_estimate) {
    ValidationReport r;
    auto check = [&](bool ok, const char* msg) {
        if (!ok) r.errors.emplace_back(msg);
    };
    check(std::isfinite(p.nu) && p.nu >= 0, "nu must be finite and non-negative");
    check(std::isfinite(p.gamma) && p.gamma >= 0, "gamma must be finite and non-negative");
    check(std::isfinite(p.kappa) && p.kappa >= 0, "kappa must be finite and non-negative");
    check(std::isfinite(p.rho), "rho must be finite");
    check(!(p.rho <= 0), "rho must be positive");
    check(std::isfinite(p.a2), "a2 must be finite");
    check(std::isfinite(p.delta20), "delta20 must be finite");
    check(std::isfinite(p.delta21), "delta21 must be finite");
    check(p.n_atoms >= 1, "n_atoms must be at least 1");

    if (a1_estimate && r.ok()) {
        HarmonicCheck h;
        if (p.delta20 == 0.0) {
            h.threshold = std::numeric_limits<double>::infinity();
        } else {
            // signed Delta20 makes the inequality vacuous for red detuning
            h.threshold = 2.0 * p.rho * std::abs(*a1_estimate * p.a2) / std::abs(p.delta20);
        }
        h.holds = p.nu >= h.threshold;
        if (!h.holds) {
            std::ostringstream msg;
            msg << "trap frequency nu=" << p.nu << " is below 2 rho |A1 A2| / |Delta20| = "
                << h.threshold << "; secular harmonic motion is not guaranteed";
            r.warnings.push_back(msg.str());
        }
        r.harmonic = h;
    }
    return r;
}

std::vector<std::string> validate_initial(const InitialConditionSpec& s) {
    std::vector<std::string> errs;
    if (!std::isfinite(s.theta_span) || !(s.theta_span > 0))
        errs.emplace_back("theta_span must be finite and positive");
    if (!std::isfinite(s.p_mean)) errs.emplace_back("p_mean must be finite");
    if (!std::isfinite(s.p_sigma) || s.p_sigma < 0)
        errs.emplace_back("p_sigma must be finite and non-negative");
    if (!finite(s.a1_0) || std::abs(s.a1_0) == 0.0)
        errs.emplace_back("a1_0 must be finite and non-zero");
    return errs;
}

void require_valid(const SystemParams& params) {
    auto r = validate_params(params);
    if (!r.ok()) throw InvalidParameter(join(r.errors));
}

} // namespace carl
