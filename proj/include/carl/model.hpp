#pragma once

// Domain types for the trapped collective atomic recoil laser.
//
// All quantities are dimensionless unless a field says otherwise. Time is
// tau = omega_r * rho * t, positions are theta = 2 k z and momenta are in
// units of hbar k rho.
//
// Sign convention: sigma_z = -2 <sigma_z operator>, so the atomic ground
// state is sigma_z = +1. This is the opposite of the usual Bloch-vector
// convention.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace carl {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

class InvalidParameter : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Dimensionless model constants. Defaults are the trapped-gain parameter
/// set (nu = 2, Gamma = 1, kappa = 0.01, rho = 3, A2 = 2, Delta20 = -15).
struct SystemParams {
    double nu = 2.0;        ///< trap frequency nu_z / (omega_r rho)
    double gamma = 1.0;     ///< polarization and population damping
    double kappa = 0.01;    ///< probe field damping
    double rho = 3.0;       ///< collective coupling parameter
    double a2 = 2.0;        ///< real undepleted pump amplitude
    double delta20 = -15.0; ///< pump-atom detuning
    double delta21 = 4.0;   ///< pump-probe detuning
    std::size_t n_atoms = 200;
};

/// Laboratory constants in SI units.
struct PhysicalParams {
    double k = 0.0;       ///< optical wavenumber [1/m]
    double m = 0.0;       ///< atomic mass [kg]
    double g = 0.0;       ///< single-atom coupling [rad/s]
    double n_atoms = 0.0; ///< atom number (real so that scaling checks are exact)
    double nu_z = 0.0;    ///< axial trap frequency [rad/s]
    double omega0 = 0.0;  ///< atomic transition [rad/s]
    double omega1 = 0.0;  ///< probe [rad/s]
    double omega2 = 0.0;  ///< pump [rad/s]
    double hbar = 1.054571817e-34;
};

struct Nondimensionalized {
    SystemParams params;
    double omega_r = 0.0; ///< two-photon recoil frequency 2 hbar k^2 / m [rad/s]
};

/// Maps laboratory constants onto the dimensionless groups rho, Delta21,
/// Delta20 and nu. Damping, pump amplitude are taken from `base`.
Nondimensionalized nondimensionalize(const PhysicalParams& phys,
                                     const SystemParams& base = {});

struct AtomState {
    double theta = 0.0;
    double p = 0.0;
    cplx sigma{0.0, 0.0};
    double sigma_z = 1.0;
};

/// Ensemble in structure-of-arrays layout: component k of atom j lives at
/// index j of the k-th array.
struct EnsembleState {
    double tau = 0.0;
    std::vector<double> theta;
    std::vector<double> p;
    std::vector<double> sigma_re;
    std::vector<double> sigma_im;
    std::vector<double> sigma_z;
    cplx a1{0.0, 0.0};

    EnsembleState() = default;
    explicit EnsembleState(std::size_t n)
        : theta(n, 0.0), p(n, 0.0), sigma_re(n, 0.0), sigma_im(n, 0.0), sigma_z(n, 1.0) {}

    std::size_t size() const noexcept { return theta.size(); }
    void resize(std::size_t n);

    AtomState atom(std::size_t j) const {
        return {theta[j], p[j], {sigma_re[j], sigma_im[j]}, sigma_z[j]};
    }
    void set_atom(std::size_t j, const AtomState& a) {
        theta[j] = a.theta;
        p[j] = a.p;
        sigma_re[j] = a.sigma.real();
        sigma_im[j] = a.sigma.imag();
        sigma_z[j] = a.sigma_z;
    }

    bool operator==(const EnsembleState&) const = default;
};

/// Lattice places atom j at theta_span (j + 1/2) / N, a quiet start whose
/// spatial bunching vanishes; Random draws positions independently.
enum class ThetaLoading { Lattice, Random };

struct InitialConditionSpec {
    double theta_span = 4.0 * kPi; ///< one optical wavelength
    ThetaLoading loading = ThetaLoading::Lattice;
    double p_mean = 0.0;
    double p_sigma = 0.8; ///< standard deviation
    cplx a1_0{0.01, 0.0};
    std::uint64_t seed = 1;
};

/// Draws a reproducible ensemble: theta uniform in [0, theta_span) (lattice
/// or random, see ThetaLoading), p normal via Box-Muller on the 64-bit
/// Mersenne twister, ground internal state (sigma = 0, sigma_z = 1).
///
/// Uniform variates are (x >> 11) * 2^-53 of successive mt19937_64 outputs.
/// Each atom consumes exactly three variates in order: one for theta (unused
/// for the lattice) and two for the Box-Muller pair (u1 in (0,1], u2), of
/// which only the cosine branch is used. The stream layout never depends on
/// p_sigma or the loading, so the same seed yields the same momenta.
EnsembleState init_ensemble(const InitialConditionSpec& spec, const SystemParams& params);

/// Derives an independent stream seed for task `index` from `base`
/// (splitmix64 finalizer over base + index * golden-ratio increment).
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) noexcept;

/// z / lambda for a scaled position; not reduced modulo 1.
constexpr double theta_to_position(double theta) noexcept { return theta / (4.0 * kPi); }

/// z / lambda reduced into [0, 1).
double position_mod1(double theta) noexcept;

struct HarmonicCheck {
    double threshold = 0.0; ///< 2 rho |A1 A2| / |Delta20|
    bool holds = false;     ///< nu >= threshold
};

struct ValidationReport {
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
    std::optional<HarmonicCheck> harmonic;

    bool ok() const noexcept { return errors.empty(); }
};

/// Lists every invariant violation. When `a1_estimate` is given also checks
/// whether the trap dominates the optical force (harmonic approximation).
ValidationReport validate_params(const SystemParams& params,
                                 std::optional<double> a1_estimate = std::nullopt);

/// Errors in an initial-condition spec, empty when valid.
std::vector<std::string> validate_initial(const InitialConditionSpec& spec);

/// Throws InvalidParameter listing every error when the params are invalid.
void require_valid(const SystemParams& params);

} // namespace carl
