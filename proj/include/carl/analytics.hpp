#pragma once

// Closed-form gain machinery for the trapped system: adiabatic polarization,
// integer-order Bessel functions, the Jacobi-Anger expansion of the secular
// trap motion, the resonance kernel and the resonant gain predictors.

#include <span>
#include <vector>

#include "carl/diagnostics.hpp"
#include "carl/model.hpp"

namespace carl {

struct SteadyPolarization {
    cplx s0{0.0, 0.0};
    double rabi = 0.0; ///< Omega = 2 rho A2
};

/// Long-time average polarization under the pump alone:
///   S0 = -Omega (Gamma + i Delta20) / (2 (Omega^2 + Gamma^2 + Delta20^2)).
SteadyPolarization steady_polarization(const SystemParams& params);

inline constexpr int kBesselMaxOrder = 200;
inline constexpr double kBesselMaxArg = 500.0;

/// J_n(x) for |n| <= 200, |x| <= 500, absolute error below 1e-10.
double bessel_jn(int n, double x);

/// J_0(x) .. J_{n_max}(x) from a single normalized backward recurrence.
/// Bounds are the same as bessel_jn.
std::vector<double> bessel_jn_table(int n_max, double x);

/// K = (e^{(kappa - i delta) tau} - 1) / (kappa - i delta), continuous
/// through kappa = delta = 0.
cplx resonance_kernel(double kappa, double delta, double tau);

/// Truncation order ceil(a + 10 a^{1/3} + 10) for Bessel arguments up to a.
int n_max_rule(double max_amp);

/// sum_{|n| <= n_max} J_n(amp) e^{i n (phase - pi/2)} e^{i n nu tau}, which
/// converges to e^{-i amp cos(nu tau + phase)}.
cplx jacobi_anger_sum(double amp, double phase, double nu_tau, int n_max);

/// Largest |truncated sum - exact exponential| over `samples` points of
/// nu tau in [0, 2 pi) and phase in [0, 2 pi).
double jacobi_anger_residual(double amp, int n_max, int samples = 64);

/// Upper bound on the discarded tail sum_{|n| > n_max} |J_n(amp)|.
double bessel_tail_bound(double amp, int n_max);

struct PredictorInput {
    std::vector<SecularOscillation> oscillations;
    cplx s0{0.0, 0.0};
    double tau = 0.0;
    int n_max = 1;
};

struct CtildeResult {
    cplx value{0.0, 0.0};
    int n_max = 0;
    int n_required = 0;          ///< n_max_rule for the largest amplitude
    bool truncation_warning = false;
    double truncation_residual = 0.0; ///< |S0| |K|max times the worst-atom tail bound
};

/// Dc-polarization estimate of the Laplace-transformed coherence:
///   S0 sum_n (1/N) sum_j J_n(amp_j) e^{i n (phase_j - pi/2)} K(kappa, D21 - n nu, tau).
CtildeResult predict_ctilde(const PredictorInput& input, double kappa, double delta21,
                            double nu);

/// Probe gain written in terms of C~: e^{-2 kappa tau}[|C~/A1(0)|^2 + 2 Re(C~/A1(0))] + e^{-2 kappa tau} - 1.
double gain_from_ctilde(cplx ctilde, double kappa, double tau, cplx a1_0);

struct GainTerms {
    double coherent = 0.0;   ///< ((1 - e^{-kappa tau})/kappa)^2 |C0/A1(0)|^2
    double cross = 0.0;      ///< 2 e^{-kappa tau} (1 - e^{-kappa tau})/kappa Re(C0/A1(0))
    double decay = 0.0;      ///< e^{-2 kappa tau} - 1

    double total() const noexcept { return coherent + cross + decay; }
};

/// Resonant gain for an asymptotic coherence C0 (Delta21 = n nu).
/// kappa = 0 is taken as the limit (1 - e^{-kappa tau})/kappa -> tau.
GainTerms resonant_gain_terms(cplx c0, double kappa, double tau, cplx a1_0);

/// Asymptotic coherence C0 = (1/N) sum_j S0 e^{i amp_j cos(phase_j)}.
cplx asymptotic_coherence(std::span<const SecularOscillation> oscillations, cplx s0);

/// Resonant gain from the secular order parameter, C0 = S0 R0 e^{i Phi0}.
GainTerms predict_gain_resonant_terms(const SystemParams& params, double tau,
                                      const OrderParameter& r0, cplx s0, cplx a1_0);

double predict_gain_resonant(const SystemParams& params, double tau, const OrderParameter& r0,
                             cplx s0, cplx a1_0);

/// Raman resonances {n nu : n_lo <= n <= n_hi}.
std::vector<double> resonance_comb(double nu, int n_lo, int n_hi);

} // namespace carl
