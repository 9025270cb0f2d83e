#pragma once

#include <span>
#include <string>
#include <vector>

#include "carl/model.hpp"

namespace carl {

/// R e^{i Phi} = (1/N) sum_j e^{-i theta_j}.
struct OrderParameter {
    double r = 0.0;
    double phi = 0.0; ///< in (-pi, pi]; 0 when r == 0
};

/// Secular trap motion theta(tau) ~ amp cos(nu tau + phase) + center_offset.
struct SecularOscillation {
    double amp = 0.0;
    double phase = 0.0;
    double center_offset = 0.0;
};

/// Relative intensity gain (|A1(tau)|^2 - |A1(0)|^2) / |A1(0)|^2.
double gain(cplx a1_tau, cplx a1_0);

/// C = (1/N) sum_j sigma_j e^{-i theta_j}, summed in atom order.
cplx coherence(const EnsembleState& atoms);

OrderParameter order_parameter(const EnsembleState& atoms);
OrderParameter order_parameter(std::span<const double> theta);

/// Instantaneous amplitude and phase of trap motion from (theta, p).
/// Exact inverse of theta = amp cos(nu tau + phase), p = -nu amp sin(nu tau + phase).
SecularOscillation extract_oscillation(double theta, double p, double nu, double tau,
                                       double center_offset = 0.0);

std::vector<SecularOscillation> extract_oscillations(const EnsembleState& atoms, double nu,
                                                     double center_offset = 0.0);

/// R0 e^{i Phi0} = (1/N) sum_j e^{i amp_j cos(phase_j)}.
OrderParameter secular_order_parameter(std::span<const SecularOscillation> oscillations);

/// Fraction of atoms whose z/lambda mod 1 lies in [center - halfwidth,
/// center + halfwidth) on the unit circle.
double bunching_fraction(const EnsembleState& atoms, double center, double halfwidth);
double bunching_fraction(std::span<const double> theta, double center, double halfwidth);

/// Gain versus pump-probe detuning on a strictly increasing grid.
struct Spectrum {
    std::vector<double> delta21;
    std::vector<double> gain;
    std::vector<bool> diverged;
    std::string config_digest;
    double wall_seconds = 0.0;

    std::size_t size() const noexcept { return delta21.size(); }
};

struct Peak {
    std::size_t index = 0;
    double delta21 = 0.0;
    double gain = 0.0;
};

/// Interior strict local maxima with gain >= min_height. A flat top counts
/// once, at its lowest index, and only when it falls off on both sides.
std::vector<Peak> find_peaks(const Spectrum& spectrum, double min_height);

/// Linear interpolation of the spectrum at `delta21`, clamped to the grid.
double interpolate_gain(const Spectrum& spectrum, double delta21);

} // namespace carl
