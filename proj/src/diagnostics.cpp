#include "carl/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace carl {

namespace {

// Reduces an angle into (-pi, pi].
double wrap_angle(double a) {
    a = std::remainder(a, 2.0 * kPi);
    return a <= -kPi ? a + 2.0 * kPi : a;
}

OrderParameter from_sum(double re, double im, std::size_t n) {
    OrderParameter op;
    const double inv = 1.0 / static_cast<double>(n);
    op.r = std::min(1.0, std::hypot(re * inv, im * inv));
    // below this the sum is cancellation round-off and its argument is noise
    if (op.r < 1e-12) op.r = 0.0;
    op.phi = op.r == 0.0 ? 0.0 : wrap_angle(std::atan2(im, re));
    return op;
}

} // namespace

double gain(cplx a1_tau, cplx a1_0) {
    const double i0 = std::norm(a1_0);
    if (i0 == 0.0) throw InvalidParameter("gain: initial probe amplitude is zero");
    return (std::norm(a1_tau) - i0) / i0;
}

cplx coherence(const EnsembleState& atoms) {
    const std::size_t n = atoms.size();
    if (n == 0) throw InvalidParameter("coherence: empty ensemble");
    double re = 0.0, im = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const double c = std::cos(atoms.theta[j]);
        const double s = std::sin(atoms.theta[j]);
        re += atoms.sigma_re[j] * c + atoms.sigma_im[j] * s;
        im += atoms.sigma_im[j] * c - atoms.sigma_re[j] * s;
    }
    return {re / static_cast<double>(n), im / static_cast<double>(n)};
}

OrderParameter order_parameter(std::span<const double> theta) {
    if (theta.empty()) throw InvalidParameter("order_parameter: empty ensemble");
    double re = 0.0, im = 0.0;
    for (double t : theta) {
        re += std::cos(t);
        im -= std::sin(t);
    }
    return from_sum(re, im, theta.size());
}

OrderParameter order_parameter(const EnsembleState& atoms) {
    return order_parameter(std::span<const double>(atoms.theta));
}

SecularOscillation extract_oscillation(double theta, double p, double nu, double tau,
                                       double center_offset) {
    if (!(nu > 0)) throw InvalidParameter("extract_oscillation: nu must be positive");
    const double x = theta - center_offset;
    const double y = -p / nu;
    SecularOscillation o;
    o.amp = std::hypot(x, y);
    o.phase = wrap_angle(std::atan2(y, x) - nu * tau);
    o.center_offset = center_offset;
    return o;
}

std::vector<SecularOscillation> extract_oscillations(const EnsembleState& atoms, double nu,
                                                     double center_offset) {
    std::vector<SecularOscillation> out;
    out.reserve(atoms.size());
    for (std::size_t j = 0; j < atoms.size(); ++j)
        out.push_back(extract_oscillation(atoms.theta[j], atoms.p[j], nu, atoms.tau,
                                          center_offset));
    return out;
}

OrderParameter secular_order_parameter(std::span<const SecularOscillation> osc) {
    if (osc.empty()) throw InvalidParameter("secular_order_parameter: empty ensemble");
    double re = 0.0, im = 0.0;
    for (const auto& o : osc) {
        const double arg = o.amp * std::cos(o.phase);
        re += std::cos(arg);
        im += std::sin(arg);
    }
    return from_sum(re, im, osc.size());
}

double bunching_fraction(std::span<const double> theta, double center, double halfwidth) {
    if (theta.empty()) return 0.0;
    std::size_t inside = 0;
    for (double t : theta) {
        double d = position_mod1(t) - center;
        d -= std::floor(d + 0.5); // circular offset in [-0.5, 0.5)
        if (d >= -halfwidth && d < halfwidth) ++inside;
    }
    return static_cast<double>(inside) / static_cast<double>(theta.size());
}

double bunching_fraction(const EnsembleState& atoms, double center, double halfwidth) {
    return bunching_fraction(std::span<const double>(atoms.theta), center, halfwidth);
}

std::vector<Peak> find_peaks(const Spectrum& s, double min_height) {
    const auto& g = s.gain;
    if (g.size() < 3 || s.delta21.size() != g.size())
        throw InvalidParameter("find_peaks: need at least 3 grid points");
    std::vector<Peak> peaks;
    const std::size_t n = g.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(g[i] > g[i - 1])) continue;
        std::size_t k = i;
        while (k + 1 < n && g[k + 1] == g[i]) ++k;
        if (k + 1 < n && g[k + 1] < g[i] && g[i] >= min_height)
            peaks.push_back({i, s.delta21[i], g[i]});
        i = k;
    }
    return peaks;
}

double interpolate_gain(const Spectrum& s, double x) {
    const auto& d = s.delta21;
    if (d.empty()) throw InvalidParameter("interpolate_gain: empty spectrum");
    if (x <= d.front()) return s.gain.front();
    if (x >= d.back()) return s.gain.back();
    const auto it = std::upper_bound(d.begin(), d.end(), x);
    const std::size_t hi = static_cast<std::size_t>(it - d.begin());
    const std::size_t lo = hi - 1;
    const double w = (x - d[lo]) / (d[hi] - d[lo]);
    return (1.0 - w) * s.gain[lo] + w * s.gain[hi];
}

} // namespace carl
