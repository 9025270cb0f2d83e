#include "carl/analytics.hpp"

#include <algorithm>
#include <cmath>

namespace carl {

namespace {

// Miller's algorithm: recur J_{k-1} = (2k/x) J_k - J_{k+1} downward from an
// order far beyond both n_max and the turning point k ~ x, then normalize
// with J_0 + 2 sum_k J_{2k} = 1. Valid for x > 0 and any n_max >= 0.
std::vector<double> miller_table(int n_max, double x) {
    const double reach = std::max(static_cast<double>(n_max), std::ceil(x));
    int start = static_cast<int>(reach + 50.0 + std::ceil(20.0 * std::cbrt(x)));
    start += start % 2;

    std::vector<double> v(static_cast<std::size_t>(start) + 2, 0.0);
    v[static_cast<std::size_t>(start)] = 1e-30;
    const double two_over_x = 2.0 / x;
    for (int k = start; k >= 1; --k) {
        const auto uk = static_cast<std::size_t>(k);
        double next = static_cast<double>(k) * two_over_x * v[uk] - v[uk + 1];
        v[uk - 1] = next;
        if (std::abs(next) > 1e250) {
            for (std::size_t i = uk - 1; i < v.size(); ++i) v[i] *= 1e-250;
        }
    }
    double norm = v[0];
    for (int k = 2; k <= start; k += 2) norm += 2.0 * v[static_cast<std::size_t>(k)];

    std::vector<double> out(static_cast<std::size_t>(n_max) + 1);
    for (int k = 0; k <= n_max; ++k)
        out[static_cast<std::size_t>(k)] = v[static_cast<std::size_t>(k)] / norm;
    return out;
}

// Table for signed x without range checks. J_n(-x) = (-1)^n J_n(x).
std::vector<double> table_unchecked(int n_max, double x) {
    if (x == 0.0) {
        std::vector<double> out(static_cast<std::size_t>(n_max) + 1, 0.0);
        out[0] = 1.0;
        return out;
    }
    auto out = miller_table(n_max, std::abs(x));
    if (x < 0)
        for (std::size_t k = 1; k < out.size(); k += 2) out[k] = -out[k];
    return out;
}

void check_bessel_range(int n, double x) {
    if (std::abs(n) > kBesselMaxOrder || !(std::abs(x) <= kBesselMaxArg))
        throw InvalidParameter("bessel_jn: requires |n| <= 200 and |x| <= 500");
}

double resonance_scale(double kappa, double tau) {
    // max_delta |K(kappa, delta, tau)|, attained at delta = 0
    return std::abs(resonance_kernel(kappa, 0.0, tau));
}

// (1 - e^{-kappa tau}) / kappa with the kappa -> 0 limit.
double build_up(double kappa, double tau) {
    const double x = kappa * tau;
    if (std::abs(x) < 1e-8) return tau * (1.0 - 0.5 * x);
    return -std::expm1(-x) / kappa;
}

} // namespace

SteadyPolarization steady_polarization(const SystemParams& p) {
    SteadyPolarization sp;
    sp.rabi = 2.0 * p.rho * p.a2;
    const double denom = sp.rabi * sp.rabi + p.gamma * p.gamma + p.delta20 * p.delta20;
    if (!(denom > 0))
        throw InvalidParameter("steady_polarization: Omega, Gamma and Delta20 are all zero");
    sp.s0 = cplx{-sp.rabi * p.gamma, -sp.rabi * p.delta20} / (2.0 * denom);
    return sp;
}

double bessel_jn(int n, double x) {
    check_bessel_range(n, x);
    const int m = std::abs(n);
    const double v = table_unchecked(m, x)[static_cast<std::size_t>(m)];
    return (n < 0 && (m % 2)) ? -v : v;
}

std::vector<double> bessel_jn_table(int n_max, double x) {
    if (n_max < 0) throw InvalidParameter("bessel_jn_table: n_max must be non-negative");
    check_bessel_range(n_max, x);
    return table_unchecked(n_max, x);
}

cplx resonance_kernel(double kappa, double delta, double tau) {
    if (!(tau >= 0)) throw InvalidParameter("resonance_kernel: tau must be non-negative");
    const cplx lambda{kappa, -delta};
    const cplx u = lambda * tau;
    if (std::abs(u) < 1e-6) return tau * (1.0 + u * (0.5 + u / 6.0));
    return (std::exp(u) - 1.0) / lambda;
}

int n_max_rule(double max_amp) {
    const double a = std::max(0.0, max_amp);
    return static_cast<int>(std::ceil(a + 10.0 * std::cbrt(a) + 10.0));
}

cplx jacobi_anger_sum(double amp, double phase, double nu_tau, int n_max) {
    const auto j = table_unchecked(n_max, amp);
    const double alpha = phase - 0.5 * kPi + nu_tau;
    cplx sum = j[0];
    for (int n = 1; n <= n_max; ++n) {
        const cplx e = std::polar(1.0, n * alpha);
        const double jn = j[static_cast<std::size_t>(n)];
        // J_{-n} = (-1)^n J_n pairs e^{i n alpha} with e^{-i n alpha}
        sum += jn * (e + ((n % 2) ? -std::conj(e) : std::conj(e)));
    }
    return sum;
}

double jacobi_anger_residual(double amp, int n_max, int samples) {
    double worst = 0.0;
    for (int a = 0; a < samples; ++a) {
        const double phase = 2.0 * kPi * a / samples;
        for (int b = 0; b < samples; ++b) {
            const double nu_tau = 2.0 * kPi * (b + 0.37) / samples;
            const cplx exact = std::polar(1.0, -amp * std::cos(nu_tau + phase));
            worst = std::max(worst, std::abs(jacobi_anger_sum(amp, phase, nu_tau, n_max) - exact));
        }
    }
    return worst;
}

double bessel_tail_bound(double amp, int n_max) {
    const int reach = std::max(n_max, n_max_rule(std::abs(amp))) + 40;
    const auto j = table_unchecked(reach, amp);
    double tail = 0.0;
    for (int n = n_max + 1; n <= reach; ++n) tail += std::abs(j[static_cast<std::size_t>(n)]);
    return 2.0 * tail;
}

CtildeResult predict_ctilde(const PredictorInput& in, double kappa, double delta21, double nu) {
    if (in.oscillations.empty()) throw InvalidParameter("predict_ctilde: no oscillations");
    if (in.n_max < 1) throw InvalidParameter("predict_ctilde: n_max must be at least 1");
    const int n_max = in.n_max;
    const std::size_t width = 2 * static_cast<std::size_t>(n_max) + 1;

    double max_amp = 0.0;
    for (const auto& o : in.oscillations) max_amp = std::max(max_amp, o.amp);
    if (max_amp > kBesselMaxArg)
        throw InvalidParameter("predict_ctilde: secular amplitude exceeds Bessel range");

    // a_n = (1/N) sum_j J_n(amp_j) e^{i n (phase_j - pi/2)}, index n + n_max
    std::vector<cplx> coeff(width, cplx{0.0, 0.0});
    double worst_tail = 0.0;
    for (const auto& o : in.oscillations) {
        const auto j = table_unchecked(n_max, o.amp);
        const double alpha = o.phase - 0.5 * kPi;
        coeff[static_cast<std::size_t>(n_max)] += j[0];
        for (int n = 1; n <= n_max; ++n) {
            const cplx e = std::polar(1.0, n * alpha);
            const double jn = j[static_cast<std::size_t>(n)];
            coeff[static_cast<std::size_t>(n_max + n)] += jn * e;
            coeff[static_cast<std::size_t>(n_max - n)] += ((n % 2) ? -jn : jn) * std::conj(e);
        }
        worst_tail = std::max(worst_tail, bessel_tail_bound(o.amp, n_max));
    }
    const double inv_n = 1.0 / static_cast<double>(in.oscillations.size());

    cplx sum{0.0, 0.0};
    for (int n = -n_max; n <= n_max; ++n) {
        const cplx a = coeff[static_cast<std::size_t>(n + n_max)] * inv_n;
        sum += a * resonance_kernel(kappa, delta21 - n * nu, in.tau);
    }

    CtildeResult r;
    r.value = in.s0 * sum;
    r.n_max = n_max;
    r.n_required = n_max_rule(max_amp);
    r.truncation_warning = n_max < r.n_required;
    r.truncation_residual = std::abs(in.s0) * resonance_scale(kappa, in.tau) * worst_tail;
    return r;
}

double gain_from_ctilde(cplx ctilde, double kappa, double tau, cplx a1_0) {
    if (std::norm(a1_0) == 0.0) throw InvalidParameter("gain: initial probe amplitude is zero");
    const cplx ratio = ctilde / a1_0;
    const double damp = std::exp(-2.0 * kappa * tau);
    return damp * (std::norm(ratio) + 2.0 * ratio.real()) + (damp - 1.0);
}

GainTerms resonant_gain_terms(cplx c0, double kappa, double tau, cplx a1_0) {
    if (std::norm(a1_0) == 0.0) throw InvalidParameter("gain: initial probe amplitude is zero");
    if (!(kappa >= 0) || !(tau >= 0))
        throw InvalidParameter("resonant gain: kappa and tau must be non-negative");
    const double l = build_up(kappa, tau);
    const double decay = std::exp(-kappa * tau);
    const cplx ratio = c0 / a1_0;
    GainTerms t;
    t.coherent = l * l * std::norm(ratio);
    t.cross = 2.0 * decay * l * ratio.real();
    t.decay = std::expm1(-2.0 * kappa * tau);
    return t;
}

cplx asymptotic_coherence(std::span<const SecularOscillation> osc, cplx s0) {
    if (osc.empty()) throw InvalidParameter("asymptotic_coherence: no oscillations");
    cplx sum{0.0, 0.0};
    for (const auto& o : osc) sum += std::polar(1.0, o.amp * std::cos(o.phase));
    return s0 * sum / static_cast<double>(osc.size());
}

GainTerms predict_gain_resonant_terms(const SystemParams& params, double tau,
                                      const OrderParameter& r0, cplx s0, cplx a1_0) {
    return resonant_gain_terms(s0 * std::polar(r0.r, r0.phi), params.kappa, tau, a1_0);
}

double predict_gain_resonant(const SystemParams& params, double tau, const OrderParameter& r0,
                             cplx s0, cplx a1_0) {
    return predict_gain_resonant_terms(params, tau, r0, s0, a1_0).total();
}

std::vector<double> resonance_comb(double nu, int n_lo, int n_hi) {
    if (!(nu > 0)) throw InvalidParameter("resonance_comb: nu must be positive");
    if (n_lo > n_hi) throw InvalidParameter("resonance_comb: n_lo must not exceed n_hi");
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n_hi - n_lo + 1));
    for (int n = n_lo; n <= n_hi; ++n) out.push_back(n * nu);
    return out;
}

} // namespace carl
