#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "carl/analytics.hpp"

using namespace carl;

namespace {

// std::cyl_bessel_j covers n >= 0; negative orders follow the reflection rule.
double oracle_jn(int n, double x) {
    const double v = std::cyl_bessel_j(static_cast<double>(std::abs(n)), std::abs(x));
    const bool odd = (std::abs(n) % 2) == 1;
    double sign = 1.0;
    if (n < 0 && odd) sign = -sign;
    if (x < 0 && odd) sign = -sign;
    return sign * v;
}

// Composite Simpson of e^{-kappa (tau - t)} over [0, tau].
double buildup_by_quadrature(double kappa, double tau) {
    const int n = 2000;
    const double h = tau / n;
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double w = (i == 0 || i == n) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        s += w * std::exp(-kappa * (tau - i * h));
    }
    return s * h / 3.0;
}

SystemParams standard() { return SystemParams{}; }

} // namespace

TEST_CASE("steady polarization") {
    const auto s = steady_polarization(standard()).s0;
    CHECK(s.real() == doctest::Approx(-12.0 / 740.0).epsilon(1e-14));
    CHECK(s.imag() == doctest::Approx(180.0 / 740.0).epsilon(1e-14));
    CHECK(std::abs(s) == doctest::Approx(0.24378).epsilon(1e-4));

    auto undriven = standard();
    undriven.a2 = 0.0;
    CHECK(steady_polarization(undriven).s0 == cplx{0.0, 0.0});

    auto damped = standard();
    damped.gamma = 1e9;
    CHECK(std::abs(steady_polarization(damped).s0) < 1e-8);

    auto degenerate = standard();
    degenerate.a2 = 0.0;
    degenerate.gamma = 0.0;
    degenerate.delta20 = 0.0;
    CHECK_THROWS_AS(steady_polarization(degenerate), InvalidParameter);
}

TEST_CASE("steady polarization stays inside the Bloch sphere") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 500; ++i) {
        SystemParams p;
        p.rho = 10.0 * u(rng) + 1e-3;
        p.a2 = 10.0 * u(rng);
        p.gamma = 5.0 * u(rng);
        p.delta20 = 40.0 * (u(rng) - 0.5);
        CHECK(std::abs(steady_polarization(p).s0) <= 0.5);
    }
}

TEST_CASE("bessel values") {
    CHECK(bessel_jn(0, 0.0) == 1.0);
    for (int n : {-3, -1, 1, 2, 50}) CHECK(bessel_jn(n, 0.0) == 0.0);
    // value obtained independently with scipy.special.jv(1, 1)
    CHECK(std::abs(bessel_jn(1, 1.0) - 0.44005058574493355) < 1e-15);
    CHECK(std::abs(bessel_jn(-1, 1.0) + 0.44005058574493355) < 1e-15);
}

TEST_CASE("bessel against the standard library") {
    double worst = 0.0;
    for (int n = 0; n <= 60; n += 3)
        for (double x : {0.01, 0.3, 1.0, 2.5, 7.7, 19.0, 42.0, 99.5, 250.0, 499.0})
            worst = std::max(worst, std::abs(bessel_jn(n, x) - oracle_jn(n, x)));
    CHECK(worst < 1e-10);
    for (int n : {-7, -2, 3, 8})
        for (double x : {-12.5, -0.4, 0.4, 12.5})
            CHECK(std::abs(bessel_jn(n, x) - oracle_jn(n, x)) < 1e-12);
    CHECK(std::abs(bessel_jn(200, 150.0) - oracle_jn(200, 150.0)) < 1e-10);
}

TEST_CASE("bessel identities") {
    double sum = 0.0;
    for (int n = -40; n <= 40; ++n) sum += bessel_jn(n, 2.5) * bessel_jn(n, 2.5);
    CHECK(std::abs(sum - 1.0) < 1e-10);

    for (double x : {0.5, 3.0, 17.0, 80.0})
        for (int n = 1; n < 60; n += 7)
            CHECK(std::abs(bessel_jn(n - 1, x) + bessel_jn(n + 1, x) - 2.0 * n / x * bessel_jn(n, x)) <
                  1e-8);

    const auto table = bessel_jn_table(30, 6.2);
    REQUIRE(table.size() == 31);
    for (int n = 0; n <= 30; ++n) CHECK(table[n] == doctest::Approx(bessel_jn(n, 6.2)).epsilon(1e-12));
}

TEST_CASE("bessel range errors") {
    CHECK_THROWS_AS(bessel_jn(201, 1.0), InvalidParameter);
    CHECK_THROWS_AS(bessel_jn(-201, 1.0), InvalidParameter);
    CHECK_THROWS_AS(bessel_jn(1, 500.5), InvalidParameter);
    CHECK_THROWS_AS(bessel_jn(1, std::nan("")), InvalidParameter);
}

TEST_CASE("resonance kernel") {
    const cplx k = resonance_kernel(0.01, 0.0, 100.0);
    CHECK(std::abs(k.real() - 171.8281828459045) < 1e-6 * 171.83);
    CHECK(std::abs(k.imag()) < 1e-12);

    const cplx limit = resonance_kernel(0.0, 0.0, 7.0);
    CHECK(limit.real() == doctest::Approx(7.0));
    CHECK(limit.imag() == doctest::Approx(0.0));

    for (double tau : {0.3, 1.0, 13.7, 100.0})
        CHECK(std::abs(resonance_kernel(0.0, 2.0, tau)) <= 1.0 + 1e-15);

    for (double d : {1e-9, -1e-9})
        CHECK(std::abs(resonance_kernel(0.01, d, 100.0) - k) < 1e-6 * std::abs(k));

    CHECK(resonance_kernel(0.3, 1.1, 0.0) == cplx{0.0, 0.0});
    CHECK_THROWS_AS(resonance_kernel(0.1, 0.0, -1.0), InvalidParameter);
}

TEST_CASE("resonance kernel against its integral form") {
    // K = int_0^tau e^{(kappa - i delta) t} dt, by midpoint quadrature
    for (auto [kappa, delta, tau] : {std::tuple{0.01, 1.0, 30.0}, std::tuple{0.2, -3.0, 5.0},
                                     std::tuple{0.0, 0.5, 9.0}}) {
        const int n = 200000;
        const double h = tau / n;
        cplx s{0.0, 0.0};
        for (int i = 0; i < n; ++i) s += std::exp(cplx{kappa, -delta} * ((i + 0.5) * h));
        s *= h;
        CHECK(std::abs(resonance_kernel(kappa, delta, tau) - s) < 1e-6 * (1.0 + std::abs(s)));
    }
}

TEST_CASE("Jacobi-Anger expansion") {
    for (double amp : {0.5, 2.0, 10.0}) {
        const int n_max = n_max_rule(amp);
        CHECK(jacobi_anger_residual(amp, n_max) < 1e-8);
        for (double phase : {-2.0, 0.0, 0.9})
            for (double x : {0.0, 0.7, 3.1, 10.0}) {
                const cplx direct = std::exp(cplx{0.0, -amp * std::cos(x + phase)});
                CHECK(std::abs(jacobi_anger_sum(amp, phase, x, n_max) - direct) < 1e-8);
            }
    }
}

TEST_CASE("Jacobi-Anger residual falls with n_max up to round-off") {
    const double amp = 20.0;
    double prev = jacobi_anger_residual(amp, 20);
    for (int n = 22; n <= n_max_rule(amp); n += 2) {
        const double r = jacobi_anger_residual(amp, n);
        CHECK((r <= prev || r < 1e-13));
        prev = r;
    }
    CHECK(prev < 1e-13);
    CHECK(bessel_tail_bound(amp, n_max_rule(amp)) < 1e-10);
}

TEST_CASE("n_max rule") {
    CHECK(n_max_rule(0.0) == 10);
    CHECK(n_max_rule(8.0) == static_cast<int>(std::ceil(8.0 + 20.0 + 10.0)));
}

TEST_CASE("predict_ctilde limits") {
    const cplx s0 = steady_polarization(standard()).s0;
    PredictorInput in;
    in.oscillations.assign(5, SecularOscillation{});
    in.s0 = s0;
    in.tau = 50.0;
    in.n_max = 10;
    const auto r = predict_ctilde(in, 0.01, 4.0, 2.0);
    CHECK(std::abs(r.value - s0 * resonance_kernel(0.01, 4.0, 50.0)) < 1e-14);
    CHECK_FALSE(r.truncation_warning);

    // one atom, small amplitude: J0 ~ 1 and J(+-1) ~ +-a/2 carry the sum
    PredictorInput one;
    const double a = 1e-3, phase = 0.3, nu = 2.0, delta21 = 2.0;
    one.oscillations = {{a, phase, 0.0}};
    one.s0 = s0;
    one.tau = 100.0;
    one.n_max = 3;
    const cplx rot = std::exp(cplx{0.0, phase - kPi / 2.0});
    const cplx expected = s0 * (resonance_kernel(0.01, delta21, 100.0) +
                                0.5 * a * rot * resonance_kernel(0.01, delta21 - nu, 100.0) -
                                0.5 * a / rot * resonance_kernel(0.01, delta21 + nu, 100.0));
    const cplx got = predict_ctilde(one, 0.01, delta21, nu).value;
    CHECK(std::abs(got - expected) < 1e-6 * std::abs(expected));

    PredictorInput wide = one;
    wide.oscillations = {{30.0, 0.0, 0.0}};
    wide.n_max = 5;
    const auto flagged = predict_ctilde(wide, 0.01, 4.0, 2.0);
    CHECK(flagged.truncation_warning);
    CHECK(flagged.n_required == n_max_rule(30.0));
}

TEST_CASE("resonant gain terms") {
    const cplx s0 = steady_polarization(standard()).s0;
    const cplx a0{0.01, 0.0};
    const double kappa = 0.01, tau = 100.0;

    // independent chain: build-up factor by quadrature, |S0/A0| from the closed form
    const double build = buildup_by_quadrature(kappa, tau);
    CHECK(build == doctest::Approx(63.212).epsilon(1e-4));
    const double ratio = std::hypot(-12.0 / 740.0, 180.0 / 740.0) / 0.01;
    CHECK(ratio == doctest::Approx(24.378).epsilon(1e-4));
    const double first = build * build * ratio * ratio;
    CHECK(first == doctest::Approx(2.374e6).epsilon(1e-3));

    const auto t = predict_gain_resonant_terms(standard(), tau, OrderParameter{1.0, 0.0}, s0, a0);
    CHECK(t.coherent == doctest::Approx(first).epsilon(1e-9));
    CHECK(t.cross == doctest::Approx(2.0 * std::exp(-1.0) * build * (s0 / a0).real()).epsilon(1e-9));
    CHECK(t.decay == doctest::Approx(std::exp(-2.0) - 1.0));

    const double silent = predict_gain_resonant(standard(), tau, OrderParameter{0.0, 0.0}, s0, a0);
    CHECK(silent == doctest::Approx(std::exp(-2.0 * kappa * tau) - 1.0));

    // kappa tau >> 1 with R0 = 1
    const double late = predict_gain_resonant(standard(), 5000.0, OrderParameter{1.0, 0.0}, s0, a0);
    CHECK(late == doctest::Approx(std::norm(s0 / a0) / (kappa * kappa) - 1.0).epsilon(1e-9));

    // kappa = 0 limit: build-up -> tau
    const auto flat = resonant_gain_terms(s0, 0.0, 10.0, a0);
    CHECK(flat.coherent == doctest::Approx(100.0 * std::norm(s0 / a0)));
    CHECK(flat.decay == 0.0);
}

TEST_CASE("coherent term increases with R0") {
    const cplx s0 = steady_polarization(standard()).s0;
    double prev = -1.0;
    for (double r = 0.0; r <= 1.0; r += 0.05) {
        const auto t = predict_gain_resonant_terms(standard(), 80.0, OrderParameter{r, 0.3}, s0, 0.01);
        CHECK(t.coherent > prev);
        prev = t.coherent;
    }
}

TEST_CASE("both resonant forms agree for a shared secular phase") {
    const cplx s0 = steady_polarization(standard()).s0;
    std::vector<SecularOscillation> osc(7, SecularOscillation{1.7, 0.6, 0.0});
    const cplx c0 = asymptotic_coherence(osc, s0);
    const auto r0 = secular_order_parameter(osc);
    const auto a = resonant_gain_terms(c0, 0.01, 60.0, 0.01);
    const auto b = predict_gain_resonant_terms(standard(), 60.0, r0, s0, 0.01);
    CHECK(a.coherent == doctest::Approx(b.coherent).epsilon(1e-12));
    CHECK(a.cross == doctest::Approx(b.cross).epsilon(1e-12));
    CHECK(a.decay == doctest::Approx(b.decay).epsilon(1e-12));
}

TEST_CASE("gain from a predicted coherence") {
    // with C~ = 0 only cavity decay remains
    CHECK(gain_from_ctilde(0.0, 0.01, 100.0, 0.01) == doctest::Approx(std::exp(-2.0) - 1.0));
    CHECK_THROWS_AS(gain_from_ctilde(0.0, 0.01, 100.0, 0.0), InvalidParameter);
}

TEST_CASE("resonance comb") {
    CHECK(resonance_comb(2.0, -2, 2) == std::vector<double>{-4, -2, 0, 2, 4});
    CHECK(resonance_comb(2.0, 0, 0) == std::vector<double>{0});
    const auto pos = resonance_comb(2.0, 1, 10);
    REQUIRE(pos.size() == 10);
    CHECK(pos.front() == 2.0);
    CHECK(pos.back() == 20.0);
    CHECK_THROWS_AS(resonance_comb(0.0, 1, 2), InvalidParameter);
    CHECK_THROWS_AS(resonance_comb(2.0, 3, 2), InvalidParameter);
}
