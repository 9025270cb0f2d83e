#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "carl/model.hpp"

using namespace carl;

namespace {

PhysicalParams rubidium() {
    PhysicalParams p;
    p.hbar = 1.0546e-34;
    p.k = 8.0552e6;
    p.m = 1.443e-25;
    p.g = 1.0;
    p.n_atoms = 1.0;
    return p;
}

} // namespace

TEST_CASE("recoil frequency for rubidium at 780 nm") {
    const auto nd = nondimensionalize(rubidium());
    CHECK(nd.omega_r == doctest::Approx(9.48e4).epsilon(5e-3));
}

TEST_CASE("rho is one when g sqrt(N) equals the recoil frequency") {
    auto phys = rubidium();
    const double wr = 2.0 * phys.hbar * phys.k * phys.k / phys.m;
    phys.n_atoms = 4.0;
    phys.g = wr / 2.0;
    const auto nd = nondimensionalize(phys);
    CHECK(nd.params.rho == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("detunings and trap frequency scale with omega_r rho") {
    auto phys = rubidium();
    const double wr = 2.0 * phys.hbar * phys.k * phys.k / phys.m;
    phys.g = 8.0 * wr; // rho = 64^(1/3) = 4
    phys.omega0 = 1e15;
    phys.omega1 = 1e15;
    phys.omega2 = 1e15 + 4.0 * wr;
    phys.nu_z = 8.0 * wr;
    const auto nd = nondimensionalize(phys);
    CHECK(nd.params.rho == doctest::Approx(4.0));
    // omega2 - omega1 = omega_r rho -> 1, up to the rounding of 1e15 + small
    CHECK(nd.params.delta21 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(nd.params.delta20 == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(nd.params.nu == doctest::Approx(2.0));
}

TEST_CASE("rho depends only on g sqrt(N)") {
    auto a = rubidium();
    a.g = 3.0e5;
    a.n_atoms = 1000.0;
    auto b = a;
    b.g *= 7.0;
    b.n_atoms /= 49.0;
    CHECK(nondimensionalize(a).params.rho ==
          doctest::Approx(nondimensionalize(b).params.rho).epsilon(1e-13));
}

TEST_CASE("nondimensionalize rejects non-positive constants") {
    for (auto field : {&PhysicalParams::k, &PhysicalParams::m, &PhysicalParams::g,
                       &PhysicalParams::n_atoms, &PhysicalParams::hbar}) {
        auto p = rubidium();
        p.*field = 0.0;
        CHECK_THROWS_AS(nondimensionalize(p), InvalidParameter);
        p.*field = -1.0;
        CHECK_THROWS_AS(nondimensionalize(p), InvalidParameter);
    }
}

TEST_CASE("init_ensemble: ground state, seed, span") {
    SystemParams params;
    params.n_atoms = 64;
    InitialConditionSpec spec;

    for (auto loading : {ThetaLoading::Lattice, ThetaLoading::Random}) {
        spec.loading = loading;
        const auto e = init_ensemble(spec, params);
        REQUIRE(e.size() == 64);
        CHECK(e.tau == 0.0);
        CHECK(e.a1 == spec.a1_0);
        for (std::size_t j = 0; j < e.size(); ++j) {
            CHECK(e.theta[j] >= 0.0);
            CHECK(e.theta[j] < spec.theta_span);
            CHECK(e.sigma_re[j] == 0.0);
            CHECK(e.sigma_im[j] == 0.0);
            CHECK(e.sigma_z[j] == 1.0);
            const auto a = e.atom(j);
            CHECK(std::norm(a.sigma) + a.sigma_z * a.sigma_z / 4.0 == 0.25);
        }
    }
}

TEST_CASE("init_ensemble is bit-reproducible and seed-sensitive") {
    SystemParams params;
    params.n_atoms = 100;
    InitialConditionSpec spec;
    spec.seed = 42;
    spec.loading = ThetaLoading::Random;
    CHECK(init_ensemble(spec, params) == init_ensemble(spec, params));
    auto other = spec;
    other.seed = 43;
    CHECK_FALSE(init_ensemble(spec, params) == init_ensemble(other, params));
}

TEST_CASE("zero momentum spread gives the mean exactly") {
    SystemParams params;
    params.n_atoms = 50;
    InitialConditionSpec spec;
    spec.p_sigma = 0.0;
    spec.p_mean = 0.3;
    const auto e = init_ensemble(spec, params);
    for (double p : e.p) CHECK(p == 0.3);
}

TEST_CASE("momentum sample statistics at N = 1e5") {
    SystemParams params;
    params.n_atoms = 100000;
    InitialConditionSpec spec;
    spec.seed = 11;
    const auto e = init_ensemble(spec, params);
    double mean = 0.0;
    for (double p : e.p) mean += p;
    mean /= static_cast<double>(e.size());
    double var = 0.0;
    for (double p : e.p) var += (p - mean) * (p - mean);
    const double sd = std::sqrt(var / static_cast<double>(e.size() - 1));
    CHECK(std::abs(sd - 0.8) < 0.02);
    CHECK(std::abs(mean) < 0.02);
}

TEST_CASE("random loading is uniform over the span") {
    SystemParams params;
    params.n_atoms = 40000;
    InitialConditionSpec spec;
    spec.loading = ThetaLoading::Random;
    const auto e = init_ensemble(spec, params);
    std::vector<int> bins(8, 0);
    for (double t : e.theta) ++bins[static_cast<std::size_t>(t / spec.theta_span * 8.0)];
    for (int b : bins) CHECK(std::abs(b - 5000) < 5 * std::sqrt(5000.0));
}

TEST_CASE("init_ensemble rejects bad specs") {
    SystemParams params;
    InitialConditionSpec spec;
    params.n_atoms = 0;
    CHECK_THROWS_AS(init_ensemble(spec, params), InvalidParameter);
    params.n_atoms = 4;
    spec.theta_span = std::nan("");
    CHECK_THROWS_AS(init_ensemble(spec, params), InvalidParameter);
    spec = {};
    spec.a1_0 = 0.0;
    CHECK_THROWS_AS(init_ensemble(spec, params), InvalidParameter);
    spec = {};
    spec.p_sigma = -0.1;
    CHECK_THROWS_AS(init_ensemble(spec, params), InvalidParameter);
}

TEST_CASE("derived seeds are distinct and stable") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(derive_seed(1, i));
    CHECK(seen.size() == 1000);
    CHECK(derive_seed(7, 3) == derive_seed(7, 3));
    CHECK(derive_seed(7, 3) != derive_seed(8, 3));
}

TEST_CASE("theta to position") {
    CHECK(theta_to_position(0.0) == 0.0);
    CHECK(theta_to_position(kPi) == doctest::Approx(0.25));
    CHECK(theta_to_position(4.0 * kPi) == doctest::Approx(1.0));
    CHECK(position_mod1(4.0 * kPi + kPi) == doctest::Approx(0.25));
    CHECK(position_mod1(-kPi) == doctest::Approx(0.75));
    const double x = position_mod1(-1e-300);
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
}

TEST_CASE("validate_params") {
    SystemParams standard; // defaults are the standard trap set
    CHECK(standard.nu == 2.0);
    CHECK(standard.delta20 == -15.0);
    CHECK(validate_params(standard).ok());

    SystemParams bad = standard;
    bad.rho = 0.0;
    const auto report = validate_params(bad);
    REQUIRE_FALSE(report.ok());
    CHECK(std::find(report.errors.begin(), report.errors.end(), "rho must be positive") !=
          report.errors.end());

    for (auto mutate : {+[](SystemParams& p) { p.gamma = -1.0; },
                        +[](SystemParams& p) { p.kappa = -0.1; },
                        +[](SystemParams& p) { p.nu = -2.0; },
                        +[](SystemParams& p) { p.n_atoms = 0; },
                        +[](SystemParams& p) { p.a2 = std::nan(""); }}) {
        SystemParams p = standard;
        mutate(p);
        CHECK_FALSE(validate_params(p).ok());
    }
    CHECK_THROWS_AS(require_valid(bad), InvalidParameter);
}

TEST_CASE("harmonic condition is reported, not enforced") {
    SystemParams p;
    const auto holds = validate_params(p, 1.0);
    REQUIRE(holds.harmonic.has_value());
    CHECK(holds.harmonic->threshold == doctest::Approx(0.8));
    CHECK(holds.harmonic->holds);
    CHECK(holds.ok());

    const auto broken = validate_params(p, 5.0); // 2*3*5*2/15 = 4 > 2
    REQUIRE(broken.harmonic.has_value());
    CHECK_FALSE(broken.harmonic->holds);
    CHECK(broken.ok());
    CHECK_FALSE(broken.warnings.empty());
}
