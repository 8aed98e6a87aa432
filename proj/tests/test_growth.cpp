// Growth model: psi/phi algebra, the derivative checker, the slab recursion
// with its boundary tilt, shift equivariance, halo discipline, the rescaled
// field, and the equivalence with the polymer free energy.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <vector>

#include "kpzlab/growth.hpp"
#include "kpzlab/polymer.hpp"

using namespace kpzlab;

namespace {
const NoiseSpec kZero = NoiseSpec::parse("gaussian", 0.0); // deterministic environment
}

TEST_CASE("phi from psi and spot values", "[growth]") {
    const GrowthFunction poly = GrowthFunction::polymer(1.0);
    const GrowthFunction quad = GrowthFunction::quadratic(1.0);
    auto phi_p = phi_from_psi(poly.psi);
    auto phi_q = phi_from_psi(quad.psi);

    REQUIRE(std::fabs(phi_p(0.0)) <= 1e-16);
    REQUIRE(phi_q(0.0) == 0.0);
    REQUIRE(phi_p(2.0) == Catch::Approx(std::log(std::cosh(1.0))).epsilon(1e-14));
    REQUIRE(phi_q(1.0) == 0.5);

    // reconstruction psi(u,v) = phi(u-v) + (u+v)/2
    for (double u : {-1.3, 0.0, 0.7, 2.0})
        for (double v : {-0.5, 0.4, 1.9}) {
            REQUIRE(poly.psi(u, v) ==
                    Catch::Approx(phi_p(u - v) + 0.5 * (u + v)).epsilon(0.0).margin(1e-12));
            REQUIRE(quad.psi(u, v) ==
                    Catch::Approx(phi_q(u - v) + 0.5 * (u + v)).epsilon(0.0).margin(1e-12));
        }

    // stable log-cosh form survives large arguments
    REQUIRE(std::isfinite(poly.psi(900.0, -900.0)));

    REQUIRE_THROWS_AS(GrowthFunction::polymer(0.0), std::invalid_argument);
    REQUIRE_THROWS_AS(GrowthFunction::quadratic(std::nan("")), std::invalid_argument);
}

TEST_CASE("growth function checker", "[growth]") {
    const GrowthCheck q = check_growth_function(GrowthFunction::quadratic(1.0).psi);
    REQUIRE(q.equivariance_residual <= 1e-9);
    REQUIRE(q.symmetry_residual <= 1e-9);
    REQUIRE(q.effective_beta == Catch::Approx(1.0).epsilon(0.0).margin(1e-6));
    REQUIRE(q.effective_fourth == Catch::Approx(0.0).epsilon(0.0).margin(1e-4));

    const GrowthCheck p = check_growth_function(GrowthFunction::polymer(1.0).psi);
    REQUIRE(p.equivariance_residual <= 1e-9);
    REQUIRE(p.symmetry_residual <= 1e-9);
    REQUIRE(p.effective_beta == Catch::Approx(0.25).epsilon(0.0).margin(1e-6)); // phi''(0) = beta/4
    REQUIRE(p.effective_fourth == Catch::Approx(-0.125).epsilon(0.0).margin(1e-4));

    // an asymmetric candidate is caught
    const GrowthCheck bad = check_growth_function([](double u, double) { return u; });
    REQUIRE(bad.symmetry_residual > 0.1);

    REQUIRE_THROWS_AS(check_growth_function(GrowthFunction::quadratic(1.0).psi, 0.0),
                      std::invalid_argument);
}

TEST_CASE("interface recursion small cases", "[growth]") {
    auto flat = [](double) { return 1.0; }; // lambda == 0

    // zero noise, A=0: psi(0,0)=0 fixed point, field identically zero
    {
        const ModelParams p(100, 1.0, 0.0);
        const NoiseField z(kZero, 1);
        const InterfaceField f = evolve_interface(GrowthFunction::quadratic(0.7), z, p, flat, 16, 8);
        for (long long t = 0; t <= 16; ++t)
            for (long long x = 0; x <= f.x_max - t; ++x) REQUIRE(f.f_raw(x, t) == 0.0);
        const InterfaceField fp = evolve_interface(GrowthFunction::polymer(1.0), z, p, flat, 16, 8);
        for (long long t = 0; t <= 16; ++t)
            for (long long x = 0; x <= fp.x_max - t; ++x)
                REQUIRE(std::fabs(fp.f_raw(x, t)) <= 1e-12);
    }

    // zero noise, A != 0: only the boundary tilt acts
    {
        const ModelParams p(100, 2.0, 1.0); // gamma = 0.9
        const NoiseField z(kZero, 1);
        const InterfaceField f = evolve_interface(GrowthFunction::quadratic(1.0), z, p, flat, 4, 4);
        REQUIRE(f.f_raw(0, 1) == std::log(p.gamma()) / p.beta);
        REQUIRE(f.f_raw(3, 1) == 0.0); // interior untouched after one step
    }

    // one noisy step from a flat start: f(x,1) = N^{-1/4} y(x,1) off-boundary
    {
        const ModelParams p(256, 1.0, 0.0);
        const NoiseField nf(NoiseSpec::parse("rademacher"), 9);
        const InterfaceField f = evolve_interface(GrowthFunction::quadratic(1.0), nf, p, flat, 2, 6);
        const double amp = std::pow(256.0, -0.25);
        for (long long x = 1; x <= f.x_max - 1; ++x)
            REQUIRE(f.f_raw(x, 1) == amp * nf.y(x, 1));
    }

    // initial row is lambda = log(Lambda)/beta
    {
        const ModelParams p(64, 2.0, 0.0);
        const NoiseField nf(NoiseSpec::parse("rademacher"), 4);
        auto Lam = initial_profile("holder", p);
        const InterfaceField f = evolve_interface(GrowthFunction::polymer(2.0), nf, p, Lam, 3, 5);
        for (long long x = 0; x <= f.x_max; ++x)
            REQUIRE(f.f_raw(x, 0) == std::log(Lam(static_cast<double>(x))) / 2.0);
    }

    REQUIRE_THROWS_AS(evolve_interface(GrowthFunction::quadratic(1.0), NoiseField(kZero, 0),
                                       ModelParams(16, 1.0, 0.0), flat, -1, 4),
                      std::invalid_argument);
    REQUIRE_THROWS_AS(evolve_interface(GrowthFunction::quadratic(1.0), NoiseField(kZero, 0),
                                       ModelParams(16, 1.0, 0.0), [](double) { return 0.0; }, 4, 4),
                      std::invalid_argument);
}

TEST_CASE("shift equivariance of the dynamics", "[growth]") {
    const ModelParams p(64, 1.0, 0.5);
    const NoiseField nf(NoiseSpec::parse("rademacher"), 21);
    const double c = 0.3;
    for (const auto& gf : {GrowthFunction::polymer(1.0), GrowthFunction::quadratic(0.25)}) {
        auto Lam = initial_profile("holder", p);
        auto Lam_shift = [&](double x) { return Lam(x) * std::exp(p.beta * c); };
        const InterfaceField f1 = evolve_interface(gf, nf, p, Lam, 12, 10);
        const InterfaceField f2 = evolve_interface(gf, nf, p, Lam_shift, 12, 10);
        for (long long t = 0; t <= 12; ++t)
            for (long long x = 0; x <= f1.x_max - t; ++x)
                REQUIRE(f2.f_raw(x, t) == Catch::Approx(f1.f_raw(x, t) + c).epsilon(0.0).margin(1e-12));
    }
}

TEST_CASE("determinism and halo discipline", "[growth]") {
    const ModelParams p(256, 1.0, 1.0);
    const NoiseField nf(NoiseSpec::parse("centered_binomial", 4.0), 77);
    auto Lam = initial_profile("holder", p);
    const GrowthFunction gf = GrowthFunction::polymer(1.0);

    const InterfaceField a = evolve_interface(gf, nf, p, Lam, 16, 8);
    const InterfaceField b = evolve_interface(gf, nf, p, Lam, 16, 8);
    REQUIRE(a.raw.size() == b.raw.size());
    REQUIRE(std::memcmp(a.raw.data(), b.raw.data(), a.raw.size() * sizeof(double)) == 0);

    // a wider slab reports the same values on the original window
    const InterfaceField wide = evolve_interface(gf, nf, p, Lam, 16, 15);
    for (long long t = 0; t <= 16; ++t)
        for (long long x = 0; x <= 8; ++x) REQUIRE(wide.f_raw(x, t) == a.f_raw(x, t));
}

TEST_CASE("tilt and rescaled field", "[growth]") {
    const ModelParams p(16, 1.0, 0.0);
    const NoiseField nf(NoiseSpec::parse("rademacher"), 31);
    auto Lam = initial_profile("holder", p);
    const InterfaceField f = evolve_interface(GrowthFunction::polymer(1.0), nf, p, Lam, 32, 8);

    // tilt per step is beta^{-1} log m(theta); rademacher m = cosh
    REQUIRE(f.tilt_per_step == std::log(std::cosh(p.theta())) / p.beta);

    const RescaledField r = rescale_field(f, 1.7);
    REQUIRE(r.drift_per_unit_t() ==
            Catch::Approx(1.7 + 16.0 * f.tilt_per_step).epsilon(0.0).margin(1e-12));

    // t=0: f~(x,0) = lambda(sqrtN x) and exp(beta f~) = Lambda
    for (double x : {0.0, 0.25, 0.5, 1.0}) {
        REQUIRE(r.f_tilde(x, 0.0) == Catch::Approx(std::log(Lam(4.0 * x))).epsilon(0.0).margin(1e-12));
        REQUIRE(r.exp_beta_f(x, 0.0) == Catch::Approx(Lam(4.0 * x)).epsilon(1e-12));
    }
    // off-lattice queries interpolate linearly
    const double mid = 0.5 * (f.f_raw(1, 0) + f.f_raw(2, 0));
    REQUIRE(r.f_tilde(0.375, 0.0) == Catch::Approx(mid).epsilon(0.0).margin(1e-12)); // x = 1.5 on lattice

    // zero noise, A=0, V=0: the rescaled field vanishes identically
    const NoiseField z(kZero, 1);
    const InterfaceField f0 = evolve_interface(GrowthFunction::quadratic(1.0), z, p, [](double) { return 1.0; }, 32, 8);
    const RescaledField r0 = rescale_field(f0, 0.0);
    REQUIRE(r0.drift_per_unit_t() == 0.0); // m = 1 for the zero-noise family
    for (double t : {0.0, 0.5, 1.0, 2.0}) REQUIRE(r0.f_tilde(0.5, t) == 0.0);
}

TEST_CASE("interface equals polymer free energy", "[growth]") {
    // psi = psi^poly: tilted f is beta^{-1} log Z for the same realization,
    // boundary line included
    const ModelParams p(100, 1.0, 1.0);
    const NoiseField nf(NoiseSpec::parse("rademacher"), 5);
    auto Lam = initial_profile("holder", p);
    const InterfaceField f = evolve_interface(GrowthFunction::polymer(1.0), nf, p, Lam, 24, 20);
    const PartitionField Z = evolve_partition(nf, p, Lam, 24, 20);
    for (long long t = 0; t <= 24; ++t)
        for (long long x = 0; x <= 20; ++x)
            REQUIRE(std::fabs(f.f_tilted(x, t) - Z.f_poly(x, t)) <= 1e-10);
}

TEST_CASE("initial profiles", "[growth]") {
    const ModelParams p(256, 1.0, 0.0);
    auto flat = initial_profile("flat", p);
    REQUIRE(flat(0.0) == 1.0);
    REQUIRE(flat(123.0) == 1.0);
    auto hold = initial_profile("holder", p);
    REQUIRE(hold(0.0) == 1.0); // exp(sin 0)
    for (double x = 0.0; x <= 256.0; x += 7.0) {
        REQUIRE(hold(x) >= 0.25);
        REQUIRE(hold(x) <= 4.0);
    }
    REQUIRE_THROWS_AS(initial_profile("sine", p), std::invalid_argument);
}

TEST_CASE("non-finite values are flagged, not thrown", "[growth]") {
    // unbounded quadratic psi with wide noise at N=1 blows up quickly
    const ModelParams p(1, 1.0, 0.0);
    const NoiseField nf(NoiseSpec::parse("gaussian", 4.0), 13);
    const InterfaceField f =
        evolve_interface(GrowthFunction::quadratic(1e8), nf, p, [](double) { return 1.0; }, 20, 6);
    REQUIRE_FALSE(f.finite);
    REQUIRE(f.bad_t >= 1);
    REQUIRE(f.bad_t <= 20);
}
