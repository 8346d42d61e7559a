// SPDX-License-Identifier: Apache-2.0
//
// Default-correlation <-> asset-correlation dictionary: frozen references,
// attainability bounds, inversion round trips, and error reporting.

#include <cmath>
#include <random>

#include "doctest.h"

#include "poolcorr/corrmap.hpp"
#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"

using namespace poolcorr;

namespace {

void check_abs(double got, double want, double tol) {
    CHECK(std::fabs(got - want) <= tol);
}

} // namespace

TEST_CASE("default_corr_from_asset frozen reference") {
    check_abs(default_corr_from_asset(0.01, 0.10, 0.12),
              0.02228219219140534120075103, 1e-13);
    // rho_A = 0 decouples the defaults.
    check_abs(default_corr_from_asset(0.01, 0.10, 0.0), 0.0, 1e-15);
    check_abs(default_corr_from_asset(0.2, 0.2, 0.0), 0.0, 1e-15);
    // Equal PDs at rho_A = 1 are comonotone: rho_D = 1.
    check_abs(default_corr_from_asset(0.05, 0.05, 1.0), 1.0, 1e-12);
}

TEST_CASE("default_corr_bounds frozen reference and symmetry") {
    const DefaultCorrBounds b = default_corr_bounds(0.01, 0.10);
    check_abs(b.upper, 0.3015113445777636226468121, 1e-13);
    check_abs(b.lower, -0.03350126050864040251631245, 1e-13);

    const DefaultCorrBounds swapped = default_corr_bounds(0.10, 0.01);
    CHECK(swapped.upper == b.upper);
    CHECK(swapped.lower == b.lower);

    // Equal PDs admit perfect positive dependence.
    const DefaultCorrBounds eq = default_corr_bounds(0.3, 0.3);
    check_abs(eq.upper, 1.0, 1e-15);
    CHECK(eq.lower < 0.0);
}

TEST_CASE("bounds coincide with the rho_A = +/-1 endpoints") {
    std::mt19937_64 rng(3301);
    std::uniform_real_distribution<double> up(0.001, 0.6);
    for (int i = 0; i < 50; ++i) {
        const double pi = up(rng), pj = up(rng);
        const DefaultCorrBounds b = default_corr_bounds(pi, pj);
        check_abs(default_corr_from_asset(pi, pj, 1.0), b.upper, 1e-12);
        check_abs(default_corr_from_asset(pi, pj, -1.0), b.lower, 1e-12);
    }
}

TEST_CASE("default_corr_from_asset monotone in rho_A") {
    for (auto [pi, pj] : {std::pair{0.02, 0.02}, {0.001, 0.3}, {0.1, 0.5}}) {
        double prev = -2.0;
        for (int i = -100; i <= 100; ++i) {
            const double v = default_corr_from_asset(pi, pj, i / 100.0);
            CHECK(v >= prev - 1e-14);
            prev = v;
        }
    }
}

TEST_CASE("asset_corr_from_default round trips") {
    std::mt19937_64 rng(509);
    std::uniform_real_distribution<double> up(0.002, 0.5);
    std::uniform_real_distribution<double> ua(-0.95, 0.95);
    for (int i = 0; i < 100; ++i) {
        const double pi = up(rng), pj = up(rng), rho_a = ua(rng);
        const double rho_d = default_corr_from_asset(pi, pj, rho_a);
        const double back = asset_corr_from_default(pi, pj, rho_d);
        check_abs(back, rho_a, 1e-9);
    }
    // Identity cases.
    check_abs(asset_corr_from_default(0.05, 0.2, 0.0), 0.0, 1e-12);
    check_abs(asset_corr_from_default(0.01, 0.10, 0.02228219219140534120075103),
              0.12, 1e-9);
}

TEST_CASE("asset_corr_from_default unattainable targets") {
    const DefaultCorrBounds b = default_corr_bounds(0.01, 0.10);
    try {
        (void)asset_corr_from_default(0.01, 0.10, b.upper + 0.01);
        FAIL("expected unattainable_error");
    } catch (const unattainable_error& e) {
        check_abs(e.lower, b.lower, 1e-12);
        check_abs(e.upper, b.upper, 1e-12);
        check_abs(e.requested, b.upper + 0.01, 0.0);
    }
    CHECK_THROWS_AS((void)asset_corr_from_default(0.01, 0.10, b.lower - 0.01),
                    unattainable_error);
    // Values exactly on the bounds are attainable; Phi2 is nearly flat at
    // rho_A = +/-1, so assert the round trip rather than the endpoint itself.
    const double at_up = asset_corr_from_default(0.01, 0.10, b.upper);
    CHECK(at_up > 0.98);
    check_abs(default_corr_from_asset(0.01, 0.10, at_up), b.upper, 1e-9);
    const double at_lo = asset_corr_from_default(0.01, 0.10, b.lower);
    CHECK(at_lo < -0.98);
    check_abs(default_corr_from_asset(0.01, 0.10, at_lo), b.lower, 1e-9);
}

TEST_CASE("input validation") {
    CHECK_THROWS_AS((void)default_corr_from_asset(0.0, 0.1, 0.5), domain_error);
    CHECK_THROWS_AS((void)default_corr_from_asset(0.1, 1.0, 0.5), domain_error);
    CHECK_THROWS_AS((void)default_corr_from_asset(0.1, 0.1, 1.5), domain_error);
    CHECK_THROWS_AS((void)default_corr_bounds(-0.1, 0.2), domain_error);
    CHECK_THROWS_AS((void)asset_corr_from_default(0.1, 0.0, 0.2), domain_error);
}

TEST_CASE("cross_segment_asset_corr") {
    check_abs(cross_segment_asset_corr(0.12, 0.12, 1.0), 0.12, 1e-15);
    check_abs(cross_segment_asset_corr(0.04, 0.25, 0.5),
              std::sqrt(0.04) * 0.5 * std::sqrt(0.25), 1e-15);
    check_abs(cross_segment_asset_corr(0.3, 0.3, 0.0), 0.0, 1e-15);
    CHECK(cross_segment_asset_corr(0.2, 0.1, -0.8) < 0.0);
    CHECK_THROWS_AS((void)cross_segment_asset_corr(-0.1, 0.2, 0.5),
                    domain_error);
    CHECK_THROWS_AS((void)cross_segment_asset_corr(0.1, 0.2, 1.5),
                    domain_error);
}
