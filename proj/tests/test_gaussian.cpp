// SPDX-License-Identifier: Apache-2.0
//
// Univariate and bivariate normal distribution functions against frozen
// high-precision references (250-digit arithmetic), closed-form identities,
// and the independent quadrature oracle.

#include <cmath>
#include <limits>
#include <random>

#include "doctest.h"

#include "oracle_bvn.hpp"
#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"

using namespace poolcorr;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_abs(double got, double want, double tol) {
    CHECK(std::fabs(got - want) <= tol);
}

void check_rel(double got, double want, double tol) {
    CHECK(std::fabs(got - want) <= tol * std::fabs(want));
}

} // namespace

TEST_CASE("std_normal_pdf basics") {
    check_rel(std_normal_pdf(0.0), 0.39894228040143267794, 1e-15);
    CHECK(std_normal_pdf(3.0) == std_normal_pdf(-3.0));
    CHECK(std_normal_pdf(40.0) == 0.0); // underflows cleanly
    CHECK(std_normal_pdf(kInf) == 0.0);
}

TEST_CASE("std_normal_cdf frozen references") {
    check_rel(std_normal_cdf(0.5), 0.6914624612740131036377046, 1e-15);
    check_rel(std_normal_cdf(1.959963985), 0.9750000000268815622991789, 1e-15);
    check_rel(std_normal_cdf(-8.0), 6.220960574271784123515995e-16, 1e-14);
    check_rel(std_normal_cdf(-15.0), 3.67096619931275088578609e-51, 1e-13);
    // Deep tail: the absolute contract (1e-15) is trivially met; relative
    // accuracy stays at ~1e-12 down to the subnormal edge.
    check_rel(std_normal_cdf(-37.5), 4.605353009581954843827969e-308, 1e-12);
}

TEST_CASE("std_normal_cdf structure") {
    CHECK(std_normal_cdf(0.0) == 0.5);
    CHECK(std_normal_cdf(kInf) == 1.0);
    CHECK(std_normal_cdf(-kInf) == 0.0);
    CHECK_THROWS_AS((void)std_normal_cdf(kNaN), domain_error);

    // Symmetry and monotonicity over an even grid.
    double prev = -1.0;
    for (int i = -80; i <= 80; ++i) {
        const double x = 0.1 * i;
        const double p = std_normal_cdf(x);
        check_abs(p + std_normal_cdf(-x), 1.0, 1e-15);
        CHECK(p >= prev);
        prev = p;
    }
}

TEST_CASE("std_normal_quantile frozen references") {
    check_rel(std_normal_quantile(0.01), -2.326347874040841100885606, 1e-15);
    check_rel(std_normal_quantile(0.10), -1.281551565544600466965103, 1e-15);
    check_rel(std_normal_quantile(0.02), -2.053748910631823052937352, 1e-15);
    check_rel(std_normal_quantile(0.30), -0.5244005127080407840382893, 1e-15);
    check_rel(std_normal_quantile(0.60), 0.2533471031357997987981962, 1e-15);
    check_rel(std_normal_quantile(0.975), 1.959963984540054235524594, 1e-15);
    check_rel(std_normal_quantile(0.001), -3.0902323061678135415404, 1e-15);
    check_rel(std_normal_quantile(0.0001), -3.719016485455680564393661, 1e-15);
    CHECK(std_normal_quantile(0.5) == 0.0);
}

TEST_CASE("std_normal_quantile round trips and errors") {
    for (int i = -80; i <= 80; ++i) {
        const double x = 0.1 * i;
        check_abs(std_normal_quantile(std_normal_cdf(x)), x, 1e-13 * std::max(1.0, std::fabs(x)));
    }
    // p -> Phi(Phi^{-1}(p)) across fourteen decades.
    for (double p = 1e-14; p < 0.5; p *= 10.0)
        check_rel(std_normal_cdf(std_normal_quantile(p)), p, 1e-13);

    CHECK_THROWS_AS((void)std_normal_quantile(0.0), boundary_error);
    CHECK_THROWS_AS((void)std_normal_quantile(1.0), boundary_error);
    CHECK_THROWS_AS((void)std_normal_quantile(-0.1), domain_error);
    CHECK_THROWS_AS((void)std_normal_quantile(1.1), domain_error);
    CHECK_THROWS_AS((void)std_normal_quantile(kNaN), domain_error);
}

TEST_CASE("bivariate_normal_cdf frozen references") {
    check_abs(bivariate_normal_cdf(0.0, 0.0, 0.5), 1.0 / 3.0, 1e-15);
    check_abs(bivariate_normal_cdf(-1.2, 0.3, -0.7), 0.01444821610950431508675073, 1e-13);
    check_abs(bivariate_normal_cdf(2.0, -2.0, 0.95), 0.02275013194817920720028264, 1e-13);
    check_abs(bivariate_normal_cdf(1.5, 1.5, 0.999), 0.9308822848543640423094684, 1e-13);
    check_abs(bivariate_normal_cdf(-0.5, -0.5, -0.95), 2.716165637214246001288808e-5, 1e-13);
    check_abs(bivariate_normal_cdf(0.3, -4.0, 0.6), 3.166412404938925423743458e-5, 1e-13);
    check_abs(bivariate_normal_cdf(-1.0, 1.0, 0.5), 0.154872951858602787535593, 1e-13);
    check_abs(bivariate_normal_cdf(0.25, -0.75, -0.33), 0.0957013596721420284363909, 1e-13);
    check_abs(bivariate_normal_cdf(3.0, 3.0, -0.99), 0.9973002039367398109466964, 1e-13);

    // PD-shaped corners of the variance sums.
    const double c02 = std_normal_quantile(0.02);
    const double c01 = std_normal_quantile(0.01);
    const double c10 = std_normal_quantile(0.10);
    check_abs(bivariate_normal_cdf(c02, c02, 0.12), 7.596433749232799181457561e-4, 1e-13);
    check_abs(bivariate_normal_cdf(c01, c10, 0.12), 1.665115039049306205768352e-3, 1e-13);
}

TEST_CASE("bivariate_normal_cdf closed-form structure") {
    // Median identity: Phi2(0,0,rho) = 1/4 + asin(rho)/(2 pi).
    for (int i = -99; i <= 99; i += 3) {
        const double rho = i / 100.0;
        check_abs(bivariate_normal_cdf(0.0, 0.0, rho),
                  0.25 + std::asin(rho) / (2.0 * M_PI), 2e-15);
    }

    std::mt19937_64 rng(7151);
    std::uniform_real_distribution<double> u(-4.0, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double h = u(rng), k = u(rng);
        const double ph = std_normal_cdf(h), pk = std_normal_cdf(k);
        // Degenerate correlations.
        check_abs(bivariate_normal_cdf(h, k, 0.0), ph * pk, 1e-14);
        check_abs(bivariate_normal_cdf(h, k, 1.0), std::min(ph, pk), 1e-14);
        check_abs(bivariate_normal_cdf(h, k, -1.0), std::max(0.0, ph + pk - 1.0), 1e-14);
        // Argument symmetry and the reflection identity.
        const double rho = std::uniform_real_distribution<double>(-0.999, 0.999)(rng);
        const double v = bivariate_normal_cdf(h, k, rho);
        check_abs(bivariate_normal_cdf(k, h, rho), v, 1e-15);
        check_abs(ph - bivariate_normal_cdf(h, -k, -rho), v, 2e-15);
        CHECK(v >= 0.0);
        CHECK(v <= std::min(ph, pk) + 1e-15);
    }
}

TEST_CASE("bivariate_normal_cdf infinite thresholds") {
    for (double rho : {-0.9, -0.3, 0.0, 0.6, 0.99}) {
        CHECK(bivariate_normal_cdf(-kInf, 0.3, rho) == 0.0);
        CHECK(bivariate_normal_cdf(0.3, -kInf, rho) == 0.0);
        check_abs(bivariate_normal_cdf(kInf, 0.3, rho), std_normal_cdf(0.3), 1e-15);
        check_abs(bivariate_normal_cdf(-1.1, kInf, rho), std_normal_cdf(-1.1), 1e-15);
        CHECK(bivariate_normal_cdf(kInf, kInf, rho) == 1.0);
    }
}

TEST_CASE("bivariate_normal_cdf monotone in rho") {
    for (double h : {-2.0, -0.5, 0.7, 2.5})
        for (double k : {-1.5, 0.0, 1.8}) {
            double prev = -1.0;
            for (int i = -100; i <= 100; ++i) {
                const double v = bivariate_normal_cdf(h, k, i / 100.0);
                CHECK(v >= prev - 1e-15);
                prev = v;
            }
        }
}

TEST_CASE("bivariate_normal_cdf domain errors") {
    CHECK_THROWS_AS((void)bivariate_normal_cdf(kNaN, 0.0, 0.5), domain_error);
    CHECK_THROWS_AS((void)bivariate_normal_cdf(0.0, kNaN, 0.5), domain_error);
    CHECK_THROWS_AS((void)bivariate_normal_cdf(0.0, 0.0, kNaN), domain_error);
    CHECK_THROWS_AS((void)bivariate_normal_cdf(0.0, 0.0, 1.0001), domain_error);
    CHECK_THROWS_AS((void)bivariate_normal_cdf(0.0, 0.0, -1.0001), domain_error);
}

TEST_CASE("bivariate_normal_cdf vs quadrature oracle") {
    std::mt19937_64 rng(99021);
    std::uniform_real_distribution<double> uh(-6.0, 6.0);
    std::uniform_real_distribution<double> ur(-0.999, 0.999);
    double worst = 0.0;
    for (int i = 0; i < 500; ++i) {
        const double h = uh(rng), k = uh(rng), rho = ur(rng);
        const double got = bivariate_normal_cdf(h, k, rho);
        const double want = poolcorr_test::oracle_phi2(h, k, rho);
        worst = std::max(worst, std::fabs(got - want));
    }
    CHECK(worst <= 1e-10); // contract; typical agreement is ~1e-14
}
