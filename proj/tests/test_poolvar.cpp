// SPDX-License-Identifier: Apache-2.0
//
// Default-rate variance formulas: frozen references, limit identities, the
// agreement of the homogeneous / multibucket / grid forms on their shared
// domains, a brute-force recomputation of the grid sums, and thread-count
// reproducibility.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "doctest.h"

#include "poolcorr/corrmap.hpp"
#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"
#include "poolcorr/poolvar.hpp"

using namespace poolcorr;

namespace {

void check_abs(double got, double want, double tol) {
    CHECK(std::fabs(got - want) <= tol);
}

void check_rel(double got, double want, double tol) {
    CHECK(std::fabs(got - want) <= tol * std::fabs(want));
}

ExposureConstellation make_grid(std::vector<double> pds,
                                std::vector<double> rhos,
                                std::vector<std::int64_t> counts) {
    ExposureConstellation g;
    g.pd_values = std::move(pds);
    g.rho_values = std::move(rhos);
    g.counts = std::move(counts);
    g.refresh();
    g.validate();
    return g;
}

// Direct transcription of the grid sums, no batching, no regrouping:
//   S2 = sum_{kl,ij} n_kl n_ij Phi2(c_k, c_i, sqrt(rho_l rho_j))
//   S1 = sum_{kl} n_kl Phi2(c_k, c_k, rho_l)
//   var = S2/n^2 - p_bar^2 + (p_bar - S1/n)/n
double brute_force_grid_variance(const ExposureConstellation& g) {
    const std::size_t K = g.bucket_count(), L = g.rho_count();
    std::vector<double> c(K);
    for (std::size_t k = 0; k < K; ++k)
        c[k] = std_normal_quantile(g.pd_values[k]);
    const double n = static_cast<double>(g.n);
    double s2 = 0.0, s1 = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            const double n_kl = static_cast<double>(g.count_at(k, l));
            if (n_kl == 0.0) continue;
            s1 += n_kl * bivariate_normal_cdf(c[k], c[k], g.rho_values[l]);
            for (std::size_t i = 0; i < K; ++i)
                for (std::size_t j = 0; j < L; ++j) {
                    const double n_ij = static_cast<double>(g.count_at(i, j));
                    if (n_ij == 0.0) continue;
                    const double r =
                        std::sqrt(g.rho_values[l] * g.rho_values[j]);
                    s2 += n_kl * n_ij * bivariate_normal_cdf(c[k], c[i], r);
                }
        }
    const double pb = g.mean_pd();
    return s2 / (n * n) - pb * pb + (pb - s1 / n) / n;
}

} // namespace

TEST_CASE("var_dr_single_asset frozen references") {
    check_rel(var_dr_single_asset(0.02, 0.12, 1000000000),
              0.0003596433941636347042424883, 1e-12);
    check_rel(var_dr_single_asset(0.05, 0.12, 1000000),
              0.001492701130425625405368602, 1e-12);
}

TEST_CASE("homogeneous limit identities") {
    // n = 1: a single Bernoulli exposure, var = p(1-p) whatever rho is.
    for (double rho : {0.0, 0.12, 0.7, 1.0})
        check_rel(var_dr_single_asset(0.03, rho, 1), 0.03 * 0.97, 1e-14);
    // rho = 0: i.i.d. binomial, var = p(1-p)/n.
    for (std::int64_t n : {1LL, 7LL, 1000LL, 1000000000LL})
        check_rel(var_dr_single_asset(0.2, 0.0, n),
                  0.2 * 0.8 / static_cast<double>(n), 1e-13);
    // rho = 1: perfectly comonotone, var = p(1-p) independent of n.
    check_rel(var_dr_single_asset(0.1, 1.0, 50), 0.09, 1e-12);

    // Default-correlation form agrees through the dictionary.
    const double p = 0.04, rho_a = 0.18;
    const double rho_d = default_corr_from_asset(p, p, rho_a);
    for (std::int64_t n : {2LL, 10LL, 100000LL})
        check_rel(var_dr_homogeneous_default(p, rho_d, n),
                  var_dr_single_asset(p, rho_a, n), 1e-12);
}

TEST_CASE("var_dr_homogeneous_default structure") {
    // rho_d = 1 collapses to a single Bernoulli; rho_d = 0 to binomial.
    check_rel(var_dr_homogeneous_default(0.3, 1.0, 17), 0.21, 1e-15);
    check_rel(var_dr_homogeneous_default(0.3, 0.0, 17), 0.21 / 17.0, 1e-15);
    CHECK_THROWS_AS((void)var_dr_homogeneous_default(0.3, 0.5, 0),
                    domain_error);
    CHECK_THROWS_AS((void)var_dr_homogeneous_default(0.0, 0.5, 10),
                    domain_error);
}

TEST_CASE("cov_dr") {
    check_rel(cov_dr(0.14, 0.3, 0.02228219219140534120075103),
              0.14 * 0.3 * 0.02228219219140534120075103, 1e-15);
    CHECK(cov_dr(0.1, 0.2, 0.0) == 0.0);
}

TEST_CASE("var_dr_combined_default single segment reduces to homogeneous") {
    const double p = 0.07, rho_d = 0.03;
    const std::vector<double> pk = {p};
    const std::vector<std::int64_t> nk = {250};
    const std::vector<double> mat = {rho_d};
    check_rel(var_dr_combined_default(pk, nk, mat),
              var_dr_homogeneous_default(p, rho_d, 250), 1e-14);
}

TEST_CASE("var_dr_combined_default two segments vs direct expansion") {
    const std::vector<double> pk = {0.02, 0.10};
    const std::vector<std::int64_t> nk = {300, 700};
    // Consistent matrix from a shared asset correlation.
    const double rho_a = 0.12;
    const double d11 = default_corr_from_asset(0.02, 0.02, rho_a);
    const double d12 = default_corr_from_asset(0.02, 0.10, rho_a);
    const double d22 = default_corr_from_asset(0.10, 0.10, rho_a);
    const std::vector<double> mat = {d11, d12, d12, d22};

    const double combined = var_dr_combined_default(pk, nk, mat);

    // The same pool through the asset-correlation multibucket form.
    check_rel(combined, var_dr_multibucket(pk, nk, rho_a), 1e-10);

    // And by expanding the sums by hand.
    const double s1 = std::sqrt(0.02 * 0.98), s2 = std::sqrt(0.10 * 0.90);
    const double n = 1000.0;
    double direct = 300.0 * 300.0 * s1 * s1 * d11 +
                    2.0 * 300.0 * 700.0 * s1 * s2 * d12 +
                    700.0 * 700.0 * s2 * s2 * d22;
    direct += 300.0 * s1 * s1 * (1.0 - d11) + 700.0 * s2 * s2 * (1.0 - d22);
    direct /= n * n;
    check_rel(combined, direct, 1e-13);

    // Asymmetric or wrongly-sized matrices are rejected.
    std::vector<double> bad = mat;
    bad[1] += 1e-3;
    CHECK_THROWS_AS((void)var_dr_combined_default(pk, nk, bad), domain_error);
    CHECK_THROWS_AS((void)var_dr_combined_default(pk, nk, {d11, d12, d12}),
                    domain_error);
}

TEST_CASE("multibucket forms agree and match the homogeneous special case") {
    std::mt19937_64 rng(8837);
    std::uniform_real_distribution<double> up(0.001, 0.4);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> pk;
        std::vector<std::int64_t> nk;
        const int K = 1 + static_cast<int>(rng() % 6);
        for (int k = 0; k < K; ++k) {
            pk.push_back(up(rng));
            nk.push_back(1 + static_cast<std::int64_t>(rng() % 5000));
        }
        std::sort(pk.begin(), pk.end());
        const double rho = std::uniform_real_distribution<double>(0.0, 0.6)(rng);
        const auto forms = detail::var_dr_multibucket_forms(pk, nk, rho);
        check_rel(forms.pairwise, forms.grouped, 1e-12);
        check_rel(var_dr_multibucket(pk, nk, rho), forms.pairwise, 1e-15);
    }
    check_rel(var_dr_multibucket({0.02}, {1000000000}, 0.12),
              var_dr_single_asset(0.02, 0.12, 1000000000), 1e-13);
}

TEST_CASE("grid variance: degenerate shapes reduce to simpler forms") {
    // K = 1, L = 1: plain homogeneous pool. The grid path may dispatch to a
    // different (vectorised) Phi2 kernel, so the tolerance is the kernel
    // equivalence bound, not machine epsilon.
    const auto g11 = make_grid({0.02}, {0.12}, {123456});
    const auto m11 = var_dr_grid(g11);
    check_rel(m11.mean, 0.02, 1e-15);
    check_rel(m11.variance, var_dr_single_asset(0.02, 0.12, 123456), 1e-9);

    // L = 1: multibucket with a shared rho.
    const std::vector<double> pk = {0.01, 0.05, 0.2};
    const std::vector<std::int64_t> nk = {400, 350, 250};
    const auto gk1 = make_grid(pk, {0.12}, nk);
    const auto mk1 = var_dr_grid(gk1);
    check_rel(mk1.variance, var_dr_multibucket(pk, nk, 0.12), 1e-9);
    check_rel(mk1.mean, gk1.mean_pd(), 1e-15);
}

TEST_CASE("grid variance vs brute force") {
    const auto g = make_grid({0.005, 0.03, 0.09, 0.25}, {0.04, 0.12, 0.30},
                             {10, 40, 5, 120, 300, 80, 60, 200, 35, 9, 90, 51});
    const auto m = var_dr_grid(g);
    check_rel(m.variance, brute_force_grid_variance(g), 1e-9);
    check_rel(m.mean, g.mean_pd(), 1e-15);

    // Zero-count rows and columns do not perturb the sums.
    auto padded = make_grid({0.001, 0.005, 0.03, 0.09, 0.25},
                            {0.04, 0.12, 0.30, 0.9},
                            {0, 0, 0, 0,
                             10, 40, 5, 0,
                             120, 300, 80, 0,
                             60, 200, 35, 0,
                             9, 90, 51, 0});
    const auto mp = var_dr_grid(padded);
    check_rel(mp.variance, m.variance, 1e-13);
}

TEST_CASE("grid variance is bitwise reproducible across thread counts") {
    // Large enough that a multi-threaded build actually splits the work.
    std::vector<double> pds(40);
    std::vector<double> rhos(12);
    std::vector<std::int64_t> counts(40 * 12);
    std::mt19937_64 rng(4242);
    for (std::size_t k = 0; k < pds.size(); ++k)
        pds[k] = 0.001 + 0.01 * static_cast<double>(k);
    for (std::size_t l = 0; l < rhos.size(); ++l)
        rhos[l] = 0.02 + 0.05 * static_cast<double>(l);
    for (auto& c : counts)
        c = static_cast<std::int64_t>(rng() % 1000);
    const auto g = make_grid(std::move(pds), std::move(rhos), std::move(counts));

    const auto ref = var_dr_grid(g, 1);
    for (int threads : {2, 3, 4, 7, 0}) {
        const auto m = var_dr_grid(g, threads);
        CHECK(m.variance == ref.variance);
        CHECK(m.mean == ref.mean);
    }
}

TEST_CASE("var_dr_grid_at: profile evaluation at a small effective n") {
    const auto g = make_grid({0.005, 0.03, 0.09, 0.25}, {0.04, 0.12, 0.30},
                             {10, 40, 5, 120, 300, 80, 60, 200, 35, 9, 90, 51});

    // At effective_n == pool.n the two entry points coincide bitwise (same
    // code path, same work partition).
    const auto base = var_dr_grid(g);
    const auto at_n = var_dr_grid_at(g, g.n);
    CHECK(at_n.variance == base.variance);

    // The variance is affine in 1/effective_n: var(n_e) = A + B / n_e.
    const auto v2 = var_dr_grid_at(g, 2).variance;
    const auto v5 = var_dr_grid_at(g, 5).variance;
    const auto v10 = var_dr_grid_at(g, 10).variance;
    const double B = (v2 - v10) / (0.5 - 0.1);
    const double A = v10 - B * 0.1;
    check_rel(v5, A + B * 0.2, 1e-12);
    CHECK(B > 0.0); // the finite-size repair term shrinks with n
    CHECK(v2 > v5);
    CHECK(v5 > v10);

    CHECK_THROWS_AS((void)var_dr_grid_at(g, 0), domain_error);
}

TEST_CASE("constellation bookkeeping: refresh and validate") {
    auto g = make_grid({0.02, 0.10}, {0.12}, {30, 70});
    check_rel(g.p_bar, 0.3 * 0.02 + 0.7 * 0.10, 1e-15);
    CHECK(g.n == 100);

    // Stored totals out of sync with counts are rejected.
    ExposureConstellation stale = g;
    stale.counts[0] = 31;
    CHECK_THROWS_AS(stale.validate(), domain_error);
    stale.refresh();
    CHECK(stale.n == 101);
    stale.validate();

    ExposureConstellation bad = g;
    bad.pd_values = {0.10, 0.02}; // not increasing
    CHECK_THROWS_AS(bad.validate(), domain_error);

    ExposureConstellation shape = g;
    shape.counts.pop_back();
    CHECK_THROWS_AS(shape.validate(), domain_error);

    ExposureConstellation rho_range = g;
    rho_range.rho_values = {1.5};
    CHECK_THROWS_AS(rho_range.validate(), domain_error);

    HomogeneousPool hp{0.02, 0.12, 100};
    check_rel(hp.sigma(), std::sqrt(0.02 * 0.98), 1e-15);
    hp.validate();
    hp.n = 0;
    CHECK_THROWS_AS(hp.validate(), domain_error);
}
