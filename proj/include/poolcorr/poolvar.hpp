// SPDX-License-Identifier: Apache-2.0
//
// Default-rate variance for finite pools under a one-factor Gaussian model.
//
// Pools come in three shapes: homogeneous (one PD, one asset correlation),
// PD-bucketed with a shared asset correlation, and a full PD x rho grid
// described by an ExposureConstellation.  The formulas agree on their common
// domains; the grid form is the general one.

#pragma once

#include <cstdint>
#include <vector>

namespace poolcorr {

// One PD, one asset correlation, n exchangeable exposures.
struct HomogeneousPool {
    double p = 0.0;      // PD, strictly in (0,1)
    double rho_a = 0.0;  // asset correlation, in [0,1]
    std::int64_t n = 1;  // number of exposures, >= 1

    double sigma() const; // sqrt(p(1-p))
    void validate() const;
};

// A K x L grid of cells: cell (k,l) holds counts[k*L + l] exposures sharing
// PD pd_values[k] and asset correlation rho_values[l].
//
// pd_values are strictly increasing.  The type-level invariant is p_k in
// (0,1), but the closed endpoints are accepted so the spread s(p) = 1
// two-point pool {0, 1} remains representable; the quantile of a boundary
// PD is taken as the corresponding infinite threshold.
struct ExposureConstellation {
    std::vector<double> pd_values;    // K PD levels
    std::vector<double> rho_values;   // L asset correlations, strictly increasing, in [0,1]
    std::vector<std::int64_t> counts; // K*L cell counts, row-major (k*L + l)
    std::int64_t n = 0;               // total exposures; must equal sum(counts)
    double p_bar = -1.0;              // stored mean-PD diagnostic; refresh() sets it

    std::size_t bucket_count() const { return pd_values.size(); }
    std::size_t rho_count() const { return rho_values.size(); }
    std::int64_t count_at(std::size_t k, std::size_t l) const {
        return counts[k * rho_values.size() + l];
    }

    // Exposure-weighted mean PD, recomputed from counts and pd_values.
    double mean_pd() const;

    // Recompute the stored totals (n, p_bar) from counts.
    void refresh();

    // Throws domain_error if shapes, orderings, value ranges, or the stored
    // diagnostics (n, p_bar within 1e-12) are inconsistent.
    void validate() const;
};

struct DefaultRateMoments {
    double mean = 0.0;     // E[DR]
    double variance = 0.0; // Var[DR]
};

// Variance of the default rate of n exposures with common PD p and pairwise
// default correlation rho_d:  sigma^2 rho_d + sigma^2 (1 - rho_d) / n,
// sigma^2 = p(1-p).
double var_dr_homogeneous_default(double p, double rho_d, std::int64_t n);

// Asymptotic covariance of two segment default rates: sigma_a sigma_b rho_d_ab.
double cov_dr(double sigma_a, double sigma_b, double rho_d_ab);

// Variance of the combined default rate of K homogeneous segments joined by
// a symmetric K x K default-correlation matrix rho_d (row-major, diagonal
// entries are the within-segment correlations):
//   (1/n^2) [ sum_{k,l} n_k n_l sigma_k sigma_l rho_d_kl
//             + sum_k n_k sigma_k^2 (1 - rho_d_kk) ].
double var_dr_combined_default(const std::vector<double>& p_k,
                               const std::vector<std::int64_t>& n_k,
                               const std::vector<double>& rho_d);

// Variance of the default rate of a homogeneous pool in asset-correlation
// terms:  Phi2(c,c,rho_a) - p^2 + (p - Phi2(c,c,rho_a)) / n,  c = Phi^{-1}(p).
double var_dr_single_asset(double p, double rho_a, std::int64_t n);

// Variance of the default rate of K PD buckets sharing one asset correlation.
// Release builds use the regrouped pairwise form (self-bucket term collected
// as n_k (n_k - 1)), which stays well conditioned for huge n_k; debug builds
// assert it against the direct double-sum form.
double var_dr_multibucket(const std::vector<double>& p_k,
                          const std::vector<std::int64_t>& n_k,
                          double rho_a);

// Variance of the default rate of a full K x L grid pool, using the cell's
// own rho for same-rho pairs and sqrt(rho_l rho_j) across rho levels.
// threads <= 0 selects the hardware concurrency.  The result is bitwise
// reproducible for a given pool regardless of the thread count.
DefaultRateMoments var_dr_grid(const ExposureConstellation& pool, int threads = 0);

// Same sums, but the pool is treated as a weight profile: the systematic
// part uses the cell weights counts/n as-is while the idiosyncratic repair
// term is divided by effective_n instead of pool.n.  This evaluates a
// high-resolution profile at small pool sizes without re-integerizing the
// counts (the fractional-weight reading of the grid variance).
DefaultRateMoments var_dr_grid_at(const ExposureConstellation& pool,
                                  std::int64_t effective_n, int threads = 0);

namespace detail {

// Both algebraic arrangements of the multibucket sum, sharing one set of
// Phi2 evaluations; used to cross-check the forms against each other.
struct MultibucketForms {
    double grouped = 0.0;  // full double sum plus the finite-size repair term
    double pairwise = 0.0; // k != l sum plus n_k (n_k - 1) diagonal terms
};
MultibucketForms var_dr_multibucket_forms(const std::vector<double>& p_k,
                                          const std::vector<std::int64_t>& n_k,
                                          double rho_a);

} // namespace detail

} // namespace poolcorr
