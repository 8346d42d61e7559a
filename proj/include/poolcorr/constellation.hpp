// SPDX-License-Identifier: Apache-2.0
//
// From moment-level input configurations {n, p-mean, p-spread, rho-mean,
// rho-spread, tau} to concrete exposure constellations {p_k, rho_l, n_kl},
// and back again via diagnosis.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "poolcorr/poolvar.hpp"

namespace poolcorr {

// How the PD spread field is normalized:
//   s  — spread_s = sigma / sqrt(mean (1 - mean))  (1 is the attainable max)
//   cv — coefficient of variation, sigma / mean
// The rho spread always uses the s normalization.
enum class SpreadConvention { s, cv };

enum class MarginalFamily { beta, two_point, lognormal_clipped };
enum class MidConvention { mean, median };

struct InputConfiguration {
    std::int64_t n = 0;
    double p_mean = 0.0;
    double p_spread = 0.0; // s(p) or c_v(p), per spread_convention
    double rho_mean = 0.0;
    double rho_spread = 0.0; // always s(rho)
    double tau = 0.0;        // PD-rho correlation across exposures
    SpreadConvention spread_convention = SpreadConvention::s;

    // p_spread converted to the s normalization (identity under s).
    double p_spread_s() const;

    void validate() const;
};

struct BuildParams {
    std::int64_t K = 1; // PD buckets
    std::int64_t L = 1; // rho buckets
    // Granularity knob of the bucket-mean computation.  The conditional
    // bucket means are evaluated in closed form here, so g has no numerical
    // effect; it is kept (and validated) for interface compatibility.
    std::int64_t g = 1000000;
    MidConvention p_mid = MidConvention::median; // anchor reported by diagnose
    MarginalFamily p_family = MarginalFamily::beta;
    MarginalFamily rho_family = MarginalFamily::beta;

    void validate() const;
};

struct Diagnosis {
    InputConfiguration achieved;
    // Central PD anchor selected by BuildParams::p_mid (exposure-weighted
    // mean or median), reported alongside the plain moments.
    double p_mid_value = 0.0;
    MidConvention p_mid_kind = MidConvention::median;
    // Relative error per moment against the target configuration (absolute
    // error where the target moment is zero).  NaN-free; zero when no
    // target was supplied.
    double err_p_mean = 0.0;
    double err_p_spread = 0.0;
    double err_rho_mean = 0.0;
    double err_rho_spread = 0.0;
    double err_tau = 0.0;
    double tolerance = 0.01;
    bool pass = true;
};

// One discretized marginal: atom values with matching weights (sum 1).
// Equal adjacent atoms are merged, so fewer than `buckets` entries can come
// back (always exactly one at spread_s = 0).
struct DiscreteMarginal {
    std::vector<double> values;
    std::vector<double> weights;
};

// Discretize a (mean, spread) pair into `buckets` equiprobable quantile
// cells of the chosen family, each represented by its conditional mean.
// spread_s uses the s normalization; spread_s = 0 degenerates to one atom
// at the mean and spread_s = 1 to the boundary two-point law {0, 1}.
// Only the unit interval support is implemented.
DiscreteMarginal discretize_marginal(double mean, double spread_s,
                                     std::int64_t buckets,
                                     MarginalFamily family,
                                     std::pair<double, double> support = {0.0,
                                                                          1.0});

// Realize an input configuration as a K x L exposure constellation.  The
// PD-rho dependence tau is realized by a Gaussian copula over the marginal
// quantile cells, calibrated so the exposure-weighted Pearson correlation
// of the cell values hits cfg.tau; tau = 0 short-circuits to the product
// measure.  Cell weights are integerized by cumulative rounding in cell
// order, which keeps the discretization drift unbiased for small n.
ExposureConstellation build_constellation(const InputConfiguration& cfg,
                                          const BuildParams& params);

// Achieved moments of a constellation (exposure-weighted; spreads in the s
// normalization; tau = 0 by convention when either marginal is degenerate).
Diagnosis diagnose(const ExposureConstellation& c);

// Same, with relative errors and pass/fail against a target configuration.
// Spreads are compared in the target's convention.
Diagnosis diagnose(const ExposureConstellation& c,
                   const InputConfiguration& target,
                   const BuildParams& params = {}, double tolerance = 0.01);

// Largest-remainder apportionment of n across joint_weights (row-major
// K x L, nonnegative, summing to 1); ties broken by lexicographic cell
// order.  The result sums to n exactly.
std::vector<std::int64_t> allocate_counts(const std::vector<double>& joint_weights,
                                          std::int64_t n);

// Plain-text serialization: header "K L n", K lines of p_k, L lines of
// rho_l, then K*L lines "k l n_kl" (zero-based indices).  Values are
// written with 17 significant digits, so load(save(c)) round-trips exactly.
void save_constellation(const ExposureConstellation& c, std::ostream& os);
ExposureConstellation load_constellation(std::istream& is);
void save_constellation_file(const ExposureConstellation& c,
                             const std::string& path);
ExposureConstellation load_constellation_file(const std::string& path);

} // namespace poolcorr
