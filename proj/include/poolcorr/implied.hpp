// SPDX-License-Identifier: Apache-2.0
//
// Backing out the implied homogeneous asset correlation from a pool
// variance, and the derived measures rho_percent and the global adjustment
// factor alpha for a whole correlation structure.

#pragma once

#include <cstdint>
#include <vector>

#include "poolcorr/poolvar.hpp"

namespace poolcorr {

struct ImpliedRhoResult {
    // Implied asset correlation.  Slightly negative values (within the
    // analytic-continuation window of implied_rho_single) are legitimate.
    double rho_tilde = 0.0;
    // rho_tilde / rho_bar; NaN unless produced by rho_percent_for_configuration.
    double rho_percent = 0.0;
    int iterations = 0;
    // forward_variance(rho_tilde) - target_variance, on the variance scale.
    double residual = 0.0;
};

// Invert var_dr_single_asset in rho for fixed (p, n).
//
// Targets inside [p(1-p)/n, p(1-p)] resolve to rho_tilde in [0,1].  Targets
// above the upper bound throw unattainable_error.  Targets below the lower
// bound are resolved by analytic continuation of the finite-n formula to
// slightly negative rho: if a root exists in [-1e-4, 0] it is returned,
// otherwise boundary_error ("out of varbound") is thrown.
ImpliedRhoResult implied_rho_single(double target_var, double p, std::int64_t n);

// Invert var_dr_multibucket in the shared rho for fixed buckets.  No
// negative continuation: targets outside the attainable interval throw
// unattainable_error carrying both bounds.
ImpliedRhoResult implied_rho_multibucket(double target_var,
                                         const std::vector<double>& p_k,
                                         const std::vector<std::int64_t>& n_k);

// Solve for the scale alpha such that the structure {alpha * rho_l} yields
// the target variance under var_dr_grid.  alpha lies in [0, 1/max_l rho_l];
// targets outside the attainable interval throw unattainable_error.
double global_adjustment_factor(const ExposureConstellation& c,
                                double target_var, int threads = 0);

// Full pipeline: var_dr_grid(c) -> implied_rho_single(var, p_bar, n), then
// rho_percent = rho_tilde / rho_bar.  rho_bar is the caller's reference
// level (typically the exposure-weighted mean of rho_values) and must be
// positive.
ImpliedRhoResult rho_percent_for_configuration(const ExposureConstellation& c,
                                               double rho_bar, int threads = 0);

// Same, reading c as a weight profile evaluated at effective_n exposures
// (var_dr_grid_at semantics); both the variance and the inversion see
// effective_n.
ImpliedRhoResult rho_percent_for_configuration(const ExposureConstellation& c,
                                               double rho_bar,
                                               std::int64_t effective_n,
                                               int threads = 0);

} // namespace poolcorr
