// SPDX-License-Identifier: Apache-2.0
//
// The dictionary between default correlations and asset correlations under
// the Gaussian copula, with the PD-dependent attainability bounds.
#pragma once

namespace poolcorr {

struct DefaultCorrBounds {
    double lower; // <= 0
    double upper; // >= 0
};

// rho_D = (Phi2(c_i, c_j, rho_A) - p_i p_j) / (sigma_i sigma_j).
// Requires p_i, p_j in (0,1) and rho_A in [-1,1].
double default_corr_from_asset(double p_i, double p_j, double rho_a);

// Inverse of the above by bracketed bisection with secant refinement on
// [-1,1]. Throws unattainable_error (carrying the bounds) when rho_d lies
// outside default_corr_bounds(p_i, p_j).
double asset_corr_from_default(double p_i, double p_j, double rho_d);

// Frechet-style bounds on the default correlation:
//   upper = min( sqrt((p_j/p_i)((1-p_i)/(1-p_j))), same with i/j swapped )
//   lower = -min( sqrt(p_i p_j /((1-p_i)(1-p_j))), its reciprocal )
DefaultCorrBounds default_corr_bounds(double p_i, double p_j);

// sqrt(rho_a_1) * rho_z * sqrt(rho_a_2): correlation between latent indices
// of two segments whose systematic factors correlate at rho_z.
double cross_segment_asset_corr(double rho_a_1, double rho_a_2, double rho_z);

} // namespace poolcorr
