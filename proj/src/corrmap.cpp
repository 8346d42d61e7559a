// SPDX-License-Identifier: Apache-2.0
#include "poolcorr/corrmap.hpp"

#include <algorithm>
#include <cmath>

#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"

namespace poolcorr {

namespace {

void require_pd(double p, const char* who) {
    if (!(p > 0.0 && p < 1.0))
        throw domain_error(std::string(who) + ": PD must lie strictly in (0,1)");
}

} // namespace

double default_corr_from_asset(double p_i, double p_j, double rho_a) {
    require_pd(p_i, "default_corr_from_asset");
    require_pd(p_j, "default_corr_from_asset");
    if (!(rho_a >= -1.0 && rho_a <= 1.0))
        throw domain_error("default_corr_from_asset: rho_a outside [-1,1]");
    const double c_i = std_normal_quantile(p_i);
    const double c_j = std_normal_quantile(p_j);
    const double joint = bivariate_normal_cdf(c_i, c_j, rho_a);
    const double sigma = std::sqrt(p_i * (1.0 - p_i) * p_j * (1.0 - p_j));
    return (joint - p_i * p_j) / sigma;
}

DefaultCorrBounds default_corr_bounds(double p_i, double p_j) {
    require_pd(p_i, "default_corr_bounds");
    require_pd(p_j, "default_corr_bounds");
    const double up1 = std::sqrt((p_j / p_i) * ((1.0 - p_i) / (1.0 - p_j)));
    const double up2 = std::sqrt((p_i / p_j) * ((1.0 - p_j) / (1.0 - p_i)));
    const double lo1 = std::sqrt((p_i * p_j) / ((1.0 - p_i) * (1.0 - p_j)));
    const double lo2 = std::sqrt(((1.0 - p_i) * (1.0 - p_j)) / (p_i * p_j));
    return {-std::min(lo1, lo2), std::min(up1, up2)};
}

double asset_corr_from_default(double p_i, double p_j, double rho_d) {
    require_pd(p_i, "asset_corr_from_default");
    require_pd(p_j, "asset_corr_from_default");
    const DefaultCorrBounds b = default_corr_bounds(p_i, p_j);
    if (!(rho_d >= b.lower && rho_d <= b.upper))
        throw unattainable_error("asset_corr_from_default: rho_d outside attainable bounds",
                                 b.lower, b.upper, rho_d);
    const double c_i = std_normal_quantile(p_i);
    const double c_j = std_normal_quantile(p_j);
    const double sigma = std::sqrt(p_i * (1.0 - p_i) * p_j * (1.0 - p_j));
    const double target = rho_d * sigma + p_i * p_j; // Phi2 value to hit

    auto f = [&](double r) { return bivariate_normal_cdf(c_i, c_j, r) - target; };

    double lo = -1.0, hi = 1.0;
    double flo = f(lo), fhi = f(hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    // Phi2 is nondecreasing in rho, so the bracket holds by the bound check.
    double x = 0.0, fx = f(x);
    for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
        if (fx > 0.0) {
            hi = x; fhi = fx;
        } else {
            lo = x; flo = fx;
        }
        // secant proposal, clipped into the bracket with a bisection fallback
        double xs = (fhi != flo) ? (lo - flo * (hi - lo) / (fhi - flo))
                                 : 0.5 * (lo + hi);
        const double margin = 0.01 * (hi - lo);
        if (!(xs > lo + margin && xs < hi - margin)) xs = 0.5 * (lo + hi);
        x = xs;
        fx = f(x);
        if (fx == 0.0) return x;
    }
    return 0.5 * (lo + hi);
}

double cross_segment_asset_corr(double rho_a_1, double rho_a_2, double rho_z) {
    if (!(rho_a_1 >= 0.0 && rho_a_1 <= 1.0) || !(rho_a_2 >= 0.0 && rho_a_2 <= 1.0))
        throw domain_error("cross_segment_asset_corr: segment rho must lie in [0,1]");
    if (!(rho_z >= -1.0 && rho_z <= 1.0))
        throw domain_error("cross_segment_asset_corr: rho_z outside [-1,1]");
    return std::sqrt(rho_a_1) * rho_z * std::sqrt(rho_a_2);
}

} // namespace poolcorr
