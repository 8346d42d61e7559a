// SPDX-License-Identifier: Apache-2.0
//
// Internal: Genz bivariate normal machinery shared by the scalar evaluator
// and the batch kernels. Not installed.
#pragma once

#include <cmath>
#include <initializer_list>
#include <limits>

#include "poolcorr/gaussian.hpp"

namespace poolcorr::detail {

// Gauss-Legendre half-rules (weights / abscissae on [0,1] halves, mirrored
// at evaluation time), as tabulated in Genz (2004) / West (2004).
inline constexpr double kGL6W[3] = {
    0.1713244923791704, 0.3607615730481386, 0.4679139345726910};
inline constexpr double kGL6X[3] = {
    0.9324695142031521, 0.6612093864662645, 0.2386191860831969};
inline constexpr double kGL12W[6] = {
    0.04717533638651183, 0.1069393259953184, 0.1600783285433462,
    0.2031674267230659,  0.2334925365383548, 0.2491470458134028};
inline constexpr double kGL12X[6] = {
    0.9815606342467192, 0.9041172563704749, 0.7699026741943047,
    0.5873179542866175, 0.3678314989981802, 0.1252334085114689};
inline constexpr double kGL20W[10] = {
    0.01761400713915212, 0.04060142980038694, 0.06267204833410907,
    0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
    0.1316886384491766,  0.1420961093183820,  0.1491729864726037,
    0.1527533871307258};
inline constexpr double kGL20X[10] = {
    0.9931285991850949, 0.9639719272779138, 0.9122344282513259,
    0.8391169718222188, 0.7463319064601508, 0.6360536807265150,
    0.5108670019508271, 0.3737060887154195, 0.2277858511416451,
    0.07652652113349734};

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Precomputed per-correlation data for the main branch (|rho| < 0.925):
// mirrored sine nodes, their 1/(1-sn^2), and weights, tier chosen by |rho|.
struct Phi2MainPlan {
    int terms = 0;        // 12, 24 or 40
    double scale = 0.0;   // asin(rho) / (4 pi)
    double sn[40];
    double inv_one_minus_sn2[40];
    double w[40];
};

inline void phi2_build_main_plan(double rho, Phi2MainPlan& plan) {
    const double* W;
    const double* X;
    int half;
    const double ar = std::fabs(rho);
    if (ar < 0.3) {
        W = kGL6W; X = kGL6X; half = 3;
    } else if (ar < 0.75) {
        W = kGL12W; X = kGL12X; half = 6;
    } else {
        W = kGL20W; X = kGL20X; half = 10;
    }
    const double asr = std::asin(rho);
    plan.terms = 2 * half;
    plan.scale = asr / (2.0 * kTwoPi);
    int t = 0;
    for (int i = 0; i < half; ++i) {
        for (double sgn : {-1.0, 1.0}) {
            const double sn = std::sin(asr * (sgn * X[i] + 1.0) * 0.5);
            plan.sn[t] = sn;
            plan.inv_one_minus_sn2[t] = 1.0 / (1.0 - sn * sn);
            plan.w[t] = W[i];
            ++t;
        }
    }
}

// Main-branch evaluation given the plan and precomputed Phi(x)*Phi(y).
// Assumes x, y finite and |rho| < 0.925, rho != 0.
inline double phi2_main_eval(const Phi2MainPlan& plan, double x, double y,
                             double pxy) {
    const double h = -x;
    const double k = -y;
    const double hk = h * k;
    const double hs = (h * h + k * k) * 0.5;
    double acc = 0.0;
    for (int t = 0; t < plan.terms; ++t) {
        const double sn = plan.sn[t];
        acc += plan.w[t] *
               std::exp((sn * hk - hs) * plan.inv_one_minus_sn2[t]);
    }
    double bvn = acc * plan.scale + pxy;
    if (bvn < 0.0) bvn = 0.0;
    if (bvn > 1.0) bvn = 1.0;
    return bvn;
}

// Full scalar evaluator covering all branches; phx/phy are Phi(x)/Phi(y).
// Assumes non-NaN inputs and |rho| <= 1 (validated by the public wrapper).
double bvn_scalar(double x, double y, double rho, double phx, double phy);

inline bool phi2_needs_scalar(double x, double y) {
    return !std::isfinite(x) || !std::isfinite(y);
}

} // namespace poolcorr::detail
