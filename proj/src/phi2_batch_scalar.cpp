// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstddef>

#include "poolcorr/phi2_batch.hpp"
#include "phi2_core.hpp"

namespace poolcorr::detail {

void phi2_batch_scalar(const double* h, const double* k, const double* ph,
                       const double* pk, std::size_t count, double rho,
                       double* out) {
    if (rho == 0.0 || rho == 1.0 || rho == -1.0 || std::fabs(rho) >= 0.925) {
        for (std::size_t i = 0; i < count; ++i)
            out[i] = bvn_scalar(h[i], k[i], rho, ph[i], pk[i]);
        return;
    }
    Phi2MainPlan plan;
    phi2_build_main_plan(rho, plan);
    for (std::size_t i = 0; i < count; ++i) {
        if (phi2_needs_scalar(h[i], k[i])) {
            out[i] = bvn_scalar(h[i], k[i], rho, ph[i], pk[i]);
        } else {
            out[i] = phi2_main_eval(plan, h[i], k[i], ph[i] * pk[i]);
        }
    }
}

} // namespace poolcorr::detail
