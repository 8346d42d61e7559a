// SPDX-License-Identifier: Apache-2.0
//
// Batched Phi2 evaluation at a fixed correlation, the hot path of the grid
// variance sums (~1e8 distinct evaluations at K=200, L=100). A scalar
// reference kernel is always available; an AVX2+FMA kernel is selected at
// runtime when the CPU supports it. Both kernels implement the identical
// Genz main branch; elements that need a special case (non-finite threshold,
// |rho| >= 0.925, rho in {-1,0,1}) are routed through the scalar evaluator.
#pragma once

#include <cstddef>

namespace poolcorr {

enum class Phi2Kernel {
    auto_detect, // pick AVX2 when the CPU has it (default)
    scalar,
    avx2,
};

// Force a kernel (tests, benchmarks). Throws domain_error if the requested
// kernel is not available on this CPU/build. Not thread-safe; call before
// spawning workers.
void set_phi2_kernel(Phi2Kernel k);

// Name of the kernel batches currently dispatch to: "scalar" or "avx2".
const char* phi2_kernel_name();

// out[i] = Phi2(h[i], k[i], rho). ph/pk carry precomputed Phi(h[i]) /
// Phi(k[i]) so the batch never re-evaluates the univariate CDF; callers in
// the variance sums know these as bucket PDs. Arrays need no alignment.
void phi2_batch(const double* h, const double* k, const double* ph,
                const double* pk, std::size_t count, double rho, double* out);

namespace detail {
// Direct kernel entry points, bypassing dispatch (equivalence tests).
void phi2_batch_scalar(const double* h, const double* k, const double* ph,
                       const double* pk, std::size_t count, double rho,
                       double* out);
bool phi2_avx2_available();
void phi2_batch_avx2(const double* h, const double* k, const double* ph,
                     const double* pk, std::size_t count, double rho,
                     double* out);
} // namespace detail

} // namespace poolcorr
