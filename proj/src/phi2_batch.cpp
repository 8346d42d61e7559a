// SPDX-License-Identifier: Apache-2.0
#include "poolcorr/phi2_batch.hpp"

#include "poolcorr/errors.hpp"
#include "phi2_core.hpp"

namespace poolcorr {

namespace {

using BatchFn = void (*)(const double*, const double*, const double*,
                         const double*, std::size_t, double, double*);

BatchFn pick_auto() {
#ifdef POOLCORR_HAVE_AVX2_BUILD
    if (detail::phi2_avx2_available()) return &detail::phi2_batch_avx2;
#endif
    return &detail::phi2_batch_scalar;
}

BatchFn g_batch = pick_auto();

} // namespace

#ifndef POOLCORR_HAVE_AVX2_BUILD
namespace detail {
bool phi2_avx2_available() { return false; }
void phi2_batch_avx2(const double*, const double*, const double*,
                     const double*, std::size_t, double, double*) {
    throw domain_error("phi2_batch_avx2: not compiled into this build");
}
} // namespace detail
#endif

void set_phi2_kernel(Phi2Kernel k) {
    switch (k) {
    case Phi2Kernel::auto_detect:
        g_batch = pick_auto();
        return;
    case Phi2Kernel::scalar:
        g_batch = &detail::phi2_batch_scalar;
        return;
    case Phi2Kernel::avx2:
        if (!detail::phi2_avx2_available())
            throw domain_error("set_phi2_kernel: AVX2 not available");
        g_batch = &detail::phi2_batch_avx2;
        return;
    }
    throw domain_error("set_phi2_kernel: unknown kernel");
}

const char* phi2_kernel_name() {
    return g_batch == &detail::phi2_batch_scalar ? "scalar" : "avx2";
}

void phi2_batch(const double* h, const double* k, const double* ph,
                const double* pk, std::size_t count, double rho, double* out) {
    if (!(rho >= -1.0 && rho <= 1.0))
        throw domain_error("phi2_batch: rho outside [-1,1]");
    g_batch(h, k, ph, pk, count, rho, out);
}

} // namespace poolcorr
