// SPDX-License-Identifier: Apache-2.0
//
// AVX2+FMA batch kernel for the Genz main branch. Four (h,k) pairs per
// iteration; the weighted exponential sum runs on a vectorized Cephes-style
// exp. Non-finite lanes fall back to the scalar evaluator; tail elements go
// through a padded vector pass so every finite element takes the identical
// code path regardless of how callers chunk their ranges.
#ifndef __AVX2__
#error "phi2_batch_avx2.cpp must be compiled with -mavx2 -mfma"
#endif

#include <immintrin.h>

#include <cmath>
#include <cstddef>

#include "poolcorr/phi2_batch.hpp"
#include "phi2_core.hpp"

namespace poolcorr::detail {

namespace {

// exp(x) for x <= 0, Cephes rational approximation, ~1 ulp.
inline __m256d exp_pd(__m256d x) {
    const __m256d log2e = _mm256_set1_pd(1.4426950408889634073599);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);
    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    x = _mm256_max_pd(x, _mm256_set1_pd(-708.39641853226408));

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    x = _mm256_fnmadd_pd(n, c1, x);
    x = _mm256_fnmadd_pd(n, c2, x);

    const __m256d xx = _mm256_mul_pd(x, x);
    __m256d px = _mm256_fmadd_pd(p0, xx, p1);
    px = _mm256_fmadd_pd(px, xx, p2);
    px = _mm256_mul_pd(px, x);
    __m256d qx = _mm256_fmadd_pd(q0, xx, q1);
    qx = _mm256_fmadd_pd(qx, xx, q2);
    qx = _mm256_fmadd_pd(qx, xx, q3);
    const __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    const __m256d one = _mm256_set1_pd(1.0);
    __m256d r = _mm256_fmadd_pd(e, _mm256_set1_pd(2.0), one);

    // scale by 2^n via exponent bits
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i bias = _mm256_add_epi64(n64, _mm256_set1_epi64x(1023));
    const __m256d two_n = _mm256_castsi256_pd(_mm256_slli_epi64(bias, 52));
    return _mm256_mul_pd(r, two_n);
}

inline __m256d clamp01(__m256d v) {
    v = _mm256_max_pd(v, _mm256_setzero_pd());
    return _mm256_min_pd(v, _mm256_set1_pd(1.0));
}

// One vector of 4 finite (h,k) pairs through the main branch.
inline __m256d main_eval4(const Phi2MainPlan& plan, __m256d hv, __m256d kv,
                          __m256d pxy) {
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d hk = _mm256_mul_pd(hv, kv);
    const __m256d hs = _mm256_mul_pd(
        _mm256_fmadd_pd(hv, hv, _mm256_mul_pd(kv, kv)), half);
    __m256d acc = _mm256_setzero_pd();
    for (int t = 0; t < plan.terms; ++t) {
        const __m256d sn = _mm256_set1_pd(plan.sn[t]);
        const __m256d inv = _mm256_set1_pd(plan.inv_one_minus_sn2[t]);
        const __m256d arg = _mm256_mul_pd(_mm256_fmsub_pd(sn, hk, hs), inv);
        acc = _mm256_fmadd_pd(_mm256_set1_pd(plan.w[t]), exp_pd(arg), acc);
    }
    return clamp01(_mm256_fmadd_pd(acc, _mm256_set1_pd(plan.scale), pxy));
}

inline unsigned finite_mask(__m256d h, __m256d k) {
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    const __m256d inf = _mm256_set1_pd(std::numeric_limits<double>::infinity());
    const __m256d hf = _mm256_cmp_pd(_mm256_and_pd(h, abs_mask), inf, _CMP_LT_OQ);
    const __m256d kf = _mm256_cmp_pd(_mm256_and_pd(k, abs_mask), inf, _CMP_LT_OQ);
    return static_cast<unsigned>(_mm256_movemask_pd(_mm256_and_pd(hf, kf)));
}

} // namespace

bool phi2_avx2_available() {
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
}

void phi2_batch_avx2(const double* h, const double* k, const double* ph,
                     const double* pk, std::size_t count, double rho,
                     double* out) {
    if (rho == 0.0 || rho == 1.0 || rho == -1.0 || std::fabs(rho) >= 0.925) {
        for (std::size_t i = 0; i < count; ++i)
            out[i] = bvn_scalar(h[i], k[i], rho, ph[i], pk[i]);
        return;
    }
    Phi2MainPlan plan;
    phi2_build_main_plan(rho, plan);

    const std::size_t full = count / 4 * 4;
    for (std::size_t i = 0; i < full; i += 4) {
        const __m256d hv = _mm256_loadu_pd(h + i);
        const __m256d kv = _mm256_loadu_pd(k + i);
        const unsigned fin = finite_mask(hv, kv);
        if (fin == 0xFu) {
            const __m256d pxy = _mm256_mul_pd(_mm256_loadu_pd(ph + i),
                                              _mm256_loadu_pd(pk + i));
            _mm256_storeu_pd(out + i, main_eval4(plan, hv, kv, pxy));
        } else {
            for (std::size_t j = i; j < i + 4; ++j) {
                if (phi2_needs_scalar(h[j], k[j]))
                    out[j] = bvn_scalar(h[j], k[j], rho, ph[j], pk[j]);
                else
                    out[j] = phi2_main_eval(plan, h[j], k[j], ph[j] * pk[j]);
            }
        }
    }
    if (full < count) {
        alignas(32) double hb[4] = {0, 0, 0, 0};
        alignas(32) double kb[4] = {0, 0, 0, 0};
        alignas(32) double pb[4] = {0.5, 0.5, 0.5, 0.5};
        alignas(32) double qb[4] = {0.5, 0.5, 0.5, 0.5};
        alignas(32) double ob[4];
        const std::size_t m = count - full;
        bool any_special = false;
        for (std::size_t j = 0; j < m; ++j) {
            hb[j] = h[full + j];
            kb[j] = k[full + j];
            pb[j] = ph[full + j];
            qb[j] = pk[full + j];
            any_special = any_special || phi2_needs_scalar(hb[j], kb[j]);
        }
        if (any_special) {
            for (std::size_t j = 0; j < m; ++j) {
                const std::size_t idx = full + j;
                if (phi2_needs_scalar(h[idx], k[idx]))
                    out[idx] = bvn_scalar(h[idx], k[idx], rho, ph[idx], pk[idx]);
                else
                    out[idx] = phi2_main_eval(plan, h[idx], k[idx], ph[idx] * pk[idx]);
            }
        } else {
            const __m256d pxy = _mm256_mul_pd(_mm256_load_pd(pb), _mm256_load_pd(qb));
            _mm256_store_pd(ob, main_eval4(plan, _mm256_load_pd(hb),
                                           _mm256_load_pd(kb), pxy));
            for (std::size_t j = 0; j < m; ++j) out[full + j] = ob[j];
        }
    }
}

} // namespace poolcorr::detail
