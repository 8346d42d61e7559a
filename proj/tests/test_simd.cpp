// SPDX-License-Identifier: Apache-2.0
//
// Equivalence of the batched Phi2 kernels: the scalar batch must agree with
// the element-wise evaluator to the last ulp or so, the AVX2 batch must agree
// with the scalar batch, and dispatch must honour forced kernel selection.

#include <cmath>
#include <cstddef>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"

#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"
#include "poolcorr/phi2_batch.hpp"

using namespace poolcorr;

namespace {

struct Batch {
    std::vector<double> h, k, ph, pk;

    explicit Batch(std::size_t n) : h(n), k(n), ph(n), pk(n) {}

    void fill_random(std::uint64_t seed, double lo, double hi) {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> u(lo, hi);
        for (std::size_t i = 0; i < h.size(); ++i) {
            h[i] = u(rng);
            k[i] = u(rng);
            ph[i] = std_normal_cdf(h[i]);
            pk[i] = std_normal_cdf(k[i]);
        }
    }
};

// Restores auto-detect dispatch even when a CHECK fails mid-test.
struct KernelGuard {
    ~KernelGuard() { set_phi2_kernel(Phi2Kernel::auto_detect); }
};

} // namespace

TEST_CASE("scalar batch matches element-wise evaluation exactly") {
    constexpr std::size_t n = 4096;
    Batch b(n);
    b.fill_random(17, -6.0, 6.0);
    std::vector<double> out(n);
    for (double rho : {-0.98, -0.5, -0.05, 0.0, 0.12, 0.7, 0.93, 1.0}) {
        detail::phi2_batch_scalar(b.h.data(), b.k.data(), b.ph.data(),
                                  b.pk.data(), n, rho, out.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(out[i] == bivariate_normal_cdf(b.h[i], b.k[i], rho));
    }
}

TEST_CASE("avx2 batch matches scalar batch") {
    if (!detail::phi2_avx2_available()) {
        MESSAGE("AVX2 not available on this CPU; skipping");
        return;
    }
    // Odd count exercises the remainder loop; values include deep tails.
    constexpr std::size_t n = 4097;
    Batch b(n);
    b.fill_random(29, -8.0, 8.0);
    std::vector<double> scalar(n), simd(n);
    double worst = 0.0;
    for (double rho : {-0.9, -0.37, -0.01, 0.08, 0.12, 0.44, 0.8, 0.924}) {
        detail::phi2_batch_scalar(b.h.data(), b.k.data(), b.ph.data(),
                                  b.pk.data(), n, rho, scalar.data());
        detail::phi2_batch_avx2(b.h.data(), b.k.data(), b.ph.data(),
                                b.pk.data(), n, rho, simd.data());
        for (std::size_t i = 0; i < n; ++i)
            worst = std::max(worst, std::fabs(simd[i] - scalar[i]));
    }
    CHECK(worst <= 5e-14);
}

TEST_CASE("special-case elements are routed scalar and match bitwise") {
    if (!detail::phi2_avx2_available()) {
        MESSAGE("AVX2 not available on this CPU; skipping");
        return;
    }
    constexpr double inf = std::numeric_limits<double>::infinity();
    // Mixed batch: finite main-branch elements interleaved with thresholds
    // the vector kernel must hand back to the scalar path.
    std::vector<double> h = {0.4, inf, -1.2, -inf, 2.2, 5.0, -0.3, inf};
    std::vector<double> k = {-0.9, 0.1, inf, 0.3, -inf, 1.1, 0.0, inf};
    const std::size_t n = h.size();
    std::vector<double> ph(n), pk(n), a(n), s(n);
    for (std::size_t i = 0; i < n; ++i) {
        ph[i] = std_normal_cdf(h[i]);
        pk[i] = std_normal_cdf(k[i]);
    }
    for (double rho : {-1.0, -0.95, 0.0, 0.93, 1.0}) {
        detail::phi2_batch_scalar(h.data(), k.data(), ph.data(), pk.data(), n,
                                  rho, s.data());
        detail::phi2_batch_avx2(h.data(), k.data(), ph.data(), pk.data(), n,
                                rho, a.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(a[i] == s[i]);
    }
}

TEST_CASE("dispatch honours forced kernel selection") {
    KernelGuard guard;

    set_phi2_kernel(Phi2Kernel::scalar);
    CHECK(std::string(phi2_kernel_name()) == "scalar");

    constexpr std::size_t n = 257;
    Batch b(n);
    b.fill_random(31, -4.0, 4.0);
    std::vector<double> via_scalar(n), direct(n);
    phi2_batch(b.h.data(), b.k.data(), b.ph.data(), b.pk.data(), n, 0.3,
               via_scalar.data());
    detail::phi2_batch_scalar(b.h.data(), b.k.data(), b.ph.data(), b.pk.data(),
                              n, 0.3, direct.data());
    for (std::size_t i = 0; i < n; ++i)
        CHECK(via_scalar[i] == direct[i]);

    if (detail::phi2_avx2_available()) {
        set_phi2_kernel(Phi2Kernel::avx2);
        CHECK(std::string(phi2_kernel_name()) == "avx2");
        std::vector<double> via_avx2(n);
        phi2_batch(b.h.data(), b.k.data(), b.ph.data(), b.pk.data(), n, 0.3,
                   via_avx2.data());
        detail::phi2_batch_avx2(b.h.data(), b.k.data(), b.ph.data(),
                                b.pk.data(), n, 0.3, direct.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(via_avx2[i] == direct[i]);
    } else {
        CHECK_THROWS_AS(set_phi2_kernel(Phi2Kernel::avx2), domain_error);
    }

    set_phi2_kernel(Phi2Kernel::auto_detect);
    const std::string name = phi2_kernel_name();
    CHECK((name == "scalar" || name == "avx2"));
    if (detail::phi2_avx2_available())
        CHECK(name == "avx2");
}

TEST_CASE("zero-length and unaligned batches") {
    phi2_batch(nullptr, nullptr, nullptr, nullptr, 0, 0.5, nullptr); // no-op

    // Kernels must not assume 32-byte alignment: offset every array by one
    // element so the payload starts 8 bytes off.
    constexpr std::size_t n = 64;
    Batch b(n + 1);
    b.fill_random(41, -3.0, 3.0);
    std::vector<double> out(n + 1), ref(n);
    phi2_batch(b.h.data() + 1, b.k.data() + 1, b.ph.data() + 1,
               b.pk.data() + 1, n, 0.12, out.data() + 1);
    detail::phi2_batch_scalar(b.h.data() + 1, b.k.data() + 1, b.ph.data() + 1,
                              b.pk.data() + 1, n, 0.12, ref.data());
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        worst = std::max(worst, std::fabs(out[i + 1] - ref[i]));
    CHECK(worst <= 5e-14);
}
