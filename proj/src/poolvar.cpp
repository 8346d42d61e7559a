// SPDX-License-Identifier: Apache-2.0
#include "poolcorr/poolvar.hpp"

#include <algorithm>
#include <atomic>
#include <cassert>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>

#include "accum.hpp"
#include "phi2_core.hpp"
#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"
#include "poolcorr/phi2_batch.hpp"

namespace poolcorr {

using detail::Accum;

namespace {

// Boundary PDs map to infinite thresholds; bvn_scalar and the batch kernels
// resolve those through their special-case branches.
double quantile_or_infinite(double p) {
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    if (p >= 1.0) return std::numeric_limits<double>::infinity();
    return std_normal_quantile(p);
}

void require_prob_open(double p, const char* who) {
    if (!(p > 0.0 && p < 1.0))
        throw domain_error(std::string(who) + ": PD must lie strictly in (0,1)");
}

void require_rho_unit(double rho, const char* who) {
    if (!(rho >= 0.0 && rho <= 1.0))
        throw domain_error(std::string(who) + ": correlation must lie in [0,1]");
}

} // namespace

double HomogeneousPool::sigma() const { return std::sqrt(p * (1.0 - p)); }

void HomogeneousPool::validate() const {
    require_prob_open(p, "HomogeneousPool");
    require_rho_unit(rho_a, "HomogeneousPool");
    if (n < 1) throw domain_error("HomogeneousPool: n must be >= 1");
}

double ExposureConstellation::mean_pd() const {
    const std::size_t K = pd_values.size();
    const std::size_t L = rho_values.size();
    Accum acc;
    std::int64_t total = 0;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            const std::int64_t c = counts[k * L + l];
            total += c;
            if (c > 0) acc.add(static_cast<double>(c) * pd_values[k]);
        }
    if (total < 1)
        throw domain_error("ExposureConstellation: no exposures");
    return acc.value() / static_cast<double>(total);
}

void ExposureConstellation::refresh() {
    std::int64_t total = 0;
    for (std::int64_t c : counts) total += c;
    n = total;
    p_bar = mean_pd();
}

void ExposureConstellation::validate() const {
    const std::size_t K = pd_values.size();
    const std::size_t L = rho_values.size();
    if (K < 1 || L < 1)
        throw domain_error("ExposureConstellation: need at least one PD and one rho level");
    for (std::size_t k = 0; k < K; ++k) {
        // Closed endpoints admitted: the s(p)=1 limit stores the atoms {0,1}.
        if (!(pd_values[k] >= 0.0 && pd_values[k] <= 1.0))
            throw domain_error("ExposureConstellation: PD outside [0,1]");
        if (k > 0 && !(pd_values[k] > pd_values[k - 1]))
            throw domain_error("ExposureConstellation: pd_values not strictly increasing");
    }
    for (std::size_t l = 0; l < L; ++l) {
        if (!(rho_values[l] >= 0.0 && rho_values[l] <= 1.0))
            throw domain_error("ExposureConstellation: rho outside [0,1]");
        if (l > 0 && !(rho_values[l] > rho_values[l - 1]))
            throw domain_error("ExposureConstellation: rho_values not strictly increasing");
    }
    if (counts.size() != K * L)
        throw domain_error("ExposureConstellation: counts must be a K x L matrix");
    std::int64_t total = 0;
    for (std::int64_t c : counts) {
        if (c < 0) throw domain_error("ExposureConstellation: negative cell count");
        total += c;
    }
    if (total < 1)
        throw domain_error("ExposureConstellation: total exposure count must be >= 1");
    if (total != n)
        throw domain_error("ExposureConstellation: stored n disagrees with sum of counts");
    if (!(std::fabs(p_bar - mean_pd()) <= 1e-12))
        throw domain_error("ExposureConstellation: stored p_bar disagrees with counts");
}

double var_dr_homogeneous_default(double p, double rho_d, std::int64_t n) {
    require_prob_open(p, "var_dr_homogeneous_default");
    if (rho_d < 0.0)
        throw domain_error("var_dr_homogeneous_default: rho_d must be nonnegative");
    if (rho_d > 1.0)
        throw domain_error("var_dr_homogeneous_default: rho_d must not exceed 1");
    if (n < 1) throw domain_error("var_dr_homogeneous_default: n must be >= 1");
    const double s2 = p * (1.0 - p);
    return s2 * rho_d + s2 * (1.0 - rho_d) / static_cast<double>(n);
}

double cov_dr(double sigma_a, double sigma_b, double rho_d_ab) {
    if (!(sigma_a >= 0.0) || !(sigma_b >= 0.0))
        throw domain_error("cov_dr: standard deviations must be nonnegative");
    if (!std::isfinite(rho_d_ab))
        throw domain_error("cov_dr: correlation must be finite");
    return sigma_a * sigma_b * rho_d_ab;
}

double var_dr_combined_default(const std::vector<double>& p_k,
                               const std::vector<std::int64_t>& n_k,
                               const std::vector<double>& rho_d) {
    const std::size_t K = p_k.size();
    if (K == 0 || n_k.size() != K || rho_d.size() != K * K)
        throw domain_error("var_dr_combined_default: dimension mismatch");
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = k + 1; l < K; ++l)
            if (rho_d[k * K + l] != rho_d[l * K + k])
                throw domain_error("var_dr_combined_default: rho_d matrix not symmetric");
    std::int64_t n = 0;
    std::vector<double> sigma(K);
    for (std::size_t k = 0; k < K; ++k) {
        require_prob_open(p_k[k], "var_dr_combined_default");
        if (n_k[k] < 0)
            throw domain_error("var_dr_combined_default: negative segment count");
        n += n_k[k];
        sigma[k] = std::sqrt(p_k[k] * (1.0 - p_k[k]));
    }
    if (n < 1) throw domain_error("var_dr_combined_default: empty pool");

    Accum acc;
    for (std::size_t k = 0; k < K; ++k) {
        if (n_k[k] == 0) continue;
        const double nk = static_cast<double>(n_k[k]);
        for (std::size_t l = 0; l < K; ++l) {
            if (n_k[l] == 0) continue;
            acc.add(nk * static_cast<double>(n_k[l]) * sigma[k] * sigma[l] *
                    rho_d[k * K + l]);
        }
        acc.add(nk * sigma[k] * sigma[k] * (1.0 - rho_d[k * K + k]));
    }
    const double nd = static_cast<double>(n);
    return acc.value() / (nd * nd);
}

double var_dr_single_asset(double p, double rho_a, std::int64_t n) {
    require_prob_open(p, "var_dr_single_asset");
    require_rho_unit(rho_a, "var_dr_single_asset");
    if (n < 1) throw domain_error("var_dr_single_asset: n must be >= 1");
    const double c = std_normal_quantile(p);
    const double p2 = detail::bvn_scalar(c, c, rho_a, p, p);
    return (p2 - p * p) + (p - p2) / static_cast<double>(n);
}

namespace detail {

MultibucketForms var_dr_multibucket_forms(const std::vector<double>& p_k,
                                          const std::vector<std::int64_t>& n_k,
                                          double rho_a) {
    const std::size_t K = p_k.size();
    if (K == 0 || n_k.size() != K)
        throw domain_error("var_dr_multibucket: dimension mismatch");
    require_rho_unit(rho_a, "var_dr_multibucket");
    std::int64_t n = 0;
    for (std::size_t k = 0; k < K; ++k) {
        if (!(p_k[k] >= 0.0 && p_k[k] <= 1.0))
            throw domain_error("var_dr_multibucket: PD outside [0,1]");
        if (n_k[k] < 0)
            throw domain_error("var_dr_multibucket: negative bucket count");
        n += n_k[k];
    }
    if (n < 1) throw domain_error("var_dr_multibucket: empty pool");
    const double nd = static_cast<double>(n);

    std::vector<double> c(K), diag(K, 0.0);
    Accum pm;
    for (std::size_t k = 0; k < K; ++k) {
        c[k] = quantile_or_infinite(p_k[k]);
        if (n_k[k] > 0) {
            pm.add(static_cast<double>(n_k[k]) * p_k[k]);
            diag[k] = bvn_scalar(c[k], c[k], rho_a, p_k[k], p_k[k]);
        }
    }
    const double p_bar = pm.value() / nd;

    Accum off; // unordered k < l cross-bucket terms
    for (std::size_t k = 0; k < K; ++k) {
        if (n_k[k] == 0) continue;
        for (std::size_t l = k + 1; l < K; ++l) {
            if (n_k[l] == 0) continue;
            off.add(static_cast<double>(n_k[k]) * static_cast<double>(n_k[l]) *
                    bvn_scalar(c[k], c[l], rho_a, p_k[k], p_k[l]));
        }
    }

    Accum diag_sq, diag_pair, diag_n;
    for (std::size_t k = 0; k < K; ++k) {
        if (n_k[k] == 0) continue;
        const double nk = static_cast<double>(n_k[k]);
        diag_sq.add(nk * nk * diag[k]);
        diag_pair.add(nk * (nk - 1.0) * diag[k]);
        diag_n.add(nk * diag[k]);
    }

    const double nn = nd * nd;
    MultibucketForms out;
    out.grouped = (2.0 * off.value() + diag_sq.value()) / nn - p_bar * p_bar +
                  (p_bar - diag_n.value() / nd) / nd;
    out.pairwise = (2.0 * off.value() + diag_pair.value()) / nn -
                   p_bar * p_bar + p_bar / nd;
    return out;
}

} // namespace detail

double var_dr_multibucket(const std::vector<double>& p_k,
                          const std::vector<std::int64_t>& n_k,
                          double rho_a) {
    const detail::MultibucketForms f =
        detail::var_dr_multibucket_forms(p_k, n_k, rho_a);
    assert(std::fabs(f.grouped - f.pairwise) <=
           1e-12 * std::max(std::fabs(f.pairwise), 1e-30) + 1e-18);
    return std::max(f.pairwise, 0.0);
}

DefaultRateMoments var_dr_grid(const ExposureConstellation& pool, int threads) {
    return var_dr_grid_at(pool, pool.n, threads);
}

DefaultRateMoments var_dr_grid_at(const ExposureConstellation& pool,
                                  std::int64_t effective_n, int threads) {
    pool.validate();
    if (effective_n < 1)
        throw domain_error("var_dr_grid_at: effective_n must be >= 1");
    const std::size_t K = pool.bucket_count();
    const std::size_t L = pool.rho_count();
    const std::int64_t* cnt = pool.counts.data();
    const double nd = static_cast<double>(pool.n);

    // Counts as doubles: products of two counts can exceed the int64 range
    // in principle, and at n <= 50 (the exactness-critical regime) the double
    // products are exact anyway.
    std::vector<double> cntd(pool.counts.begin(), pool.counts.end());

    // Restrict the pair sums to buckets that hold any exposure; every pair
    // involving an empty PD row or rho column contributes exactly zero.
    std::vector<std::uint32_t> act_k, act_l;
    act_k.reserve(K);
    act_l.reserve(L);
    for (std::size_t k = 0; k < K; ++k) {
        std::int64_t row = 0;
        for (std::size_t l = 0; l < L; ++l) row += cnt[k * L + l];
        if (row > 0) act_k.push_back(static_cast<std::uint32_t>(k));
    }
    for (std::size_t l = 0; l < L; ++l) {
        std::int64_t col = 0;
        for (std::size_t k = 0; k < K; ++k) col += cnt[k * L + l];
        if (col > 0) act_l.push_back(static_cast<std::uint32_t>(l));
    }
    const std::size_t Ka = act_k.size();
    const std::size_t La = act_l.size();

    Accum pm;
    for (std::uint32_t k : act_k)
        for (std::uint32_t l : act_l) {
            const std::int64_t c = cnt[k * L + l];
            if (c > 0) pm.add(static_cast<double>(c) * pool.pd_values[k]);
        }
    const double p_bar = pm.value() / nd;

    std::vector<double> cq(Ka), pq(Ka);
    for (std::size_t a = 0; a < Ka; ++a) {
        cq[a] = quantile_or_infinite(pool.pd_values[act_k[a]]);
        pq[a] = pool.pd_values[act_k[a]];
    }

    // Unordered PD pairs a <= b, flattened; rowk/rowi pre-multiply the
    // original bucket index by L so count lookups inside the hot loop are a
    // single add.
    const std::size_t P = Ka * (Ka + 1) / 2;
    std::vector<double> hx(P), ky(P), ph(P), pk(P);
    std::vector<std::uint32_t> rowk(P), rowi(P);
    {
        std::size_t m = 0;
        for (std::size_t a = 0; a < Ka; ++a)
            for (std::size_t b = a; b < Ka; ++b) {
                hx[m] = cq[a];
                ky[m] = cq[b];
                ph[m] = pq[a];
                pk[m] = pq[b];
                rowk[m] = act_k[a] * static_cast<std::uint32_t>(L);
                rowi[m] = act_k[b] * static_cast<std::uint32_t>(L);
                ++m;
            }
    }

    // Unordered rho level pairs l <= j.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> blocks;
    blocks.reserve(La * (La + 1) / 2);
    for (std::size_t a = 0; a < La; ++a)
        for (std::size_t b = a; b < La; ++b)
            blocks.emplace_back(act_l[a], act_l[b]);

    // Fixed-size work items (block, pair-chunk) with per-item result slots;
    // merging the slots in index order keeps the reduction independent of
    // the thread count.
    constexpr std::size_t kChunk = 8192;
    const std::size_t chunks = (P + kChunk - 1) / kChunk;
    const std::size_t items = blocks.size() * chunks;
    std::vector<double> partial(items, 0.0);

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        std::vector<double> buf(kChunk);
        for (;;) {
            const std::size_t it = cursor.fetch_add(1, std::memory_order_relaxed);
            if (it >= items) break;
            const std::uint32_t l = blocks[it / chunks].first;
            const std::uint32_t j = blocks[it / chunks].second;
            const std::size_t a = (it % chunks) * kChunk;
            const std::size_t b = std::min(P, a + kChunk);
            const double r = (l == j) ? pool.rho_values[l]
                                      : std::sqrt(pool.rho_values[l]) *
                                            std::sqrt(pool.rho_values[j]);
            phi2_batch(hx.data() + a, ky.data() + a, ph.data() + a,
                       pk.data() + a, b - a, r, buf.data());
            Accum s;
            for (std::size_t m = a; m < b; ++m) {
                double w = cntd[rowk[m] + l] * cntd[rowi[m] + j];
                if (l != j) w += cntd[rowk[m] + j] * cntd[rowi[m] + l];
                if (w == 0.0) continue;
                if (rowk[m] != rowi[m]) w *= 2.0;
                s.add(w * buf[m - a]);
            }
            partial[it] = s.value();
        }
    };

    std::size_t want = threads > 0
                           ? static_cast<std::size_t>(threads)
                           : std::max(1u, std::thread::hardware_concurrency());
    want = std::min(want, items);
    if (want <= 1) {
        worker();
    } else {
        std::vector<std::thread> crew;
        crew.reserve(want);
        for (std::size_t i = 0; i < want; ++i) crew.emplace_back(worker);
        for (std::thread& t : crew) t.join();
    }

    Accum s2;
    for (double v : partial) s2.add(v);

    // Diagonal repair: an exposure paired with itself defaults with
    // probability p_k, not Phi2(c_k, c_k, rho_l).
    Accum s1;
    {
        std::vector<double> dbuf(Ka);
        for (std::size_t b = 0; b < La; ++b) {
            const std::uint32_t l = act_l[b];
            phi2_batch(cq.data(), cq.data(), pq.data(), pq.data(), Ka,
                       pool.rho_values[l], dbuf.data());
            for (std::size_t a = 0; a < Ka; ++a) {
                const std::int64_t c = cnt[act_k[a] * L + l];
                if (c > 0) s1.add(static_cast<double>(c) * dbuf[a]);
            }
        }
    }

    // Split into the weight-only systematic part and the idiosyncratic
    // repair term; only the latter sees the pool size.
    const double systematic = s2.value() / (nd * nd) - p_bar * p_bar;
    const double repair = p_bar - s1.value() / nd;
    double var = systematic + repair / static_cast<double>(effective_n);
    if (var < 0.0) var = 0.0; // rounding guard for degenerate pools
    return {p_bar, var};
}

} // namespace poolcorr
