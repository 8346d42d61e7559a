// SPDX-License-Identifier: Apache-2.0
#include "poolcorr/constellation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <utility>

#include <gsl/gsl_cdf.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_sf_gamma.h>

#include "accum.hpp"
#include "phi2_core.hpp"
#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"

namespace poolcorr {

using detail::Accum;

namespace {

// GSL must not abort the process on soft numerical failures; the quantile
// fallback below handles them.
const int g_gsl_handler_off = [] {
    gsl_set_error_handler_off();
    return 0;
}();

double regularized_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    gsl_sf_result r;
    const int status = gsl_sf_beta_inc_e(a, b, x, &r);
    if (status != 0 && !std::isfinite(r.val)) return x < 0.5 ? 0.0 : 1.0;
    return r.val;
}

double beta_quantile(double u, double a, double b) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double q = gsl_cdf_beta_Pinv(u, a, b);
    if (std::isfinite(q) && q >= 0.0 && q <= 1.0) return q;
    // Extreme shapes (a or b near 1e-5 when the spread approaches its
    // bounds) push Pinv out of its convergence region; bisect the CDF.
    double lo = 0.0, hi = 1.0;
    for (int i = 0; i < 200; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        if (regularized_beta(a, b, mid) < u)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Collapse any non-increasing runs of atom values (rounding-level ties in
// far tails) into single atoms, preserving total weight and weighted mean.
DiscreteMarginal merge_atoms(std::vector<double> v, std::vector<double> w) {
    DiscreteMarginal out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(w[i] > 0.0)) continue;
        out.values.push_back(v[i]);
        out.weights.push_back(w[i]);
        while (out.values.size() >= 2 &&
               out.values.back() <= out.values[out.values.size() - 2]) {
            const std::size_t last = out.values.size() - 1;
            const double wsum = out.weights[last - 1] + out.weights[last];
            out.values[last - 1] =
                (out.values[last - 1] * out.weights[last - 1] +
                 out.values[last] * out.weights[last]) /
                wsum;
            out.weights[last - 1] = wsum;
            out.values.pop_back();
            out.weights.pop_back();
        }
    }
    return out;
}

DiscreteMarginal discretize_beta(double m, double s, std::int64_t K) {
    // Moment matching on [0,1]: a+b = 1/s^2 - 1, a = m (a+b).
    const double ab = 1.0 / (s * s) - 1.0;
    const double a = m * ab;
    const double b = (1.0 - m) * ab;
    const double kd = static_cast<double>(K);

    std::vector<double> edges(static_cast<std::size_t>(K) + 1);
    edges.front() = 0.0;
    edges.back() = 1.0;
    for (std::int64_t i = 1; i < K; ++i)
        edges[static_cast<std::size_t>(i)] =
            beta_quantile(static_cast<double>(i) / kd, a, b);

    // Conditional cell means in closed form through the identity
    // E[X 1{X <= q}] = m I_q(a+1, b); the edge ratios telescope, so the
    // weighted atom mean reproduces m to rounding accuracy.
    std::vector<double> values(static_cast<std::size_t>(K));
    std::vector<double> weights(static_cast<std::size_t>(K), 1.0 / kd);
    double prev = 0.0; // I_{e_0}(a+1,b)
    for (std::int64_t i = 0; i < K; ++i) {
        const double next =
            regularized_beta(a + 1.0, b, edges[static_cast<std::size_t>(i) + 1]);
        double v = m * kd * (next - prev);
        // The exact conditional mean lies between the cell edges; roundoff in
        // the incomplete-beta differences (amplified by the m*K factor) can
        // push the boundary cells of U-shaped betas a few ulps outside.
        v = std::min(std::max(v, edges[static_cast<std::size_t>(i)]),
                     edges[static_cast<std::size_t>(i) + 1]);
        values[static_cast<std::size_t>(i)] = v;
        prev = next;
    }
    return merge_atoms(std::move(values), std::move(weights));
}

DiscreteMarginal discretize_two_point(double m, double s) {
    // Atoms {m(1-s), m+(1-m)s} with weights {1-m, m} hit mean m and
    // sigma = s sqrt(m(1-m)) for every s in [0,1], degenerating to the
    // boundary law {0,1} at s=1.
    return merge_atoms({m * (1.0 - s), m + (1.0 - m) * s}, {1.0 - m, m});
}

DiscreteMarginal discretize_lognormal_clipped(double m, double s,
                                              std::int64_t K) {
    const double sigma = s * std::sqrt(m * (1.0 - m));
    const double cv = sigma / m;
    const double sl = std::sqrt(std::log1p(cv * cv));
    const double kd = static_cast<double>(K);

    // For edges at quantiles e_i = exp(mu + sl z_i), the partial expectation
    // E[X 1{X <= e_i}] = m Phi((ln e_i - mu)/sl - sl) collapses to
    // m Phi(z_i - sl); mu drops out entirely.
    std::vector<double> values(static_cast<std::size_t>(K));
    std::vector<double> weights(static_cast<std::size_t>(K), 1.0 / kd);
    double prev = 0.0;
    for (std::int64_t i = 0; i < K; ++i) {
        const double next =
            (i + 1 == K)
                ? 1.0
                : std_normal_cdf(std_normal_quantile(
                      static_cast<double>(i + 1) / kd) -
                                 sl);
        double v = m * kd * (next - prev);
        if (v > 1.0) v = 1.0; // clip to the unit-interval support
        values[static_cast<std::size_t>(i)] = v;
        prev = next;
    }
    return merge_atoms(std::move(values), std::move(weights));
}

double relative_error(double achieved, double target) {
    if (target != 0.0) return std::fabs(achieved - target) / std::fabs(target);
    return std::fabs(achieved);
}

double spread_s_of(double sigma, double mean) {
    const double denom = mean * (1.0 - mean);
    if (!(denom > 0.0)) return 0.0;
    return sigma / std::sqrt(denom);
}

} // namespace

double InputConfiguration::p_spread_s() const {
    if (spread_convention == SpreadConvention::s) return p_spread;
    const double sigma = p_spread * p_mean; // cv convention
    return spread_s_of(sigma, p_mean);
}

void InputConfiguration::validate() const {
    if (n < 1) throw domain_error("InputConfiguration: n must be >= 1");
    if (!(p_mean > 0.0 && p_mean < 1.0))
        throw domain_error("InputConfiguration: p_mean must lie in (0,1)");
    if (!(rho_mean >= 0.0 && rho_mean <= 1.0))
        throw domain_error("InputConfiguration: rho_mean must lie in [0,1]");
    if (!(p_spread >= 0.0))
        throw domain_error("InputConfiguration: p_spread must be nonnegative");
    if (!(rho_spread >= 0.0 && rho_spread <= 1.0))
        throw domain_error("InputConfiguration: rho_spread must lie in [0,1]");
    if (!(tau >= -1.0 && tau <= 1.0))
        throw domain_error("InputConfiguration: tau must lie in [-1,1]");
}

void BuildParams::validate() const {
    if (K < 1 || L < 1) throw domain_error("BuildParams: K and L must be >= 1");
    if (g < std::max(K, L))
        throw domain_error("BuildParams: g must be at least max(K, L)");
}

DiscreteMarginal discretize_marginal(double mean, double spread_s,
                                     std::int64_t buckets,
                                     MarginalFamily family,
                                     std::pair<double, double> support) {
    if (support.first != 0.0 || support.second != 1.0)
        throw domain_error(
            "discretize_marginal: only the [0,1] support is implemented");
    if (!(mean > 0.0 && mean < 1.0))
        throw domain_error(
            "discretize_marginal: mean must lie in the open support");
    if (!(spread_s >= 0.0))
        throw domain_error("discretize_marginal: spread must be nonnegative");
    if (spread_s > 1.0)
        throw infeasibility_error(
            "discretize_marginal: spread exceeds the attainable maximum "
            "sqrt(mean (1-mean)) for the unit interval");
    if (buckets < 1)
        throw domain_error("discretize_marginal: need at least one bucket");

    if (spread_s == 0.0) return {{mean}, {1.0}};
    if (spread_s == 1.0) return {{0.0, 1.0}, {1.0 - mean, mean}};

    switch (family) {
    case MarginalFamily::beta:
        return discretize_beta(mean, spread_s, buckets);
    case MarginalFamily::two_point:
        return discretize_two_point(mean, spread_s);
    case MarginalFamily::lognormal_clipped:
        return discretize_lognormal_clipped(mean, spread_s, buckets);
    }
    throw domain_error("discretize_marginal: unknown family");
}

namespace {

// Exposure/probability-weighted Pearson correlation between cell values.
double pearson_cells(const std::vector<double>& W,
                     const std::vector<double>& pv,
                     const std::vector<double>& rv) {
    const std::size_t K = pv.size();
    const std::size_t L = rv.size();
    Accum mp, mr;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            mp.add(W[k * L + l] * pv[k]);
            mr.add(W[k * L + l] * rv[l]);
        }
    const double pb = mp.value();
    const double rb = mr.value();
    Accum cv, vp, vr;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            const double w = W[k * L + l];
            cv.add(w * (pv[k] - pb) * (rv[l] - rb));
            vp.add(w * (pv[k] - pb) * (pv[k] - pb));
            vr.add(w * (rv[l] - rb) * (rv[l] - rb));
        }
    const double denom = std::sqrt(vp.value()) * std::sqrt(vr.value());
    if (!(denom > 0.0)) return 0.0;
    return cv.value() / denom;
}

// Joint cell masses of the Gaussian copula with parameter theta over the
// marginal quantile cells, renormalized after clipping rounding negatives.
std::vector<double> copula_joint(const std::vector<double>& cum_p,
                                 const std::vector<double>& cum_r,
                                 double theta) {
    const std::size_t K = cum_p.size() - 1;
    const std::size_t L = cum_r.size() - 1;
    const double inf = std::numeric_limits<double>::infinity();

    std::vector<double> zp(K + 1), zr(L + 1);
    for (std::size_t i = 0; i <= K; ++i)
        zp[i] = (cum_p[i] <= 0.0) ? -inf
                : (cum_p[i] >= 1.0) ? inf
                                    : std_normal_quantile(cum_p[i]);
    for (std::size_t j = 0; j <= L; ++j)
        zr[j] = (cum_r[j] <= 0.0) ? -inf
                : (cum_r[j] >= 1.0) ? inf
                                    : std_normal_quantile(cum_r[j]);

    std::vector<double> corner((K + 1) * (L + 1));
    for (std::size_t i = 0; i <= K; ++i)
        for (std::size_t j = 0; j <= L; ++j)
            corner[i * (L + 1) + j] =
                detail::bvn_scalar(zp[i], zr[j], theta, cum_p[i], cum_r[j]);

    std::vector<double> W(K * L);
    Accum total;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            double w = corner[(k + 1) * (L + 1) + l + 1] -
                       corner[k * (L + 1) + l + 1] -
                       corner[(k + 1) * (L + 1) + l] + corner[k * (L + 1) + l];
            if (w < 0.0) w = 0.0;
            W[k * L + l] = w;
            total.add(w);
        }
    const double t = total.value();
    for (double& w : W) w /= t;
    return W;
}

std::vector<double> copula_joint_calibrated(const DiscreteMarginal& mp,
                                            const DiscreteMarginal& mr,
                                            double tau) {
    const std::size_t K = mp.values.size();
    const std::size_t L = mr.values.size();
    std::vector<double> cum_p(K + 1, 0.0), cum_r(L + 1, 0.0);
    {
        Accum c;
        for (std::size_t k = 0; k < K; ++k) {
            c.add(mp.weights[k]);
            cum_p[k + 1] = std::min(c.value(), 1.0);
        }
        cum_p[K] = 1.0;
    }
    {
        Accum c;
        for (std::size_t l = 0; l < L; ++l) {
            c.add(mr.weights[l]);
            cum_r[l + 1] = std::min(c.value(), 1.0);
        }
        cum_r[L] = 1.0;
    }

    auto tau_at = [&](double theta) {
        return pearson_cells(copula_joint(cum_p, cum_r, theta), mp.values,
                             mr.values);
    };

    double lo = -1.0, hi = 1.0;
    double flo = tau_at(lo), fhi = tau_at(hi);
    const double slack = 1e-9;
    if (tau < flo - slack || tau > fhi + slack)
        throw infeasibility_error(
            "build_constellation: tau outside the attainable range [" +
            std::to_string(flo) + ", " + std::to_string(fhi) +
            "] of the discretized marginals");
    if (tau <= flo) return copula_joint(cum_p, cum_r, lo);
    if (tau >= fhi) return copula_joint(cum_p, cum_r, hi);

    double theta = 0.0;
    for (int it = 0; it < 100; ++it) {
        const double f = tau_at(theta);
        if (std::fabs(f - tau) <= 1e-4) break;
        if (f < tau)
            lo = theta, flo = f;
        else
            hi = theta, fhi = f;
        if (hi - lo <= 1e-10) break;
        double t = (fhi != flo) ? lo + (tau - flo) * (hi - lo) / (fhi - flo)
                                : 0.5 * (lo + hi);
        const double margin = 0.01 * (hi - lo);
        if (!(t > lo + margin && t < hi - margin)) t = 0.5 * (lo + hi);
        theta = t;
    }
    return copula_joint(cum_p, cum_r, theta);
}

} // namespace

ExposureConstellation build_constellation(const InputConfiguration& cfg,
                                          const BuildParams& params) {
    cfg.validate();
    params.validate();

    const double sp = cfg.p_spread_s();
    const double sr = cfg.rho_spread;

    const DiscreteMarginal mp =
        (sp == 0.0) ? DiscreteMarginal{{cfg.p_mean}, {1.0}}
                    : discretize_marginal(cfg.p_mean, sp, params.K,
                                          params.p_family);
    const DiscreteMarginal mr =
        (sr == 0.0) ? DiscreteMarginal{{cfg.rho_mean}, {1.0}}
                    : discretize_marginal(cfg.rho_mean, sr, params.L,
                                          params.rho_family);

    const std::size_t K = mp.values.size();
    const std::size_t L = mr.values.size();

    std::vector<double> W;
    if (cfg.tau == 0.0) {
        W.resize(K * L);
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t l = 0; l < L; ++l)
                W[k * L + l] = mp.weights[k] * mr.weights[l];
    } else if (K == 1 || L == 1) {
        throw infeasibility_error(
            "build_constellation: tau != 0 requires spread in both marginals");
    } else {
        W = copula_joint_calibrated(mp, mr, cfg.tau);
    }

    // Integerize by cumulative rounding in row-major cell order: counts are
    // the increments of round(n * cumulative weight), so rounding drift
    // never accumulates beyond half an exposure.
    std::vector<std::int64_t> counts(K * L);
    Accum cum;
    std::int64_t prev = 0;
    const double nd = static_cast<double>(cfg.n);
    for (std::size_t idx = 0; idx < K * L; ++idx) {
        cum.add(W[idx]);
        std::int64_t cur;
        if (idx + 1 == K * L)
            cur = cfg.n;
        else {
            cur = static_cast<std::int64_t>(std::floor(nd * cum.value() + 0.5));
            if (cur < prev) cur = prev;
            if (cur > cfg.n) cur = cfg.n;
        }
        counts[idx] = cur - prev;
        prev = cur;
    }

    ExposureConstellation out;
    out.pd_values = mp.values;
    out.rho_values = mr.values;
    out.counts = std::move(counts);
    out.refresh();
    out.validate();
    return out;
}

namespace {

double weighted_median_pd(const ExposureConstellation& c) {
    const std::size_t K = c.bucket_count();
    const std::size_t L = c.rho_count();
    std::int64_t half = 0;
    for (std::int64_t v : c.counts) half += v;
    half = (half + 1) / 2; // lower weighted median
    std::int64_t cum = 0;
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t l = 0; l < L; ++l) cum += c.counts[k * L + l];
        if (cum >= half) return c.pd_values[k];
    }
    return c.pd_values.back();
}

} // namespace

Diagnosis diagnose(const ExposureConstellation& c) {
    c.validate();
    const std::size_t K = c.bucket_count();
    const std::size_t L = c.rho_count();
    const double nd = static_cast<double>(c.n);

    Accum ap, ar;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            const double w = static_cast<double>(c.counts[k * L + l]);
            if (w == 0.0) continue;
            ap.add(w * c.pd_values[k]);
            ar.add(w * c.rho_values[l]);
        }
    const double pb = ap.value() / nd;
    const double rb = ar.value() / nd;

    Accum vp, vr, cv;
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l) {
            const double w = static_cast<double>(c.counts[k * L + l]);
            if (w == 0.0) continue;
            const double dp = c.pd_values[k] - pb;
            const double dr = c.rho_values[l] - rb;
            vp.add(w * dp * dp);
            vr.add(w * dr * dr);
            cv.add(w * dp * dr);
        }
    const double sigma_p = std::sqrt(std::max(vp.value(), 0.0) / nd);
    const double sigma_r = std::sqrt(std::max(vr.value(), 0.0) / nd);
    const double denom = sigma_p * sigma_r;

    Diagnosis d;
    d.achieved.n = c.n;
    d.achieved.p_mean = pb;
    d.achieved.p_spread = spread_s_of(sigma_p, pb);
    d.achieved.rho_mean = rb;
    d.achieved.rho_spread = spread_s_of(sigma_r, rb);
    d.achieved.tau = (denom > 0.0) ? (cv.value() / nd) / denom : 0.0;
    d.achieved.spread_convention = SpreadConvention::s;
    d.p_mid_kind = MidConvention::median;
    d.p_mid_value = weighted_median_pd(c);
    return d;
}

Diagnosis diagnose(const ExposureConstellation& c,
                   const InputConfiguration& target, const BuildParams& params,
                   double tolerance) {
    Diagnosis d = diagnose(c);
    const double sigma_p =
        d.achieved.p_spread *
        std::sqrt(d.achieved.p_mean * (1.0 - d.achieved.p_mean));

    d.p_mid_kind = params.p_mid;
    if (params.p_mid == MidConvention::mean) d.p_mid_value = d.achieved.p_mean;

    // Compare spreads in the target's convention.
    d.achieved.spread_convention = target.spread_convention;
    if (target.spread_convention == SpreadConvention::cv)
        d.achieved.p_spread =
            (d.achieved.p_mean > 0.0) ? sigma_p / d.achieved.p_mean : 0.0;

    d.err_p_mean = relative_error(d.achieved.p_mean, target.p_mean);
    d.err_p_spread = relative_error(d.achieved.p_spread, target.p_spread);
    d.err_rho_mean = relative_error(d.achieved.rho_mean, target.rho_mean);
    d.err_rho_spread = relative_error(d.achieved.rho_spread, target.rho_spread);
    d.err_tau = relative_error(d.achieved.tau, target.tau);
    d.tolerance = tolerance;
    d.pass = d.err_p_mean <= tolerance && d.err_p_spread <= tolerance &&
             d.err_rho_mean <= tolerance && d.err_rho_spread <= tolerance &&
             d.err_tau <= tolerance;
    return d;
}

std::vector<std::int64_t> allocate_counts(const std::vector<double>& joint_weights,
                                          std::int64_t n) {
    if (n < 0) throw domain_error("allocate_counts: n must be nonnegative");
    const std::size_t cells = joint_weights.size();
    if (cells == 0) throw domain_error("allocate_counts: empty weight matrix");
    Accum total;
    for (double w : joint_weights) {
        if (!(w >= 0.0))
            throw domain_error("allocate_counts: weights must be nonnegative");
        total.add(w);
    }
    const double t = total.value();
    if (!(std::fabs(t - 1.0) <= 1e-9))
        throw domain_error("allocate_counts: weights must sum to 1");

    std::vector<std::int64_t> counts(cells);
    std::vector<std::pair<double, std::size_t>> rem; // (remainder, index)
    rem.reserve(cells);
    std::int64_t assigned = 0;
    const double nd = static_cast<double>(n);
    for (std::size_t i = 0; i < cells; ++i) {
        const double share = nd * (joint_weights[i] / t);
        const double base = std::floor(share);
        counts[i] = static_cast<std::int64_t>(base);
        assigned += counts[i];
        rem.emplace_back(share - base, i);
    }
    // Largest remainder first; equal remainders resolve toward the later
    // cell in (k,l) order, mirroring the descending direction of the
    // primary key.
    std::sort(rem.begin(), rem.end(),
              [](const auto& a, const auto& b) {
                  if (a.first != b.first) return a.first > b.first;
                  return a.second > b.second;
              });
    for (std::size_t i = 0; i < cells && assigned < n; ++i, ++assigned)
        ++counts[rem[i].second];
    return counts;
}

void save_constellation(const ExposureConstellation& c, std::ostream& os) {
    c.validate();
    const std::size_t K = c.bucket_count();
    const std::size_t L = c.rho_count();
    char buf[64];
    os << K << ' ' << L << ' ' << c.n << '\n';
    for (double p : c.pd_values) {
        std::snprintf(buf, sizeof buf, "%.17g", p);
        os << buf << '\n';
    }
    for (double r : c.rho_values) {
        std::snprintf(buf, sizeof buf, "%.17g", r);
        os << buf << '\n';
    }
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l)
            os << k << ' ' << l << ' ' << c.counts[k * L + l] << '\n';
}

ExposureConstellation load_constellation(std::istream& is) {
    std::size_t K = 0, L = 0;
    std::int64_t n = 0;
    if (!(is >> K >> L >> n) || K < 1 || L < 1)
        throw domain_error("load_constellation: malformed header");
    ExposureConstellation c;
    c.pd_values.resize(K);
    c.rho_values.resize(L);
    c.counts.assign(K * L, 0);
    for (std::size_t k = 0; k < K; ++k)
        if (!(is >> c.pd_values[k]))
            throw domain_error("load_constellation: malformed PD list");
    for (std::size_t l = 0; l < L; ++l)
        if (!(is >> c.rho_values[l]))
            throw domain_error("load_constellation: malformed rho list");
    for (std::size_t i = 0; i < K * L; ++i) {
        std::size_t k = 0, l = 0;
        std::int64_t v = 0;
        if (!(is >> k >> l >> v) || k >= K || l >= L)
            throw domain_error("load_constellation: malformed count entry");
        c.counts[k * L + l] = v;
    }
    c.refresh();
    if (c.n != n)
        throw domain_error(
            "load_constellation: header total disagrees with cell counts");
    c.validate();
    return c;
}

void save_constellation_file(const ExposureConstellation& c,
                             const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    save_constellation(c, os);
    if (!os) throw std::runtime_error("write failed: " + path);
}

ExposureConstellation load_constellation_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return load_constellation(is);
}

} // namespace poolcorr
