// SPDX-License-Identifier: Apache-2.0
#include "poolcorr/implied.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "phi2_core.hpp"
#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"

namespace poolcorr {

namespace {

constexpr double kNegativeWindow = 1e-4; // continuation reach below rho = 0
constexpr double kXTol = 1e-15;          // bracket width stop
constexpr double kVTolRel = 1e-14;       // variance-scale relative stop

struct Solved {
    double x = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

// Root of the increasing function f on [lo, hi] with f(lo) <= target and
// f(hi) >= target: bisection bracket maintenance with secant proposals.
template <class F>
Solved solve_increasing(F&& f, double lo, double hi, double flo, double fhi,
                        double target) {
    Solved out;
    if (flo == target) return {lo, 0, 0.0};
    if (fhi == target) return {hi, 0, 0.0};
    const double vtol = kVTolRel * std::fabs(target);
    double x = 0.5 * (lo + hi);
    for (int it = 1; it <= 200; ++it) {
        const double fx = f(x);
        out.x = x;
        out.iterations = it;
        out.residual = fx - target;
        if (std::fabs(out.residual) <= vtol) return out;
        if (fx < target) {
            lo = x;
            flo = fx;
        } else {
            hi = x;
            fhi = fx;
        }
        if (hi - lo <= kXTol * std::max(1.0, std::fabs(lo))) return out;
        double xs = (fhi != flo)
                        ? lo + (target - flo) * (hi - lo) / (fhi - flo)
                        : 0.5 * (lo + hi);
        const double margin = 0.01 * (hi - lo);
        if (!(xs > lo + margin && xs < hi - margin)) xs = 0.5 * (lo + hi);
        x = xs;
    }
    return out;
}

} // namespace

ImpliedRhoResult implied_rho_single(double target_var, double p,
                                    std::int64_t n) {
    if (!(p > 0.0 && p < 1.0))
        throw domain_error("implied_rho_single: p must lie strictly in (0,1)");
    if (n < 1) throw domain_error("implied_rho_single: n must be >= 1");
    if (!std::isfinite(target_var))
        throw domain_error("implied_rho_single: target variance must be finite");

    // Same formula as var_dr_single_asset, evaluated directly so the
    // analytic continuation may probe slightly negative rho (the public
    // operation rejects rho outside [0,1]).
    const double c = std_normal_quantile(p);
    auto f = [&](double rho) {
        const double p2 = detail::bvn_scalar(c, c, rho, p, p);
        return (p2 - p * p) + (p - p2) / static_cast<double>(n);
    };
    const double lower = f(0.0); // p(1-p)/n
    const double upper = f(1.0); // p(1-p)

    ImpliedRhoResult res;
    res.rho_percent = std::numeric_limits<double>::quiet_NaN();

    if (target_var > upper)
        throw unattainable_error(
            "implied_rho_single: target variance above p(1-p)", lower, upper,
            target_var);

    if (target_var < lower) {
        // Finite-n analytic continuation to slightly negative rho.
        const double fneg = f(-kNegativeWindow);
        if (target_var < fneg)
            throw boundary_error(
                "implied_rho_single: target variance out of varbound (no root "
                "within the negative continuation window)");
        const Solved s =
            solve_increasing(f, -kNegativeWindow, 0.0, fneg, lower, target_var);
        res.rho_tilde = s.x;
        res.iterations = s.iterations;
        res.residual = s.residual;
        return res;
    }

    const Solved s = solve_increasing(f, 0.0, 1.0, lower, upper, target_var);
    res.rho_tilde = s.x;
    res.iterations = s.iterations;
    res.residual = s.residual;
    return res;
}

ImpliedRhoResult implied_rho_multibucket(double target_var,
                                         const std::vector<double>& p_k,
                                         const std::vector<std::int64_t>& n_k) {
    if (!std::isfinite(target_var))
        throw domain_error(
            "implied_rho_multibucket: target variance must be finite");
    auto f = [&](double rho) { return var_dr_multibucket(p_k, n_k, rho); };
    const double lower = f(0.0);
    const double upper = f(1.0);
    if (!(target_var >= lower && target_var <= upper))
        throw unattainable_error(
            "implied_rho_multibucket: target variance outside attainable range",
            lower, upper, target_var);

    const Solved s = solve_increasing(f, 0.0, 1.0, lower, upper, target_var);
    ImpliedRhoResult res;
    res.rho_tilde = s.x;
    res.rho_percent = std::numeric_limits<double>::quiet_NaN();
    res.iterations = s.iterations;
    res.residual = s.residual;
    return res;
}

namespace {

// Scale the correlation structure by alpha, merging rho levels that become
// equal (alpha = 0 collapses the whole structure onto a single level).
ExposureConstellation scale_rho(const ExposureConstellation& c, double alpha) {
    const std::size_t K = c.bucket_count();
    const std::size_t L = c.rho_count();
    ExposureConstellation out;
    out.pd_values = c.pd_values;
    std::vector<std::size_t> dest(L);
    for (std::size_t l = 0; l < L; ++l) {
        const double r = alpha * c.rho_values[l];
        if (!out.rho_values.empty() && r == out.rho_values.back())
            dest[l] = out.rho_values.size() - 1;
        else {
            out.rho_values.push_back(r);
            dest[l] = out.rho_values.size() - 1;
        }
    }
    const std::size_t Lo = out.rho_values.size();
    out.counts.assign(K * Lo, 0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t l = 0; l < L; ++l)
            out.counts[k * Lo + dest[l]] += c.counts[k * L + l];
    out.n = c.n;
    out.p_bar = c.p_bar;
    return out;
}

} // namespace

double global_adjustment_factor(const ExposureConstellation& c,
                                double target_var, int threads) {
    c.validate();
    if (!std::isfinite(target_var))
        throw domain_error(
            "global_adjustment_factor: target variance must be finite");
    const double rho_max = c.rho_values.back();
    if (!(rho_max > 0.0))
        throw domain_error(
            "global_adjustment_factor: correlation structure is identically "
            "zero; no scale can change the variance");
    const double alpha_max = 1.0 / rho_max;

    auto f = [&](double alpha) {
        return var_dr_grid(scale_rho(c, alpha), threads).variance;
    };
    const double lower = f(0.0);
    const double upper = f(alpha_max);
    if (!(target_var >= lower && target_var <= upper))
        throw unattainable_error(
            "global_adjustment_factor: target variance outside attainable "
            "range",
            lower, upper, target_var);

    return solve_increasing(f, 0.0, alpha_max, lower, upper, target_var).x;
}

ImpliedRhoResult rho_percent_for_configuration(const ExposureConstellation& c,
                                               double rho_bar, int threads) {
    return rho_percent_for_configuration(c, rho_bar, c.n, threads);
}

ImpliedRhoResult rho_percent_for_configuration(const ExposureConstellation& c,
                                               double rho_bar,
                                               std::int64_t effective_n,
                                               int threads) {
    if (!(rho_bar > 0.0))
        throw domain_error(
            "rho_percent_for_configuration: rho_bar must be positive");
    const DefaultRateMoments m = var_dr_grid_at(c, effective_n, threads);
    ImpliedRhoResult res = implied_rho_single(m.variance, m.mean, effective_n);
    res.rho_percent = res.rho_tilde / rho_bar;
    return res;
}

} // namespace poolcorr
