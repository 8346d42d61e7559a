// SPDX-License-Identifier: Apache-2.0
#include "poolcorr/mc_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <thread>
#include <vector>

#include "accum.hpp"
#include "poolcorr/errors.hpp"
#include "poolcorr/gaussian.hpp"

namespace poolcorr {

using detail::Accum;

namespace {

constexpr std::int64_t kExposureModeCap = 10000000; // per-trial budget guard

// splitmix64 output function: hashes (seed, trial) into a seed for the
// per-trial engine, so trial streams are independent of scheduling.
std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t trial_seed(std::uint64_t seed, std::int64_t trial) {
    return mix64(seed + 0x9E3779B97F4A7C15ULL *
                            (static_cast<std::uint64_t>(trial) + 1));
}

// Uniform in (0,1), 53-bit resolution, never hitting the endpoints.
double uniform01(std::mt19937_64& eng) {
    return (static_cast<double>(eng() >> 11) + 0.5) * 0x1p-53;
}

double draw_normal(std::mt19937_64& eng) {
    return std_normal_quantile(uniform01(eng));
}

struct Cell {
    double c = 0.0;        // PD threshold Phi^{-1}(p_k), may be +-inf
    double p = 0.0;        // p_k
    double sqrt_rho = 0.0; // sqrt(rho_l)
    double sqrt_com = 0.0; // sqrt(1 - rho_l)
    double rho = 0.0;
    std::int64_t count = 0;
};

// Conditional default probability of a cell given the factor draw z.
double p_given_z(const Cell& cell, double z) {
    if (cell.rho == 0.0) return cell.p;
    if (!std::isfinite(cell.c)) return cell.p; // p in {0,1}: constant
    if (cell.rho == 1.0) return z < cell.c ? 1.0 : 0.0;
    return std_normal_cdf((cell.c - cell.sqrt_rho * z) / cell.sqrt_com);
}

std::vector<Cell> collect_cells(const ExposureConstellation& c) {
    const std::size_t K = c.bucket_count();
    const std::size_t L = c.rho_count();
    std::vector<Cell> cells;
    cells.reserve(K * L);
    for (std::size_t k = 0; k < K; ++k) {
        const double p = c.pd_values[k];
        const double thr =
            (p <= 0.0)   ? -std::numeric_limits<double>::infinity()
            : (p >= 1.0) ? std::numeric_limits<double>::infinity()
                         : std_normal_quantile(p);
        for (std::size_t l = 0; l < L; ++l) {
            const std::int64_t cnt = c.counts[k * L + l];
            if (cnt == 0) continue;
            Cell cell;
            cell.c = thr;
            cell.p = p;
            cell.rho = c.rho_values[l];
            cell.sqrt_rho = std::sqrt(cell.rho);
            cell.sqrt_com = std::sqrt(1.0 - cell.rho);
            cell.count = cnt;
            cells.push_back(cell);
        }
    }
    return cells;
}

} // namespace

SimulationResult simulate_variance(const SimulationSpec& spec) {
    spec.constellation.validate();
    if (spec.trials < 1)
        throw domain_error("simulate_variance: trials must be >= 1");

    SimulationMode mode = spec.mode;
    if (mode == SimulationMode::auto_select)
        mode = spec.constellation.n <= 1000000 ? SimulationMode::exposure
                                               : SimulationMode::conditional;
    if (mode == SimulationMode::exposure &&
        spec.constellation.n > kExposureModeCap)
        throw domain_error(
            "simulate_variance: pool too large for exposure-level simulation; "
            "use the conditional mode");

    const std::vector<Cell> cells = collect_cells(spec.constellation);
    const double nd = static_cast<double>(spec.constellation.n);
    const std::int64_t T = spec.trials;

    // Per-trial conditional mean of DR and (conditional mode only) the
    // conditional idiosyncratic variance contribution.
    std::vector<double> mt(static_cast<std::size_t>(T), 0.0);
    std::vector<double> ut; // empty in exposure mode
    const bool conditional = mode == SimulationMode::conditional;
    if (conditional) ut.assign(static_cast<std::size_t>(T), 0.0);

    auto run_range = [&](std::int64_t t0, std::int64_t t1) {
        for (std::int64_t t = t0; t < t1; ++t) {
            std::mt19937_64 eng(trial_seed(spec.seed, t));
            const double z = draw_normal(eng);
            if (conditional) {
                Accum am, au;
                for (const Cell& cell : cells) {
                    const double pz = p_given_z(cell, z);
                    const double cnt = static_cast<double>(cell.count);
                    am.add(cnt * pz);
                    au.add(cnt * pz * (1.0 - pz));
                }
                mt[static_cast<std::size_t>(t)] = am.value() / nd;
                ut[static_cast<std::size_t>(t)] = au.value() / (nd * nd);
            } else {
                std::int64_t defaults = 0;
                for (const Cell& cell : cells) {
                    const double pz = p_given_z(cell, z);
                    if (pz <= 0.0) continue;
                    if (pz >= 1.0) {
                        defaults += cell.count;
                        continue;
                    }
                    std::binomial_distribution<std::int64_t> bin(cell.count, pz);
                    defaults += bin(eng);
                }
                mt[static_cast<std::size_t>(t)] =
                    static_cast<double>(defaults) / nd;
            }
        }
    };

    const int want = std::max(1, spec.threads);
    if (want <= 1 || T < 2 * want) {
        run_range(0, T);
    } else {
        std::vector<std::thread> crew;
        crew.reserve(static_cast<std::size_t>(want));
        for (int i = 0; i < want; ++i) {
            const std::int64_t t0 = T * i / want;
            const std::int64_t t1 = T * (i + 1) / want;
            crew.emplace_back(run_range, t0, t1);
        }
        for (std::thread& th : crew) th.join();
    }

    // Batch-means estimate: each batch contributes an independent unbiased
    // variance estimate; their spread gives the standard error.
    SimulationResult out;
    std::int64_t B = 100;
    if (T < 200) B = std::max<std::int64_t>(2, T / 10);
    if (T < 20) B = std::min<std::int64_t>(T, 2);
    if (T < 1000)
        out.warning = "fewer than 1000 trials; standard error is unstable";
    if (B < 2) {
        // Single-trial degenerate case: no spread information at all.
        out.variance_estimate = 0.0;
        out.standard_error = 0.0;
        out.warning = "too few trials to estimate a variance";
        return out;
    }

    std::vector<double> vb(static_cast<std::size_t>(B), 0.0);
    for (std::int64_t b = 0; b < B; ++b) {
        const std::int64_t t0 = T * b / B;
        const std::int64_t t1 = T * (b + 1) / B;
        const double m = static_cast<double>(t1 - t0);
        Accum mean;
        for (std::int64_t t = t0; t < t1; ++t)
            mean.add(mt[static_cast<std::size_t>(t)]);
        const double mu = mean.value() / m;
        Accum ss;
        for (std::int64_t t = t0; t < t1; ++t) {
            const double d = mt[static_cast<std::size_t>(t)] - mu;
            ss.add(d * d);
        }
        double v = ss.value() / (m - 1.0);
        if (conditional) {
            Accum uu;
            for (std::int64_t t = t0; t < t1; ++t)
                uu.add(ut[static_cast<std::size_t>(t)]);
            v += uu.value() / m;
        }
        vb[static_cast<std::size_t>(b)] = v;
    }

    Accum vm;
    for (double v : vb) vm.add(v);
    const double mu = vm.value() / static_cast<double>(B);
    Accum vs;
    for (double v : vb) {
        const double d = v - mu;
        vs.add(d * d);
    }
    out.variance_estimate = mu;
    out.standard_error = std::sqrt(
        std::max(vs.value(), 0.0) /
        (static_cast<double>(B) * static_cast<double>(B - 1)));
    return out;
}

} // namespace poolcorr
