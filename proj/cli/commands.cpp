// SPDX-License-Identifier: Apache-2.0

#include "cli/commands.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>
#include <utility>

#include "poolcorr/errors.hpp"
#include "poolcorr/poolvar.hpp"

namespace poolcorr::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// A sweep cell only counts when the built pool actually carries the requested
// moments.  Near the attainability edge of the K-cell discretization (e.g.
// s(p) close to sqrt(p_mean (K-1) / (1 - p_mean))) the achieved spread
// saturates below the target; reporting a rho-percent for a pool that missed
// its configuration would silently answer a different question.  Cells within
// ~10% of the target still track it to table precision; saturated cells miss
// by 16% and more and merely repeat a lower-spread column, so the threshold
// sits between the two regimes.
constexpr double kCellMomentTolerance = 0.12;

// Pool size at which the moment-fidelity probe is built.  The probe checks
// whether the discretized profile can represent the configuration at all,
// which is a property of the K x L grid, not of the (possibly tiny) pool the
// cell evaluates.
constexpr std::int64_t kProfileResolution = 1000000000;

} // namespace

bool SweepTable::all_ok() const {
    for (CellStatus s : status)
        if (s != CellStatus::ok) return false;
    return true;
}

bool SweepTable::acceptable() const {
    for (CellStatus s : status) {
        if (s == CellStatus::ok) continue;
        // Non-ok cells render blank; a spec that opts into blanks accepts
        // both unreachable variances and infeasible configurations.
        if (allow_blank) continue;
        return false;
    }
    return true;
}

void apply_field(InputConfiguration& cfg, const std::string& field, double value) {
    if (field == "n")
        cfg.n = static_cast<std::int64_t>(std::llround(value));
    else if (field == "p_mean")
        cfg.p_mean = value;
    else if (field == "p_spread")
        cfg.p_spread = value;
    else if (field == "rho_mean")
        cfg.rho_mean = value;
    else if (field == "rho_spread")
        cfg.rho_spread = value;
    else if (field == "tau")
        cfg.tau = value;
    else
        throw spec_parse_error("unknown configuration field '" + field + "'");
}

SweepTable run_sweep(const SweepSpec& spec) {
    if (spec.row_field == spec.col_field)
        throw spec_parse_error("sweep axes must name distinct fields");
    {
        // Reject unknown axis fields before any work happens.
        InputConfiguration probe;
        apply_field(probe, spec.row_field, 0.0);
        apply_field(probe, spec.col_field, 0.0);
    }
    if (spec.row_values.empty() || spec.col_values.empty())
        throw spec_parse_error("sweep axes must be non-empty");

    SweepTable table;
    table.row_field = spec.row_field;
    table.col_field = spec.col_field;
    table.row_values = spec.row_values;
    table.col_values = spec.col_values;
    table.allow_blank = spec.allow_blank;

    const std::size_t cols = spec.col_values.size();
    const std::size_t cells = spec.row_values.size() * cols;
    table.values.assign(cells, kNaN);
    table.status.assign(cells, CellStatus::ok);

    int pool = spec.threads > 0 ? spec.threads
                                : static_cast<int>(std::thread::hardware_concurrency());
    if (pool < 1) pool = 1;
    if (static_cast<std::size_t>(pool) > cells) pool = static_cast<int>(cells);
    // Hand leftover parallelism to the grid evaluation inside each cell.
    const int inner = spec.threads > 0 ? std::max(1, spec.threads / pool) : 1;

    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells) break;
            InputConfiguration cfg = spec.base;
            apply_field(cfg, spec.row_field, spec.row_values[i / cols]);
            apply_field(cfg, spec.col_field, spec.col_values[i % cols]);
            try {
                cfg.validate();
                if (!(cfg.rho_mean > 0.0))
                    throw domain_error("sweep cell: rho_mean must be positive");
                // Moment fidelity is judged at asymptotic pool size: a small-n
                // pool legitimately deviates from the profile it was drawn
                // from (that deviation is the object of study), but the K x L
                // discretization itself must be able to carry the profile.
                InputConfiguration profile_cfg = cfg;
                profile_cfg.n = std::max<std::int64_t>(cfg.n, kProfileResolution);
                const ExposureConstellation profile =
                    build_constellation(profile_cfg, spec.params);
                const Diagnosis d =
                    diagnose(profile, profile_cfg, spec.params, kCellMomentTolerance);
                if (!d.pass) {
                    table.status[i] = CellStatus::infeasible;
                    continue;
                }
                const ExposureConstellation pool =
                    profile_cfg.n == cfg.n ? std::move(profile)
                                           : build_constellation(cfg, spec.params);
                const DefaultRateMoments m = var_dr_grid(pool, inner);
                // The measurer assumes a homogeneous pool at the configured
                // mean PD; the realized pool mean can drift at tiny n, but
                // that drift is part of what the homogeneity assumption hides.
                const ImpliedRhoResult r =
                    implied_rho_single(m.variance, cfg.p_mean, cfg.n);
                table.values[i] = r.rho_tilde / cfg.rho_mean;
            } catch (const unattainable_error&) {
                table.status[i] = CellStatus::out_of_varbound;
            } catch (const boundary_error&) {
                table.status[i] = CellStatus::out_of_varbound;
            } catch (const infeasibility_error&) {
                table.status[i] = CellStatus::infeasible;
            } catch (const domain_error&) {
                table.status[i] = CellStatus::infeasible;
            }
        }
    };

    if (pool == 1) {
        work();
    } else {
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(pool));
        for (int w = 0; w < pool; ++w) workers.emplace_back(work);
        for (auto& w : workers) w.join();
    }
    return table;
}

SweepSpec sweep_from_spec(const SpecFile& spec, int threads) {
    if (spec.axes.size() != 2)
        throw spec_parse_error("sweep needs exactly two axis.* lists, got " +
                               std::to_string(spec.axes.size()));
    SweepSpec s;
    s.base = config_from_spec(spec);
    s.params = params_from_spec(spec);
    s.row_field = spec.axes[0].first;
    s.row_values = spec.axes[0].second;
    s.col_field = spec.axes[1].first;
    s.col_values = spec.axes[1].second;
    s.allow_blank = spec.get_flag("allow_blank", false);
    s.threads = threads;
    return s;
}

StackingTable run_stacking_check(const std::vector<double>& p_means, double rho_mean,
                                 double s_p, double s_rho, std::int64_t n,
                                 std::int64_t p_buckets, std::int64_t rho_buckets,
                                 int threads, double slack) {
    if (p_means.empty()) throw domain_error("run_stacking_check: no mean PDs given");

    BuildParams params;
    params.K = p_buckets;
    params.L = rho_buckets;
    params.validate();

    auto percent = [&](double p_mean, double p_spread, double rho_spread) {
        InputConfiguration cfg;
        cfg.n = n;
        cfg.p_mean = p_mean;
        cfg.p_spread = p_spread;
        cfg.rho_mean = rho_mean;
        cfg.rho_spread = rho_spread;
        cfg.tau = 0.0;
        cfg.validate();
        const ExposureConstellation c = build_constellation(cfg, params);
        return rho_percent_for_configuration(c, rho_mean, threads).rho_percent;
    };

    StackingTable table;
    table.slack = slack;
    table.pass = true;
    for (double p_mean : p_means) {
        StackingRow row;
        row.p_mean = p_mean;
        row.pct_rho = percent(p_mean, 0.0, s_rho);
        row.pct_p = percent(p_mean, s_p, 0.0);
        row.product = row.pct_rho * row.pct_p;
        row.pct_joint = percent(p_mean, s_p, s_rho);
        row.holds = row.pct_joint <= row.product + slack;
        table.pass = table.pass && row.holds;
        table.rows.push_back(row);
    }
    return table;
}

McCheckReport run_mc_check(const std::vector<SimulationSpec>& battery,
                           const std::vector<std::string>& labels) {
    McCheckReport report;
    report.pass = true;
    for (std::size_t i = 0; i < battery.size(); ++i) {
        const SimulationSpec& spec = battery[i];
        McCheckEntry entry;
        entry.label = i < labels.size() ? labels[i] : "entry " + std::to_string(i + 1);
        entry.analytic = var_dr_grid(spec.constellation, spec.threads).variance;
        const SimulationResult sim = simulate_variance(spec);
        entry.simulated = sim.variance_estimate;
        entry.standard_error = sim.standard_error;
        if (sim.standard_error > 0.0) {
            entry.z = (sim.variance_estimate - entry.analytic) / sim.standard_error;
        } else {
            entry.z = sim.variance_estimate == entry.analytic
                          ? 0.0
                          : std::numeric_limits<double>::infinity();
        }
        report.max_abs_z = std::max(report.max_abs_z, std::fabs(entry.z));
        report.pass = report.pass && std::fabs(entry.z) <= 4.0;
        report.entries.push_back(std::move(entry));
    }
    return report;
}

namespace {

ExposureConstellation direct_pool(std::vector<double> pd, std::vector<double> rho,
                                  std::vector<std::int64_t> counts) {
    ExposureConstellation c;
    c.pd_values = std::move(pd);
    c.rho_values = std::move(rho);
    c.counts = std::move(counts);
    c.refresh();
    c.validate();
    return c;
}

ExposureConstellation built_pool(std::int64_t n, double p_mean, double s_p,
                                 double rho_mean, double s_rho, double tau,
                                 std::int64_t K, std::int64_t L,
                                 MarginalFamily p_family = MarginalFamily::beta) {
    InputConfiguration cfg;
    cfg.n = n;
    cfg.p_mean = p_mean;
    cfg.p_spread = s_p;
    cfg.rho_mean = rho_mean;
    cfg.rho_spread = s_rho;
    cfg.tau = tau;
    BuildParams params;
    params.K = K;
    params.L = L;
    params.p_family = p_family;
    return build_constellation(cfg, params);
}

} // namespace

std::vector<SimulationSpec> default_mc_battery(std::uint64_t seed,
                                               std::vector<std::string>* labels) {
    std::vector<SimulationSpec> battery;
    std::vector<std::string> names;
    auto add = [&](std::string name, ExposureConstellation c, std::int64_t trials,
                   SimulationMode mode) {
        SimulationSpec spec;
        spec.constellation = std::move(c);
        spec.trials = trials;
        // Decorrelate the per-entry substreams of the shared base seed.
        spec.seed = seed ^ (0xD1B54A32D192ED03ULL * (battery.size() + 1));
        spec.mode = mode;
        battery.push_back(std::move(spec));
        names.push_back(std::move(name));
    };

    add("homogeneous p=5% rho=20% n=500", direct_pool({0.05}, {0.20}, {500}), 200000,
        SimulationMode::exposure);
    add("independent defaults rho=0 n=1000", direct_pool({0.10}, {0.0}, {1000}), 200000,
        SimulationMode::exposure);
    add("comonotone pool rho=1 n=50", direct_pool({0.30}, {1.0}, {50}), 200000,
        SimulationMode::exposure);
    add("two PD buckets shared rho",
        direct_pool({0.01, 0.20}, {0.15}, {300, 100}), 200000, SimulationMode::exposure);
    add("3x2 grid direct counts",
        direct_pool({0.02, 0.05, 0.10}, {0.05, 0.30}, {100, 50, 200, 100, 25, 25}),
        200000, SimulationMode::exposure);
    add("beta grid K=4 L=3 tau=0",
        built_pool(2000, 0.05, 0.4, 0.15, 0.3, 0.0, 4, 3), 200000,
        SimulationMode::exposure);
    add("beta grid K=4 L=3 tau=-0.4",
        built_pool(2000, 0.05, 0.4, 0.15, 0.3, -0.4, 4, 3), 200000,
        SimulationMode::exposure);
    add("beta grid K=4 L=3 tau=+0.6 auto mode",
        built_pool(2000, 0.05, 0.4, 0.15, 0.3, 0.6, 4, 3), 200000,
        SimulationMode::auto_select);
    add("homogeneous n=1e9 conditional via auto",
        direct_pool({0.01}, {0.12}, {1000000000}), 200000, SimulationMode::auto_select);
    add("small-PD tail p=0.1% n=1e6 conditional",
        direct_pool({0.001}, {0.12}, {1000000}), 200000, SimulationMode::conditional);
    add("high correlation rho=0.9 n=200", direct_pool({0.20}, {0.90}, {200}), 200000,
        SimulationMode::exposure);
    add("two-point PD marginal s(p)=0.6",
        built_pool(800, 0.30, 0.6, 0.10, 0.0, 0.0, 2, 1, MarginalFamily::two_point),
        200000, SimulationMode::exposure);

    if (labels) *labels = std::move(names);
    return battery;
}

EvalResult run_eval(const InputConfiguration& cfg, const BuildParams& params,
                    int threads) {
    cfg.validate();
    EvalResult out;
    out.constellation = build_constellation(cfg, params);
    out.moments = var_dr_grid(out.constellation, threads);
    out.implied = implied_rho_single(out.moments.variance, out.moments.mean,
                                     out.constellation.n);
    out.implied.rho_percent =
        cfg.rho_mean > 0.0 ? out.implied.rho_tilde / cfg.rho_mean : kNaN;
    return out;
}

} // namespace poolcorr::cli
