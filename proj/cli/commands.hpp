// SPDX-License-Identifier: Apache-2.0
//
// The command layer behind the CLI: parameter sweeps over input
// configurations, the stacking check, the Monte Carlo regression battery,
// and single-configuration evaluation.  Kept out of main.cpp so tests can
// run the exact code paths the binary runs.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cli/specfile.hpp"
#include "poolcorr/constellation.hpp"
#include "poolcorr/implied.hpp"
#include "poolcorr/mc_oracle.hpp"

namespace poolcorr::cli {

enum class CellStatus {
    ok,
    infeasible,      // configuration cannot be built (marginals/copula)
    out_of_varbound, // variance not invertible to an implied correlation
};

struct SweepSpec {
    InputConfiguration base; // fixed parameters; axes overwrite per cell
    BuildParams params;
    std::string row_field;
    std::vector<double> row_values;
    std::string col_field;
    std::vector<double> col_values;
    bool allow_blank = false; // blank cells don't fail the run
    int threads = 1;
};

struct SweepTable {
    std::string row_field;
    std::string col_field;
    std::vector<double> row_values;
    std::vector<double> col_values;
    std::vector<double> values; // row-major rho_percent fractions; NaN unless ok
    std::vector<CellStatus> status;
    bool allow_blank = false;

    std::size_t rows() const { return row_values.size(); }
    std::size_t cols() const { return col_values.size(); }
    double value_at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
    CellStatus status_at(std::size_t r, std::size_t c) const { return status[r * cols() + c]; }

    bool all_ok() const;
    // all_ok, or blanks are allowed (covering both out_of_varbound and
    // infeasible cells; either way the cell renders blank).
    bool acceptable() const;
};

// Overwrite one configuration field ("n", "p_mean", "p_spread", "rho_mean",
// "rho_spread", "tau") with a numeric value; unknown fields throw.
void apply_field(InputConfiguration& cfg, const std::string& field, double value);

// Evaluate rho_percent over the axis grid.  Cells run in a worker pool;
// per-cell failures are recorded as statuses, never thrown.
SweepTable run_sweep(const SweepSpec& spec);

// Assemble a SweepSpec from a parsed file (expects exactly two axis.* lists).
SweepSpec sweep_from_spec(const SpecFile& spec, int threads);

struct StackingRow {
    double p_mean = 0.0;
    double pct_rho = 0.0;   // rho-inhomogeneity only
    double pct_p = 0.0;     // PD-inhomogeneity only
    double product = 0.0;   // pct_rho * pct_p
    double pct_joint = 0.0; // both inhomogeneous, tau = 0
    bool holds = false;     // pct_joint <= product + slack
};

struct StackingTable {
    std::vector<StackingRow> rows;
    double slack = 0.005;
    bool pass = false;
};

// One row per mean PD: measured/actual correlation under rho-only, PD-only,
// and joint inhomogeneity, plus the multiplicative prediction.  Verifies
// the stacking inequality pct_joint <= pct_rho * pct_p + slack per row.
StackingTable run_stacking_check(const std::vector<double>& p_means, double rho_mean,
                                 double s_p, double s_rho,
                                 std::int64_t n = 1000000000,
                                 std::int64_t p_buckets = 200,
                                 std::int64_t rho_buckets = 100, int threads = 1,
                                 double slack = 0.005);

struct McCheckEntry {
    std::string label;
    double analytic = 0.0;
    double simulated = 0.0;
    double standard_error = 0.0;
    double z = 0.0;
};

struct McCheckReport {
    std::vector<McCheckEntry> entries;
    double max_abs_z = 0.0;
    bool pass = false; // all |z| <= 4
};

// Analytic var_dr_grid vs simulate_variance for every battery entry.
McCheckReport run_mc_check(const std::vector<SimulationSpec>& battery,
                           const std::vector<std::string>& labels = {});

// The built-in 12-entry battery: homogeneous pools, degenerate correlations,
// multi-bucket grids, dependent (tau != 0) builds, both simulation modes.
std::vector<SimulationSpec> default_mc_battery(std::uint64_t seed,
                                               std::vector<std::string>* labels = nullptr);

struct EvalResult {
    ExposureConstellation constellation;
    DefaultRateMoments moments;
    ImpliedRhoResult implied; // rho_percent is NaN when rho_mean == 0
};

// Build one constellation and push it through the measurement pipeline.
EvalResult run_eval(const InputConfiguration& cfg, const BuildParams& params,
                    int threads = 1);

} // namespace poolcorr::cli
