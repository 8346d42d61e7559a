// SPDX-License-Identifier: Apache-2.0
//
// poolcorr <subcommand> --spec ... [--out ...] [--threads k]
//
// Subcommands: eval, sweep, stacking, mc-check, constellation build|diagnose.
// Exit code 0 only when every requested check or cell is ok (blank sweep
// cells are tolerated when the spec sets allow_blank); 1 on failed checks;
// 2 on bad input.

#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "cli/commands.hpp"
#include "cli/emit.hpp"
#include "cli/specfile.hpp"

namespace {

using namespace poolcorr;
using namespace poolcorr::cli;

const std::vector<std::string> kConfigKeys = {"n",        "p_mean",     "p_spread",
                                              "rho_mean", "rho_spread", "tau",
                                              "spread_convention"};
const std::vector<std::string> kParamKeys = {"p_buckets", "rho_buckets", "grid_points",
                                             "p_mid",     "p_family",    "rho_family"};

std::vector<std::string> concat(std::vector<std::string> a,
                                const std::vector<std::string>& b) {
    a.insert(a.end(), b.begin(), b.end());
    return a;
}

std::string swap_extension(const std::string& path, const std::string& ext) {
    const std::size_t slash = path.find_last_of('/');
    const std::size_t dot = path.find_last_of('.');
    if (dot != std::string::npos && (slash == std::string::npos || dot > slash))
        return path.substr(0, dot) + ext;
    return path + ext;
}

template <class Table>
void write_outputs(const Table& table, const std::string& out, const std::string& format) {
    if (format == "csv" || format == "both") {
        emit_csv(table, out);
        std::printf("wrote %s\n", out.c_str());
    }
    if (format == "svg" || format == "both") {
        const std::string svg_path = format == "svg" ? out : swap_extension(out, ".svg");
        emit_svg(table, svg_path);
        std::printf("wrote %s\n", svg_path.c_str());
    }
}

const char* mid_name(MidConvention mid) {
    return mid == MidConvention::mean ? "mean" : "median";
}

void print_diagnosis(const ExposureConstellation& c, const Diagnosis& d, bool with_errors) {
    std::printf("K = %zu, L = %zu, n = %lld\n", c.bucket_count(), c.rho_count(),
                static_cast<long long>(c.n));
    std::printf("p_bar = %.12g\n", c.p_bar);
    std::printf("p_mid (%s) = %.12g\n", mid_name(d.p_mid_kind), d.p_mid_value);
    const char* conv = d.achieved.spread_convention == SpreadConvention::cv ? "cv" : "s";
    if (with_errors) {
        std::printf("p_mean     = %.12g (err %.3g)\n", d.achieved.p_mean, d.err_p_mean);
        std::printf("p_spread   = %.12g [%s] (err %.3g)\n", d.achieved.p_spread, conv,
                    d.err_p_spread);
        std::printf("rho_mean   = %.12g (err %.3g)\n", d.achieved.rho_mean, d.err_rho_mean);
        std::printf("rho_spread = %.12g [s] (err %.3g)\n", d.achieved.rho_spread,
                    d.err_rho_spread);
        std::printf("tau        = %.12g (err %.3g)\n", d.achieved.tau, d.err_tau);
        std::printf("diagnosis: %s (tolerance %g)\n", d.pass ? "PASS" : "FAIL",
                    d.tolerance);
    } else {
        std::printf("p_mean     = %.12g\n", d.achieved.p_mean);
        std::printf("p_spread   = %.12g [%s]\n", d.achieved.p_spread, conv);
        std::printf("rho_mean   = %.12g\n", d.achieved.rho_mean);
        std::printf("rho_spread = %.12g [s]\n", d.achieved.rho_spread);
        std::printf("tau        = %.12g\n", d.achieved.tau);
    }
}

int cmd_eval(const std::string& spec_path, const std::string& out_path, int threads) {
    const SpecFile spec = parse_spec_file(spec_path);
    require_known_keys(spec, concat(kConfigKeys, kParamKeys));
    if (!spec.axes.empty())
        throw spec_parse_error("eval takes no axis.* lists; use sweep");
    const InputConfiguration cfg = config_from_spec(spec);
    const BuildParams params = params_from_spec(spec);

    const EvalResult r = run_eval(cfg, params, threads);
    char buf[512];
    std::snprintf(buf, sizeof buf,
                  "K = %zu\nL = %zu\nn = %lld\np_bar = %.12g\nvariance = %.12g\n"
                  "rho_tilde = %.12g\nrho_percent = %.12g\niterations = %d\n"
                  "residual = %.3g\n",
                  r.constellation.bucket_count(), r.constellation.rho_count(),
                  static_cast<long long>(r.constellation.n), r.constellation.p_bar,
                  r.moments.variance, r.implied.rho_tilde, r.implied.rho_percent,
                  r.implied.iterations, r.implied.residual);
    std::fputs(buf, stdout);
    if (!out_path.empty()) {
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open output file '" + out_path + "'");
        os << buf;
    }
    return 0;
}

int cmd_sweep(const std::string& spec_path, const std::string& out_path, int threads,
              const std::string& format) {
    const SpecFile spec = parse_spec_file(spec_path);
    require_known_keys(spec, concat(concat(kConfigKeys, kParamKeys), {"allow_blank"}));
    const SweepTable table = run_sweep(sweep_from_spec(spec, threads));

    std::size_t ok = 0, blank = 0, infeasible = 0;
    for (CellStatus s : table.status) {
        if (s == CellStatus::ok) ++ok;
        else if (s == CellStatus::out_of_varbound) ++blank;
        else ++infeasible;
    }
    std::printf("sweep: %zu x %zu cells, ok=%zu out_of_varbound=%zu infeasible=%zu\n",
                table.rows(), table.cols(), ok, blank, infeasible);
    write_outputs(table, out_path, format);
    return table.acceptable() ? 0 : 1;
}

int cmd_stacking(const std::string& spec_path, const std::string& out_path, int threads,
                 const std::string& format) {
    const SpecFile spec = parse_spec_file(spec_path);
    require_known_keys(spec, {"rho_mean", "p_spread", "rho_spread", "n", "p_buckets",
                              "rho_buckets", "slack"});
    if (spec.axes.size() != 1 || spec.axes[0].first != "p_mean")
        throw spec_parse_error("stacking needs exactly one axis.p_mean list");

    const StackingTable table = run_stacking_check(
        spec.axes[0].second, spec.get_number("rho_mean"), spec.get_number("p_spread"),
        spec.get_number("rho_spread"), spec.get_integer("n", 1000000000),
        spec.get_integer("p_buckets", 200), spec.get_integer("rho_buckets", 100),
        threads, spec.get_number("slack", 0.005));

    std::printf("p_mean     rho-only   p-only     product    joint\n");
    for (const StackingRow& row : table.rows)
        std::printf("%-10.4g %-10.6g %-10.6g %-10.6g %-10.6g %s\n", row.p_mean,
                    row.pct_rho, row.pct_p, row.product, row.pct_joint,
                    row.holds ? "ok" : "VIOLATED");
    std::printf("stacking: %s (slack %g)\n", table.pass ? "PASS" : "FAIL", table.slack);
    if (!out_path.empty()) write_outputs(table, out_path, format);
    return table.pass ? 0 : 1;
}

int cmd_mc_check(const std::string& spec_path, const std::string& out_path, int threads,
                 std::uint64_t seed) {
    std::vector<std::string> labels;
    std::vector<SimulationSpec> battery = default_mc_battery(seed, &labels);
    if (!spec_path.empty()) {
        const SpecFile spec = parse_spec_file(spec_path);
        require_known_keys(spec, {"mc.trials"});
        if (!spec.axes.empty()) throw spec_parse_error("mc-check takes no axis.* lists");
        if (spec.has("mc.trials")) {
            const std::int64_t trials = spec.get_integer("mc.trials");
            for (SimulationSpec& entry : battery) entry.trials = trials;
        }
    }
    for (SimulationSpec& entry : battery) entry.threads = threads;

    const McCheckReport report = run_mc_check(battery, labels);
    for (std::size_t i = 0; i < report.entries.size(); ++i) {
        const McCheckEntry& e = report.entries[i];
        std::printf("%2zu  %-42s analytic=%.6e simulated=%.6e se=%.2e z=%+.2f\n", i + 1,
                    e.label.c_str(), e.analytic, e.simulated, e.standard_error, e.z);
    }
    std::printf("mc-check: %s (%zu entries, max |z| = %.2f, seed %llu)\n",
                report.pass ? "PASS" : "FAIL", report.entries.size(), report.max_abs_z,
                static_cast<unsigned long long>(seed));

    if (!out_path.empty()) {
        std::string csv = "label,analytic,simulated,standard_error,z\n";
        char line[256];
        for (const McCheckEntry& e : report.entries) {
            std::snprintf(line, sizeof line, "%s,%.6g,%.6g,%.6g,%.6g\n", e.label.c_str(),
                          e.analytic, e.simulated, e.standard_error, e.z);
            csv += line;
        }
        std::ofstream os(out_path, std::ios::binary);
        if (!os) throw std::runtime_error("cannot open output file '" + out_path + "'");
        os << csv;
        std::printf("wrote %s\n", out_path.c_str());
    }
    return report.pass ? 0 : 1;
}

int cmd_constellation_build(const std::string& spec_path, const std::string& out_path) {
    const SpecFile spec = parse_spec_file(spec_path);
    require_known_keys(spec, concat(kConfigKeys, kParamKeys));
    if (!spec.axes.empty())
        throw spec_parse_error("constellation build takes no axis.* lists");
    const InputConfiguration cfg = config_from_spec(spec);
    const BuildParams params = params_from_spec(spec);

    const ExposureConstellation c = build_constellation(cfg, params);
    save_constellation_file(c, out_path);
    std::printf("wrote %s\n", out_path.c_str());
    const Diagnosis d = diagnose(c, cfg, params);
    print_diagnosis(c, d, true);
    return d.pass ? 0 : 1;
}

int cmd_constellation_diagnose(const std::string& spec_path) {
    const ExposureConstellation c = load_constellation_file(spec_path);
    const Diagnosis d = diagnose(c);
    print_diagnosis(c, d, false);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"homogeneity bias of measured asset correlations"};
    app.require_subcommand(1);

    std::string spec_path, out_path;
    std::string format = "csv";
    int threads = 1;
    std::uint64_t seed = 42;

    CLI::App* eval = app.add_subcommand("eval", "evaluate a single configuration");
    eval->add_option("--spec", spec_path, "configuration spec file")
        ->required()
        ->check(CLI::ExistingFile);
    eval->add_option("--out", out_path, "also write the report to this file");
    eval->add_option("--threads", threads, "worker threads");

    CLI::App* sweep =
        app.add_subcommand("sweep", "rho_percent surface over two axis.* lists");
    sweep->add_option("--spec", spec_path, "sweep spec file")
        ->required()
        ->check(CLI::ExistingFile);
    sweep->add_option("--out", out_path, "output table path")->required();
    sweep->add_option("--threads", threads, "worker threads");
    sweep->add_option("--format", format, "csv, svg, or both")
        ->check(CLI::IsMember({"csv", "svg", "both"}));

    CLI::App* stacking = app.add_subcommand(
        "stacking", "multiplicative stacking check of PD and rho inhomogeneity");
    stacking->add_option("--spec", spec_path, "stacking spec file")
        ->required()
        ->check(CLI::ExistingFile);
    stacking->add_option("--out", out_path, "output table path");
    stacking->add_option("--threads", threads, "worker threads");
    stacking->add_option("--format", format, "csv, svg, or both")
        ->check(CLI::IsMember({"csv", "svg", "both"}));

    CLI::App* mc = app.add_subcommand(
        "mc-check", "Monte Carlo regression battery against analytic variances");
    mc->add_option("--spec", spec_path, "optional overrides (mc.trials)")
        ->check(CLI::ExistingFile);
    mc->add_option("--out", out_path, "write the z-score table as CSV");
    mc->add_option("--threads", threads, "worker threads");
    mc->add_option("--seed", seed, "simulation seed");

    CLI::App* cons = app.add_subcommand("constellation", "build or inspect pool files");
    cons->require_subcommand(1);
    CLI::App* build = cons->add_subcommand(
        "build", "discretize a configuration into an exposure constellation");
    build->add_option("--spec", spec_path, "configuration spec file")
        ->required()
        ->check(CLI::ExistingFile);
    build->add_option("--out", out_path, "constellation file to write")->required();
    CLI::App* diag =
        cons->add_subcommand("diagnose", "report the moments of a constellation file");
    diag->add_option("--spec", spec_path, "constellation file")
        ->required()
        ->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (eval->parsed()) return cmd_eval(spec_path, out_path, threads);
        if (sweep->parsed()) return cmd_sweep(spec_path, out_path, threads, format);
        if (stacking->parsed()) return cmd_stacking(spec_path, out_path, threads, format);
        if (mc->parsed()) return cmd_mc_check(spec_path, out_path, threads, seed);
        if (cons->parsed()) {
            if (build->parsed()) return cmd_constellation_build(spec_path, out_path);
            if (diag->parsed()) return cmd_constellation_diagnose(spec_path);
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 2;
}
