// SPDX-License-Identifier: Apache-2.0

#include "cli/specfile.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <sstream>

namespace poolcorr::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0;
    std::size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_number(const std::string& text, const std::string& where) {
    const std::string t = trim(text);
    if (t.empty()) throw spec_parse_error(where + ": empty number");
    char* end = nullptr;
    const double v = std::strtod(t.c_str(), &end);
    if (end != t.c_str() + t.size())
        throw spec_parse_error(where + ": cannot parse number '" + t + "'");
    return v;
}

std::vector<double> parse_list(const std::string& text, const std::string& where) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(parse_number(item, where));
    if (out.empty()) throw spec_parse_error(where + ": empty value list");
    return out;
}

std::int64_t to_integer(double v, const std::string& where) {
    const double r = std::round(v);
    if (!(std::fabs(v - r) <= 1e-6 * std::max(1.0, std::fabs(v))) ||
        std::fabs(r) > 9.2e18)
        throw spec_parse_error(where + ": expected an integer, got " + std::to_string(v));
    return static_cast<std::int64_t>(r);
}

} // namespace

bool SpecFile::has(const std::string& key) const { return values.count(key) != 0; }

std::string SpecFile::get_string(const std::string& key) const {
    auto it = values.find(key);
    if (it == values.end()) throw spec_parse_error("missing key '" + key + "'");
    return it->second;
}

std::string SpecFile::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : it->second;
}

double SpecFile::get_number(const std::string& key) const {
    return parse_number(get_string(key), "key '" + key + "'");
}

double SpecFile::get_number(const std::string& key, double fallback) const {
    auto it = values.find(key);
    return it == values.end() ? fallback : parse_number(it->second, "key '" + key + "'");
}

std::int64_t SpecFile::get_integer(const std::string& key) const {
    return to_integer(get_number(key), "key '" + key + "'");
}

std::int64_t SpecFile::get_integer(const std::string& key, std::int64_t fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    return to_integer(parse_number(it->second, "key '" + key + "'"), "key '" + key + "'");
}

bool SpecFile::get_flag(const std::string& key, bool fallback) const {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    const std::string v = trim(it->second);
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    throw spec_parse_error("key '" + key + "': expected a boolean, got '" + v + "'");
}

SpecFile parse_spec(std::istream& is, const std::string& name) {
    SpecFile spec;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;

        const std::string where = name + ":" + std::to_string(lineno);
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw spec_parse_error(where + ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw spec_parse_error(where + ": empty key");

        if (key.rfind("axis.", 0) == 0) {
            const std::string field = key.substr(5);
            if (field.empty()) throw spec_parse_error(where + ": empty axis field");
            for (const auto& ax : spec.axes)
                if (ax.first == field)
                    throw spec_parse_error(where + ": duplicate axis '" + field + "'");
            spec.axes.emplace_back(field, parse_list(value, where));
        } else {
            if (!spec.values.emplace(key, value).second)
                throw spec_parse_error(where + ": duplicate key '" + key + "'");
        }
    }
    return spec;
}

SpecFile parse_spec_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw spec_parse_error("cannot open spec file '" + path + "'");
    return parse_spec(is, path);
}

void require_known_keys(const SpecFile& spec, const std::vector<std::string>& allowed) {
    for (const auto& kv : spec.values) {
        bool known = false;
        for (const auto& a : allowed)
            if (kv.first == a) { known = true; break; }
        if (!known) throw spec_parse_error("unknown key '" + kv.first + "'");
    }
}

namespace {

SpreadConvention parse_convention(const std::string& v) {
    if (v == "s") return SpreadConvention::s;
    if (v == "cv") return SpreadConvention::cv;
    throw spec_parse_error("spread_convention must be 's' or 'cv', got '" + v + "'");
}

MarginalFamily parse_family(const std::string& v, const std::string& key) {
    if (v == "beta") return MarginalFamily::beta;
    if (v == "two_point") return MarginalFamily::two_point;
    if (v == "lognormal_clipped") return MarginalFamily::lognormal_clipped;
    throw spec_parse_error(key + ": unknown family '" + v + "'");
}

MidConvention parse_mid(const std::string& v) {
    if (v == "mean") return MidConvention::mean;
    if (v == "median") return MidConvention::median;
    throw spec_parse_error("p_mid must be 'mean' or 'median', got '" + v + "'");
}

} // namespace

InputConfiguration config_from_spec(const SpecFile& spec) {
    InputConfiguration cfg;
    cfg.n = spec.get_integer("n", 0);
    cfg.p_mean = spec.get_number("p_mean", 0.0);
    cfg.p_spread = spec.get_number("p_spread", 0.0);
    cfg.rho_mean = spec.get_number("rho_mean", 0.0);
    cfg.rho_spread = spec.get_number("rho_spread", 0.0);
    cfg.tau = spec.get_number("tau", 0.0);
    cfg.spread_convention = parse_convention(spec.get_string("spread_convention", "s"));
    return cfg;
}

BuildParams params_from_spec(const SpecFile& spec) {
    BuildParams params;
    params.K = spec.get_integer("p_buckets", 1);
    params.L = spec.get_integer("rho_buckets", 1);
    params.g = spec.get_integer("grid_points", params.g);
    params.p_mid = parse_mid(spec.get_string("p_mid", "median"));
    params.p_family = parse_family(spec.get_string("p_family", "beta"), "p_family");
    params.rho_family = parse_family(spec.get_string("rho_family", "beta"), "rho_family");
    params.validate();
    return params;
}

} // namespace poolcorr::cli
