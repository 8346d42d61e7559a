// SPDX-License-Identifier: Apache-2.0
//
// Plain-text experiment specs.  One `key = value` pair per line, `#` starts
// a comment, blank lines are ignored.  Sweep axes are value lists:
//
//   axis.p_mean   = 0.0001, 0.001, 0.01, 0.1
//   axis.p_spread = 0.02, 0.05, 0.1, 0.2
//
// The first axis.* line names the row variable, the second the column
// variable.  Everything else is a scalar parameter of the configuration or
// of the discretization.

#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "poolcorr/constellation.hpp"

namespace poolcorr::cli {

struct spec_parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SpecFile {
    // Scalar keys, last parse wins is an error: duplicates throw.
    std::map<std::string, std::string> values;
    // axis.<field> entries in file order: (field, values).
    std::vector<std::pair<std::string, std::vector<double>>> axes;

    bool has(const std::string& key) const;

    // Typed accessors.  The one-argument forms throw spec_parse_error when
    // the key is missing; the two-argument forms fall back instead.  All
    // throw when a present value fails to parse.
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_number(const std::string& key) const;
    double get_number(const std::string& key, double fallback) const;
    std::int64_t get_integer(const std::string& key) const;
    std::int64_t get_integer(const std::string& key, std::int64_t fallback) const;
    bool get_flag(const std::string& key, bool fallback) const;
};

SpecFile parse_spec(std::istream& is, const std::string& name);
SpecFile parse_spec_file(const std::string& path);

// Reject keys outside `allowed` (axis.* entries are checked against the
// configuration fields separately).  Guards against silently ignored typos.
void require_known_keys(const SpecFile& spec, const std::vector<std::string>& allowed);

// Assemble library inputs from a parsed spec.  Missing configuration fields
// default to zero and are expected to be filled by sweep axes; validation
// happens where the configuration is used.
InputConfiguration config_from_spec(const SpecFile& spec);
BuildParams params_from_spec(const SpecFile& spec);

} // namespace poolcorr::cli
