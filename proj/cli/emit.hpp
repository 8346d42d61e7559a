// SPDX-License-Identifier: Apache-2.0
//
// Table serialization: CSV (machine consumers, raw fractions) and
// self-contained single-panel SVG line charts.  Output is byte-identical
// across runs for identical tables.

#pragma once

#include <string>

#include "cli/commands.hpp"

namespace poolcorr::cli {

// Header row of column labels, first column row labels, cells as decimal
// fractions with 6 significant digits; non-ok cells are left blank.
std::string csv_string(const SweepTable& table);
std::string csv_string(const StackingTable& table);

// One polyline per table row over the index-spaced column axis, with
// markers, legend, and axis labels.  Values are labelled as percentages.
std::string svg_string(const SweepTable& table, const std::string& title = "");
std::string svg_string(const StackingTable& table, const std::string& title = "");

void emit_csv(const SweepTable& table, const std::string& path);
void emit_csv(const StackingTable& table, const std::string& path);
void emit_svg(const SweepTable& table, const std::string& path);
void emit_svg(const StackingTable& table, const std::string& path);

} // namespace poolcorr::cli
