// SPDX-License-Identifier: Apache-2.0

#include "cli/emit.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace poolcorr::cli {

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string num6(double v) { return fmt("%.6g", v); }

// Axis values are fractions except for exposure counts.
std::string axis_label(const std::string& field, double v) {
    if (field == "n") return num6(v);
    return fmt("%.4g", v * 100.0) + "%";
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file '" + path + "'");
    os << text;
    os.flush();
    if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Chart rendering shared by the sweep and stacking emitters.

struct ChartSeries {
    std::string name;
    std::vector<double> y;        // one entry per x tick
    std::vector<bool> present;    // false -> gap in the line
};

struct Chart {
    std::string title;
    std::string x_title;
    std::vector<std::string> x_ticks;
    std::vector<ChartSeries> series;
};

const char* const kPalette[14] = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22", "#17becf", "#393b79", "#ad494a", "#637939", "#8c6d31"};

std::string xy(double x, double y) { return fmt("%.2f", x) + "," + fmt("%.2f", y); }

std::string render_chart(const Chart& chart) {
    const double height = 560.0;
    const double x0 = 72.0, x1 = 640.0;            // plot box, left/right
    const double y0 = 48.0, y1 = height - 64.0;    // plot box, top/bottom
    const std::size_t ticks = chart.x_ticks.size();

    // Vertical range: snap to 0.1 steps around the plotted values.
    double lo = 0.0, hi = 1.0;
    bool any = false;
    for (const auto& s : chart.series)
        for (std::size_t i = 0; i < s.y.size(); ++i)
            if (s.present[i]) {
                if (!any) { lo = hi = s.y[i]; any = true; }
                lo = std::min(lo, s.y[i]);
                hi = std::max(hi, s.y[i]);
            }
    if (any) {
        lo = std::min(0.0, std::floor(lo * 10.0) / 10.0);
        hi = std::ceil(hi * 10.0) / 10.0;
        if (hi - lo < 0.1) hi = lo + 0.1;
    }

    auto xpos = [&](std::size_t i) {
        if (ticks <= 1) return (x0 + x1) / 2.0;
        return x0 + (x1 - x0) * static_cast<double>(i) / static_cast<double>(ticks - 1);
    };
    auto ypos = [&](double v) { return y1 - (y1 - y0) * (v - lo) / (hi - lo); };

    std::string out;
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 840 560\" "
           "font-family=\"sans-serif\">\n";
    out += "<rect width=\"840\" height=\"560\" fill=\"#ffffff\"/>\n";
    if (!chart.title.empty())
        out += "<text x=\"420\" y=\"26\" font-size=\"15\" text-anchor=\"middle\">" +
               chart.title + "</text>\n";

    // Horizontal gridlines and y tick labels (percent).
    for (int k = 0; k <= 5; ++k) {
        const double v = lo + (hi - lo) * k / 5.0;
        const double y = ypos(v);
        out += "<line x1=\"" + fmt("%.2f", x0) + "\" y1=\"" + fmt("%.2f", y) +
               "\" x2=\"" + fmt("%.2f", x1) + "\" y2=\"" + fmt("%.2f", y) +
               "\" stroke=\"#dddddd\"/>\n";
        out += "<text x=\"" + fmt("%.2f", x0 - 8.0) + "\" y=\"" + fmt("%.2f", y + 4.0) +
               "\" font-size=\"12\" text-anchor=\"end\">" + fmt("%.4g", v * 100.0) +
               "%</text>\n";
    }

    // x tick labels.
    for (std::size_t i = 0; i < ticks; ++i) {
        const double x = xpos(i);
        out += "<line x1=\"" + fmt("%.2f", x) + "\" y1=\"" + fmt("%.2f", y1) +
               "\" x2=\"" + fmt("%.2f", x) + "\" y2=\"" + fmt("%.2f", y1 + 5.0) +
               "\" stroke=\"#444444\"/>\n";
        out += "<text x=\"" + fmt("%.2f", x) + "\" y=\"" + fmt("%.2f", y1 + 20.0) +
               "\" font-size=\"12\" text-anchor=\"middle\">" + chart.x_ticks[i] +
               "</text>\n";
    }
    out += "<text x=\"" + fmt("%.2f", (x0 + x1) / 2.0) + "\" y=\"" +
           fmt("%.2f", height - 18.0) + "\" font-size=\"13\" text-anchor=\"middle\">" +
           chart.x_title + "</text>\n";
    out += "<text x=\"20\" y=\"" + fmt("%.2f", (y0 + y1) / 2.0) +
           "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 20 " +
           fmt("%.2f", (y0 + y1) / 2.0) +
           ")\">measured / actual correlation</text>\n";

    // Plot border.
    out += "<rect x=\"" + fmt("%.2f", x0) + "\" y=\"" + fmt("%.2f", y0) + "\" width=\"" +
           fmt("%.2f", x1 - x0) + "\" height=\"" + fmt("%.2f", y1 - y0) +
           "\" fill=\"none\" stroke=\"#444444\"/>\n";

    // Series: polylines per contiguous run, plus point markers.
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const ChartSeries& series = chart.series[s];
        const char* color = kPalette[s % 14];
        std::string run;
        std::size_t run_len = 0;
        auto flush_run = [&] {
            if (run_len >= 2)
                out += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
                       "\" stroke-width=\"2\" points=\"" + run + "\"/>\n";
            run.clear();
            run_len = 0;
        };
        for (std::size_t i = 0; i < series.y.size(); ++i) {
            if (!series.present[i]) {
                flush_run();
                continue;
            }
            if (!run.empty()) run += " ";
            run += xy(xpos(i), ypos(series.y[i]));
            ++run_len;
        }
        flush_run();
        for (std::size_t i = 0; i < series.y.size(); ++i)
            if (series.present[i])
                out += "<circle cx=\"" + fmt("%.2f", xpos(i)) + "\" cy=\"" +
                       fmt("%.2f", ypos(series.y[i])) + "\" r=\"3\" fill=\"" + color +
                       "\"/>\n";
    }

    // Legend.
    for (std::size_t s = 0; s < chart.series.size(); ++s) {
        const double ly = y0 + 10.0 + 20.0 * static_cast<double>(s);
        out += "<line x1=\"656\" y1=\"" + fmt("%.2f", ly) + "\" x2=\"680\" y2=\"" +
               fmt("%.2f", ly) + "\" stroke=\"" + kPalette[s % 14] +
               "\" stroke-width=\"2\"/>\n";
        out += "<text x=\"686\" y=\"" + fmt("%.2f", ly + 4.0) + "\" font-size=\"12\">" +
               chart.series[s].name + "</text>\n";
    }

    out += "</svg>\n";
    return out;
}

} // namespace

std::string csv_string(const SweepTable& table) {
    std::string out = table.row_field;
    for (double c : table.col_values) out += "," + num6(c);
    out += "\n";
    for (std::size_t r = 0; r < table.rows(); ++r) {
        out += num6(table.row_values[r]);
        for (std::size_t c = 0; c < table.cols(); ++c) {
            out += ",";
            if (table.status_at(r, c) == CellStatus::ok) out += num6(table.value_at(r, c));
        }
        out += "\n";
    }
    return out;
}

std::string csv_string(const StackingTable& table) {
    std::string out = "p_mean,pct_rho,pct_p,product,pct_joint\n";
    for (const StackingRow& row : table.rows) {
        out += num6(row.p_mean) + "," + num6(row.pct_rho) + "," + num6(row.pct_p) + "," +
               num6(row.product) + "," + num6(row.pct_joint) + "\n";
    }
    return out;
}

std::string svg_string(const SweepTable& table, const std::string& title) {
    Chart chart;
    chart.title = title.empty() ? "measured / actual asset correlation" : title;
    chart.x_title = table.col_field;
    for (double c : table.col_values)
        chart.x_ticks.push_back(axis_label(table.col_field, c));
    for (std::size_t r = 0; r < table.rows(); ++r) {
        ChartSeries series;
        series.name = table.row_field + " = " + axis_label(table.row_field, table.row_values[r]);
        for (std::size_t c = 0; c < table.cols(); ++c) {
            series.y.push_back(table.value_at(r, c));
            series.present.push_back(table.status_at(r, c) == CellStatus::ok);
        }
        chart.series.push_back(std::move(series));
    }
    return render_chart(chart);
}

std::string svg_string(const StackingTable& table, const std::string& title) {
    Chart chart;
    chart.title = title.empty() ? "stacking of PD and correlation inhomogeneity" : title;
    chart.x_title = "p_mean";
    for (const StackingRow& row : table.rows)
        chart.x_ticks.push_back(axis_label("p_mean", row.p_mean));
    const char* names[4] = {"rho-only", "p-only", "product", "joint"};
    for (int s = 0; s < 4; ++s) {
        ChartSeries series;
        series.name = names[s];
        for (const StackingRow& row : table.rows) {
            const double v = s == 0   ? row.pct_rho
                             : s == 1 ? row.pct_p
                             : s == 2 ? row.product
                                      : row.pct_joint;
            series.y.push_back(v);
            series.present.push_back(true);
        }
        chart.series.push_back(std::move(series));
    }
    return render_chart(chart);
}

void emit_csv(const SweepTable& table, const std::string& path) {
    write_text_file(path, csv_string(table));
}

void emit_csv(const StackingTable& table, const std::string& path) {
    write_text_file(path, csv_string(table));
}

void emit_svg(const SweepTable& table, const std::string& path) {
    write_text_file(path, svg_string(table));
}

void emit_svg(const StackingTable& table, const std::string& path) {
    write_text_file(path, svg_string(table));
}

} // namespace poolcorr::cli
