#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "augbagg/csv.hpp"
#include "augbagg/errors.hpp"

namespace augbagg {

struct PlotSpec {
    std::string x_column;
    std::string y_column;
    std::string series_column; // empty = single series
    std::string yerr_column;   // empty = no error bars
    std::string title;
    int width = 760;
    int height = 520;
};

namespace detail {

struct PlotPoint {
    double x;
    double y;
    double yerr;
};

struct PlotSeries {
    std::string label;
    std::vector<PlotPoint> points;
};

inline double nice_step(double raw) {
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double norm = raw / mag;
    if (norm <= 1.0) return mag;
    if (norm <= 2.0) return 2.0 * mag;
    if (norm <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

inline std::string svg_escape(const std::string& text) {
    std::string out;
    for (char c : text) {
        if (c == '&') out += "&amp;";
        else if (c == '<') out += "&lt;";
        else if (c == '>') out += "&gt;";
        else out.push_back(c);
    }
    return out;
}

} // namespace detail

// Line chart with optional +/-1 sd error bars, one polyline per series.
inline std::string render_line_plot(const CsvTable& table, const PlotSpec& spec) {
    const int ix = table.column(spec.x_column);
    if (ix < 0) throw argument_error("plot: unknown column '" + spec.x_column + "'");
    const int iy = table.column(spec.y_column);
    if (iy < 0) throw argument_error("plot: unknown column '" + spec.y_column + "'");
    int is = -1;
    if (!spec.series_column.empty()) {
        is = table.column(spec.series_column);
        if (is < 0) throw argument_error("plot: unknown column '" + spec.series_column + "'");
    }
    int ie = -1;
    if (!spec.yerr_column.empty()) {
        ie = table.column(spec.yerr_column);
        if (ie < 0) throw argument_error("plot: unknown column '" + spec.yerr_column + "'");
    }
    if (table.rows.empty()) throw argument_error("plot: no data rows");

    // Group rows into series, keeping first-appearance order.
    std::vector<detail::PlotSeries> series;
    std::map<std::string, std::size_t> series_index;
    for (const auto& row : table.rows) {
        const std::string key = (is >= 0) ? row[static_cast<std::size_t>(is)] : spec.y_column;
        auto it = series_index.find(key);
        if (it == series_index.end()) {
            it = series_index.emplace(key, series.size()).first;
            series.push_back(detail::PlotSeries{key, {}});
        }
        double x, y, e = 0.0;
        if (!parse_double(row[static_cast<std::size_t>(ix)], x) || !parse_double(row[static_cast<std::size_t>(iy)], y)) {
            throw format_error("plot: non-numeric cell in column '" + spec.x_column + "' or '" + spec.y_column + "'");
        }
        if (ie >= 0 && !parse_double(row[static_cast<std::size_t>(ie)], e)) {
            throw format_error("plot: non-numeric cell in column '" + spec.yerr_column + "'");
        }
        series[it->second].points.push_back(detail::PlotPoint{x, y, e});
    }
    for (auto& s : series) {
        std::stable_sort(s.points.begin(), s.points.end(),
                         [](const detail::PlotPoint& a, const detail::PlotPoint& b) { return a.x < b.x; });
    }

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (const auto& pt : s.points) {
            xmin = std::min(xmin, pt.x);
            xmax = std::max(xmax, pt.x);
            ymin = std::min(ymin, pt.y - pt.yerr);
            ymax = std::max(ymax, pt.y + pt.yerr);
        }
    }
    if (xmin == xmax) { xmin -= 0.5; xmax += 0.5; }
    if (ymin == ymax) { ymin -= 0.5; ymax += 0.5; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double mleft = 62, mright = 170, mtop = 42, mbottom = 48;
    const double pw = spec.width - mleft - mright;
    const double ph = spec.height - mtop - mbottom;
    auto sx = [&](double x) { return mleft + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return mtop + ph - (y - ymin) / (ymax - ymin) * ph; };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    const std::size_t ncolors = sizeof(palette) / sizeof(palette[0]);

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
        << "\" viewBox=\"0 0 " << spec.width << " " << spec.height << "\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    if (!spec.title.empty()) {
        svg << "<text x=\"" << mleft + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\" "
               "font-family=\"sans-serif\">" << detail::svg_escape(spec.title) << "</text>\n";
    }

    // Axes, ticks, grid.
    const double xstep = detail::nice_step((xmax - xmin) / 5.0);
    const double ystep = detail::nice_step((ymax - ymin) / 5.0);
    svg << "<g font-size=\"11\" font-family=\"sans-serif\" fill=\"#333\">\n";
    for (double t = std::ceil(xmin / xstep) * xstep; t <= xmax + 1e-9 * xstep; t += xstep) {
        svg << "<line x1=\"" << sx(t) << "\" y1=\"" << mtop << "\" x2=\"" << sx(t) << "\" y2=\"" << mtop + ph
            << "\" stroke=\"#eee\"/>\n";
        svg << "<text x=\"" << sx(t) << "\" y=\"" << mtop + ph + 16 << "\" text-anchor=\"middle\">"
            << format_double(t) << "</text>\n";
    }
    for (double t = std::ceil(ymin / ystep) * ystep; t <= ymax + 1e-9 * ystep; t += ystep) {
        svg << "<line x1=\"" << mleft << "\" y1=\"" << sy(t) << "\" x2=\"" << mleft + pw << "\" y2=\"" << sy(t)
            << "\" stroke=\"#eee\"/>\n";
        svg << "<text x=\"" << mleft - 6 << "\" y=\"" << sy(t) + 4 << "\" text-anchor=\"end\">" << format_double(t)
            << "</text>\n";
    }
    svg << "</g>\n";
    svg << "<rect x=\"" << mleft << "\" y=\"" << mtop << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#333\"/>\n";
    svg << "<text x=\"" << mleft + pw / 2 << "\" y=\"" << spec.height - 10
        << "\" text-anchor=\"middle\" font-size=\"12\" font-family=\"sans-serif\">" << detail::svg_escape(spec.x_column)
        << "</text>\n";
    svg << "<text x=\"16\" y=\"" << mtop + ph / 2 << "\" text-anchor=\"middle\" font-size=\"12\" "
           "font-family=\"sans-serif\" transform=\"rotate(-90 16 " << mtop + ph / 2 << ")\">"
        << detail::svg_escape(spec.y_column) << "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        const char* color = palette[si % ncolors];
        if (ie >= 0) {
            for (const auto& pt : s.points) {
                if (pt.yerr <= 0.0) continue;
                const double x = sx(pt.x);
                svg << "<line x1=\"" << x << "\" y1=\"" << sy(pt.y - pt.yerr) << "\" x2=\"" << x << "\" y2=\""
                    << sy(pt.y + pt.yerr) << "\" stroke=\"" << color << "\" stroke-width=\"1\" opacity=\"0.6\"/>\n";
                svg << "<line x1=\"" << x - 3 << "\" y1=\"" << sy(pt.y - pt.yerr) << "\" x2=\"" << x + 3
                    << "\" y2=\"" << sy(pt.y - pt.yerr) << "\" stroke=\"" << color << "\" opacity=\"0.6\"/>\n";
                svg << "<line x1=\"" << x - 3 << "\" y1=\"" << sy(pt.y + pt.yerr) << "\" x2=\"" << x + 3
                    << "\" y2=\"" << sy(pt.y + pt.yerr) << "\" stroke=\"" << color << "\" opacity=\"0.6\"/>\n";
            }
        }
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (const auto& pt : s.points) svg << sx(pt.x) << "," << sy(pt.y) << " ";
        svg << "\"/>\n";
        for (const auto& pt : s.points) {
            svg << "<circle cx=\"" << sx(pt.x) << "\" cy=\"" << sy(pt.y) << "\" r=\"2.4\" fill=\"" << color
                << "\"/>\n";
        }
    }

    // Legend.
    svg << "<g font-size=\"12\" font-family=\"sans-serif\">\n";
    for (std::size_t si = 0; si < series.size(); ++si) {
        const double ly = mtop + 14 + 18 * static_cast<double>(si);
        svg << "<line x1=\"" << mleft + pw + 12 << "\" y1=\"" << ly - 4 << "\" x2=\"" << mleft + pw + 34
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << palette[si % ncolors] << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << mleft + pw + 40 << "\" y=\"" << ly << "\">" << detail::svg_escape(series[si].label)
            << "</text>\n";
    }
    svg << "</g>\n</svg>\n";
    return svg.str();
}

inline void plot_csv_to_svg(const std::string& csv_path, const PlotSpec& spec, const std::string& out_path) {
    const CsvTable table = read_csv(csv_path);
    write_file(out_path, render_line_plot(table, spec));
}

} // namespace augbagg
