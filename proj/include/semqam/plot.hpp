#pragma once

// Deterministic SVG renderers for the report curves, plus small text-output
// helpers. No external tooling: plots are assembled as plain strings.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "semqam/common.hpp"

namespace semqam {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

namespace detail {

inline std::string fmt(double v, const char* format = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), format, v);
    return buf;
}

inline std::string fmt2(double v) { return fmt(v, "%.2f"); }

inline const char* palette(std::size_t i) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[i % 8];
}

}  // namespace detail

inline std::string svg_line_plot(const std::string& title, const std::string& xlabel,
                                 const std::string& ylabel, std::vector<Series> series,
                                 bool log_y = false) {
    if (series.empty()) throw DataError("svg_line_plot: no series");
    for (const auto& s : series)
        if (s.x.empty() || s.x.size() != s.y.size())
            throw DataError("svg_line_plot: empty or misaligned series " + s.name);

    bool clamped = false;
    if (log_y) {
        double min_pos = std::numeric_limits<double>::infinity();
        for (const auto& s : series)
            for (double v : s.y)
                if (v > 0.0) min_pos = std::min(min_pos, v);
        if (!std::isfinite(min_pos)) min_pos = 2e-12;
        for (auto& s : series)
            for (double& v : s.y)
                if (v <= 0.0) {
                    v = min_pos / 2.0;
                    clamped = true;
                }
        for (auto& s : series)
            for (double& v : s.y) v = std::log10(v);
    }

    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : series) {
        for (double v : s.x) {
            xmin = std::min(xmin, v);
            xmax = std::max(xmax, v);
        }
        for (double v : s.y) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;

    const double W = 800, H = 500, L = 80, R = 170, T = 50, B = 60;
    auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - ymin) / (ymax - ymin) * (H - T - B); };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + title + "</text>\n";
    svg += "<text x=\"" + detail::fmt2((L + W - R) / 2) + "\" y=\"490\" text-anchor=\"middle\" "
           "font-family=\"sans-serif\" font-size=\"13\">" + xlabel + "</text>\n";
    svg += "<text x=\"20\" y=\"" + detail::fmt2((T + H - B) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " + detail::fmt2((T + H - B) / 2) + ")\">" +
           (log_y ? "log10(" + ylabel + ")" : ylabel) + "</text>\n";

    for (int t = 0; t <= 5; ++t) {
        const double xv = xmin + (xmax - xmin) * t / 5.0;
        const double yv = ymin + (ymax - ymin) * t / 5.0;
        svg += "<line x1=\"" + detail::fmt2(px(xv)) + "\" y1=\"" + detail::fmt2(T) + "\" x2=\"" +
               detail::fmt2(px(xv)) + "\" y2=\"" + detail::fmt2(H - B) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<line x1=\"" + detail::fmt2(L) + "\" y1=\"" + detail::fmt2(py(yv)) + "\" x2=\"" +
               detail::fmt2(W - R) + "\" y2=\"" + detail::fmt2(py(yv)) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + detail::fmt2(px(xv)) + "\" y=\"" + detail::fmt2(H - B + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::fmt(xv, "%.4g") + "</text>\n";
        svg += "<text x=\"" + detail::fmt2(L - 8) + "\" y=\"" + detail::fmt2(py(yv) + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::fmt(yv, "%.4g") + "</text>\n";
    }
    svg += "<rect x=\"" + detail::fmt2(L) + "\" y=\"" + detail::fmt2(T) + "\" width=\"" +
           detail::fmt2(W - L - R) + "\" height=\"" + detail::fmt2(H - T - B) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const auto& s = series[si];
        std::string pts;
        for (std::size_t i = 0; i < s.x.size(); ++i)
            pts += detail::fmt2(px(s.x[i])) + "," + detail::fmt2(py(s.y[i])) + " ";
        svg += "<polyline points=\"" + pts + "\" fill=\"none\" stroke=\"" +
               detail::palette(si) + "\" stroke-width=\"2\"/>\n";
        for (std::size_t i = 0; i < s.x.size(); ++i)
            svg += "<circle cx=\"" + detail::fmt2(px(s.x[i])) + "\" cy=\"" +
                   detail::fmt2(py(s.y[i])) + "\" r=\"3\" fill=\"" + detail::palette(si) +
                   "\"/>\n";
        const double ly = T + 16.0 + 18.0 * double(si);
        svg += "<line x1=\"" + detail::fmt2(W - R + 10) + "\" y1=\"" + detail::fmt2(ly - 4) +
               "\" x2=\"" + detail::fmt2(W - R + 34) + "\" y2=\"" + detail::fmt2(ly - 4) +
               "\" stroke=\"" + detail::palette(si) + "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + detail::fmt2(W - R + 40) + "\" y=\"" + detail::fmt2(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + s.name + "</text>\n";
    }
    if (clamped)
        svg += "<text x=\"" + detail::fmt2(L + 6) + "\" y=\"" + detail::fmt2(T + 14) +
               "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#a00000\">"
               "nonpositive values clamped to half the smallest positive point</text>\n";
    svg += "</svg>\n";
    return svg;
}

struct BarGroup {
    std::string name;
    std::vector<double> values;  // one per category
};

inline std::string svg_bar_chart(const std::string& title, const std::string& ylabel,
                                 const std::vector<std::string>& categories,
                                 const std::vector<BarGroup>& groups) {
    if (categories.empty() || groups.empty()) throw DataError("svg_bar_chart: empty input");
    for (const auto& g : groups)
        if (g.values.size() != categories.size())
            throw DataError("svg_bar_chart: group " + g.name + " misaligned");

    double vmax = 0.0;
    for (const auto& g : groups)
        for (double v : g.values) vmax = std::max(vmax, v);
    if (vmax == 0.0) vmax = 1.0;

    const double W = 800, H = 500, L = 80, R = 170, T = 50, B = 60;
    const double plot_w = W - L - R;
    const double plot_h = H - T - B;
    const double cat_w = plot_w / double(categories.size());
    const double bar_w = cat_w * 0.7 / double(groups.size());

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"500\" "
           "viewBox=\"0 0 800 500\">\n";
    svg += "<rect width=\"800\" height=\"500\" fill=\"white\"/>\n";
    svg += "<text x=\"400\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + title + "</text>\n";
    svg += "<text x=\"20\" y=\"" + detail::fmt2((T + H - B) / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 20 " + detail::fmt2((T + H - B) / 2) + ")\">" + ylabel +
           "</text>\n";
    for (int t = 0; t <= 5; ++t) {
        const double yv = vmax * t / 5.0;
        const double y = H - B - plot_h * t / 5.0;
        svg += "<line x1=\"" + detail::fmt2(L) + "\" y1=\"" + detail::fmt2(y) + "\" x2=\"" +
               detail::fmt2(W - R) + "\" y2=\"" + detail::fmt2(y) +
               "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + detail::fmt2(L - 8) + "\" y=\"" + detail::fmt2(y + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" +
               detail::fmt(yv, "%.4g") + "</text>\n";
    }
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const double cx = L + cat_w * (double(c) + 0.5);
        svg += "<text x=\"" + detail::fmt2(cx) + "\" y=\"" + detail::fmt2(H - B + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               categories[c] + "</text>\n";
        for (std::size_t g = 0; g < groups.size(); ++g) {
            const double v = groups[g].values[c];
            const double h = plot_h * v / vmax;
            const double x = cx - 0.35 * cat_w + bar_w * double(g);
            svg += "<rect x=\"" + detail::fmt2(x) + "\" y=\"" + detail::fmt2(H - B - h) +
                   "\" width=\"" + detail::fmt2(bar_w * 0.9) + "\" height=\"" + detail::fmt2(h) +
                   "\" fill=\"" + detail::palette(g) + "\"/>\n";
        }
    }
    svg += "<rect x=\"" + detail::fmt2(L) + "\" y=\"" + detail::fmt2(T) + "\" width=\"" +
           detail::fmt2(plot_w) + "\" height=\"" + detail::fmt2(plot_h) +
           "\" fill=\"none\" stroke=\"#333333\"/>\n";
    for (std::size_t g = 0; g < groups.size(); ++g) {
        const double ly = T + 16.0 + 18.0 * double(g);
        svg += "<rect x=\"" + detail::fmt2(W - R + 10) + "\" y=\"" + detail::fmt2(ly - 10) +
               "\" width=\"12\" height=\"12\" fill=\"" + detail::palette(g) + "\"/>\n";
        svg += "<text x=\"" + detail::fmt2(W - R + 28) + "\" y=\"" + detail::fmt2(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + groups[g].name + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << content;
}

}  // namespace semqam
