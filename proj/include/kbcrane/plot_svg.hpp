#pragma once

// Minimal static SVG line charts. Output depends only on the data passed in.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kbcrane {

struct PlotSeries {
    std::string label;
    std::vector<double> y;
    std::string color = "#1f77b4";
    bool dashed = false;
};

struct LineChart {
    std::string title;
    std::string x_label = "t [s]";
    std::string y_label;
    std::vector<double> x;
    std::vector<PlotSeries> series;
};

namespace detail {

inline std::string svg_escape(const std::string &s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

inline std::string fmt(double v, int precision = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
    return buf;
}

/// Round tick spacing covering [lo, hi] with about n intervals.
inline double nice_step(double lo, double hi, int n = 5) {
    const double raw = (hi - lo) / n;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    for (double f : {1.0, 2.0, 2.5, 5.0, 10.0})
        if (raw <= f * mag) return f * mag;
    return 10.0 * mag;
}

} // namespace detail

/// Renders a chart as an SVG document. Long series are decimated to at most
/// max_points vertices per polyline, keeping each bucket's extrema.
inline void render_svg(std::ostream &os, const LineChart &chart, std::size_t max_points = 2000) {
    constexpr double W = 800, H = 450, left = 80, right = 160, top = 40, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;
    const std::size_t n = chart.x.size();
    for (const auto &s : chart.series)
        if (s.y.size() != n) throw std::invalid_argument("render_svg: series length mismatch");

    double x0 = n ? chart.x.front() : 0.0, x1 = n ? chart.x.back() : 1.0;
    double y0 = std::numeric_limits<double>::infinity(), y1 = -y0;
    for (const auto &s : chart.series)
        for (double v : s.y)
            if (std::isfinite(v)) {
                y0 = std::min(y0, v);
                y1 = std::max(y1, v);
            }
    if (!std::isfinite(y0)) y0 = 0.0, y1 = 1.0;
    if (y1 - y0 < 1e-12) y0 -= 0.5, y1 += 0.5;
    const double pad = 0.05 * (y1 - y0);
    y0 -= pad;
    y1 += pad;
    if (x1 <= x0) x1 = x0 + 1.0;

    auto sx = [&](double x) { return left + (x - x0) / (x1 - x0) * pw; };
    auto sy = [&](double y) { return top + (y1 - y) / (y1 - y0) * ph; };

    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
       << "\" viewBox=\"0 0 " << W << ' ' << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << detail::svg_escape(chart.title) << "</text>\n";

    // grid and ticks
    const double xs = detail::nice_step(x0, x1), ys = detail::nice_step(y0, y1);
    for (double v = std::ceil(x0 / xs) * xs; v <= x1 + 1e-9 * xs; v += xs) {
        os << "<line x1=\"" << detail::fmt(sx(v)) << "\" y1=\"" << top << "\" x2=\""
           << detail::fmt(sx(v)) << "\" y2=\"" << top + ph << "\" stroke=\"#e0e0e0\"/>\n"
           << "<text x=\"" << detail::fmt(sx(v)) << "\" y=\"" << top + ph + 18
           << "\" text-anchor=\"middle\">" << detail::tick_label(v) << "</text>\n";
    }
    for (double v = std::ceil(y0 / ys) * ys; v <= y1 + 1e-9 * ys; v += ys) {
        os << "<line x1=\"" << left << "\" y1=\"" << detail::fmt(sy(v)) << "\" x2=\"" << left + pw
           << "\" y2=\"" << detail::fmt(sy(v)) << "\" stroke=\"#e0e0e0\"/>\n"
           << "<text x=\"" << left - 6 << "\" y=\"" << detail::fmt(sy(v) + 4)
           << "\" text-anchor=\"end\">" << detail::tick_label(v) << "</text>\n";
    }
    os << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">"
       << detail::svg_escape(chart.x_label) << "</text>\n";
    os << "<text transform=\"translate(20 " << top + ph / 2
       << ") rotate(-90)\" text-anchor=\"middle\">" << detail::svg_escape(chart.y_label)
       << "</text>\n";

    const std::size_t bucket = std::max<std::size_t>(1, (n + max_points / 2 - 1) / (max_points / 2));
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto &s = chart.series[k];
        os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\""
           << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
        bool first = true;
        auto vertex = [&](std::size_t i) {
            if (!std::isfinite(s.y[i])) return;
            os << (first ? "" : " ") << detail::fmt(sx(chart.x[i])) << ','
               << detail::fmt(sy(s.y[i]));
            first = false;
        };
        for (std::size_t b = 0; b < n; b += bucket) {
            const std::size_t e = std::min(n, b + bucket);
            std::size_t lo = b, hi = b;
            for (std::size_t i = b; i < e; ++i) {
                if (s.y[i] < s.y[lo]) lo = i;
                if (s.y[i] > s.y[hi]) hi = i;
            }
            vertex(std::min(lo, hi));
            if (lo != hi) vertex(std::max(lo, hi));
        }
        os << "\"/>\n";

        const double ly = top + 10 + 20 * static_cast<double>(k);
        os << "<line x1=\"" << left + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 35
           << "\" y2=\"" << ly << "\" stroke=\"" << s.color << "\" stroke-width=\"2\""
           << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << "/>\n"
           << "<text x=\"" << left + pw + 40 << "\" y=\"" << ly + 4 << "\">"
           << detail::svg_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
}

inline void write_svg(const std::string &path, const LineChart &chart) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
    render_svg(os, chart);
    if (!os) throw std::runtime_error("write to '" + path + "' failed");
}

} // namespace kbcrane
