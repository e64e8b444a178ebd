#include "memstdp/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace memstdp::plot {

namespace {

std::string escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void include(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finalize() {
        if (!(lo <= hi)) { // no data
            lo = 0.0;
            hi = 1.0;
        }
        if (lo == hi) {
            lo -= 1.0;
            hi += 1.0;
        }
    }
};

} // namespace

std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series,
                           int width, int height) {
    const double ml = 72, mr = 24, mt = 44, mb = 56;
    const double pw = width - ml - mr;  // plot width
    const double ph = height - mt - mb; // plot height

    Range xr, yr;
    for (const Series& s : series)
        for (const auto& [x, y] : s.points) {
            xr.include(x);
            yr.include(y);
        }
    xr.finalize();
    yr.finalize();
    // small vertical breathing room
    const double pad = 0.05 * (yr.hi - yr.lo);
    yr.lo -= pad;
    yr.hi += pad;

    const auto px = [&](double x) { return ml + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    const auto py = [&](double y) { return mt + ph - (y - yr.lo) / (yr.hi - yr.lo) * ph; };

    std::string svg;
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + num(width / 2.0) +
           "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">" +
           escape(title) + "</text>\n";

    // gridlines + ticks (5 intervals on each axis)
    const int ticks = 5;
    for (int i = 0; i <= ticks; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / ticks;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / ticks;
        const double gx = px(fx);
        const double gy = py(fy);
        svg += "<line x1=\"" + num(gx) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(gx) +
               "\" y2=\"" + num(mt + ph) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(gy) + "\" x2=\"" + num(ml + pw) +
               "\" y2=\"" + num(gy) + "\" stroke=\"#e0e0e0\" stroke-width=\"1\"/>\n";
        svg += "<text x=\"" + num(gx) + "\" y=\"" + num(mt + ph + 18) +
               "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" +
               num(fx) + "</text>\n";
        svg += "<text x=\"" + num(ml - 8) + "\" y=\"" + num(gy + 4) +
               "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" + num(fy) +
               "</text>\n";
    }

    // axes
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt + ph) + "\" x2=\"" + num(ml + pw) +
           "\" y2=\"" + num(mt + ph) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg += "<line x1=\"" + num(ml) + "\" y1=\"" + num(mt) + "\" x2=\"" + num(ml) + "\" y2=\"" +
           num(mt + ph) + "\" stroke=\"black\" stroke-width=\"1.5\"/>\n";
    svg += "<text x=\"" + num(ml + pw / 2) + "\" y=\"" + num(height - 14.0) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" +
           escape(x_label) + "</text>\n";
    svg += "<text x=\"18\" y=\"" + num(mt + ph / 2) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
           "transform=\"rotate(-90 18 " +
           num(mt + ph / 2) + ")\">" + escape(y_label) + "</text>\n";

    // data
    for (const Series& s : series) {
        if (s.points.empty())
            continue;
        std::string pts;
        for (const auto& [x, y] : s.points)
            pts += num(px(x)) + "," + num(py(y)) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + s.color +
               "\" stroke-width=\"1.8\" points=\"" + pts + "\"/>\n";
        if (s.markers)
            for (const auto& [x, y] : s.points)
                svg += "<circle cx=\"" + num(px(x)) + "\" cy=\"" + num(py(y)) +
                       "\" r=\"2.6\" fill=\"" + s.color + "\"/>\n";
    }

    // legend, top-right inside the plot area
    double ly = mt + 14;
    for (const Series& s : series) {
        if (s.label.empty())
            continue;
        const double lx = ml + pw - 160;
        svg += "<line x1=\"" + num(lx) + "\" y1=\"" + num(ly - 4) + "\" x2=\"" + num(lx + 22) +
               "\" y2=\"" + num(ly - 4) + "\" stroke=\"" + s.color +
               "\" stroke-width=\"2\"/>\n";
        svg += "<text x=\"" + num(lx + 28) + "\" y=\"" + num(ly) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape(s.label) +
               "</text>\n";
        ly += 18;
    }

    svg += "</svg>\n";
    return svg;
}

} // namespace memstdp::plot
