#pragma once

#include <string>
#include <utility>
#include <vector>

namespace memstdp::plot {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> points;
    std::string color = "#1f77b4";
    bool markers = false; // draw point markers in addition to the line
};

// Minimal self-contained SVG line chart (axes, ticks, legend). Plots are a
// convenience view of the CSV data, never a data source.
std::string svg_line_chart(const std::string& title, const std::string& x_label,
                           const std::string& y_label, const std::vector<Series>& series,
                           int width = 880, int height = 560);

} // namespace memstdp::plot
