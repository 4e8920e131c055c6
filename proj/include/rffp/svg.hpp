#pragma once
// Minimal static SVG plotter: line plots, bar charts, and heatmaps rendered
// as self-contained markup with axes, ticks, and a legend.

#include <string>
#include <vector>

namespace rffp {

struct SvgSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<SvgSeries>& series,
                          int width = 900, int height = 480);

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values, const std::string& y_label,
                          int width = 900, int height = 480);

// Values expected in [0, 1]; each cell is shaded and annotated.
std::string svg_heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<std::vector<double>>& values, int width = 640,
                        int height = 560);

}
