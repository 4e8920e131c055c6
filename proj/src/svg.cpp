#include "rffp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "rffp/errors.hpp"

namespace rffp {

namespace {

const char* kPalette[] = {"#1b6ca8", "#d1495b", "#2e933c", "#ef8a17", "#7768ae", "#548687"};
constexpr int kPaletteSize = 6;

std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
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

struct Frame {
    int width, height;
    double left, right, top, bottom;  // plot-area margins
    double x0, x1, y0, y1;            // data ranges

    double px(double x) const {
        const double span = x1 > x0 ? x1 - x0 : 1.0;
        return left + (x - x0) / span * (width - left - right);
    }
    double py(double y) const {
        const double span = y1 > y0 ? y1 - y0 : 1.0;
        return height - bottom - (y - y0) / span * (height - top - bottom);
    }
};

std::string header(int width, int height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
           "\" height=\"" + std::to_string(height) + "\" viewBox=\"0 0 " +
           std::to_string(width) + " " + std::to_string(height) +
           "\" font-family=\"sans-serif\" font-size=\"13\">\n"
           "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

std::string axes(const Frame& f, const std::string& title, const std::string& x_label,
                 const std::string& y_label) {
    std::string s;
    s += "<text x=\"" + fmt(f.width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" +
         escape(title) + "</text>\n";
    const double ax = f.px(f.x0), ay = f.py(f.y0);
    s += "<line x1=\"" + fmt(ax) + "\" y1=\"" + fmt(f.py(f.y1)) + "\" x2=\"" + fmt(ax) +
         "\" y2=\"" + fmt(ay) + "\" stroke=\"black\"/>\n";
    s += "<line x1=\"" + fmt(ax) + "\" y1=\"" + fmt(ay) + "\" x2=\"" + fmt(f.px(f.x1)) +
         "\" y2=\"" + fmt(ay) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double xv = f.x0 + (f.x1 - f.x0) * t / 5.0;
        const double yv = f.y0 + (f.y1 - f.y0) * t / 5.0;
        s += "<line x1=\"" + fmt(f.px(xv)) + "\" y1=\"" + fmt(ay) + "\" x2=\"" + fmt(f.px(xv)) +
             "\" y2=\"" + fmt(ay + 5) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fmt(f.px(xv)) + "\" y=\"" + fmt(ay + 20) +
             "\" text-anchor=\"middle\">" + fmt(xv) + "</text>\n";
        s += "<line x1=\"" + fmt(ax - 5) + "\" y1=\"" + fmt(f.py(yv)) + "\" x2=\"" + fmt(ax) +
             "\" y2=\"" + fmt(f.py(yv)) + "\" stroke=\"black\"/>\n";
        s += "<text x=\"" + fmt(ax - 8) + "\" y=\"" + fmt(f.py(yv) + 4) +
             "\" text-anchor=\"end\">" + fmt(yv) + "</text>\n";
    }
    s += "<text x=\"" + fmt((f.px(f.x0) + f.px(f.x1)) / 2.0) + "\" y=\"" +
         fmt(f.height - 8.0) + "\" text-anchor=\"middle\">" + escape(x_label) + "</text>\n";
    s += "<text x=\"14\" y=\"" + fmt((f.py(f.y0) + f.py(f.y1)) / 2.0) +
         "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
         fmt((f.py(f.y0) + f.py(f.y1)) / 2.0) + ")\">" + escape(y_label) + "</text>\n";
    return s;
}

}  // namespace

std::string svg_line_plot(const std::string& title, const std::string& x_label,
                          const std::string& y_label, const std::vector<SvgSeries>& series,
                          int width, int height) {
    if (series.empty()) throw DomainError("line plot needs at least one series");
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty())
            throw DomainError("series '" + s.label + "' is empty or misaligned");
        for (double v : s.x) {
            x0 = std::min(x0, v);
            x1 = std::max(x1, v);
        }
        for (double v : s.y) {
            y0 = std::min(y0, v);
            y1 = std::max(y1, v);
        }
    }
    if (y0 == y1) {
        y0 -= 1.0;
        y1 += 1.0;
    }
    Frame f{width, height, 70.0, 30.0, 40.0, 50.0, x0, x1, y0, y1};

    std::string svg = header(width, height);
    svg += axes(f, title, x_label, y_label);
    for (std::size_t i = 0; i < series.size(); ++i) {
        const char* color = kPalette[i % kPaletteSize];
        std::string pts;
        for (std::size_t p = 0; p < series[i].x.size(); ++p)
            pts += fmt(f.px(series[i].x[p])) + "," + fmt(f.py(series[i].y[p])) + " ";
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
        if (!series[i].label.empty()) {
            const double ly = f.top + 16.0 * static_cast<double>(i);
            svg += "<rect x=\"" + fmt(width - f.right - 150) + "\" y=\"" + fmt(ly) +
                   "\" width=\"12\" height=\"12\" fill=\"" + color + "\"/>\n";
            svg += "<text x=\"" + fmt(width - f.right - 132) + "\" y=\"" + fmt(ly + 11) + "\">" +
                   escape(series[i].label) + "</text>\n";
        }
    }
    return svg + "</svg>\n";
}

std::string svg_bar_chart(const std::string& title, const std::vector<std::string>& labels,
                          const std::vector<double>& values, const std::string& y_label,
                          int width, int height) {
    if (labels.size() != values.size() || values.empty())
        throw DomainError("bar chart needs aligned, nonempty labels and values");
    double y1 = *std::max_element(values.begin(), values.end());
    if (y1 <= 0.0) y1 = 1.0;
    Frame f{width, height, 70.0, 30.0, 40.0, 60.0, 0.0, 1.0, 0.0, y1};

    std::string svg = header(width, height);
    svg += "<text x=\"" + fmt(width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" +
           escape(title) + "</text>\n";
    const double ax = f.px(0.0), ay = f.py(0.0);
    svg += "<line x1=\"" + fmt(ax) + "\" y1=\"" + fmt(f.py(y1)) + "\" x2=\"" + fmt(ax) +
           "\" y2=\"" + fmt(ay) + "\" stroke=\"black\"/>\n";
    svg += "<line x1=\"" + fmt(ax) + "\" y1=\"" + fmt(ay) + "\" x2=\"" + fmt(f.px(1.0)) +
           "\" y2=\"" + fmt(ay) + "\" stroke=\"black\"/>\n";
    for (int t = 0; t <= 5; ++t) {
        const double yv = y1 * t / 5.0;
        svg += "<text x=\"" + fmt(ax - 8) + "\" y=\"" + fmt(f.py(yv) + 4) +
               "\" text-anchor=\"end\">" + fmt(yv) + "</text>\n";
        svg += "<line x1=\"" + fmt(ax - 5) + "\" y1=\"" + fmt(f.py(yv)) + "\" x2=\"" + fmt(ax) +
               "\" y2=\"" + fmt(f.py(yv)) + "\" stroke=\"black\"/>\n";
    }
    const double n = static_cast<double>(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double cx0 = f.px((i + 0.15) / n), cx1 = f.px((i + 0.85) / n);
        const double top = f.py(values[i]);
        svg += "<rect x=\"" + fmt(cx0) + "\" y=\"" + fmt(top) + "\" width=\"" + fmt(cx1 - cx0) +
               "\" height=\"" + fmt(ay - top) + "\" fill=\"" +
               kPalette[i % kPaletteSize] + "\"/>\n";
        svg += "<text x=\"" + fmt((cx0 + cx1) / 2.0) + "\" y=\"" + fmt(top - 5) +
               "\" text-anchor=\"middle\">" + fmt(values[i]) + "</text>\n";
        svg += "<text x=\"" + fmt((cx0 + cx1) / 2.0) + "\" y=\"" + fmt(ay + 18) +
               "\" text-anchor=\"middle\">" + escape(labels[i]) + "</text>\n";
    }
    svg += "<text x=\"14\" y=\"" + fmt((f.py(0.0) + f.py(y1)) / 2.0) +
           "\" text-anchor=\"middle\" transform=\"rotate(-90 14 " +
           fmt((f.py(0.0) + f.py(y1)) / 2.0) + ")\">" + escape(y_label) + "</text>\n";
    return svg + "</svg>\n";
}

std::string svg_heatmap(const std::string& title, const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::vector<std::vector<double>>& values, int width, int height) {
    if (values.empty() || values.size() != row_labels.size())
        throw DomainError("heatmap needs one row label per row");
    for (const auto& row : values)
        if (row.size() != col_labels.size())
            throw DomainError("heatmap needs one column label per column");

    const double left = 110.0, top = 70.0, right = 30.0, bottom = 30.0;
    const double cw = (width - left - right) / static_cast<double>(col_labels.size());
    const double ch = (height - top - bottom) / static_cast<double>(row_labels.size());

    std::string svg = header(width, height);
    svg += "<text x=\"" + fmt(width / 2.0) + "\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">" +
           escape(title) + "</text>\n";
    for (std::size_t c = 0; c < col_labels.size(); ++c)
        svg += "<text x=\"" + fmt(left + (c + 0.5) * cw) + "\" y=\"" + fmt(top - 10) +
               "\" text-anchor=\"middle\">" + escape(col_labels[c]) + "</text>\n";
    for (std::size_t r = 0; r < row_labels.size(); ++r) {
        svg += "<text x=\"" + fmt(left - 10) + "\" y=\"" + fmt(top + (r + 0.5) * ch + 4) +
               "\" text-anchor=\"end\">" + escape(row_labels[r]) + "</text>\n";
        for (std::size_t c = 0; c < values[r].size(); ++c) {
            const double v = std::clamp(values[r][c], 0.0, 1.0);
            // Light red at 0 to deep blue at 1.
            const int red = static_cast<int>(std::lround(235 - 180 * v));
            const int green = static_cast<int>(std::lround(90 + 60 * v));
            const int blue = static_cast<int>(std::lround(90 + 120 * v));
            char color[10];
            std::snprintf(color, sizeof color, "#%02x%02x%02x", red, green, blue);
            svg += "<rect x=\"" + fmt(left + c * cw) + "\" y=\"" + fmt(top + r * ch) +
                   "\" width=\"" + fmt(cw) + "\" height=\"" + fmt(ch) + "\" fill=\"" + color +
                   "\" stroke=\"white\"/>\n";
            svg += "<text x=\"" + fmt(left + (c + 0.5) * cw) + "\" y=\"" +
                   fmt(top + (r + 0.5) * ch + 4) +
                   "\" text-anchor=\"middle\" fill=\"white\">" + fmt(v) + "</text>\n";
        }
    }
    return svg + "</svg>\n";
}

}
