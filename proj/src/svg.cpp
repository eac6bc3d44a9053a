#include "emglift/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace emglift {

namespace {

std::string num(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
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

std::string header(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
           "\" height=\"" + num(height) + "\" font-family=\"monospace\" font-size=\"11\">\n";
}

}  // namespace

std::string svg_heatmap(const std::vector<std::vector<double>>& values,
                        const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::string& title) {
    if (values.empty() || values.front().empty())
        throw std::invalid_argument("heatmap needs a non-empty grid");
    const std::size_t rows = values.size();
    const std::size_t cols = values.front().size();
    for (const auto& row : values)
        if (row.size() != cols)
            throw std::invalid_argument("heatmap grid is ragged");

    double lo = values[0][0], hi = values[0][0];
    for (const auto& row : values)
        for (double v : row) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    const double span = hi > lo ? hi - lo : 1.0;

    const double cell = 26.0, left = 90.0, top = 40.0;
    const double width = left + cell * static_cast<double>(cols) + 20.0;
    const double height = top + cell * static_cast<double>(rows) + 40.0;
    std::string out = header(width, height);
    if (!title.empty())
        out += "<text x=\"" + num(left) + "\" y=\"20\">" + escape(title) + "</text>\n";
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const double t = (values[r][c] - lo) / span;
            const int red = static_cast<int>(std::lround(255.0 * t));
            const int blue = 255 - red;
            char color[16];
            std::snprintf(color, sizeof(color), "#%02x30%02x", red, blue);
            out += "<rect x=\"" + num(left + cell * static_cast<double>(c)) + "\" y=\"" +
                   num(top + cell * static_cast<double>(r)) + "\" width=\"" + num(cell) +
                   "\" height=\"" + num(cell) + "\" fill=\"" + color + "\"><title>" +
                   num(values[r][c]) + "</title></rect>\n";
        }
        if (r < row_labels.size())
            out += "<text x=\"4\" y=\"" +
                   num(top + cell * static_cast<double>(r) + cell * 0.65) + "\">" +
                   escape(row_labels[r]) + "</text>\n";
    }
    for (std::size_t c = 0; c < cols && c < col_labels.size(); ++c)
        out += "<text x=\"" + num(left + cell * static_cast<double>(c) + 4.0) + "\" y=\"" +
               num(top - 6.0) + "\">" + escape(col_labels[c]) + "</text>\n";
    out += "</svg>\n";
    return out;
}

BoxStats box_stats(std::vector<double> values) {
    if (values.empty())
        throw std::invalid_argument("box stats of empty series");
    std::sort(values.begin(), values.end());
    auto quantile = [&](double p) {
        const double pos = p * static_cast<double>(values.size() - 1);
        const std::size_t i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        if (i + 1 < values.size())
            return values[i] * (1.0 - frac) + values[i + 1] * frac;
        return values[i];
    };
    BoxStats s;
    s.lo = values.front();
    s.q1 = quantile(0.25);
    s.median = quantile(0.5);
    s.q3 = quantile(0.75);
    s.hi = values.back();
    return s;
}

std::string svg_boxplot(const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& series,
                        const std::string& title) {
    if (series.empty() || names.size() != series.size())
        throw std::invalid_argument("boxplot needs matching names and series");
    std::vector<BoxStats> stats;
    stats.reserve(series.size());
    double lo = 0.0, hi = 1.0;
    for (std::size_t i = 0; i < series.size(); ++i) {
        stats.push_back(box_stats(series[i]));
        if (i == 0) {
            lo = stats[0].lo;
            hi = stats[0].hi;
        }
        lo = std::min(lo, stats[i].lo);
        hi = std::max(hi, stats[i].hi);
    }
    const double span = hi > lo ? hi - lo : 1.0;

    const double plot_h = 220.0, top = 40.0, left = 50.0, slot = 70.0, box_w = 34.0;
    const double width = left + slot * static_cast<double>(series.size()) + 20.0;
    const double height = top + plot_h + 50.0;
    auto ypos = [&](double v) { return top + plot_h * (1.0 - (v - lo) / span); };

    std::string out = header(width, height);
    if (!title.empty())
        out += "<text x=\"" + num(left) + "\" y=\"20\">" + escape(title) + "</text>\n";
    for (std::size_t i = 0; i < stats.size(); ++i) {
        const double cx = left + slot * static_cast<double>(i) + slot / 2.0;
        const BoxStats& s = stats[i];
        out += "<line x1=\"" + num(cx) + "\" y1=\"" + num(ypos(s.lo)) + "\" x2=\"" + num(cx) +
               "\" y2=\"" + num(ypos(s.hi)) + "\" stroke=\"#222\"/>\n";
        out += "<rect x=\"" + num(cx - box_w / 2.0) + "\" y=\"" + num(ypos(s.q3)) +
               "\" width=\"" + num(box_w) + "\" height=\"" +
               num(ypos(s.q1) - ypos(s.q3)) + "\" stroke=\"#222\" fill=\"#9cf\"/>\n";
        out += "<line x1=\"" + num(cx - box_w / 2.0) + "\" y1=\"" + num(ypos(s.median)) +
               "\" x2=\"" + num(cx + box_w / 2.0) + "\" y2=\"" + num(ypos(s.median)) +
               "\" stroke=\"#222\"/>\n";
        out += "<text x=\"" + num(cx - box_w / 2.0) + "\" y=\"" + num(top + plot_h + 18.0) +
               "\">" + escape(names[i]) + "</text>\n";
    }
    out += "</svg>\n";
    return out;
}

}  // namespace emglift
