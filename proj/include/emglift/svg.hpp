#pragma once

#include <string>
#include <vector>

namespace emglift {

// Minimal report graphics; the CSVs remain the source of truth.

std::string svg_heatmap(const std::vector<std::vector<double>>& values,
                        const std::vector<std::string>& row_labels,
                        const std::vector<std::string>& col_labels,
                        const std::string& title = "");

struct BoxStats {
    double lo = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, hi = 0.0;
};

BoxStats box_stats(std::vector<double> values);

std::string svg_boxplot(const std::vector<std::string>& names,
                        const std::vector<std::vector<double>>& series,
                        const std::string& title = "");

}  // namespace emglift
