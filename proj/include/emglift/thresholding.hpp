#pragma once

#include <vector>

namespace emglift {

enum class ThresholdKind { sure, bayes, median };
enum class ShrinkMode { soft, hard };

struct ThresholdScheme {
    ThresholdKind kind = ThresholdKind::sure;
    ShrinkMode shrink = ShrinkMode::soft;
    // For kind == median: use median(|g|) itself instead of the universal
    // threshold sigma * sqrt(2 ln n).
    bool median_direct = false;
    // Re-estimate sigma from each band instead of reusing the finest-band
    // estimate everywhere.
    bool per_level_sigma = false;
};

// Robust noise scale: median(|g|) / 0.6745.
double estimate_sigma(const std::vector<double>& detail);

// Stein-unbiased-risk threshold searched over {0} u {|g_i|}; ties pick the
// smaller threshold. sigma == 0 gives 0.
double threshold_sure(const std::vector<double>& detail, double sigma);

// sigma^2 / sigma_x with sigma_x^2 = max(mean(g^2) - sigma^2, 0); when the
// signal estimate vanishes the threshold clears the whole band.
double threshold_bayes(const std::vector<double>& detail, double sigma);

double threshold_median(const std::vector<double>& detail, double sigma, bool direct);

double threshold_for(const std::vector<double>& detail, double sigma,
                     const ThresholdScheme& scheme);

double shrink_value(double v, double t, ShrinkMode mode);
void shrink_inplace(std::vector<double>& detail, double t, ShrinkMode mode);

}  // namespace emglift
