#include "emglift/thresholding.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emglift {

namespace {

std::vector<double> sorted_magnitudes(const std::vector<double>& detail) {
    std::vector<double> a(detail.size());
    for (std::size_t i = 0; i < detail.size(); ++i)
        a[i] = std::fabs(detail[i]);
    std::sort(a.begin(), a.end());
    return a;
}

void check_sigma(double sigma) {
    if (!(sigma >= 0.0))
        throw std::invalid_argument("sigma must be non-negative");
}

void check_nonempty(const std::vector<double>& detail) {
    if (detail.empty())
        throw std::invalid_argument("no data: empty detail sequence");
}

}  // namespace

double estimate_sigma(const std::vector<double>& detail) {
    check_nonempty(detail);
    std::vector<double> a = sorted_magnitudes(detail);
    const std::size_t n = a.size();
    const double med = n % 2 == 1 ? a[n / 2] : 0.5 * (a[n / 2 - 1] + a[n / 2]);
    return med / 0.6745;
}

double threshold_sure(const std::vector<double>& detail, double sigma) {
    check_nonempty(detail);
    check_sigma(sigma);
    if (sigma == 0.0)
        return 0.0;
    const std::vector<double> a = sorted_magnitudes(detail);
    const std::size_t n = a.size();
    std::vector<double> prefix_sq(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        prefix_sq[i + 1] = prefix_sq[i] + a[i] * a[i];

    const double s2 = sigma * sigma;
    double best_t = 0.0;
    // risk(0): every coefficient is clipped to 0, only exact zeros count as
    // "below threshold".
    std::size_t zeros = 0;
    while (zeros < n && a[zeros] == 0.0)
        ++zeros;
    double best_risk = static_cast<double>(n) * s2 - 2.0 * s2 * static_cast<double>(zeros);

    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && a[j] == a[i])
            ++j;  // duplicates share one candidate
        const double t = a[i];
        const double risk = static_cast<double>(n) * s2 -
                            2.0 * s2 * static_cast<double>(j) + prefix_sq[j] +
                            static_cast<double>(n - j) * t * t;
        if (risk < best_risk) {
            best_risk = risk;
            best_t = t;
        }
        i = j;
    }
    return best_t;
}

double threshold_bayes(const std::vector<double>& detail, double sigma) {
    check_nonempty(detail);
    check_sigma(sigma);
    double mean_sq = 0.0, max_abs = 0.0;
    for (double v : detail) {
        mean_sq += v * v;
        max_abs = std::max(max_abs, std::fabs(v));
    }
    mean_sq /= static_cast<double>(detail.size());
    const double var_x = std::max(mean_sq - sigma * sigma, 0.0);
    if (var_x == 0.0)
        return max_abs;
    return sigma * sigma / std::sqrt(var_x);
}

double threshold_median(const std::vector<double>& detail, double sigma, bool direct) {
    check_nonempty(detail);
    check_sigma(sigma);
    if (direct)
        return estimate_sigma(detail) * 0.6745;  // back to the raw median
    const double n = static_cast<double>(detail.size());
    return sigma * std::sqrt(2.0 * std::log(n));
}

double threshold_for(const std::vector<double>& detail, double sigma,
                     const ThresholdScheme& scheme) {
    switch (scheme.kind) {
        case ThresholdKind::sure:
            return threshold_sure(detail, sigma);
        case ThresholdKind::bayes:
            return threshold_bayes(detail, sigma);
        case ThresholdKind::median:
            return threshold_median(detail, sigma, scheme.median_direct);
    }
    throw std::invalid_argument("unknown threshold kind");
}

double shrink_value(double v, double t, ShrinkMode mode) {
    if (!(t >= 0.0))
        throw std::invalid_argument("threshold must be non-negative");
    const double mag = std::fabs(v);
    if (mode == ShrinkMode::hard)
        return mag <= t ? 0.0 : v;
    const double shrunk = mag - t;
    if (shrunk <= 0.0)
        return 0.0;
    return v < 0.0 ? -shrunk : shrunk;
}

void shrink_inplace(std::vector<double>& detail, double t, ShrinkMode mode) {
    for (double& v : detail)
        v = shrink_value(v, t, mode);
}

}  // namespace emglift
