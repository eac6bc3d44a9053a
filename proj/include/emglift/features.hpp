#pragma once

#include <functional>
#include <string>
#include <vector>

#include "emglift/signal.hpp"

namespace emglift {

double rms(const std::vector<double>& x);

// Burg lattice fit; returns a_1..a_order with the predictor convention
// x[t] ~ sum_k a[k] * x[t-k].
std::vector<double> burg_ar(const std::vector<double>& x, int order);

// Mean absolute value, zero crossings, waveform length, slope-sign changes.
// The deadzone suppresses crossings/slope flips whose amplitude step stays
// below it.
std::vector<double> td4(const std::vector<double>& x, double deadzone = 0.0);

// Six log-scaled descriptors built from the l2 norms of the window and its
// first two differences plus an l1 difference ratio; degenerate arguments are
// clamped at 1e-12 so the logs stay finite.
std::vector<double> tdpsd(const std::vector<double>& x);

using FeatureFn = std::function<std::vector<double>(const std::vector<double>&)>;

struct FeatureExtractor {
    std::string name;
    std::size_t width = 0;  // values per channel
    FeatureFn fn;
};

// Named sets: feat1 (rms), feat2 (ar5), feat3 (td4), feat4 (tdpsd), and
// "plugin:<id>" for anything registered at runtime.
FeatureExtractor make_extractor(const std::string& name, double deadzone = 0.0);

void register_feature(const std::string& id, std::size_t width, FeatureFn fn);
bool has_feature(const std::string& id);
std::vector<std::string> registered_features();

struct FeatureTable {
    std::vector<std::string> column_names;
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    std::vector<std::string> trial_ids;
    std::vector<std::string> subject_ids;

    std::size_t size() const { return rows.size(); }
    std::size_t width() const { return column_names.size(); }
};

FeatureTable extract_features(const std::vector<Signal>& windows,
                              const FeatureExtractor& ex);
FeatureTable extract_features(const LabeledDataset& data, const WindowSpec& win,
                              const FeatureExtractor& ex);

}  // namespace emglift
