#pragma once

#include <optional>
#include <string>
#include <vector>

#include "emglift/learn.hpp"
#include "emglift/lifting.hpp"
#include "emglift/metrics.hpp"
#include "emglift/signal.hpp"
#include "emglift/thresholding.hpp"

namespace emglift {

struct DenoiseConfig {
    LiftingConfig lifting;
    ThresholdScheme scheme;
    // Overrides the estimated threshold on every band when set (0 gives the
    // pure round-trip path).
    std::optional<double> forced_threshold;
};

// Threshold and shrink every detail band in place. Sigma comes from the
// finest band unless the scheme asks for per-band estimates.
void shrink_decomposition(Decomposition& d, const ThresholdScheme& scheme,
                          std::optional<double> forced_threshold = std::nullopt);

// Per channel: forward, shrink details, inverse. Shape and tags survive.
Signal denoise(const Signal& s, const DenoiseConfig& cfg);

ThresholdKind parse_tes(const std::string& name);
std::string tes_name(ThresholdKind kind);

struct GridCell {
    std::string tes;
    int srl = 1;
    std::string feature;
    std::string classifier;
    MacroMetrics metrics;
};

struct GridReport {
    std::vector<GridCell> cells;
    std::string to_csv() const;
};

struct GridOptions {
    std::vector<std::string> tes = {"sure", "bayes", "median"};
    std::vector<int> srl = {1, 2, 3, 4, 5};
    std::vector<std::string> features = {"feat1", "feat2", "feat3", "feat4"};
    std::vector<std::string> classifiers = {"lda", "knn", "rf"};
    LiftingConfig lifting;        // levels replaced by each srl value
    ShrinkMode shrink = ShrinkMode::soft;
    bool median_direct = false;
    bool per_level_sigma = false;
    WindowSpec window;
    ClassifierSpec classifier_spec;  // kind replaced per cell
    double deadzone = 0.0;
    int cv_folds = 5;
};

// Full sweep: one row per (tes, srl, feature, classifier). Decompositions are
// computed once per (record, srl) and shared across the tes variants.
GridReport run_grid(const LabeledDataset& data, const GridOptions& opt);

}  // namespace emglift
