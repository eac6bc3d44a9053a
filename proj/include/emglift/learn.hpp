#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "emglift/features.hpp"
#include "emglift/metrics.hpp"

namespace emglift {

struct ClassifierSpec {
    std::string kind = "lda";  // lda | knn | rf
    int knn_k = 5;
    int rf_trees = 100;
    std::optional<int> rf_max_depth;
    double lda_ridge = 1e-6;
    std::uint64_t rng_seed = 42;
};

class FittedModel {
public:
    virtual ~FittedModel() = default;
    virtual std::string kind() const = 0;
    virtual const std::vector<std::string>& classes() const = 0;
    virtual std::size_t width() const = 0;
    virtual std::string predict_row(const std::vector<double>& row) const = 0;
    virtual std::string to_json() const = 0;

    std::vector<std::string> predict(const std::vector<std::vector<double>>& rows) const;
};

// Models are immutable once fitted and only ever predict labels they saw.
std::unique_ptr<FittedModel> fit(const ClassifierSpec& spec, const FeatureTable& table);
std::unique_ptr<FittedModel> model_from_json(const std::string& text);

struct CvPlan {
    int k = 5;
    std::vector<std::string> groups;  // distinct trial ids
    std::vector<int> fold_of_group;   // parallel to groups
};

// Groups are stratified by their class label and dealt round-robin across
// folds; fewer groups than folds is refused as cv-infeasible.
CvPlan make_cv_plan(const FeatureTable& table, int k = 5);

struct CvResult {
    CvPlan plan;
    std::vector<std::string> predicted;  // one per table row
    std::vector<int> fold_of_row;
    EvalReport report;
};

CvResult cross_validate(const ClassifierSpec& spec, const FeatureTable& table,
                        const CvPlan& plan);
CvResult cross_validate(const ClassifierSpec& spec, const FeatureTable& table);

}  // namespace emglift
