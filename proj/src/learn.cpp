#include "emglift/learn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include "json.hpp"

namespace emglift {

namespace {

using nlohmann::json;

constexpr int kModelFormatVersion = 1;

void check_table(const FeatureTable& table) {
    if (table.rows.empty())
        throw std::invalid_argument("training table is empty");
    std::set<std::string> labels;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].size() != table.width())
            throw std::invalid_argument("ragged feature table");
        for (double v : table.rows[i])
            if (!std::isfinite(v))
                throw std::invalid_argument("non-finite feature value");
        if (table.labels[i].empty())
            throw std::invalid_argument("row missing class label");
        labels.insert(table.labels[i]);
    }
    if (labels.size() < 2)
        throw std::invalid_argument("single class: need at least 2 class labels");
}

std::vector<std::string> sorted_classes(const std::vector<std::string>& labels) {
    std::set<std::string> s(labels.begin(), labels.end());
    return {s.begin(), s.end()};
}

std::string majority_label(const std::map<std::string, std::size_t>& votes) {
    std::string best;
    std::size_t best_n = 0;
    for (const auto& [label, n] : votes) {
        if (n > best_n) {  // map order makes ties go to the smaller label
            best_n = n;
            best = label;
        }
    }
    return best;
}

// Cholesky in place (lower triangle); solves A x = b afterwards.
class CholeskySolver {
public:
    explicit CholeskySolver(std::vector<std::vector<double>> a) : l_(std::move(a)) {
        const std::size_t d = l_.size();
        for (std::size_t j = 0; j < d; ++j) {
            double diag = l_[j][j];
            for (std::size_t k = 0; k < j; ++k)
                diag -= l_[j][k] * l_[j][k];
            if (!(diag > 0.0))
                throw std::runtime_error(
                    "pooled covariance is not positive definite; increase ridge");
            l_[j][j] = std::sqrt(diag);
            for (std::size_t i = j + 1; i < d; ++i) {
                double v = l_[i][j];
                for (std::size_t k = 0; k < j; ++k)
                    v -= l_[i][k] * l_[j][k];
                l_[i][j] = v / l_[j][j];
            }
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        const std::size_t d = l_.size();
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t k = 0; k < i; ++k)
                b[i] -= l_[i][k] * b[k];
            b[i] /= l_[i][i];
        }
        for (std::size_t i = d; i-- > 0;) {
            for (std::size_t k = i + 1; k < d; ++k)
                b[i] -= l_[k][i] * b[k];
            b[i] /= l_[i][i];
        }
        return b;
    }

private:
    std::vector<std::vector<double>> l_;
};

class LdaModel final : public FittedModel {
public:
    LdaModel(const FeatureTable& table, double ridge) {
        if (ridge < 0.0)
            throw std::invalid_argument("ridge must be non-negative");
        classes_ = sorted_classes(table.labels);
        const std::size_t d = table.width();
        const std::size_t n = table.rows.size();
        const std::size_t c = classes_.size();
        width_ = d;

        std::map<std::string, std::size_t> class_idx;
        for (std::size_t k = 0; k < c; ++k)
            class_idx[classes_[k]] = k;

        std::vector<std::vector<double>> means(c, std::vector<double>(d, 0.0));
        std::vector<std::size_t> counts(c, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = class_idx[table.labels[i]];
            ++counts[k];
            for (std::size_t f = 0; f < d; ++f)
                means[k][f] += table.rows[i][f];
        }
        for (std::size_t k = 0; k < c; ++k)
            for (std::size_t f = 0; f < d; ++f)
                means[k][f] /= static_cast<double>(counts[k]);

        std::vector<std::vector<double>> cov(d, std::vector<double>(d, 0.0));
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t k = class_idx[table.labels[i]];
            for (std::size_t f = 0; f < d; ++f) {
                const double df = table.rows[i][f] - means[k][f];
                for (std::size_t g = f; g < d; ++g)
                    cov[f][g] += df * (table.rows[i][g] - means[k][g]);
            }
        }
        const double denom = n > c ? static_cast<double>(n - c) : 1.0;
        for (std::size_t f = 0; f < d; ++f) {
            for (std::size_t g = f; g < d; ++g) {
                cov[f][g] /= denom;
                cov[g][f] = cov[f][g];
            }
            cov[f][f] += ridge;
        }

        CholeskySolver chol(cov);
        weights_.resize(c);
        bias_.resize(c);
        for (std::size_t k = 0; k < c; ++k) {
            weights_[k] = chol.solve(means[k]);
            double quad = 0.0;
            for (std::size_t f = 0; f < d; ++f)
                quad += means[k][f] * weights_[k][f];
            bias_[k] = -0.5 * quad +
                       std::log(static_cast<double>(counts[k]) / static_cast<double>(n));
        }
    }

    LdaModel(std::vector<std::string> classes, std::vector<std::vector<double>> weights,
             std::vector<double> bias, std::size_t width)
        : classes_(std::move(classes)),
          weights_(std::move(weights)),
          bias_(std::move(bias)),
          width_(width) {}

    std::string kind() const override { return "lda"; }
    const std::vector<std::string>& classes() const override { return classes_; }
    std::size_t width() const override { return width_; }

    double score(const std::vector<double>& row, std::size_t k) const {
        double s = bias_[k];
        for (std::size_t f = 0; f < row.size(); ++f)
            s += weights_[k][f] * row[f];
        return s;
    }

    std::string predict_row(const std::vector<double>& row) const override {
        if (row.size() != width_)
            throw std::invalid_argument("row width mismatch");
        std::size_t best = 0;
        double best_score = score(row, 0);
        for (std::size_t k = 1; k < classes_.size(); ++k) {
            const double s = score(row, k);
            if (s > best_score) {
                best_score = s;
                best = k;
            }
        }
        return classes_[best];
    }

    std::string to_json() const override {
        json j;
        j["format_version"] = kModelFormatVersion;
        j["kind"] = "lda";
        j["classes"] = classes_;
        j["weights"] = weights_;
        j["bias"] = bias_;
        j["width"] = width_;
        return j.dump();
    }

private:
    std::vector<std::string> classes_;
    std::vector<std::vector<double>> weights_;
    std::vector<double> bias_;
    std::size_t width_ = 0;
};

class KnnModel final : public FittedModel {
public:
    KnnModel(const FeatureTable& table, int k) : k_(k) {
        if (k < 1)
            throw std::invalid_argument("knn k must be >= 1");
        classes_ = sorted_classes(table.labels);
        const std::size_t d = table.width();
        const std::size_t n = table.rows.size();
        width_ = d;
        mean_.assign(d, 0.0);
        scale_.assign(d, 1.0);
        for (const auto& row : table.rows)
            for (std::size_t f = 0; f < d; ++f)
                mean_[f] += row[f];
        for (std::size_t f = 0; f < d; ++f)
            mean_[f] /= static_cast<double>(n);
        std::vector<double> var(d, 0.0);
        for (const auto& row : table.rows)
            for (std::size_t f = 0; f < d; ++f) {
                const double df = row[f] - mean_[f];
                var[f] += df * df;
            }
        for (std::size_t f = 0; f < d; ++f) {
            const double sd = std::sqrt(var[f] / static_cast<double>(n));
            scale_[f] = sd > 0.0 ? sd : 1.0;
        }
        rows_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            rows_[i].resize(d);
            for (std::size_t f = 0; f < d; ++f)
                rows_[i][f] = (table.rows[i][f] - mean_[f]) / scale_[f];
        }
        labels_ = table.labels;
    }

    KnnModel(std::vector<std::string> classes, int k, std::vector<double> mean,
             std::vector<double> scale, std::vector<std::vector<double>> rows,
             std::vector<std::string> labels)
        : classes_(std::move(classes)),
          k_(k),
          mean_(std::move(mean)),
          scale_(std::move(scale)),
          rows_(std::move(rows)),
          labels_(std::move(labels)) {
        width_ = mean_.size();
    }

    std::string kind() const override { return "knn"; }
    const std::vector<std::string>& classes() const override { return classes_; }
    std::size_t width() const override { return width_; }

    std::string predict_row(const std::vector<double>& row) const override {
        if (row.size() != width_)
            throw std::invalid_argument("row width mismatch");
        std::vector<double> z(width_);
        for (std::size_t f = 0; f < width_; ++f)
            z[f] = (row[f] - mean_[f]) / scale_[f];
        std::vector<std::pair<double, std::size_t>> dist(rows_.size());
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            double d2 = 0.0;
            for (std::size_t f = 0; f < width_; ++f) {
                const double df = z[f] - rows_[i][f];
                d2 += df * df;
            }
            dist[i] = {d2, i};
        }
        const std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k_),
                                                     dist.size());
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(kk),
                          dist.end());  // pair ordering breaks distance ties by index
        std::map<std::string, std::size_t> votes;
        for (std::size_t i = 0; i < kk; ++i)
            ++votes[labels_[dist[i].second]];
        return majority_label(votes);
    }

    std::string to_json() const override {
        json j;
        j["format_version"] = kModelFormatVersion;
        j["kind"] = "knn";
        j["classes"] = classes_;
        j["k"] = k_;
        j["mean"] = mean_;
        j["scale"] = scale_;
        j["rows"] = rows_;
        j["labels"] = labels_;
        return j.dump();
    }

private:
    std::vector<std::string> classes_;
    int k_ = 5;
    std::vector<double> mean_, scale_;
    std::vector<std::vector<double>> rows_;
    std::vector<std::string> labels_;
    std::size_t width_ = 0;
};

struct TreeNode {
    int feature = -1;        // -1 marks a leaf
    double threshold = 0.0;  // go left when x[feature] <= threshold
    int left = -1;
    int right = -1;
    int label = -1;          // class index at a leaf
};

class RfModel final : public FittedModel {
public:
    RfModel(const FeatureTable& table, int n_trees, std::optional<int> max_depth,
            std::uint64_t seed) {
        if (n_trees < 1)
            throw std::invalid_argument("rf needs at least 1 tree");
        classes_ = sorted_classes(table.labels);
        width_ = table.width();
        std::map<std::string, int> class_idx;
        for (std::size_t k = 0; k < classes_.size(); ++k)
            class_idx[classes_[k]] = static_cast<int>(k);
        std::vector<int> y(table.rows.size());
        for (std::size_t i = 0; i < y.size(); ++i)
            y[i] = class_idx[table.labels[i]];

        const int depth_cap = max_depth.value_or(std::numeric_limits<int>::max());
        trees_.resize(static_cast<std::size_t>(n_trees));
        for (int t = 0; t < n_trees; ++t) {
            // Distinct, reproducible stream per tree.
            std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(t + 1));
            std::vector<std::size_t> sample(table.rows.size());
            for (auto& s : sample)
                s = static_cast<std::size_t>(rng() % table.rows.size());
            grow(trees_[static_cast<std::size_t>(t)], table.rows, y, sample, 0, depth_cap, rng);
        }
    }

    RfModel(std::vector<std::string> classes, std::size_t width,
            std::vector<std::vector<TreeNode>> trees)
        : classes_(std::move(classes)), trees_(std::move(trees)) {
        width_ = width;
    }

    std::string kind() const override { return "rf"; }
    const std::vector<std::string>& classes() const override { return classes_; }
    std::size_t width() const override { return width_; }

    std::string predict_row(const std::vector<double>& row) const override {
        if (row.size() != width_)
            throw std::invalid_argument("row width mismatch");
        std::map<std::string, std::size_t> votes;
        for (const auto& tree : trees_) {
            int node = 0;
            while (tree[static_cast<std::size_t>(node)].feature >= 0) {
                const auto& nd = tree[static_cast<std::size_t>(node)];
                node = row[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left
                                                                                 : nd.right;
            }
            ++votes[classes_[static_cast<std::size_t>(
                tree[static_cast<std::size_t>(node)].label)]];
        }
        return majority_label(votes);
    }

    std::string to_json() const override {
        json j;
        j["format_version"] = kModelFormatVersion;
        j["kind"] = "rf";
        j["classes"] = classes_;
        j["width"] = width_;
        json trees = json::array();
        for (const auto& tree : trees_) {
            json nodes = json::array();
            for (const auto& nd : tree)
                nodes.push_back({nd.feature, nd.threshold, nd.left, nd.right, nd.label});
            trees.push_back(std::move(nodes));
        }
        j["trees"] = std::move(trees);
        return j.dump();
    }

private:
    int leaf_label(const std::vector<int>& y, const std::vector<std::size_t>& rows) const {
        std::vector<std::size_t> counts(classes_.size(), 0);
        for (std::size_t r : rows)
            ++counts[static_cast<std::size_t>(y[r])];
        int best = 0;
        for (std::size_t k = 1; k < counts.size(); ++k)
            if (counts[k] > counts[static_cast<std::size_t>(best)])
                best = static_cast<int>(k);
        return best;
    }

    static double gini(const std::vector<std::size_t>& counts, double n) {
        double g = 1.0;
        for (std::size_t c : counts) {
            const double p = static_cast<double>(c) / n;
            g -= p * p;
        }
        return g;
    }

    int grow(std::vector<TreeNode>& tree, const std::vector<std::vector<double>>& x,
             const std::vector<int>& y, const std::vector<std::size_t>& rows, int depth,
             int depth_cap, std::mt19937_64& rng) {
        const int node_id = static_cast<int>(tree.size());
        tree.emplace_back();

        bool pure = true;
        for (std::size_t i = 1; i < rows.size(); ++i)
            if (y[rows[i]] != y[rows[0]]) {
                pure = false;
                break;
            }
        if (pure || rows.size() < 2 || depth >= depth_cap) {
            tree[static_cast<std::size_t>(node_id)].label = leaf_label(y, rows);
            return node_id;
        }

        // mtry = floor(sqrt(d)) candidate features, drawn without replacement.
        const std::size_t d = width_;
        std::size_t mtry = static_cast<std::size_t>(std::sqrt(static_cast<double>(d)));
        mtry = std::max<std::size_t>(1, std::min(mtry, d));
        std::vector<std::size_t> feats(d);
        for (std::size_t f = 0; f < d; ++f)
            feats[f] = f;
        for (std::size_t i = 0; i < mtry; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(rng() % (d - i));
            std::swap(feats[i], feats[j]);
        }

        const double n = static_cast<double>(rows.size());
        std::vector<std::size_t> total_counts(classes_.size(), 0);
        for (std::size_t r : rows)
            ++total_counts[static_cast<std::size_t>(y[r])];
        const double parent_gini = gini(total_counts, n);

        int best_feat = -1;
        double best_thr = 0.0, best_score = parent_gini;
        std::vector<std::pair<double, int>> vals(rows.size());
        for (std::size_t i = 0; i < mtry; ++i) {
            const std::size_t f = feats[i];
            for (std::size_t r = 0; r < rows.size(); ++r)
                vals[r] = {x[rows[r]][f], y[rows[r]]};
            std::sort(vals.begin(), vals.end());
            std::vector<std::size_t> left_counts(classes_.size(), 0);
            std::size_t n_left = 0;
            for (std::size_t r = 0; r + 1 < vals.size(); ++r) {
                ++left_counts[static_cast<std::size_t>(vals[r].second)];
                ++n_left;
                if (vals[r].first == vals[r + 1].first)
                    continue;
                std::vector<std::size_t> right_counts(classes_.size());
                for (std::size_t k = 0; k < classes_.size(); ++k)
                    right_counts[k] = total_counts[k] - left_counts[k];
                const double nl = static_cast<double>(n_left);
                const double nr = n - nl;
                const double score =
                    (nl * gini(left_counts, nl) + nr * gini(right_counts, nr)) / n;
                if (score < best_score - 1e-15) {
                    best_score = score;
                    best_feat = static_cast<int>(f);
                    best_thr = 0.5 * (vals[r].first + vals[r + 1].first);
                }
            }
        }
        if (best_feat < 0) {
            tree[static_cast<std::size_t>(node_id)].label = leaf_label(y, rows);
            return node_id;
        }

        std::vector<std::size_t> left_rows, right_rows;
        for (std::size_t r : rows) {
            if (x[r][static_cast<std::size_t>(best_feat)] <= best_thr)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }
        if (left_rows.empty() || right_rows.empty()) {
            tree[static_cast<std::size_t>(node_id)].label = leaf_label(y, rows);
            return node_id;
        }
        tree[static_cast<std::size_t>(node_id)].feature = best_feat;
        tree[static_cast<std::size_t>(node_id)].threshold = best_thr;
        const int left_id = grow(tree, x, y, left_rows, depth + 1, depth_cap, rng);
        tree[static_cast<std::size_t>(node_id)].left = left_id;
        const int right_id = grow(tree, x, y, right_rows, depth + 1, depth_cap, rng);
        tree[static_cast<std::size_t>(node_id)].right = right_id;
        return node_id;
    }

    std::vector<std::string> classes_;
    std::vector<std::vector<TreeNode>> trees_;
    std::size_t width_ = 0;
};

}  // namespace

std::vector<std::string> FittedModel::predict(
    const std::vector<std::vector<double>>& rows) const {
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& row : rows)
        out.push_back(predict_row(row));
    return out;
}

std::unique_ptr<FittedModel> fit(const ClassifierSpec& spec, const FeatureTable& table) {
    check_table(table);
    if (spec.kind == "lda")
        return std::make_unique<LdaModel>(table, spec.lda_ridge);
    if (spec.kind == "knn")
        return std::make_unique<KnnModel>(table, spec.knn_k);
    if (spec.kind == "rf")
        return std::make_unique<RfModel>(table, spec.rf_trees, spec.rf_max_depth,
                                         spec.rng_seed);
    throw std::invalid_argument("unknown classifier kind: " + spec.kind);
}

std::unique_ptr<FittedModel> model_from_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.contains("format_version") || j["format_version"].get<int>() != kModelFormatVersion)
        throw std::invalid_argument("unsupported model format version");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "lda") {
        return std::make_unique<LdaModel>(
            j.at("classes").get<std::vector<std::string>>(),
            j.at("weights").get<std::vector<std::vector<double>>>(),
            j.at("bias").get<std::vector<double>>(), j.at("width").get<std::size_t>());
    }
    if (kind == "knn") {
        return std::make_unique<KnnModel>(
            j.at("classes").get<std::vector<std::string>>(), j.at("k").get<int>(),
            j.at("mean").get<std::vector<double>>(),
            j.at("scale").get<std::vector<double>>(),
            j.at("rows").get<std::vector<std::vector<double>>>(),
            j.at("labels").get<std::vector<std::string>>());
    }
    if (kind == "rf") {
        std::vector<std::vector<TreeNode>> trees;
        for (const auto& jt : j.at("trees")) {
            std::vector<TreeNode> tree;
            for (const auto& jn : jt) {
                TreeNode nd;
                nd.feature = jn.at(0).get<int>();
                nd.threshold = jn.at(1).get<double>();
                nd.left = jn.at(2).get<int>();
                nd.right = jn.at(3).get<int>();
                nd.label = jn.at(4).get<int>();
                tree.push_back(nd);
            }
            trees.push_back(std::move(tree));
        }
        return std::make_unique<RfModel>(j.at("classes").get<std::vector<std::string>>(),
                                         j.at("width").get<std::size_t>(), std::move(trees));
    }
    throw std::invalid_argument("unknown classifier kind: " + kind);
}

CvPlan make_cv_plan(const FeatureTable& table, int k) {
    if (k < 2)
        throw std::invalid_argument("cv needs at least 2 folds");
    // Majority class per trial group, groups iterated in sorted order.
    std::map<std::string, std::map<std::string, std::size_t>> group_votes;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.trial_ids[i].empty())
            throw std::invalid_argument("row missing trial id");
        ++group_votes[table.trial_ids[i]][table.labels[i]];
    }
    if (group_votes.size() < static_cast<std::size_t>(k))
        throw std::runtime_error("cv-infeasible: " + std::to_string(group_votes.size()) +
                                 " trial groups for " + std::to_string(k) + " folds");

    std::map<std::string, std::vector<std::string>> by_class;
    for (const auto& [group, votes] : group_votes)
        by_class[majority_label(votes)].push_back(group);

    CvPlan plan;
    plan.k = k;
    std::map<std::string, int> fold_of;
    int counter = 0;
    for (const auto& [label, groups] : by_class)
        for (const auto& g : groups)
            fold_of[g] = counter++ % k;
    for (const auto& [g, f] : fold_of) {
        plan.groups.push_back(g);
        plan.fold_of_group.push_back(f);
    }
    return plan;
}

CvResult cross_validate(const ClassifierSpec& spec, const FeatureTable& table,
                        const CvPlan& plan) {
    check_table(table);
    std::map<std::string, int> fold_of;
    for (std::size_t i = 0; i < plan.groups.size(); ++i)
        fold_of[plan.groups[i]] = plan.fold_of_group[i];

    CvResult result;
    result.plan = plan;
    result.predicted.assign(table.rows.size(), "");
    result.fold_of_row.assign(table.rows.size(), -1);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        auto it = fold_of.find(table.trial_ids[i]);
        if (it == fold_of.end())
            throw std::invalid_argument("trial group missing from cv plan: " +
                                        table.trial_ids[i]);
        result.fold_of_row[i] = it->second;
    }

    for (int f = 0; f < plan.k; ++f) {
        FeatureTable train;
        train.column_names = table.column_names;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < table.rows.size(); ++i) {
            if (result.fold_of_row[i] == f) {
                test_rows.push_back(i);
            } else {
                train.rows.push_back(table.rows[i]);
                train.labels.push_back(table.labels[i]);
                train.trial_ids.push_back(table.trial_ids[i]);
                train.subject_ids.push_back(table.subject_ids[i]);
            }
        }
        if (test_rows.empty())
            continue;
        auto model = fit(spec, train);
        for (std::size_t i : test_rows)
            result.predicted[i] = model->predict_row(table.rows[i]);
    }

    result.report.cm = confusion(table.labels, result.predicted,
                                 sorted_classes(table.labels));
    result.report.metrics = macro_metrics(result.report.cm);
    return result;
}

CvResult cross_validate(const ClassifierSpec& spec, const FeatureTable& table) {
    return cross_validate(spec, table, make_cv_plan(table));
}

}  // namespace emglift
