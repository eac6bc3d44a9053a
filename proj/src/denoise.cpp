#include "emglift/denoise.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>

#include "emglift/features.hpp"

namespace emglift {

void shrink_decomposition(Decomposition& d, const ThresholdScheme& scheme,
                          std::optional<double> forced_threshold) {
    if (d.details.empty())
        return;
    const double sigma_ref = estimate_sigma(d.details.back().coeffs);
    for (auto& band : d.details) {
        double t;
        if (forced_threshold) {
            t = *forced_threshold;
        } else {
            const double sigma =
                scheme.per_level_sigma ? estimate_sigma(band.coeffs) : sigma_ref;
            t = threshold_for(band.coeffs, sigma, scheme);
        }
        shrink_inplace(band.coeffs, t, scheme.shrink);
    }
}

Signal denoise(const Signal& s, const DenoiseConfig& cfg) {
    if (auto v = validate_signal(s); !v)
        throw std::invalid_argument(v.issue);
    std::vector<Decomposition> decs = forward_multichannel(s, cfg.lifting);
    for (auto& d : decs)
        shrink_decomposition(d, cfg.scheme, cfg.forced_threshold);
    Signal out = inverse_multichannel(decs);
    out.sample_rate_hz = s.sample_rate_hz;
    out.channel_ids = s.channel_ids;
    out.subject_id = s.subject_id;
    out.trial_id = s.trial_id;
    out.class_label = s.class_label;
    return out;
}

ThresholdKind parse_tes(const std::string& name) {
    if (name == "sure")
        return ThresholdKind::sure;
    if (name == "bayes")
        return ThresholdKind::bayes;
    if (name == "median")
        return ThresholdKind::median;
    throw std::invalid_argument("unknown tes: " + name);
}

std::string tes_name(ThresholdKind kind) {
    switch (kind) {
        case ThresholdKind::sure:
            return "sure";
        case ThresholdKind::bayes:
            return "bayes";
        case ThresholdKind::median:
            return "median";
    }
    throw std::invalid_argument("unknown tes kind");
}

std::string GridReport::to_csv() const {
    std::string out = "tes,srl,feature,classifier,accuracy,precision,recall,fscore\n";
    char buf[128];
    for (const auto& c : cells) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f,%.6f", c.metrics.accuracy,
                      c.metrics.precision, c.metrics.recall, c.metrics.fscore);
        out += c.tes + "," + std::to_string(c.srl) + "," + c.feature + "," +
               c.classifier + "," + buf + "\n";
    }
    return out;
}

GridReport run_grid(const LabeledDataset& data, const GridOptions& opt) {
    if (auto v = validate_dataset(data, false); !v)
        throw std::invalid_argument(v.issue);
    if (auto v = validate_dataset(data, true); !v)
        throw std::runtime_error("cv-infeasible: " + v.issue);
    if (opt.tes.empty() || opt.srl.empty() || opt.features.empty() ||
        opt.classifiers.empty())
        throw std::invalid_argument("grid axes must be non-empty");

    std::set<std::string> trial_groups;
    for (const auto& rec : data.records)
        trial_groups.insert(rec.trial_id);
    if (trial_groups.size() < static_cast<std::size_t>(opt.cv_folds))
        throw std::runtime_error("cv-infeasible: " + std::to_string(trial_groups.size()) +
                                 " trial groups for " + std::to_string(opt.cv_folds) +
                                 " folds");

    std::vector<FeatureExtractor> extractors;
    for (const auto& f : opt.features)
        extractors.push_back(make_extractor(f, opt.deadzone));

    GridReport report;
    std::optional<CvPlan> plan;
    for (int srl : opt.srl) {
        LiftingConfig lifting = opt.lifting;
        lifting.levels = srl;
        std::vector<std::vector<Decomposition>> cache;  // [record][channel]
        cache.reserve(data.records.size());
        for (const auto& rec : data.records)
            cache.push_back(forward_multichannel(rec, lifting));

        for (const auto& tes : opt.tes) {
            ThresholdScheme scheme;
            scheme.kind = parse_tes(tes);
            scheme.shrink = opt.shrink;
            scheme.median_direct = opt.median_direct;
            scheme.per_level_sigma = opt.per_level_sigma;

            LabeledDataset denoised;
            denoised.records.reserve(data.records.size());
            for (std::size_t r = 0; r < data.records.size(); ++r) {
                std::vector<Decomposition> decs = cache[r];
                for (auto& d : decs)
                    shrink_decomposition(d, scheme);
                Signal out = inverse_multichannel(decs);
                const Signal& src = data.records[r];
                out.sample_rate_hz = src.sample_rate_hz;
                out.channel_ids = src.channel_ids;
                out.subject_id = src.subject_id;
                out.trial_id = src.trial_id;
                out.class_label = src.class_label;
                denoised.records.push_back(std::move(out));
            }

            for (std::size_t fi = 0; fi < extractors.size(); ++fi) {
                FeatureTable table = extract_features(denoised, opt.window, extractors[fi]);
                if (!plan)
                    plan = make_cv_plan(table, opt.cv_folds);
                for (const auto& clf : opt.classifiers) {
                    ClassifierSpec spec = opt.classifier_spec;
                    spec.kind = clf;
                    CvResult cv = cross_validate(spec, table, *plan);
                    GridCell cell;
                    cell.tes = tes;
                    cell.srl = srl;
                    cell.feature = opt.features[fi];
                    cell.classifier = clf;
                    cell.metrics = cv.report.metrics;
                    report.cells.push_back(std::move(cell));
                }
            }
        }
    }

    // Emit rows in (tes, srl, feature, classifier) nesting regardless of the
    // evaluation order used for caching.
    auto axis_rank = [](const std::vector<std::string>& axis, const std::string& v) {
        return std::find(axis.begin(), axis.end(), v) - axis.begin();
    };
    std::stable_sort(report.cells.begin(), report.cells.end(),
                     [&](const GridCell& a, const GridCell& b) {
                         const auto ta = axis_rank(opt.tes, a.tes);
                         const auto tb = axis_rank(opt.tes, b.tes);
                         if (ta != tb)
                             return ta < tb;
                         if (a.srl != b.srl) {
                             const auto sa = std::find(opt.srl.begin(), opt.srl.end(), a.srl);
                             const auto sb = std::find(opt.srl.begin(), opt.srl.end(), b.srl);
                             return sa < sb;
                         }
                         const auto fa = axis_rank(opt.features, a.feature);
                         const auto fb = axis_rank(opt.features, b.feature);
                         if (fa != fb)
                             return fa < fb;
                         return axis_rank(opt.classifiers, a.classifier) <
                                axis_rank(opt.classifiers, b.classifier);
                     });
    return report;
}

}  // namespace emglift
