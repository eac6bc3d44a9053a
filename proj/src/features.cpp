#include "emglift/features.hpp"

#include <cmath>
#include <map>
#include <stdexcept>

namespace emglift {

namespace {

constexpr double kTiny = 1e-12;

double safe_log(double v) { return std::log(std::max(v, kTiny)); }

struct RegisteredFeature {
    std::size_t width;
    FeatureFn fn;
};

std::map<std::string, RegisteredFeature>& registry() {
    static std::map<std::string, RegisteredFeature> r;
    return r;
}

}  // namespace

double rms(const std::vector<double>& x) {
    if (x.empty())
        throw std::invalid_argument("rms of empty window");
    double acc = 0.0;
    for (double v : x)
        acc += v * v;
    return std::sqrt(acc / static_cast<double>(x.size()));
}

std::vector<double> burg_ar(const std::vector<double>& x, int order) {
    if (order < 1)
        throw std::invalid_argument("ar order must be >= 1");
    const std::size_t n = x.size();
    if (n <= static_cast<std::size_t>(order))
        throw std::invalid_argument("window too short for ar order");

    // c holds the monic-polynomial coefficients (x[t] + sum c_k x[t-k] = e).
    std::vector<double> c;
    std::vector<double> f = x, b = x;
    for (int m = 1; m <= order; ++m) {
        double num = 0.0, den = 0.0;
        for (std::size_t t = static_cast<std::size_t>(m); t < n; ++t) {
            num += f[t] * b[t - 1];
            den += f[t] * f[t] + b[t - 1] * b[t - 1];
        }
        const double k = den > 0.0 ? -2.0 * num / den : 0.0;

        std::vector<double> next(c.size() + 1);
        for (std::size_t i = 0; i < c.size(); ++i)
            next[i] = c[i] + k * c[c.size() - 1 - i];
        next[c.size()] = k;
        c = std::move(next);

        // Update prediction errors in place, consuming old values backward.
        for (std::size_t t = n - 1; t >= static_cast<std::size_t>(m); --t) {
            const double ft = f[t];
            f[t] = ft + k * b[t - 1];
            b[t] = b[t - 1] + k * ft;
        }
    }
    for (double& v : c)
        v = -v;
    return c;
}

std::vector<double> td4(const std::vector<double>& x, double deadzone) {
    const std::size_t n = x.size();
    if (n < 3)
        throw std::invalid_argument("window too short for td4");
    if (deadzone < 0.0)
        throw std::invalid_argument("deadzone must be non-negative");

    double mav = 0.0, wl = 0.0;
    double zc = 0.0, ssc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        mav += std::fabs(x[i]);
    mav /= static_cast<double>(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double step = x[i + 1] - x[i];
        wl += std::fabs(step);
        if (x[i] * x[i + 1] < 0.0 && std::fabs(step) >= deadzone)
            zc += 1.0;
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dl = x[i] - x[i - 1];
        const double dr = x[i] - x[i + 1];
        if (dl * dr > 0.0 && std::max(std::fabs(dl), std::fabs(dr)) >= deadzone)
            ssc += 1.0;
    }
    return {mav, zc, wl, ssc};
}

std::vector<double> tdpsd(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n < 3)
        throw std::invalid_argument("window too short for tdpsd");

    double s0 = 0.0, s2 = 0.0, s4 = 0.0;
    double l1_d1 = 0.0, l1_d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        s0 += x[i] * x[i];
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = x[i + 1] - x[i];
        s2 += d * d;
        l1_d1 += std::fabs(d);
    }
    for (std::size_t i = 0; i + 2 < n; ++i) {
        const double d = x[i + 2] - 2.0 * x[i + 1] + x[i];
        s4 += d * d;
        l1_d2 += std::fabs(d);
    }
    const double m0 = std::sqrt(s0);
    const double m2 = std::sqrt(s2);
    const double m4 = std::sqrt(s4);
    const double a2 = std::max(m0 - m2, kTiny);
    const double a4 = std::max(m0 - m4, kTiny);

    std::vector<double> out(6);
    out[0] = safe_log(m0);
    out[1] = std::log(a2);
    out[2] = std::log(a4);
    out[3] = safe_log(m0 / std::sqrt(a2 * a4));
    out[4] = safe_log(m2 / std::sqrt(std::max(m0 * m4, kTiny)));
    out[5] = safe_log(l1_d1 / std::max(l1_d2, kTiny));
    return out;
}

void register_feature(const std::string& id, std::size_t width, FeatureFn fn) {
    if (id.empty() || width == 0 || !fn)
        throw std::invalid_argument("bad feature registration");
    registry()[id] = RegisteredFeature{width, std::move(fn)};
}

bool has_feature(const std::string& id) { return registry().count(id) > 0; }

std::vector<std::string> registered_features() {
    std::vector<std::string> out;
    for (const auto& [id, _] : registry())
        out.push_back(id);
    return out;
}

FeatureExtractor make_extractor(const std::string& name, double deadzone) {
    FeatureExtractor ex;
    ex.name = name;
    if (name == "feat1") {
        ex.width = 1;
        ex.fn = [](const std::vector<double>& x) { return std::vector<double>{rms(x)}; };
    } else if (name == "feat2") {
        ex.width = 5;
        ex.fn = [](const std::vector<double>& x) { return burg_ar(x, 5); };
    } else if (name == "feat3") {
        ex.width = 4;
        ex.fn = [deadzone](const std::vector<double>& x) { return td4(x, deadzone); };
    } else if (name == "feat4") {
        ex.width = 6;
        ex.fn = [](const std::vector<double>& x) { return tdpsd(x); };
    } else if (name.rfind("plugin:", 0) == 0) {
        const std::string id = name.substr(7);
        auto it = registry().find(id);
        if (it == registry().end())
            throw std::invalid_argument("unknown feature plugin: " + id);
        ex.width = it->second.width;
        ex.fn = it->second.fn;
    } else {
        throw std::invalid_argument("unknown feature set: " + name);
    }
    return ex;
}

FeatureTable extract_features(const std::vector<Signal>& windows,
                              const FeatureExtractor& ex) {
    if (!ex.fn || ex.width == 0)
        throw std::invalid_argument("feature extractor is not configured");
    FeatureTable table;
    for (const auto& w : windows) {
        if (auto v = validate_signal(w); !v)
            throw std::invalid_argument(v.issue);
        if (table.column_names.empty()) {
            for (std::size_t c = 0; c < w.channels(); ++c) {
                const std::string base = c < w.channel_ids.size()
                                             ? w.channel_ids[c]
                                             : "ch" + std::to_string(c);
                if (ex.width == 1) {
                    table.column_names.push_back(base + "_" + ex.name);
                } else {
                    for (std::size_t k = 1; k <= ex.width; ++k)
                        table.column_names.push_back(base + "_" + ex.name + "_" +
                                                     std::to_string(k));
                }
            }
        }
        std::vector<double> row;
        row.reserve(w.channels() * ex.width);
        for (std::size_t c = 0; c < w.channels(); ++c) {
            std::vector<double> vals = ex.fn(w.samples[c]);
            if (vals.size() != ex.width)
                throw std::runtime_error("feature width mismatch from " + ex.name);
            row.insert(row.end(), vals.begin(), vals.end());
        }
        if (row.size() != table.column_names.size())
            throw std::invalid_argument("windows disagree on channel count");
        table.rows.push_back(std::move(row));
        table.labels.push_back(w.class_label);
        table.trial_ids.push_back(w.trial_id);
        table.subject_ids.push_back(w.subject_id);
    }
    return table;
}

FeatureTable extract_features(const LabeledDataset& data, const WindowSpec& win,
                              const FeatureExtractor& ex) {
    FeatureTable table;
    for (const auto& rec : data.records) {
        FeatureTable part = extract_features(segment(rec, win), ex);
        if (table.column_names.empty()) {
            table.column_names = part.column_names;
        } else if (table.column_names != part.column_names) {
            throw std::invalid_argument("records disagree on channel layout");
        }
        table.rows.insert(table.rows.end(), part.rows.begin(), part.rows.end());
        table.labels.insert(table.labels.end(), part.labels.begin(), part.labels.end());
        table.trial_ids.insert(table.trial_ids.end(), part.trial_ids.begin(),
                               part.trial_ids.end());
        table.subject_ids.insert(table.subject_ids.end(), part.subject_ids.begin(),
                                 part.subject_ids.end());
    }
    return table;
}

}  // namespace emglift
