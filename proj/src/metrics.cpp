#include "emglift/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include "emglift/features.hpp"

namespace emglift {

std::size_t ConfusionMatrix::total() const {
    std::size_t n = 0;
    for (const auto& row : counts)
        for (std::size_t v : row)
            n += v;
    return n;
}

ConfusionMatrix confusion(const std::vector<std::string>& y_true,
                          const std::vector<std::string>& y_pred,
                          const std::vector<std::string>& class_order) {
    if (y_true.size() != y_pred.size())
        throw std::invalid_argument("label streams differ in length");
    if (class_order.empty())
        throw std::invalid_argument("class order is empty");
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < class_order.size(); ++i)
        if (!index.emplace(class_order[i], i).second)
            throw std::invalid_argument("duplicate class in class order");

    ConfusionMatrix cm;
    cm.classes = class_order;
    cm.counts.assign(class_order.size(),
                     std::vector<std::size_t>(class_order.size(), 0));
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        auto a = index.find(y_true[i]);
        auto p = index.find(y_pred[i]);
        if (a == index.end() || p == index.end())
            throw std::invalid_argument("label not in class order: " +
                                        (a == index.end() ? y_true[i] : y_pred[i]));
        ++cm.counts[a->second][p->second];
    }
    return cm;
}

ConfusionMatrix confusion(const std::vector<std::string>& y_true,
                          const std::vector<std::string>& y_pred) {
    std::set<std::string> seen(y_true.begin(), y_true.end());
    seen.insert(y_pred.begin(), y_pred.end());
    return confusion(y_true, y_pred,
                     std::vector<std::string>(seen.begin(), seen.end()));
}

MacroMetrics macro_metrics(const ConfusionMatrix& cm, double beta) {
    if (!(beta > 0.0))
        throw std::invalid_argument("beta must be positive");
    const std::size_t n_classes = cm.classes.size();
    if (n_classes == 0 || cm.counts.size() != n_classes)
        throw std::invalid_argument("empty confusion matrix");
    const double total = static_cast<double>(cm.total());
    if (total == 0.0)
        throw std::invalid_argument("confusion matrix has no counts");

    double acc = 0.0, prec = 0.0, rec = 0.0;
    for (std::size_t k = 0; k < n_classes; ++k) {
        double tp = static_cast<double>(cm.counts[k][k]);
        double fn = 0.0, fp = 0.0;
        for (std::size_t j = 0; j < n_classes; ++j) {
            if (j == k)
                continue;
            fn += static_cast<double>(cm.counts[k][j]);
            fp += static_cast<double>(cm.counts[j][k]);
        }
        const double tn = total - tp - fn - fp;
        acc += (tp + tn) / total;
        if (tp + fp > 0.0)
            prec += tp / (tp + fp);
        if (tp + fn > 0.0)
            rec += tp / (tp + fn);
    }
    MacroMetrics m;
    m.beta = beta;
    m.accuracy = acc / static_cast<double>(n_classes);
    m.precision = prec / static_cast<double>(n_classes);
    m.recall = rec / static_cast<double>(n_classes);
    const double b2 = beta * beta;
    const double denom = b2 * m.precision + m.recall;
    m.fscore = denom > 0.0 ? (1.0 + b2) * m.precision * m.recall / denom : 0.0;
    return m;
}

SnrResult snr_db(double signal_power, double noise_power) {
    if (!(signal_power >= 0.0))
        throw std::invalid_argument("signal power must be non-negative");
    if (!(noise_power > 0.0))
        throw std::invalid_argument("noise power must be positive");
    SnrResult r;
    r.p_signal = signal_power;
    r.p_noise = noise_power;
    r.snr_db = 10.0 * std::log10(signal_power / noise_power);
    return r;
}

SnrResult snr_from_signal(const Signal& s, const std::vector<bool>& activity_mask) {
    if (auto v = validate_signal(s); !v)
        throw std::invalid_argument(v.issue);
    if (activity_mask.size() != s.length())
        throw std::invalid_argument("activity mask length mismatch");
    double p_active = 0.0, p_rest = 0.0;
    std::size_t n_active = 0, n_rest = 0;
    for (std::size_t i = 0; i < activity_mask.size(); ++i) {
        for (std::size_t c = 0; c < s.channels(); ++c) {
            const double v = s.samples[c][i];
            if (activity_mask[i]) {
                p_active += v * v;
                ++n_active;
            } else {
                p_rest += v * v;
                ++n_rest;
            }
        }
    }
    if (n_active == 0)
        throw std::invalid_argument("activity mask marks no active samples");
    if (n_rest == 0)
        throw std::invalid_argument("activity mask leaves no rest samples");
    p_active /= static_cast<double>(n_active);
    p_rest /= static_cast<double>(n_rest);
    if (p_rest == 0.0)
        throw std::invalid_argument("rest segment has zero power");
    return snr_db(p_active, p_rest);
}

double mean_square(const Signal& s) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& ch : s.samples) {
        for (double v : ch)
            acc += v * v;
        n += ch.size();
    }
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

SnrResult snr_vs_reference(const Signal& clean, const Signal& x) {
    if (clean.channels() != x.channels() || clean.length() != x.length())
        throw std::invalid_argument("reference and signal shapes differ");
    Signal residual = x;
    for (std::size_t c = 0; c < x.channels(); ++c)
        for (std::size_t i = 0; i < x.length(); ++i)
            residual.samples[c][i] -= clean.samples[c][i];
    const double pn = mean_square(residual);
    if (pn == 0.0)
        throw std::invalid_argument("signal equals the reference; noise power is zero");
    return snr_db(mean_square(clean), pn);
}

EnergyMap rms_energy_map(const Signal& s, const WindowSpec& w) {
    EnergyMap map;
    map.channel_ids = s.channel_ids;
    const std::size_t step = step_samples(w, s.sample_rate_hz);
    std::size_t start = 0;
    for (const Signal& win : segment(s, w)) {
        map.window_starts.push_back(start);
        std::vector<double> row(win.channels());
        for (std::size_t c = 0; c < win.channels(); ++c)
            row[c] = rms(win.samples[c]);
        map.rms.push_back(std::move(row));
        start += step;
    }
    return map;
}

}  // namespace emglift
