#include "emglift/signal.hpp"

#include <cmath>
#include <set>
#include <stdexcept>

namespace emglift {

ValidationResult validate_signal(const Signal& s) {
    if (s.samples.empty())
        return {false, "signal has no channels"};
    if (!(s.sample_rate_hz > 0.0))
        return {false, "sample_rate_hz must be positive"};
    const std::size_t n = s.samples.front().size();
    for (const auto& ch : s.samples)
        if (ch.size() != n)
            return {false, "ragged channels: all channels must have the same length"};
    if (n == 0)
        return {false, "signal length must be >= 1"};
    if (!s.channel_ids.empty()) {
        if (s.channel_ids.size() != s.samples.size())
            return {false, "channel_ids count does not match channel count"};
        std::set<std::string> seen(s.channel_ids.begin(), s.channel_ids.end());
        if (seen.size() != s.channel_ids.size())
            return {false, "channel_ids must be unique"};
    }
    for (const auto& ch : s.samples)
        for (double v : ch)
            if (!std::isfinite(v))
                return {false, "non-finite sample (NaN or Inf)"};
    return {};
}

ValidationResult validate_grid(const Grid& g) {
    for (std::size_t i = 1; i < g.positions.size(); ++i)
        if (!(g.positions[i - 1] < g.positions[i]))
            return {false, "grid positions must be strictly increasing"};
    for (double p : g.positions)
        if (!std::isfinite(p))
            return {false, "non-finite grid position"};
    return {};
}

ValidationResult validate_dataset(const LabeledDataset& d, bool for_classification) {
    if (d.records.empty())
        return {false, "dataset has no records"};
    std::set<std::string> classes;
    for (const auto& r : d.records) {
        auto v = validate_signal(r);
        if (!v.ok)
            return v;
        if (r.trial_id.empty())
            return {false, "record missing trial_id"};
        classes.insert(r.class_label);
    }
    if (for_classification && classes.size() < 2)
        return {false, "classification needs >= 2 distinct class labels"};
    return {};
}

std::size_t window_samples(const WindowSpec& w, double sample_rate_hz) {
    if (!(w.window_ms > 0.0) || !(sample_rate_hz > 0.0))
        throw std::invalid_argument("window_ms and sample rate must be positive");
    return static_cast<std::size_t>(std::llround(w.window_ms * sample_rate_hz / 1000.0));
}

std::size_t step_samples(const WindowSpec& w, double sample_rate_hz) {
    double step_ms = w.overlap_is_step ? w.overlap_ms : (w.window_ms - w.overlap_ms);
    if (!w.overlap_is_step && !(w.overlap_ms < w.window_ms))
        throw std::invalid_argument("overlap_ms must be smaller than window_ms");
    if (w.overlap_ms < 0.0)
        throw std::invalid_argument("overlap_ms must be nonnegative");
    auto step = static_cast<std::size_t>(std::llround(step_ms * sample_rate_hz / 1000.0));
    if (step == 0)
        throw std::invalid_argument("window step rounds to zero samples");
    return step;
}

std::vector<Signal> segment(const Signal& s, const WindowSpec& w) {
    auto v = validate_signal(s);
    if (!v.ok)
        throw std::invalid_argument("segment: " + v.issue);
    const std::size_t win = window_samples(w, s.sample_rate_hz);
    const std::size_t step = step_samples(w, s.sample_rate_hz);
    if (win == 0)
        throw std::invalid_argument("window rounds to zero samples");
    if (win > s.length())
        throw std::invalid_argument("window longer than signal");

    std::vector<Signal> out;
    out.reserve((s.length() - win) / step + 1);
    for (std::size_t start = 0; start + win <= s.length(); start += step) {
        Signal piece;
        piece.sample_rate_hz = s.sample_rate_hz;
        piece.channel_ids = s.channel_ids;
        piece.subject_id = s.subject_id;
        piece.trial_id = s.trial_id;
        piece.class_label = s.class_label;
        piece.samples.reserve(s.channels());
        for (const auto& ch : s.samples)
            piece.samples.emplace_back(ch.begin() + start, ch.begin() + start + win);
        out.push_back(std::move(piece));
    }
    return out;
}

}  // namespace emglift
