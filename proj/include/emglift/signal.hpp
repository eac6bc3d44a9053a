#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace emglift {

// Multichannel time series. Amplitude is dimensionless; sample positions are
// implicit indices at sample_rate_hz. Provenance tags are opaque strings and
// may be empty.
struct Signal {
    std::vector<std::vector<double>> samples;  // [channel][sample]
    double sample_rate_hz = 0.0;
    std::vector<std::string> channel_ids;
    std::string subject_id;
    std::string trial_id;
    std::string class_label;

    std::size_t channels() const { return samples.size(); }
    std::size_t length() const { return samples.empty() ? 0 : samples.front().size(); }
};

// Sample locations in index units, strictly increasing.
struct Grid {
    std::vector<double> positions;

    std::size_t size() const { return positions.size(); }
    bool empty() const { return positions.empty(); }
    double operator[](std::size_t i) const { return positions[i]; }
};

struct WindowSpec {
    double window_ms = 250.0;
    double overlap_ms = 100.0;
    // Default: overlap_ms counts samples shared by consecutive windows, so the
    // step is window - overlap. The alternate reading treats overlap_ms as the
    // step itself.
    bool overlap_is_step = false;
};

// Labels ride on each record's Signal tags.
struct LabeledDataset {
    std::vector<Signal> records;
};

struct ValidationResult {
    bool ok = true;
    std::string issue;  // first violated invariant when not ok

    explicit operator bool() const { return ok; }
};

ValidationResult validate_signal(const Signal& s);
ValidationResult validate_grid(const Grid& g);
// for_classification additionally requires >= 2 distinct class labels.
ValidationResult validate_dataset(const LabeledDataset& d, bool for_classification);

std::size_t window_samples(const WindowSpec& w, double sample_rate_hz);
std::size_t step_samples(const WindowSpec& w, double sample_rate_hz);

// Fixed-length windows advancing by the step; the trailing partial window is
// dropped. Tags, fs and channel ids are copied onto every window. Throws
// std::invalid_argument when the window does not fit the signal.
std::vector<Signal> segment(const Signal& s, const WindowSpec& w);

}  // namespace emglift
