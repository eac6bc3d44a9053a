#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "emglift/features.hpp"
#include "emglift/lifting.hpp"
#include "emglift/metrics.hpp"
#include "emglift/signal.hpp"

namespace emglift {

// Single-file signal container: one line of JSON (format_version,
// sample_rate_hz, channels, samples_per_channel, dtype "f32le", subject_id,
// trial_id, class_label), a newline, then the payload as little-endian 32-bit
// floats interleaved frame by frame. Channel ids are not stored; readers get
// ch0..chN-1.
void write_bundle(const Signal& s, const std::string& path);
Signal read_bundle(const std::string& path);

struct CsvTags {
    std::string subject_id;
    std::string trial_id;
    std::string class_label;
};

// Rectangular numeric CSV, one column per channel. A non-numeric first row is
// treated as a header and supplies channel ids.
Signal import_csv(const std::string& path, double sample_rate_hz,
                  const CsvTags& tags = {});

struct DatasetRecordInfo {
    Signal signal;
    std::optional<Signal> clean;  // noise-free reference when known
    std::optional<std::pair<std::size_t, std::size_t>> active_range;  // [start, end)
    std::optional<double> input_snr_db;

    std::vector<bool> activity_mask() const;
};

struct Dataset {
    std::vector<DatasetRecordInfo> records;

    LabeledDataset labeled() const;
    LabeledDataset clean_labeled() const;  // throws when a reference is missing
};

// Directory layout: index.json plus one bundle per record (and optionally its
// clean reference).
void save_dataset(const Dataset& d, const std::string& dir);
Dataset load_dataset(const std::string& dir);

struct SynthSpec {
    double fs = 8000.0;
    double duration_s = 1.024;
    std::size_t channels = 4;
    int n_classes = 4;
    int trials_per_class = 6;
    double band_low_hz = 20.0;
    double band_high_hz = 450.0;
    // Absolute noise scale; ignored for burst records when input_snr_db is
    // set, which calibrates the noise so the realized snr matches exactly.
    double noise_sigma = 0.0;
    std::optional<double> input_snr_db;
    int rest_trials = 0;  // extra noise-only records labeled "rest"
    std::uint64_t rng_seed = 0;
};

// Band-limited Gaussian carrier under a raised-cosine envelope spanning the
// record interior, spread over channels by per-class Gaussian weight
// profiles, plus broadband sensor noise (equal-power white and
// first-difference components). Fixed seed gives bit-identical output.
Dataset synth_dataset(const SynthSpec& spec);

// Reported in place of +inf when a record has no noise at all.
inline constexpr double kSnrCapDb = 300.0;

UpdateMode parse_update_mode(const std::string& name);
std::string update_mode_name(UpdateMode mode);

std::string decomposition_json(const Decomposition& d);
std::string decompositions_json(const std::vector<std::string>& channel_ids,
                                const std::vector<Decomposition>& decs);

std::string feature_table_csv(const FeatureTable& table);
std::string confusion_csv(const ConfusionMatrix& cm);
std::string eval_report_json(const EvalReport& report);
std::string energy_map_csv(const EnergyMap& map);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace emglift
