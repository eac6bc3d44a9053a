#include "emglift/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include "json.hpp"

namespace emglift {

namespace {

using nlohmann::json;

constexpr int kBundleFormatVersion = 1;
constexpr int kDatasetFormatVersion = 1;
constexpr double kPi = 3.14159265358979323846;

std::string format_double(double v, const char* fmt = "%.9g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), fmt, v);
    return buf;
}

void append_f32le(std::string& out, float f) {
    const auto bits = std::bit_cast<std::uint32_t>(f);
    out.push_back(static_cast<char>(bits & 0xFF));
    out.push_back(static_cast<char>((bits >> 8) & 0xFF));
    out.push_back(static_cast<char>((bits >> 16) & 0xFF));
    out.push_back(static_cast<char>((bits >> 24) & 0xFF));
}

float read_f32le(const unsigned char* p) {
    const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                               (static_cast<std::uint32_t>(p[1]) << 8) |
                               (static_cast<std::uint32_t>(p[2]) << 16) |
                               (static_cast<std::uint32_t>(p[3]) << 24);
    return std::bit_cast<float>(bits);
}

std::vector<std::string> default_channel_ids(std::size_t n) {
    std::vector<std::string> ids(n);
    for (std::size_t c = 0; c < n; ++c)
        ids[c] = "ch" + std::to_string(c);
    return ids;
}

// Deterministic draws independent of the standard library's distribution
// implementations.
struct Rng {
    std::mt19937_64 eng;

    explicit Rng(std::uint64_t seed) : eng(seed) {}

    double uniform() {  // (0, 1]
        return static_cast<double>((eng() >> 11) + 1) * 0x1.0p-53;
    }

    double normal() {
        const double u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }
};

double sinc(double x) {
    if (x == 0.0)
        return 1.0;
    return std::sin(kPi * x) / (kPi * x);
}

// Hamming-windowed sinc bandpass, unit passband gain, odd tap count.
std::vector<double> bandpass_fir(double fs, double f_lo, double f_hi, std::size_t taps) {
    const double fc1 = f_lo / fs;
    const double fc2 = f_hi / fs;
    const double mid = static_cast<double>(taps - 1) / 2.0;
    std::vector<double> h(taps);
    for (std::size_t k = 0; k < taps; ++k) {
        const double t = static_cast<double>(k) - mid;
        const double ideal = 2.0 * fc2 * sinc(2.0 * fc2 * t) - 2.0 * fc1 * sinc(2.0 * fc1 * t);
        const double window =
            0.54 - 0.46 * std::cos(2.0 * kPi * static_cast<double>(k) /
                                   static_cast<double>(taps - 1));
        h[k] = ideal * window;
    }
    return h;
}

// Zero-padded convolution aligned on the filter center.
std::vector<double> filter_same(const std::vector<double>& x, const std::vector<double>& h) {
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(x.size());
    const std::ptrdiff_t L = static_cast<std::ptrdiff_t>(h.size());
    const std::ptrdiff_t mid = (L - 1) / 2;
    std::vector<double> y(x.size(), 0.0);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::ptrdiff_t k = 0; k < L; ++k) {
            const std::ptrdiff_t j = i + mid - k;
            if (j >= 0 && j < n)
                acc += h[static_cast<std::size_t>(k)] * x[static_cast<std::size_t>(j)];
        }
        y[static_cast<std::size_t>(i)] = acc;
    }
    return y;
}

double mean_square_vec(const std::vector<std::vector<double>>& chans) {
    double acc = 0.0;
    std::size_t n = 0;
    for (const auto& ch : chans) {
        for (double v : ch)
            acc += v * v;
        n += ch.size();
    }
    return n == 0 ? 0.0 : acc / static_cast<double>(n);
}

}  // namespace

void write_bundle(const Signal& s, const std::string& path) {
    if (auto v = validate_signal(s); !v)
        throw std::invalid_argument(v.issue);
    json manifest;
    manifest["format_version"] = kBundleFormatVersion;
    manifest["sample_rate_hz"] = s.sample_rate_hz;
    manifest["channels"] = s.channels();
    manifest["samples_per_channel"] = s.length();
    manifest["dtype"] = "f32le";
    manifest["subject_id"] = s.subject_id;
    manifest["trial_id"] = s.trial_id;
    manifest["class_label"] = s.class_label;

    std::string out = manifest.dump();
    out.push_back('\n');
    out.reserve(out.size() + 4 * s.channels() * s.length());
    for (std::size_t i = 0; i < s.length(); ++i)
        for (std::size_t c = 0; c < s.channels(); ++c)
            append_f32le(out, static_cast<float>(s.samples[c][i]));
    write_text_file(path, out);
}

Signal read_bundle(const std::string& path) {
    const std::string blob = read_text_file(path);
    const std::size_t nl = blob.find('\n');
    if (nl == std::string::npos)
        throw std::invalid_argument("malformed bundle: missing manifest line");
    json manifest;
    try {
        manifest = json::parse(blob.substr(0, nl));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed manifest: ") + e.what());
    }
    for (const char* key : {"format_version", "sample_rate_hz", "channels",
                            "samples_per_channel", "dtype", "subject_id", "trial_id",
                            "class_label"})
        if (!manifest.contains(key))
            throw std::invalid_argument(std::string("manifest missing field: ") + key);
    if (manifest["format_version"].get<int>() != kBundleFormatVersion)
        throw std::invalid_argument("unknown format_version in bundle manifest");
    if (manifest["dtype"].get<std::string>() != "f32le")
        throw std::invalid_argument("unsupported dtype: " +
                                    manifest["dtype"].get<std::string>());

    const auto channels = manifest["channels"].get<std::size_t>();
    const auto samples = manifest["samples_per_channel"].get<std::size_t>();
    const std::size_t expected = 4 * channels * samples;
    const std::size_t have = blob.size() - nl - 1;
    if (have != expected)
        throw std::invalid_argument("payload length mismatch: expected " +
                                    std::to_string(expected) + " bytes, have " +
                                    std::to_string(have));

    Signal s;
    s.sample_rate_hz = manifest["sample_rate_hz"].get<double>();
    s.subject_id = manifest["subject_id"].get<std::string>();
    s.trial_id = manifest["trial_id"].get<std::string>();
    s.class_label = manifest["class_label"].get<std::string>();
    s.channel_ids = default_channel_ids(channels);
    s.samples.assign(channels, std::vector<double>(samples));
    const auto* p = reinterpret_cast<const unsigned char*>(blob.data() + nl + 1);
    for (std::size_t i = 0; i < samples; ++i)
        for (std::size_t c = 0; c < channels; ++c) {
            s.samples[c][i] = static_cast<double>(read_f32le(p));
            p += 4;
        }
    if (auto v = validate_signal(s); !v)
        throw std::invalid_argument("bundle contents invalid: " + v.issue);
    return s;
}

Signal import_csv(const std::string& path, double sample_rate_hz, const CsvTags& tags) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> cells;
    std::string cell;
    auto flush_cell = [&]() {
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t' || cell.back() == '\r'))
            cell.pop_back();
        std::size_t b = 0;
        while (b < cell.size() && (cell[b] == ' ' || cell[b] == '\t'))
            ++b;
        cells.push_back(cell.substr(b));
        cell.clear();
    };
    for (char ch : text) {
        if (ch == ',') {
            flush_cell();
        } else if (ch == '\n') {
            flush_cell();
            if (!(cells.size() == 1 && cells[0].empty()))
                rows.push_back(cells);
            cells.clear();
        } else {
            cell += ch;
        }
    }
    if (!cell.empty() || !cells.empty()) {
        flush_cell();
        if (!(cells.size() == 1 && cells[0].empty()))
            rows.push_back(cells);
    }
    if (rows.empty())
        throw std::invalid_argument("csv has no rows");

    auto parse_cell = [](const std::string& c, double& out) {
        const char* first = c.data();
        const char* last = c.data() + c.size();
        auto [ptr, ec] = std::from_chars(first, last, out);
        return ec == std::errc() && ptr == last && !c.empty();
    };

    // Header detection: first row kept only if fully numeric.
    std::size_t first_data = 0;
    std::vector<std::string> header;
    {
        double tmp;
        bool numeric = true;
        for (const auto& c : rows[0])
            if (!parse_cell(c, tmp)) {
                numeric = false;
                break;
            }
        if (!numeric) {
            header = rows[0];
            first_data = 1;
        }
    }
    if (first_data >= rows.size())
        throw std::invalid_argument("csv has no data rows");

    const std::size_t n_cols = rows[first_data].size();
    if (n_cols == 0)
        throw std::invalid_argument("csv has no columns");
    Signal s;
    s.sample_rate_hz = sample_rate_hz;
    s.subject_id = tags.subject_id;
    s.trial_id = tags.trial_id;
    s.class_label = tags.class_label;
    s.samples.assign(n_cols, {});
    for (std::size_t r = first_data; r < rows.size(); ++r) {
        if (rows[r].size() != n_cols)
            throw std::invalid_argument("ragged csv row " + std::to_string(r + 1));
        for (std::size_t c = 0; c < n_cols; ++c) {
            double v;
            if (!parse_cell(rows[r][c], v))
                throw std::invalid_argument("non-numeric csv cell at row " +
                                            std::to_string(r + 1) + ", column " +
                                            std::to_string(c + 1));
            s.samples[c].push_back(v);
        }
    }

    bool header_usable = header.size() == n_cols;
    if (header_usable) {
        std::vector<std::string> sorted = header;
        std::sort(sorted.begin(), sorted.end());
        header_usable = std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end() &&
                        std::find(header.begin(), header.end(), "") == header.end();
    }
    s.channel_ids = header_usable ? header : default_channel_ids(n_cols);
    if (auto v = validate_signal(s); !v)
        throw std::invalid_argument("csv contents invalid: " + v.issue);
    return s;
}

std::vector<bool> DatasetRecordInfo::activity_mask() const {
    std::vector<bool> mask(signal.length(), false);
    if (active_range) {
        const std::size_t end = std::min(active_range->second, signal.length());
        for (std::size_t i = active_range->first; i < end; ++i)
            mask[i] = true;
    }
    return mask;
}

LabeledDataset Dataset::labeled() const {
    LabeledDataset out;
    out.records.reserve(records.size());
    for (const auto& r : records)
        out.records.push_back(r.signal);
    return out;
}

LabeledDataset Dataset::clean_labeled() const {
    LabeledDataset out;
    out.records.reserve(records.size());
    for (const auto& r : records) {
        if (!r.clean)
            throw std::invalid_argument("record has no clean reference: " +
                                        r.signal.trial_id);
        out.records.push_back(*r.clean);
    }
    return out;
}

void save_dataset(const Dataset& d, const std::string& dir) {
    if (d.records.empty())
        throw std::invalid_argument("dataset has no records");
    std::filesystem::create_directories(dir);
    json index;
    index["format_version"] = kDatasetFormatVersion;
    json entries = json::array();
    for (std::size_t i = 0; i < d.records.size(); ++i) {
        const auto& rec = d.records[i];
        char name[32];
        std::snprintf(name, sizeof(name), "rec_%03zu.sig", i);
        write_bundle(rec.signal, (std::filesystem::path(dir) / name).string());
        json e;
        e["path"] = name;
        e["class_label"] = rec.signal.class_label;
        e["trial_id"] = rec.signal.trial_id;
        e["subject_id"] = rec.signal.subject_id;
        if (rec.clean) {
            char clean_name[40];
            std::snprintf(clean_name, sizeof(clean_name), "rec_%03zu.clean.sig", i);
            write_bundle(*rec.clean, (std::filesystem::path(dir) / clean_name).string());
            e["clean_path"] = clean_name;
        }
        if (rec.active_range) {
            e["active_start"] = rec.active_range->first;
            e["active_end"] = rec.active_range->second;
        }
        if (rec.input_snr_db)
            e["input_snr_db"] = *rec.input_snr_db;
        entries.push_back(std::move(e));
    }
    index["records"] = std::move(entries);
    write_text_file((std::filesystem::path(dir) / "index.json").string(), index.dump(2) + "\n");
}

Dataset load_dataset(const std::string& dir) {
    const auto index_path = std::filesystem::path(dir) / "index.json";
    json index;
    try {
        index = json::parse(read_text_file(index_path.string()));
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("malformed dataset index: ") + e.what());
    }
    if (!index.contains("format_version") ||
        index["format_version"].get<int>() != kDatasetFormatVersion)
        throw std::invalid_argument("unknown dataset format version");
    Dataset d;
    for (const auto& e : index.at("records")) {
        DatasetRecordInfo rec;
        rec.signal = read_bundle((std::filesystem::path(dir) /
                                  e.at("path").get<std::string>()).string());
        if (e.contains("clean_path"))
            rec.clean = read_bundle((std::filesystem::path(dir) /
                                     e["clean_path"].get<std::string>()).string());
        if (e.contains("active_start") && e.contains("active_end"))
            rec.active_range = {e["active_start"].get<std::size_t>(),
                                e["active_end"].get<std::size_t>()};
        if (e.contains("input_snr_db"))
            rec.input_snr_db = e["input_snr_db"].get<double>();
        d.records.push_back(std::move(rec));
    }
    if (d.records.empty())
        throw std::invalid_argument("dataset index lists no records");
    return d;
}

Dataset synth_dataset(const SynthSpec& spec) {
    if (!(spec.fs > 2.0 * spec.band_high_hz))
        throw std::invalid_argument("fs must exceed twice the carrier band edge");
    if (!(spec.band_low_hz > 0.0) || !(spec.band_low_hz < spec.band_high_hz))
        throw std::invalid_argument("carrier band edges out of order");
    if (spec.channels < 1 || spec.n_classes < 1 || spec.trials_per_class < 1)
        throw std::invalid_argument("channels, classes and trials must be >= 1");
    if (spec.noise_sigma < 0.0)
        throw std::invalid_argument("noise sigma must be non-negative");
    if (spec.rest_trials < 0)
        throw std::invalid_argument("rest_trials must be non-negative");
    const auto n = static_cast<std::size_t>(std::llround(spec.duration_s * spec.fs));
    if (n < 16)
        throw std::invalid_argument("duration too short");

    const std::size_t margin = n / 8;
    const std::size_t active_len = n - 2 * margin;
    // Flat-top envelope with quarter-span sin^2 ramps: interior windows all
    // carry full burst amplitude, which keeps short-window features separable
    // across classes.
    std::vector<double> env(n, 0.0);
    const double ramp = static_cast<double>(active_len / 4 + 1);
    for (std::size_t i = 0; i < active_len; ++i) {
        const double up = static_cast<double>(i + 1) / ramp;
        const double down = static_cast<double>(active_len - i) / ramp;
        const double r = std::min({1.0, up, down});
        const double s = std::sin(0.5 * kPi * r);
        env[margin + i] = s * s;
    }

    const std::vector<double> fir = bandpass_fir(spec.fs, spec.band_low_hz,
                                                 spec.band_high_hz, 401);
    Rng rng(spec.rng_seed);

    // Sensor noise: 75/25 power mix of a flat component and a first-difference
    // component, so the floor rises toward high frequency the way broadband
    // pickup at the electrode-amplifier front end does. Unit variance per
    // sample; the mix is rescaled against the clean power anyway whenever an
    // input SNR is requested.
    auto make_noise = [&](std::size_t channels_n) {
        const double w_flat = std::sqrt(0.75);
        const double w_diff = std::sqrt(0.25 / 2.0);
        std::vector<std::vector<double>> noise(channels_n, std::vector<double>(n));
        for (auto& ch : noise) {
            double prev = rng.normal();
            for (double& v : ch) {
                const double curr = rng.normal();
                v = w_flat * rng.normal() + w_diff * (curr - prev);
                prev = curr;
            }
        }
        return noise;
    };

    Dataset out;
    for (int c = 0; c < spec.n_classes; ++c) {
        // Spatial profile: a Gaussian bump over the channel axis, centered per
        // class, on a 0.15 floor so every channel stays informative.
        const double mu = spec.n_classes > 1
                              ? static_cast<double>(c) *
                                    static_cast<double>(spec.channels - 1) /
                                    static_cast<double>(spec.n_classes - 1)
                              : static_cast<double>(spec.channels - 1) / 2.0;
        std::vector<double> w(spec.channels);
        for (std::size_t ch = 0; ch < spec.channels; ++ch) {
            const double d = static_cast<double>(ch) - mu;
            w[ch] = 0.1 + 0.9 * std::exp(-d * d / (2.0 * 0.55 * 0.55));
        }

        for (int t = 0; t < spec.trials_per_class; ++t) {
            std::vector<double> white(n);
            for (double& v : white)
                v = rng.normal();
            std::vector<double> carrier = filter_same(white, fir);
            double crms = 0.0;
            for (double v : carrier)
                crms += v * v;
            crms = std::sqrt(crms / static_cast<double>(n));
            if (crms > 0.0)
                for (double& v : carrier)
                    v /= crms;

            DatasetRecordInfo rec;
            Signal clean;
            clean.sample_rate_hz = spec.fs;
            clean.channel_ids = default_channel_ids(spec.channels);
            clean.subject_id = "s0";
            clean.trial_id = "c" + std::to_string(c) + "_t" + std::to_string(t);
            clean.class_label = "c" + std::to_string(c);
            clean.samples.assign(spec.channels, std::vector<double>(n));
            for (std::size_t ch = 0; ch < spec.channels; ++ch)
                for (std::size_t i = 0; i < n; ++i)
                    clean.samples[ch][i] = w[ch] * env[i] * carrier[i];

            auto noise = make_noise(spec.channels);
            double scale = spec.noise_sigma;
            const double p_clean = mean_square_vec(clean.samples);
            if (spec.input_snr_db && p_clean > 0.0) {
                const double target_pn = p_clean / std::pow(10.0, *spec.input_snr_db / 10.0);
                const double pn_raw = mean_square_vec(noise);
                scale = pn_raw > 0.0 ? std::sqrt(target_pn / pn_raw) : 0.0;
            }

            rec.signal = clean;
            for (std::size_t ch = 0; ch < spec.channels; ++ch)
                for (std::size_t i = 0; i < n; ++i)
                    rec.signal.samples[ch][i] += scale * noise[ch][i];

            const double pn = scale * scale * mean_square_vec(noise);
            rec.input_snr_db = pn > 0.0 ? 10.0 * std::log10(p_clean / pn) : kSnrCapDb;
            rec.active_range = {margin, n - margin};
            rec.clean = std::move(clean);
            out.records.push_back(std::move(rec));
        }
    }

    for (int t = 0; t < spec.rest_trials; ++t) {
        DatasetRecordInfo rec;
        rec.signal.sample_rate_hz = spec.fs;
        rec.signal.channel_ids = default_channel_ids(spec.channels);
        rec.signal.subject_id = "s0";
        rec.signal.trial_id = "rest_t" + std::to_string(t);
        rec.signal.class_label = "rest";
        auto noise = make_noise(spec.channels);
        rec.signal.samples.assign(spec.channels, std::vector<double>(n, 0.0));
        for (std::size_t ch = 0; ch < spec.channels; ++ch)
            for (std::size_t i = 0; i < n; ++i)
                rec.signal.samples[ch][i] = spec.noise_sigma * noise[ch][i];
        Signal clean = rec.signal;
        for (auto& ch : clean.samples)
            std::fill(ch.begin(), ch.end(), 0.0);
        rec.clean = std::move(clean);
        out.records.push_back(std::move(rec));
    }
    return out;
}

UpdateMode parse_update_mode(const std::string& name) {
    if (name == "haar")
        return UpdateMode::haar;
    if (name == "moment")
        return UpdateMode::moment_preserving;
    throw std::invalid_argument("unknown update mode: " + name);
}

std::string update_mode_name(UpdateMode mode) {
    return mode == UpdateMode::haar ? "haar" : "moment";
}

namespace {

json decomposition_to_json(const Decomposition& d) {
    json j;
    j["levels"] = d.config.levels;
    j["poly_order"] = d.config.poly_order;
    if (d.config.bandwidth)
        j["bandwidth"] = *d.config.bandwidth;
    else
        j["bandwidth"] = nullptr;
    j["update"] = update_mode_name(d.config.update);
    j["standardize"] = d.config.standardize;
    j["original_length"] = d.original_length;
    j["sample_rate_hz"] = d.sample_rate_hz;
    j["coarse"] = d.coarse;
    j["coarse_grid"] = d.coarse_grid.positions;
    json bands = json::array();
    for (const auto& band : d.details) {
        json b;
        b["depth"] = band.depth;
        b["grid"] = band.grid.positions;
        b["coeffs"] = band.coeffs;
        bands.push_back(std::move(b));
    }
    j["details"] = std::move(bands);
    return j;
}

}  // namespace

std::string decomposition_json(const Decomposition& d) {
    return decomposition_to_json(d).dump();
}

std::string decompositions_json(const std::vector<std::string>& channel_ids,
                                const std::vector<Decomposition>& decs) {
    json j;
    j["channel_ids"] = channel_ids;
    json arr = json::array();
    for (const auto& d : decs)
        arr.push_back(decomposition_to_json(d));
    j["channels"] = std::move(arr);
    return j.dump(2) + "\n";
}

std::string feature_table_csv(const FeatureTable& table) {
    std::string out;
    for (const auto& name : table.column_names)
        out += name + ",";
    out += "label,trial_id,subject_id\n";
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        for (double v : table.rows[i])
            out += format_double(v) + ",";
        out += table.labels[i] + "," + table.trial_ids[i] + "," + table.subject_ids[i] + "\n";
    }
    return out;
}

std::string confusion_csv(const ConfusionMatrix& cm) {
    std::string out = "actual";
    for (const auto& c : cm.classes)
        out += ",pred_" + c;
    out += "\n";
    for (std::size_t i = 0; i < cm.classes.size(); ++i) {
        out += cm.classes[i];
        for (std::size_t j = 0; j < cm.classes.size(); ++j)
            out += "," + std::to_string(cm.counts[i][j]);
        out += "\n";
    }
    return out;
}

std::string eval_report_json(const EvalReport& report) {
    json j;
    j["classes"] = report.cm.classes;
    j["confusion"] = report.cm.counts;
    j["accuracy"] = report.metrics.accuracy;
    j["precision"] = report.metrics.precision;
    j["recall"] = report.metrics.recall;
    j["fscore"] = report.metrics.fscore;
    j["beta"] = report.metrics.beta;
    return j.dump(2) + "\n";
}

std::string energy_map_csv(const EnergyMap& map) {
    std::string out = "window_start";
    for (const auto& id : map.channel_ids)
        out += "," + id;
    out += "\n";
    for (std::size_t wdx = 0; wdx < map.rms.size(); ++wdx) {
        out += std::to_string(map.window_starts[wdx]);
        for (double v : map.rms[wdx])
            out += "," + format_double(v);
        out += "\n";
    }
    return out;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open file: " + path);
    std::string content((std::istreambuf_iterator<char>(in)),
                        std::istreambuf_iterator<char>());
    return content;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open file for writing: " + path);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

}  // namespace emglift
