#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "emglift/io.hpp"
#include "emglift/metrics.hpp"
#include "json.hpp"

using namespace emglift;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    static const fs::path dir = [] {
        fs::path p = fs::temp_directory_path() / "emglift_io_scratch";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

Signal f32_exact_signal() {
    Signal s;
    s.sample_rate_hz = 2000.0;
    s.subject_id = "s3";
    s.trial_id = "c1_t4";
    s.class_label = "c1";
    std::mt19937_64 rng(5);
    for (int c = 0; c < 2; ++c) {
        std::vector<double> ch(64);
        for (auto& v : ch) {
            const double raw = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
            v = static_cast<double>(static_cast<float>(raw));
        }
        s.samples.push_back(std::move(ch));
    }
    return s;
}

}  // namespace

TEST_SUITE("io") {

TEST_CASE("bundles round-trip float-exact samples and all tags") {
    const auto path = (scratch() / "roundtrip.sig").string();
    Signal s = f32_exact_signal();
    write_bundle(s, path);
    Signal r = read_bundle(path);
    CHECK(r.sample_rate_hz == 2000.0);
    CHECK(r.subject_id == "s3");
    CHECK(r.trial_id == "c1_t4");
    CHECK(r.class_label == "c1");
    CHECK(r.channel_ids == std::vector<std::string>{"ch0", "ch1"});
    REQUIRE(r.channels() == 2);
    REQUIRE(r.length() == 64);
    CHECK(r.samples == s.samples);
}

TEST_CASE("bundle rejects malformed containers") {
    const auto dir = scratch();
    Signal s = f32_exact_signal();

    const auto good = (dir / "good.sig").string();
    write_bundle(s, good);

    const auto truncated = (dir / "short.sig").string();
    {
        std::string bytes = read_text_file(good);
        bytes.resize(bytes.size() - 3);
        write_text_file(truncated, bytes);
    }
    CHECK_THROWS_AS(read_bundle(truncated), std::invalid_argument);

    const auto empty = (dir / "empty.sig").string();
    write_text_file(empty, "");
    CHECK_THROWS_WITH_AS(read_bundle(empty), "malformed bundle: missing manifest line",
                         std::invalid_argument);

    const auto not_json = (dir / "notjson.sig").string();
    write_text_file(not_json, "hello world\n");
    CHECK_THROWS_AS(read_bundle(not_json), std::invalid_argument);

    const auto bare = (dir / "bare.sig").string();
    write_text_file(bare, "{}\n");
    CHECK_THROWS_AS(read_bundle(bare), std::invalid_argument);

    // manifest edits: wrong version, wrong dtype
    std::string bytes = read_text_file(good);
    const auto nl = bytes.find('\n');
    auto manifest = nlohmann::json::parse(bytes.substr(0, nl));
    const std::string payload = bytes.substr(nl + 1);

    auto versioned = manifest;
    versioned["format_version"] = 9;
    write_text_file((dir / "v9.sig").string(), versioned.dump() + "\n" + payload);
    CHECK_THROWS_WITH_AS(read_bundle((dir / "v9.sig").string()),
                         "unknown format_version in bundle manifest",
                         std::invalid_argument);

    auto wide = manifest;
    wide["dtype"] = "f64le";
    write_text_file((dir / "f64.sig").string(), wide.dump() + "\n" + payload);
    CHECK_THROWS_AS(read_bundle((dir / "f64.sig").string()), std::invalid_argument);
}

TEST_CASE("csv import with and without a header row") {
    const auto dir = scratch();
    const auto plain = (dir / "plain.csv").string();
    write_text_file(plain, "1,2\n3,4\n5,6\n");
    CsvTags tags{"subjX", "trial7", "open"};
    Signal s = import_csv(plain, 1500.0, tags);
    CHECK(s.sample_rate_hz == 1500.0);
    CHECK(s.subject_id == "subjX");
    CHECK(s.trial_id == "trial7");
    CHECK(s.class_label == "open");
    CHECK(s.channel_ids == std::vector<std::string>{"ch0", "ch1"});
    CHECK(s.samples[0] == std::vector<double>{1.0, 3.0, 5.0});
    CHECK(s.samples[1] == std::vector<double>{2.0, 4.0, 6.0});

    const auto headed = (dir / "headed.csv").string();
    write_text_file(headed, "left,right\n1,2\n3,4\n");
    Signal h = import_csv(headed, 1000.0);
    CHECK(h.channel_ids == std::vector<std::string>{"left", "right"});
    CHECK(h.length() == 2);

    const auto dup = (dir / "dup.csv").string();
    write_text_file(dup, "a,a\n1,2\n");
    CHECK(import_csv(dup, 1000.0).channel_ids ==
          std::vector<std::string>{"ch0", "ch1"});
}

TEST_CASE("csv import rejects ragged or non-numeric bodies") {
    const auto dir = scratch();
    const auto ragged = (dir / "ragged.csv").string();
    write_text_file(ragged, "1,2\n3\n");
    CHECK_THROWS_AS(import_csv(ragged, 1000.0), std::invalid_argument);

    const auto alpha = (dir / "alpha.csv").string();
    write_text_file(alpha, "1,2\n3,x\n");
    CHECK_THROWS_AS(import_csv(alpha, 1000.0), std::invalid_argument);

    const auto nothing = (dir / "nothing.csv").string();
    write_text_file(nothing, "");
    CHECK_THROWS_AS(import_csv(nothing, 1000.0), std::invalid_argument);

    const auto only_header = (dir / "header.csv").string();
    write_text_file(only_header, "a,b\n");
    CHECK_THROWS_AS(import_csv(only_header, 1000.0), std::invalid_argument);
}

TEST_CASE("dataset directories round-trip records with references") {
    SynthSpec spec;
    spec.fs = 8000.0;
    spec.duration_s = 0.032;  // 256 samples
    spec.channels = 3;
    spec.n_classes = 2;
    spec.trials_per_class = 2;
    spec.input_snr_db = 3.0;
    spec.rest_trials = 1;
    spec.rng_seed = 42;
    Dataset d = synth_dataset(spec);
    REQUIRE(d.records.size() == 5);

    const auto dir = (scratch() / "set").string();
    save_dataset(d, dir);
    CHECK(fs::exists(fs::path(dir) / "index.json"));
    CHECK(fs::exists(fs::path(dir) / "rec_000.sig"));

    Dataset r = load_dataset(dir);
    REQUIRE(r.records.size() == 5);
    for (std::size_t i = 0; i < r.records.size(); ++i) {
        const auto& a = d.records[i];
        const auto& b = r.records[i];
        CHECK(b.signal.trial_id == a.signal.trial_id);
        CHECK(b.signal.class_label == a.signal.class_label);
        CHECK(b.signal.channels() == 3);
        CHECK(b.clean.has_value() == a.clean.has_value());
        CHECK(b.active_range == a.active_range);
        if (a.input_snr_db)
            CHECK(*b.input_snr_db == doctest::Approx(*a.input_snr_db));
        // payloads went through f32; spot check one sample per record
        CHECK(b.signal.samples[0][10] ==
              doctest::Approx(a.signal.samples[0][10]).epsilon(1e-6));
    }

    CHECK_THROWS_AS(load_dataset((scratch() / "missing_dir").string()),
                    std::runtime_error);
}

TEST_CASE("synthesis is deterministic and hits the requested input snr") {
    SynthSpec spec;
    spec.duration_s = 0.032;
    spec.channels = 4;
    spec.n_classes = 4;
    spec.trials_per_class = 2;
    spec.input_snr_db = 0.0;
    spec.rng_seed = 7;

    Dataset a = synth_dataset(spec);
    Dataset b = synth_dataset(spec);
    REQUIRE(a.records.size() == 8);
    for (std::size_t i = 0; i < a.records.size(); ++i) {
        CHECK(a.records[i].signal.samples == b.records[i].signal.samples);
        CHECK(a.records[i].clean->samples == b.records[i].clean->samples);
    }

    spec.rng_seed = 8;
    Dataset c = synth_dataset(spec);
    CHECK(a.records[0].signal.samples != c.records[0].signal.samples);

    for (const auto& rec : a.records) {
        REQUIRE(rec.clean.has_value());
        const auto r = snr_vs_reference(*rec.clean, rec.signal);
        CHECK(r.snr_db == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(*rec.input_snr_db == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(rec.signal.class_label == rec.clean->class_label);
        CHECK(rec.signal.subject_id == "s0");
    }
    CHECK(a.records[0].signal.trial_id == "c0_t0");
    CHECK(a.records[3].signal.class_label == "c1");

    // activity is confined to the interior envelope
    const auto mask = a.records[0].activity_mask();
    const std::size_t n = a.records[0].signal.length();
    CHECK(mask.size() == n);
    CHECK_FALSE(mask[0]);
    CHECK(mask[n / 2]);
    CHECK_FALSE(mask[n - 1]);
    std::size_t active = 0;
    for (bool m : mask)
        active += m ? 1 : 0;
    CHECK(active == n - 2 * (n / 8));
}

TEST_CASE("noise-free synthesis reports the capped snr") {
    SynthSpec spec;
    spec.duration_s = 0.032;
    spec.channels = 2;
    spec.n_classes = 2;
    spec.trials_per_class = 1;
    spec.noise_sigma = 0.0;
    Dataset d = synth_dataset(spec);
    for (const auto& rec : d.records) {
        CHECK(*rec.input_snr_db == kSnrCapDb);
        CHECK(rec.signal.samples == rec.clean->samples);
    }
}

TEST_CASE("rest records are pure noise with a rest label") {
    SynthSpec spec;
    spec.duration_s = 0.032;
    spec.channels = 2;
    spec.n_classes = 2;
    spec.trials_per_class = 1;
    spec.noise_sigma = 0.5;
    spec.rest_trials = 2;
    Dataset d = synth_dataset(spec);
    REQUIRE(d.records.size() == 4);
    CHECK(d.records[2].signal.class_label == "rest");
    CHECK(d.records[2].signal.trial_id == "rest_t0");
    CHECK(d.records[3].signal.trial_id == "rest_t1");
    for (double v : d.records[2].clean->samples[0])
        CHECK(v == 0.0);
    const auto mask = d.records[2].activity_mask();
    for (bool m : mask)
        CHECK_FALSE(m);
}

TEST_CASE("synthesis validates its spec") {
    SynthSpec bad;
    bad.fs = 800.0;  // below twice the 450 Hz edge
    CHECK_THROWS_WITH_AS(synth_dataset(bad), "fs must exceed twice the carrier band edge",
                         std::invalid_argument);
    SynthSpec swapped;
    swapped.band_low_hz = 500.0;
    CHECK_THROWS_AS(synth_dataset(swapped), std::invalid_argument);
    SynthSpec tiny;
    tiny.duration_s = 0.001;
    CHECK_THROWS_AS(synth_dataset(tiny), std::invalid_argument);
    SynthSpec negative;
    negative.noise_sigma = -1.0;
    CHECK_THROWS_AS(synth_dataset(negative), std::invalid_argument);
}

TEST_CASE("labeled views") {
    SynthSpec spec;
    spec.duration_s = 0.032;
    spec.channels = 2;
    spec.n_classes = 2;
    spec.trials_per_class = 1;
    Dataset d = synth_dataset(spec);
    CHECK(d.labeled().records.size() == 2);
    CHECK(d.clean_labeled().records.size() == 2);

    Dataset bare = d;
    bare.records[0].clean.reset();
    CHECK(bare.labeled().records.size() == 2);
    CHECK_THROWS_AS(bare.clean_labeled(), std::invalid_argument);
}

TEST_CASE("update mode names") {
    CHECK(parse_update_mode("haar") == UpdateMode::haar);
    CHECK(parse_update_mode("moment") == UpdateMode::moment_preserving);
    CHECK(update_mode_name(UpdateMode::moment_preserving) == "moment");
    CHECK_THROWS_AS(parse_update_mode("hadamard"), std::invalid_argument);
}

TEST_CASE("decomposition reports are valid json with per-band layout") {
    Signal s;
    s.sample_rate_hz = 1000.0;
    s.samples = {{1.0, 3.0, 2.0, 4.0}, {0.0, 1.0, 0.0, 1.0}};
    LiftingConfig cfg;
    cfg.levels = 1;
    cfg.poly_order = 1;
    auto decs = forward_multichannel(s, cfg);
    auto j = nlohmann::json::parse(decompositions_json({"e0", "e1"}, decs));
    CHECK(j["channel_ids"].size() == 2);
    REQUIRE(j["channels"].size() == 2);
    CHECK(j["channels"][0]["levels"] == 1);
    CHECK(j["channels"][0]["coarse"].size() == 2);
    CHECK(j["channels"][0]["details"].size() == 1);
    CHECK(j["channels"][0]["details"][0]["coeffs"][0] == 2.0);

    auto single = nlohmann::json::parse(decomposition_json(decs[0]));
    CHECK(single["original_length"] == 4);
}

TEST_CASE("tabular serializers") {
    FeatureTable t;
    t.column_names = {"e0_feat1"};
    t.rows = {{0.5}, {1.25}};
    t.labels = {"a", "b"};
    t.trial_ids = {"t0", "t1"};
    t.subject_ids = {"s0", "s0"};
    CHECK(feature_table_csv(t) ==
          "e0_feat1,label,trial_id,subject_id\n0.5,a,t0,s0\n1.25,b,t1,s0\n");

    ConfusionMatrix cm;
    cm.classes = {"a", "b"};
    cm.counts = {{3, 1}, {2, 4}};
    CHECK(confusion_csv(cm) == "actual,pred_a,pred_b\na,3,1\nb,2,4\n");

    EvalReport report;
    report.cm = cm;
    report.metrics = macro_metrics(cm);
    auto j = nlohmann::json::parse(eval_report_json(report));
    CHECK(j["accuracy"] == doctest::Approx(0.7));
    CHECK(j["classes"].size() == 2);

    EnergyMap map;
    map.channel_ids = {"e0", "e1"};
    map.window_starts = {0, 150};
    map.rms = {{1.0, 2.0}, {3.0, 4.0}};
    CHECK(energy_map_csv(map) == "window_start,e0,e1\n0,1,2\n150,3,4\n");
}

TEST_CASE("text file helpers") {
    const auto p = (scratch() / "note.txt").string();
    write_text_file(p, "alpha\nbeta");
    CHECK(read_text_file(p) == "alpha\nbeta");
    CHECK_THROWS_AS(read_text_file((scratch() / "absent.txt").string()),
                    std::runtime_error);
}

}  // TEST_SUITE
