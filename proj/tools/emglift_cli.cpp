#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "emglift/denoise.hpp"
#include "emglift/features.hpp"
#include "emglift/io.hpp"
#include "emglift/learn.hpp"
#include "emglift/metrics.hpp"
#include "emglift/svg.hpp"
#include "emglift/wavelet.hpp"

namespace {

using namespace emglift;

// JSON config files mirror the long option names; subcommand settings nest
// under the subcommand name.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App* app, bool default_also, bool,
                          std::string) const override {
        nlohmann::json j;
        for (const CLI::Option* opt : app->get_options({})) {
            if (opt->get_lnames().empty() || !opt->get_configurable())
                continue;
            const std::string name = opt->get_lnames()[0];
            if (opt->get_type_size() != 0) {
                if (opt->count() == 1)
                    j[name] = opt->results().at(0);
                else if (opt->count() > 1)
                    j[name] = opt->results();
                else if (default_also && !opt->get_default_str().empty())
                    j[name] = opt->get_default_str();
            } else if (opt->count() > 0) {
                j[name] = opt->count() == 1 ? nlohmann::json(true)
                                            : nlohmann::json(opt->count());
            } else if (default_also) {
                j[name] = false;
            }
        }
        for (const CLI::App* sub : app->get_subcommands({}))
            j[sub->get_name()] = nlohmann::json::parse(to_config(sub, default_also, false, ""));
        return j.dump(2);
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        input >> j;
        return walk(j, "", {});
    }

  private:
    std::vector<CLI::ConfigItem> walk(const nlohmann::json& j, const std::string& name,
                                      std::vector<std::string> prefix) const {
        std::vector<CLI::ConfigItem> results;
        if (j.is_object()) {
            for (auto it = j.begin(); it != j.end(); ++it) {
                auto next = prefix;
                if (!name.empty())
                    next.push_back(name);
                auto sub = walk(it.value(), it.key(), next);
                results.insert(results.end(), sub.begin(), sub.end());
            }
        } else if (!name.empty()) {
            results.emplace_back();
            CLI::ConfigItem& res = results.back();
            res.name = name;
            res.parents = std::move(prefix);
            if (j.is_boolean()) {
                res.inputs = {j.get<bool>() ? "true" : "false"};
            } else if (j.is_string()) {
                res.inputs = {j.get<std::string>()};
            } else if (j.is_array()) {
                for (const auto& v : j)
                    res.inputs.push_back(v.is_string() ? v.get<std::string>() : v.dump());
            } else {
                res.inputs = {j.dump()};
            }
        } else {
            throw CLI::ConversionError("config values must live inside a JSON object");
        }
        return results;
    }
};

std::optional<double> parse_bandwidth(const std::string& s) {
    if (s == "auto")
        return std::nullopt;
    double v{};
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !(v > 0.0))
        throw std::invalid_argument("bandwidth must be 'auto' or a positive number");
    return v;
}

struct WindowOpts {
    double window_ms = 250.0;
    double overlap_ms = 100.0;
    bool overlap_is_step = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--window-ms", window_ms, "analysis window length in ms")
            ->capture_default_str();
        cmd->add_option("--overlap-ms", overlap_ms,
                        "overlap between consecutive windows in ms")
            ->capture_default_str();
        cmd->add_flag("--overlap-is-step", overlap_is_step,
                      "treat --overlap-ms as the hop size instead");
    }

    WindowSpec spec() const { return {window_ms, overlap_ms, overlap_is_step}; }
};

struct LiftOpts {
    int srl = 2;
    int order = 3;
    std::string bandwidth = "auto";
    std::string update = "haar";
    bool standardize = false;

    void attach(CLI::App* cmd, bool with_srl = true) {
        if (with_srl)
            cmd->add_option("--srl", srl, "decomposition levels")
                ->check(CLI::Range(1, 12))
                ->capture_default_str();
        cmd->add_option("--order", order, "prediction stencil size")
            ->check(CLI::Range(1, 12))
            ->capture_default_str();
        cmd->add_option("--bandwidth", bandwidth,
                        "prediction bandwidth: auto or a positive base width")
            ->capture_default_str();
        cmd->add_option("--update", update, "update operator")
            ->check(CLI::IsMember({"haar", "moment"}))
            ->capture_default_str();
        cmd->add_flag("--standardize", standardize, "standardize detail coefficients");
    }

    LiftingConfig config() const {
        LiftingConfig cfg;
        cfg.levels = srl;
        cfg.poly_order = order;
        cfg.bandwidth = parse_bandwidth(bandwidth);
        cfg.update = parse_update_mode(update);
        cfg.standardize = standardize;
        return cfg;
    }
};

struct TesOpts {
    std::string tes = "sure";
    std::string shrink = "soft";
    bool median_direct = false;
    bool per_level_sigma = false;

    void attach(CLI::App* cmd, bool with_tes = true) {
        if (with_tes)
            cmd->add_option("--tes", tes, "threshold estimation scheme")
                ->check(CLI::IsMember({"sure", "bayes", "median"}))
                ->capture_default_str();
        cmd->add_option("--shrink", shrink, "shrinkage mode")
            ->check(CLI::IsMember({"soft", "hard"}))
            ->capture_default_str();
        cmd->add_flag("--median-direct", median_direct,
                      "median tes thresholds at median(|g|) itself");
        cmd->add_flag("--per-level-sigma", per_level_sigma,
                      "re-estimate sigma on every band");
    }

    ThresholdScheme scheme() const {
        ThresholdScheme s;
        s.kind = parse_tes(tes);
        s.shrink = shrink == "hard" ? ShrinkMode::hard : ShrinkMode::soft;
        s.median_direct = median_direct;
        s.per_level_sigma = per_level_sigma;
        return s;
    }
};

double stddev(const std::vector<double>& x) {
    double mean = 0.0;
    for (double v : x)
        mean += v;
    mean /= static_cast<double>(x.size());
    double var = 0.0;
    for (double v : x)
        var += (v - mean) * (v - mean);
    return std::sqrt(var / static_cast<double>(x.size()));
}

void register_demo_plugin() {
    register_feature("demo", 2, [](const std::vector<double>& x) {
        double mn = x.front(), mx = x.front();
        for (double v : x) {
            mn = std::min(mn, v);
            mx = std::max(mx, v);
        }
        return std::vector<double>{stddev(x), mx - mn};
    });
}

std::string fmt_db(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

double snr_or_cap(const Signal& clean, const Signal& x) {
    try {
        return snr_vs_reference(clean, x).snr_db;
    } catch (const std::invalid_argument&) {
        return kSnrCapDb;  // residual is exactly zero
    }
}

}  // namespace

int main(int argc, char** argv) {
    register_demo_plugin();

    CLI::App app{"lifting-based multichannel signal denoising and decoding toolkit"};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file mirroring the long option names");

    // synth
    {
        auto* cmd = app.add_subcommand("synth", "generate a seeded synthetic dataset");
        auto out = std::make_shared<std::string>();
        auto spec = std::make_shared<SynthSpec>();
        cmd->add_option("--out", *out, "output dataset directory")->required();
        cmd->add_option("--fs", spec->fs, "sample rate in Hz")->capture_default_str();
        cmd->add_option("--duration", spec->duration_s, "record length in seconds")
            ->capture_default_str();
        cmd->add_option("--channels", spec->channels, "channel count")->capture_default_str();
        cmd->add_option("--classes", spec->n_classes, "number of burst classes")
            ->capture_default_str();
        cmd->add_option("--trials", spec->trials_per_class, "records per class")
            ->capture_default_str();
        cmd->add_option("--noise-sigma", spec->noise_sigma, "additive noise scale")
            ->capture_default_str();
        cmd->add_option("--input-snr-db", spec->input_snr_db,
                        "calibrate noise to this input snr instead");
        cmd->add_option("--rest-trials", spec->rest_trials, "extra noise-only records")
            ->capture_default_str();
        cmd->add_option("--seed", spec->rng_seed, "rng seed")->capture_default_str();
        cmd->callback([out, spec]() {
            Dataset d = synth_dataset(*spec);
            save_dataset(d, *out);
            std::printf("wrote %zu records to %s\n", d.records.size(), out->c_str());
        });
    }

    // decompose
    {
        auto* cmd = app.add_subcommand("decompose", "dump lifting coefficients as JSON");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto lift = std::make_shared<LiftOpts>();
        cmd->add_option("--in", *in, "input bundle")->required();
        cmd->add_option("--out", *out, "output JSON file")->required();
        lift->attach(cmd);
        cmd->callback([in, out, lift]() {
            Signal s = read_bundle(*in);
            std::vector<Decomposition> decs = forward_multichannel(s, lift->config());
            write_text_file(*out, decompositions_json(s.channel_ids, decs));
        });
    }

    // denoise
    {
        auto* cmd = app.add_subcommand("denoise", "lifting denoise a bundle");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto lift = std::make_shared<LiftOpts>();
        auto tes = std::make_shared<TesOpts>();
        auto forced = std::make_shared<std::optional<double>>();
        cmd->add_option("--in", *in, "input bundle")->required();
        cmd->add_option("--out", *out, "output bundle")->required();
        lift->attach(cmd);
        tes->attach(cmd);
        cmd->add_option("--threshold", *forced,
                        "force this threshold on every band (0 = round trip)");
        cmd->callback([in, out, lift, tes, forced]() {
            DenoiseConfig cfg;
            cfg.lifting = lift->config();
            cfg.scheme = tes->scheme();
            cfg.forced_threshold = *forced;
            write_bundle(denoise(read_bundle(*in), cfg), *out);
        });
    }

    // baseline
    {
        auto* cmd = app.add_subcommand("baseline", "reference denoisers");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto family = std::make_shared<std::string>("db4");
        auto levels = std::make_shared<int>(2);
        auto tes = std::make_shared<TesOpts>();
        (*tes).tes = "median";
        cmd->add_option("--in", *in, "input bundle")->required();
        cmd->add_option("--out", *out, "output bundle")->required();
        cmd->add_option("--family", *family, "baseline method")
            ->check(CLI::IsMember({"db4", "coif5", "orgdat"}))
            ->capture_default_str();
        cmd->add_option("--levels", *levels, "cascade depth")
            ->check(CLI::Range(1, 12))
            ->capture_default_str();
        tes->attach(cmd);
        cmd->callback([in, out, family, levels, tes]() {
            BaselineMethod m = *family == "orgdat"
                                   ? BaselineMethod::orgdat
                                   : (*family == "db4" ? BaselineMethod::db4
                                                       : BaselineMethod::coif5);
            write_bundle(baseline_denoise(read_bundle(*in), m, *levels, tes->scheme()),
                         *out);
        });
    }

    // features
    {
        auto* cmd = app.add_subcommand("features", "extract a feature table as CSV");
        auto data = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto set = std::make_shared<std::string>("feat1");
        auto deadzone = std::make_shared<double>(0.0);
        auto win = std::make_shared<WindowOpts>();
        cmd->add_option("--data", *data, "dataset directory")->required();
        cmd->add_option("--out", *out, "output CSV")->required();
        cmd->add_option("--set", *set, "feature set: feat1..feat4 or plugin:NAME")
            ->capture_default_str();
        cmd->add_option("--deadzone", *deadzone, "zero-crossing deadzone")
            ->capture_default_str();
        win->attach(cmd);
        cmd->callback([data, out, set, deadzone, win]() {
            Dataset d = load_dataset(*data);
            FeatureTable t = extract_features(d.labeled(), win->spec(),
                                              make_extractor(*set, *deadzone));
            write_text_file(*out, feature_table_csv(t));
        });
    }

    // train
    {
        auto* cmd = app.add_subcommand("train", "fit a classifier and save it as JSON");
        auto data = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto set = std::make_shared<std::string>("feat1");
        auto deadzone = std::make_shared<double>(0.0);
        auto win = std::make_shared<WindowOpts>();
        auto spec = std::make_shared<ClassifierSpec>();
        spec->rng_seed = 0;
        cmd->add_option("--data", *data, "dataset directory")->required();
        cmd->add_option("--out", *out, "output model JSON")->required();
        cmd->add_option("--set", *set, "feature set")->capture_default_str();
        cmd->add_option("--deadzone", *deadzone, "zero-crossing deadzone")
            ->capture_default_str();
        cmd->add_option("--classifier", spec->kind, "lda, knn or rf")
            ->check(CLI::IsMember({"lda", "knn", "rf"}))
            ->capture_default_str();
        cmd->add_option("--knn-k", spec->knn_k, "neighbors for knn")->capture_default_str();
        cmd->add_option("--rf-trees", spec->rf_trees, "trees for rf")->capture_default_str();
        cmd->add_option("--rf-max-depth", spec->rf_max_depth, "depth cap for rf trees");
        cmd->add_option("--ridge", spec->lda_ridge, "lda covariance ridge")
            ->capture_default_str();
        cmd->add_option("--seed", spec->rng_seed, "rng seed")->capture_default_str();
        win->attach(cmd);
        cmd->callback([data, out, set, deadzone, win, spec]() {
            Dataset d = load_dataset(*data);
            FeatureTable t = extract_features(d.labeled(), win->spec(),
                                              make_extractor(*set, *deadzone));
            auto model = fit(*spec, t);
            write_text_file(*out, model->to_json() + "\n");
        });
    }

    // eval
    {
        auto* cmd = app.add_subcommand("eval", "evaluate a saved model on a dataset");
        auto data = std::make_shared<std::string>();
        auto model_path = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto confusion_out = std::make_shared<std::string>();
        auto set = std::make_shared<std::string>("feat1");
        auto deadzone = std::make_shared<double>(0.0);
        auto win = std::make_shared<WindowOpts>();
        cmd->add_option("--data", *data, "dataset directory")->required();
        cmd->add_option("--model", *model_path, "model JSON from train")->required();
        cmd->add_option("--out", *out, "output report JSON")->required();
        cmd->add_option("--confusion-out", *confusion_out, "optional confusion CSV");
        cmd->add_option("--set", *set, "feature set")->capture_default_str();
        cmd->add_option("--deadzone", *deadzone, "zero-crossing deadzone")
            ->capture_default_str();
        win->attach(cmd);
        cmd->callback([data, model_path, out, confusion_out, set, deadzone, win]() {
            Dataset d = load_dataset(*data);
            FeatureTable t = extract_features(d.labeled(), win->spec(),
                                              make_extractor(*set, *deadzone));
            auto model = model_from_json(read_text_file(*model_path));
            std::vector<std::string> preds = model->predict(t.rows);
            std::set<std::string> order(t.labels.begin(), t.labels.end());
            order.insert(model->classes().begin(), model->classes().end());
            EvalReport report;
            report.cm = confusion(t.labels, preds,
                                  std::vector<std::string>(order.begin(), order.end()));
            report.metrics = macro_metrics(report.cm);
            write_text_file(*out, eval_report_json(report));
            if (!confusion_out->empty())
                write_text_file(*confusion_out, confusion_csv(report.cm));
        });
    }

    // grid
    {
        auto* cmd = app.add_subcommand(
            "grid", "sweep tes x srl x features x classifiers under grouped cv");
        auto data = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto opt = std::make_shared<GridOptions>();
        auto lift = std::make_shared<LiftOpts>();
        auto tes = std::make_shared<TesOpts>();
        auto deadzone = std::make_shared<double>(0.0);
        auto win = std::make_shared<WindowOpts>();
        auto spec = std::make_shared<ClassifierSpec>();
        spec->rng_seed = 0;
        cmd->add_option("--data", *data, "dataset directory")->required();
        cmd->add_option("--out", *out, "output CSV")->required();
        cmd->add_option("--tes", opt->tes, "tes axis")->delimiter(',')->capture_default_str();
        cmd->add_option("--srl", opt->srl, "srl axis")->delimiter(',')->capture_default_str();
        cmd->add_option("--features", opt->features, "feature-set axis")
            ->delimiter(',')
            ->capture_default_str();
        cmd->add_option("--classifiers", opt->classifiers, "classifier axis")
            ->delimiter(',')
            ->capture_default_str();
        lift->attach(cmd, false);
        tes->attach(cmd, false);
        cmd->add_option("--deadzone", *deadzone, "zero-crossing deadzone")
            ->capture_default_str();
        cmd->add_option("--folds", opt->cv_folds, "cv folds")->capture_default_str();
        cmd->add_option("--knn-k", spec->knn_k, "neighbors for knn")->capture_default_str();
        cmd->add_option("--rf-trees", spec->rf_trees, "trees for rf")->capture_default_str();
        cmd->add_option("--rf-max-depth", spec->rf_max_depth, "depth cap for rf trees");
        cmd->add_option("--ridge", spec->lda_ridge, "lda covariance ridge")
            ->capture_default_str();
        cmd->add_option("--seed", spec->rng_seed, "rng seed")->capture_default_str();
        win->attach(cmd);
        cmd->callback([data, out, opt, lift, tes, deadzone, win, spec]() {
            lift->srl = 1;  // placeholder; run_grid swaps in each srl value
            opt->lifting = lift->config();
            ThresholdScheme scheme = tes->scheme();
            opt->shrink = scheme.shrink;
            opt->median_direct = scheme.median_direct;
            opt->per_level_sigma = scheme.per_level_sigma;
            opt->window = win->spec();
            opt->classifier_spec = *spec;
            opt->deadzone = *deadzone;
            GridReport report = run_grid(load_dataset(*data).labeled(), *opt);
            write_text_file(*out, report.to_csv());
            std::printf("wrote %zu grid cells to %s\n", report.cells.size(), out->c_str());
        });
    }

    // snr
    {
        auto* cmd = app.add_subcommand("snr", "per-record snr table");
        auto data = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto denoised = std::make_shared<std::string>();
        cmd->add_option("--data", *data, "dataset directory")->required();
        cmd->add_option("--out", *out, "output CSV")->required();
        cmd->add_option("--denoised", *denoised,
                        "processed copy of the same dataset; adds output/gain columns");
        cmd->callback([data, out, denoised]() {
            Dataset base = load_dataset(*data);
            std::string csv;
            if (denoised->empty()) {
                csv = "trial_id,class_label,snr_db\n";
                for (const auto& rec : base.records) {
                    double v;
                    if (rec.clean)
                        v = snr_or_cap(*rec.clean, rec.signal);
                    else if (rec.active_range)
                        v = snr_from_signal(rec.signal, rec.activity_mask()).snr_db;
                    else
                        throw std::invalid_argument(
                            "record has neither a clean reference nor an activity mask: " +
                            rec.signal.trial_id);
                    csv += rec.signal.trial_id + "," + rec.signal.class_label + "," +
                           fmt_db(v) + "\n";
                }
            } else {
                Dataset proc = load_dataset(*denoised);
                if (proc.records.size() != base.records.size())
                    throw std::invalid_argument(
                        "processed dataset has a different record count");
                csv = "trial_id,class_label,input_snr_db,output_snr_db,gain_db\n";
                for (std::size_t i = 0; i < base.records.size(); ++i) {
                    const auto& rec = base.records[i];
                    if (!rec.clean)
                        throw std::invalid_argument("record has no clean reference: " +
                                                    rec.signal.trial_id);
                    const double in_db = snr_or_cap(*rec.clean, rec.signal);
                    const double out_db = snr_or_cap(*rec.clean, proc.records[i].signal);
                    csv += rec.signal.trial_id + "," + rec.signal.class_label + "," +
                           fmt_db(in_db) + "," + fmt_db(out_db) + "," +
                           fmt_db(out_db - in_db) + "\n";
                }
            }
            write_text_file(*out, csv);
        });
    }

    // energymap
    {
        auto* cmd = app.add_subcommand("energymap", "window x channel rms grid");
        auto in = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        auto svg_path = std::make_shared<std::string>();
        auto win = std::make_shared<WindowOpts>();
        cmd->add_option("--in", *in, "input bundle")->required();
        cmd->add_option("--out", *out, "output CSV")->required();
        cmd->add_option("--svg", *svg_path, "optional SVG heat map");
        win->attach(cmd);
        cmd->callback([in, out, svg_path, win]() {
            Signal s = read_bundle(*in);
            EnergyMap map = rms_energy_map(s, win->spec());
            write_text_file(*out, energy_map_csv(map));
            if (!svg_path->empty()) {
                std::vector<std::string> rows;
                for (std::size_t start : map.window_starts)
                    rows.push_back("w@" + std::to_string(start));
                write_text_file(*svg_path,
                                svg_heatmap(map.rms, rows, map.channel_ids, "rms energy"));
            }
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
