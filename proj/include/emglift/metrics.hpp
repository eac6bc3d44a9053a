#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "emglift/signal.hpp"

namespace emglift {

struct ConfusionMatrix {
    std::vector<std::string> classes;                // fixed order
    std::vector<std::vector<std::size_t>> counts;    // [actual][predicted]

    std::size_t total() const;
};

ConfusionMatrix confusion(const std::vector<std::string>& y_true,
                          const std::vector<std::string>& y_pred,
                          const std::vector<std::string>& class_order);
// Class order derived from the sorted union of both label streams.
ConfusionMatrix confusion(const std::vector<std::string>& y_true,
                          const std::vector<std::string>& y_pred);

struct MacroMetrics {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double fscore = 0.0;
    double beta = 1.0;
};

// One-vs-rest per class, averaged; classes with an empty denominator
// contribute 0. fscore combines the averaged precision/recall:
// (1+beta^2) P R / (beta^2 P + R).
MacroMetrics macro_metrics(const ConfusionMatrix& cm, double beta = 1.0);

struct EvalReport {
    ConfusionMatrix cm;
    MacroMetrics metrics;
};

struct SnrResult {
    double snr_db = 0.0;
    double p_signal = 0.0;
    double p_noise = 0.0;
};

SnrResult snr_db(double signal_power, double noise_power);

// Mask marks active samples; unmarked samples are the rest/noise reference.
SnrResult snr_from_signal(const Signal& s, const std::vector<bool>& activity_mask);

double mean_square(const Signal& s);

// Quality against a known clean reference: noise is the residual x - clean.
SnrResult snr_vs_reference(const Signal& clean, const Signal& x);

struct EnergyMap {
    std::vector<std::string> channel_ids;
    std::vector<std::size_t> window_starts;          // first sample of each window
    std::vector<std::vector<double>> rms;            // [window][channel]
};

EnergyMap rms_energy_map(const Signal& s, const WindowSpec& w);

}  // namespace emglift
