#include "doctest.h"

#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "emglift/metrics.hpp"

using namespace emglift;

namespace {

// Slow restatement of the one-vs-rest averages, used as the oracle.
MacroMetrics oracle_metrics(const std::vector<std::vector<std::size_t>>& m) {
    const std::size_t k = m.size();
    double total = 0.0;
    for (const auto& row : m)
        for (auto v : row)
            total += static_cast<double>(v);
    MacroMetrics out;
    double acc = 0.0, prec = 0.0, rec = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        double tp = 0.0, fp = 0.0, fn = 0.0, tn = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            for (std::size_t p = 0; p < k; ++p) {
                const double v = static_cast<double>(m[a][p]);
                if (a == c && p == c)
                    tp += v;
                else if (p == c)
                    fp += v;
                else if (a == c)
                    fn += v;
                else
                    tn += v;
            }
        }
        acc += (tp + tn) / total;
        prec += tp + fp > 0.0 ? tp / (tp + fp) : 0.0;
        rec += tp + fn > 0.0 ? tp / (tp + fn) : 0.0;
    }
    out.accuracy = acc / static_cast<double>(k);
    out.precision = prec / static_cast<double>(k);
    out.recall = rec / static_cast<double>(k);
    const double denom = out.precision + out.recall;
    out.fscore = denom > 0.0 ? 2.0 * out.precision * out.recall / denom : 0.0;
    return out;
}

ConfusionMatrix matrix_of(std::vector<std::vector<std::size_t>> counts) {
    ConfusionMatrix cm;
    for (std::size_t i = 0; i < counts.size(); ++i)
        cm.classes.push_back("k" + std::to_string(i));
    cm.counts = std::move(counts);
    return cm;
}

Signal one_channel(std::vector<double> x, double fs = 1000.0) {
    Signal s;
    s.samples.push_back(std::move(x));
    s.sample_rate_hz = fs;
    return s;
}

}  // namespace

TEST_SUITE("metrics") {

TEST_CASE("confusion counts are indexed actual then predicted") {
    std::vector<std::string> y_true{"a", "a", "a", "a", "b", "b", "b", "b", "b", "b"};
    std::vector<std::string> y_pred{"a", "a", "a", "b", "a", "a", "b", "b", "b", "b"};
    auto cm = confusion(y_true, y_pred, {"a", "b"});
    CHECK(cm.counts[0][0] == 3);
    CHECK(cm.counts[0][1] == 1);
    CHECK(cm.counts[1][0] == 2);
    CHECK(cm.counts[1][1] == 4);
    CHECK(cm.total() == 10);

    auto derived = confusion(y_true, y_pred);
    CHECK(derived.classes == std::vector<std::string>{"a", "b"});
    CHECK(derived.counts == cm.counts);

    CHECK_THROWS_AS(confusion(y_true, y_pred, {"a"}), std::invalid_argument);
    CHECK_THROWS_AS(confusion(y_true, y_pred, {"a", "a", "b"}), std::invalid_argument);
    CHECK_THROWS_AS(confusion({"a"}, {"a", "b"}, {"a", "b"}), std::invalid_argument);
}

TEST_CASE("macro averages on the binary worked example") {
    auto m = macro_metrics(matrix_of({{3, 1}, {2, 4}}));
    CHECK(m.accuracy == doctest::Approx(0.70).epsilon(1e-12));
    CHECK(m.precision == doctest::Approx(0.70).epsilon(1e-12));
    CHECK(m.recall == doctest::Approx(17.0 / 24.0).epsilon(1e-12));
    CHECK(m.fscore == doctest::Approx(0.7041).epsilon(1e-4));
}

TEST_CASE("perfect predictions score one everywhere") {
    auto m = macro_metrics(matrix_of({{5, 0, 0}, {0, 2, 0}, {0, 0, 7}}));
    CHECK(m.accuracy == doctest::Approx(1.0));
    CHECK(m.precision == doctest::Approx(1.0));
    CHECK(m.recall == doctest::Approx(1.0));
    CHECK(m.fscore == doctest::Approx(1.0));
}

TEST_CASE("macro averages agree with brute force on every small 3-class matrix") {
    std::vector<std::vector<std::size_t>> m(3, std::vector<std::size_t>(3, 0));
    std::size_t checked = 0;
    // every 3x3 count matrix with 1 <= total <= 6
    for (std::size_t budget = 1; budget <= 6; ++budget) {
        std::vector<std::size_t> flat(9, 0);
        // walk compositions of `budget` into 9 cells
        std::function<void(std::size_t, std::size_t)> rec =
            [&](std::size_t cell, std::size_t left) {
                if (cell == 8) {
                    flat[8] = left;
                    for (std::size_t i = 0; i < 9; ++i)
                        m[i / 3][i % 3] = flat[i];
                    auto got = macro_metrics(matrix_of(m));
                    auto want = oracle_metrics(m);
                    CHECK(std::fabs(got.accuracy - want.accuracy) <= 1e-12);
                    CHECK(std::fabs(got.precision - want.precision) <= 1e-12);
                    CHECK(std::fabs(got.recall - want.recall) <= 1e-12);
                    CHECK(std::fabs(got.fscore - want.fscore) <= 1e-12);
                    ++checked;
                    return;
                }
                for (std::size_t v = 0; v <= left; ++v) {
                    flat[cell] = v;
                    rec(cell + 1, left - v);
                }
            };
        rec(0, budget);
    }
    CHECK(checked == 5004);  // C(6+9,9) - 1 of them
}

TEST_CASE("class order permutations do not move the macro averages") {
    std::vector<std::string> y_true{"a", "b", "c", "a", "b", "c", "c", "a"};
    std::vector<std::string> y_pred{"a", "c", "c", "b", "b", "c", "a", "a"};
    auto base = macro_metrics(confusion(y_true, y_pred, {"a", "b", "c"}));
    auto perm = macro_metrics(confusion(y_true, y_pred, {"c", "a", "b"}));
    CHECK(base.accuracy == doctest::Approx(perm.accuracy).epsilon(1e-12));
    CHECK(base.precision == doctest::Approx(perm.precision).epsilon(1e-12));
    CHECK(base.recall == doctest::Approx(perm.recall).epsilon(1e-12));
    CHECK(base.fscore == doctest::Approx(perm.fscore).epsilon(1e-12));
}

TEST_CASE("weighted fscore uses the beta-squared mix") {
    auto cm = matrix_of({{3, 1}, {2, 4}});
    auto m = macro_metrics(cm, 2.0);
    const double p = m.precision, r = m.recall;
    CHECK(m.fscore == doctest::Approx(5.0 * p * r / (4.0 * p + r)).epsilon(1e-12));
    CHECK_THROWS_AS(macro_metrics(cm, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(macro_metrics(matrix_of({{0, 0}, {0, 0}})), std::invalid_argument);
    CHECK_THROWS_AS(macro_metrics(ConfusionMatrix{}), std::invalid_argument);
}

TEST_CASE("snr in decibels") {
    CHECK(snr_db(100.0, 1.0).snr_db == doctest::Approx(20.0));
    CHECK(snr_db(1.0, 1.0).snr_db == doctest::Approx(0.0));
    CHECK(snr_db(1.0, 4.0).snr_db == doctest::Approx(-10.0 * std::log10(4.0)));
    CHECK(snr_db(0.0, 1.0).p_signal == 0.0);
    CHECK_THROWS_AS(snr_db(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(snr_db(-1.0, 1.0), std::invalid_argument);

    // scaling both powers cancels
    CHECK(snr_db(7.0, 3.0).snr_db == doctest::Approx(snr_db(70.0, 30.0).snr_db));
}

TEST_CASE("activity-mask snr pools channels and guards both segments") {
    Signal s;
    s.sample_rate_hz = 100.0;
    s.samples = {{2.0, 2.0, 2.0, 1.0, 1.0}, {-2.0, -2.0, -2.0, -1.0, -1.0}};
    std::vector<bool> mask{true, true, true, false, false};
    auto r = snr_from_signal(s, mask);
    CHECK(r.p_signal == doctest::Approx(4.0));
    CHECK(r.p_noise == doctest::Approx(1.0));
    CHECK(r.snr_db == doctest::Approx(10.0 * std::log10(4.0)));

    CHECK_THROWS_AS(snr_from_signal(s, std::vector<bool>(4, true)),
                    std::invalid_argument);
    CHECK_THROWS_AS(snr_from_signal(s, std::vector<bool>(5, true)),
                    std::invalid_argument);
    CHECK_THROWS_AS(snr_from_signal(s, std::vector<bool>(5, false)),
                    std::invalid_argument);

    Signal silent_rest = s;
    silent_rest.samples[0][3] = silent_rest.samples[0][4] = 0.0;
    silent_rest.samples[1][3] = silent_rest.samples[1][4] = 0.0;
    CHECK_THROWS_AS(snr_from_signal(silent_rest, mask), std::invalid_argument);
}

TEST_CASE("reference-based snr uses the residual as noise") {
    Signal clean = one_channel({1.0, 1.0, 1.0, 1.0});
    Signal noisy = one_channel({1.1, 0.9, 1.1, 0.9});
    auto r = snr_vs_reference(clean, noisy);
    CHECK(r.p_signal == doctest::Approx(1.0));
    CHECK(r.p_noise == doctest::Approx(0.01));
    CHECK(r.snr_db == doctest::Approx(20.0));

    CHECK_THROWS_AS(snr_vs_reference(clean, clean), std::invalid_argument);
    CHECK_THROWS_AS(snr_vs_reference(clean, one_channel({1.0, 2.0})),
                    std::invalid_argument);
}

TEST_CASE("mean square pools every channel") {
    Signal s;
    s.samples = {{1.0, -1.0}, {2.0, 2.0}};
    s.sample_rate_hz = 10.0;
    CHECK(mean_square(s) == doctest::Approx(2.5));
}

TEST_CASE("rms energy map lays windows out by start sample") {
    Signal s = one_channel(std::vector<double>(1000, 2.0));
    s.channel_ids = {"m0"};
    auto map = rms_energy_map(s, WindowSpec{});
    CHECK(map.channel_ids == std::vector<std::string>{"m0"});
    REQUIRE(map.window_starts.size() == 6);
    CHECK(map.window_starts[0] == 0);
    CHECK(map.window_starts[5] == 750);
    for (const auto& row : map.rms)
        CHECK(row[0] == doctest::Approx(2.0));

    // a burst confined to one window dominates its row
    Signal burst = one_channel(std::vector<double>(1000, 0.1));
    for (std::size_t i = 300; i < 550; ++i)
        burst.samples[0][i] = 5.0;
    auto bm = rms_energy_map(burst, WindowSpec{});
    REQUIRE(bm.rms.size() == 6);
    std::size_t best = 0;
    for (std::size_t i = 1; i < bm.rms.size(); ++i)
        if (bm.rms[i][0] > bm.rms[best][0])
            best = i;
    CHECK(bm.window_starts[best] == 300);
}

}  // TEST_SUITE
