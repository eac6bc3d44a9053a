#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

#include "emglift/lifting.hpp"

using namespace emglift;

namespace {

Signal mono(std::vector<double> x, double fs = 1000.0) {
    Signal s;
    s.samples.push_back(std::move(x));
    s.sample_rate_hz = fs;
    return s;
}

Grid index_grid(std::size_t n) {
    Grid g;
    g.positions.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        g.positions[i] = static_cast<double>(i);
    return g;
}

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t n) {
    std::vector<double> x(n);
    for (auto& v : x)
        v = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
    return x;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::fabs(a[i] - b[i]));
    return m;
}

double max_abs(const std::vector<double>& a) {
    double m = 0.0;
    for (double v : a)
        m = std::max(m, std::fabs(v));
    return m;
}

double sum(const std::vector<double>& a) {
    double s = 0.0;
    for (double v : a)
        s += v;
    return s;
}

}  // namespace

TEST_SUITE("lifting") {

TEST_CASE("split interleaves by parity and keeps grids aligned") {
    auto sp = split({1.0, 3.0, 2.0, 4.0}, index_grid(4));
    CHECK(sp.even == std::vector<double>{1.0, 2.0});
    CHECK(sp.odd == std::vector<double>{3.0, 4.0});
    CHECK(sp.even_grid.positions == std::vector<double>{0.0, 2.0});
    CHECK(sp.odd_grid.positions == std::vector<double>{1.0, 3.0});

    auto sp3 = split({5.0, 6.0, 7.0}, index_grid(3));
    CHECK(sp3.even == std::vector<double>{5.0, 7.0});
    CHECK(sp3.odd == std::vector<double>{6.0});

    CHECK_THROWS_AS(split({7.0}, index_grid(1)), std::invalid_argument);
}

TEST_CASE("one-level transform of a short ramp") {
    LiftingConfig cfg;
    cfg.levels = 1;
    cfg.poly_order = 1;
    cfg.update = UpdateMode::haar;

    auto d = forward(mono({1.0, 3.0, 2.0, 4.0}), cfg);
    REQUIRE(d.details.size() == 1);
    CHECK(d.details[0].depth == 1);
    CHECK(d.details[0].coeffs == std::vector<double>{2.0, 2.0});
    CHECK(d.coarse == std::vector<double>{2.0, 3.0});
    CHECK(d.total_coefficients() == 4);

    auto back = inverse(d);
    CHECK(max_abs_diff(back.samples[0], {1.0, 3.0, 2.0, 4.0}) == 0.0);
}

TEST_CASE("moment-preserving update spreads each detail over brackets") {
    Grid even{{0.0, 2.0}};
    Grid odd{{1.0, 3.0}};
    auto upd = build_update(even, odd, UpdateMode::moment_preserving);
    REQUIRE(upd.rows.size() == 2);
    // detail 0 sits between both evens; detail 3 only has a left neighbour
    CHECK(upd.rows[0].idx == std::vector<int>{0});
    CHECK(upd.rows[0].w[0] == doctest::Approx(0.25));
    CHECK(upd.rows[1].idx == std::vector<int>{0, 1});
    CHECK(upd.rows[1].w[0] == doctest::Approx(0.25));
    CHECK(upd.rows[1].w[1] == doctest::Approx(0.5));

    LiftingConfig cfg;
    cfg.levels = 1;
    cfg.poly_order = 1;
    cfg.update = UpdateMode::moment_preserving;
    auto d = forward(mono({1.0, 3.0, 2.0, 4.0}), cfg);
    CHECK(d.details[0].coeffs == std::vector<double>{2.0, 2.0});
    CHECK(d.coarse[0] == doctest::Approx(1.5));
    CHECK(d.coarse[1] == doctest::Approx(3.5));
    CHECK(max_abs_diff(inverse(d).samples[0], {1.0, 3.0, 2.0, 4.0}) < 1e-15);
}

TEST_CASE("coarse sum carries the even sum plus half the detail sum") {
    std::mt19937_64 rng(11);
    for (UpdateMode mode : {UpdateMode::haar, UpdateMode::moment_preserving}) {
        auto x = random_vector(rng, 257);
        auto sp = split(x, index_grid(x.size()));
        LiftingConfig cfg;
        cfg.levels = 1;
        cfg.poly_order = 3;
        cfg.update = mode;
        auto d = forward(mono(x), cfg);
        const double expect = sum(sp.even) + 0.5 * sum(d.details[0].coeffs);
        CHECK(sum(d.coarse) == doctest::Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("trailing unpaired even sample passes through the haar update") {
    LiftingConfig cfg;
    cfg.levels = 1;
    cfg.poly_order = 2;
    std::vector<double> x{4.0, 1.0, -2.0, 0.5, 9.0};
    auto d = forward(mono(x), cfg);
    REQUIRE(d.coarse.size() == 3);
    CHECK(d.coarse[2] == 9.0);
}

TEST_CASE("boundary prediction extrapolates with a linear fit") {
    Grid even{{2.0, 4.0}};
    Grid odd{{5.0}};
    auto op = build_prediction(even, odd, 2, std::nullopt);
    REQUIRE(op.rows.size() == 1);
    CHECK(op.rows[0].idx == std::vector<int>{0, 1});
    CHECK(op.rows[0].w[0] == doctest::Approx(-0.5));
    CHECK(op.rows[0].w[1] == doctest::Approx(1.5));
    CHECK(op.normalization[0] == doctest::Approx(std::sqrt(1.0 + 0.25 + 2.25)));
}

TEST_CASE("auto stencil picks the nearest evens, ties to the left") {
    Grid even{{0.0, 2.0}};
    Grid odd{{1.0}};
    auto op = build_prediction(even, odd, 1, std::nullopt);
    CHECK(op.rows[0].idx == std::vector<int>{0});
    CHECK(op.rows[0].w[0] == doctest::Approx(1.0));

    Grid midpoint_odd{{1.0}};
    auto lin = build_prediction(even, midpoint_odd, 2, std::nullopt);
    CHECK(lin.rows[0].w[0] == doctest::Approx(0.5));
    CHECK(lin.rows[0].w[1] == doctest::Approx(0.5));
}

TEST_CASE("prediction refuses an empty even grid") {
    CHECK_THROWS_AS(build_prediction(Grid{}, Grid{{1.0}}, 1, std::nullopt),
                    std::invalid_argument);
}

TEST_CASE("fixed bandwidth widens the stencil into a least-squares fit") {
    // Effective radius at the first split is twice the configured base, so
    // 0.5 covers both unit-distance neighbours of every interior odd point.
    LiftingConfig cfg;
    cfg.levels = 1;
    cfg.poly_order = 1;
    cfg.bandwidth = 0.5;
    auto d = forward(mono({1.0, 3.0, 2.0, 4.0}), cfg);
    CHECK(d.details[0].coeffs[0] == doctest::Approx(1.5));  // 3 - avg(1, 2)
    CHECK(d.details[0].coeffs[1] == doctest::Approx(2.0));  // only one even in reach
    CHECK(d.coarse[0] == doctest::Approx(1.75));
    CHECK(d.coarse[1] == doctest::Approx(3.0));
    CHECK(max_abs_diff(inverse(d).samples[0], {1.0, 3.0, 2.0, 4.0}) < 1e-15);
}

TEST_CASE("too-narrow bandwidth falls back to the nearest-neighbour stencil") {
    std::mt19937_64 rng(5);
    auto x = random_vector(rng, 128);
    LiftingConfig narrow;
    narrow.levels = 2;
    narrow.poly_order = 3;
    narrow.bandwidth = 0.01;
    LiftingConfig autoband = narrow;
    autoband.bandwidth.reset();
    auto a = forward(mono(x), narrow);
    auto b = forward(mono(x), autoband);
    for (std::size_t k = 0; k < a.details.size(); ++k)
        CHECK(max_abs_diff(a.details[k].coeffs, b.details[k].coeffs) == 0.0);
}

TEST_CASE("base bandwidth doubles at each coarser split") {
    std::mt19937_64 rng(17);
    auto x = random_vector(rng, 8);
    LiftingConfig cfg;
    cfg.levels = 2;
    cfg.poly_order = 2;
    cfg.bandwidth = 0.5;
    auto d = forward(mono(x), cfg);

    // Replay the two stages by hand with the per-depth radii 1.0 and 2.0.
    auto sp1 = split(x, index_grid(8));
    auto p1 = build_prediction(sp1.even_grid, sp1.odd_grid, 2, 1.0);
    auto pred1 = apply_prediction(p1, sp1.even);
    std::vector<double> g1 = sp1.odd;
    std::vector<double> s1 = sp1.even;
    for (std::size_t j = 0; j < g1.size(); ++j) {
        g1[j] -= pred1[j];
        s1[j] += 0.5 * g1[j];
    }
    auto sp2 = split(s1, sp1.even_grid);
    auto p2 = build_prediction(sp2.even_grid, sp2.odd_grid, 2, 2.0);
    auto pred2 = apply_prediction(p2, sp2.even);
    std::vector<double> g2 = sp2.odd;
    for (std::size_t j = 0; j < g2.size(); ++j)
        g2[j] -= pred2[j];

    CHECK(max_abs_diff(d.details[1].coeffs, g1) == 0.0);
    CHECK(max_abs_diff(d.details[0].coeffs, g2) == 0.0);
}

TEST_CASE("prediction weight rows sum to one") {
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 20; ++trial) {
        Grid even, odd;
        double pos = 0.0;
        for (int i = 0; i < 24; ++i) {
            pos += 0.25 + static_cast<double>(rng() >> 11) * 0x1.0p-53;
            if (i % 2 == 0)
                even.positions.push_back(pos);
            else
                odd.positions.push_back(pos);
        }
        for (int order = 1; order <= 4; ++order) {
            for (auto bw : {std::optional<double>{}, std::optional<double>{1.5}}) {
                auto op = build_prediction(even, odd, order, bw);
                for (const auto& row : op.rows) {
                    double s = 0.0;
                    for (double w : row.w)
                        s += w;
                    CHECK(s == doctest::Approx(1.0).epsilon(1e-10));
                }
            }
        }
    }
}

TEST_CASE("polynomials below the fit degree leave zero details") {
    std::mt19937_64 rng(31);
    const std::size_t n = 256;
    for (int order = 1; order <= 4; ++order) {
        for (int degree = 0; degree < order; ++degree) {
            std::vector<double> coeff(static_cast<std::size_t>(degree) + 1);
            for (auto& c : coeff)
                c = 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
            std::vector<double> x(n);
            for (std::size_t i = 0; i < n; ++i) {
                const double u = static_cast<double>(i) / static_cast<double>(n);
                double acc = 0.0;
                for (std::size_t k = coeff.size(); k-- > 0;)
                    acc = acc * u + coeff[k];
                x[i] = acc;
            }
            LiftingConfig cfg;
            cfg.levels = 2;
            cfg.poly_order = order;
            auto d = forward(mono(x), cfg);
            for (const auto& band : d.details)
                CHECK(max_abs(band.coeffs) <= 1e-12);
        }
    }
}

TEST_CASE("transform is linear in the input") {
    std::mt19937_64 rng(37);
    auto x = random_vector(rng, 200);
    auto y = random_vector(rng, 200);
    std::vector<double> z(200);
    for (std::size_t i = 0; i < z.size(); ++i)
        z[i] = 2.0 * x[i] - 3.0 * y[i];

    LiftingConfig cfg;
    cfg.levels = 3;
    cfg.poly_order = 3;
    auto dx = forward(mono(x), cfg);
    auto dy = forward(mono(y), cfg);
    auto dz = forward(mono(z), cfg);
    for (std::size_t k = 0; k < dz.details.size(); ++k)
        for (std::size_t j = 0; j < dz.details[k].coeffs.size(); ++j)
            CHECK(dz.details[k].coeffs[j] ==
                  doctest::Approx(2.0 * dx.details[k].coeffs[j] -
                                  3.0 * dy.details[k].coeffs[j])
                      .epsilon(1e-10));
    for (std::size_t j = 0; j < dz.coarse.size(); ++j)
        CHECK(dz.coarse[j] ==
              doctest::Approx(2.0 * dx.coarse[j] - 3.0 * dy.coarse[j]).epsilon(1e-10));
}

TEST_CASE("standardized details are the raw ones over the residual norm") {
    std::mt19937_64 rng(41);
    auto x = random_vector(rng, 64);
    LiftingConfig raw;
    raw.levels = 1;
    raw.poly_order = 1;  // nearest neighbour: residual norm is sqrt(2) everywhere
    LiftingConfig std_cfg = raw;
    std_cfg.standardize = true;

    auto a = forward(mono(x), raw);
    auto b = forward(mono(x), std_cfg);
    for (std::size_t j = 0; j < a.details[0].coeffs.size(); ++j)
        CHECK(b.details[0].coeffs[j] ==
              doctest::Approx(a.details[0].coeffs[j] / std::sqrt(2.0)).epsilon(1e-12));
    CHECK(max_abs_diff(inverse(b).samples[0], x) < 1e-9);
}

TEST_CASE("round trip across lengths, depths, orders and update modes") {
    std::mt19937_64 rng(43);
    for (std::size_t n : {2u, 3u, 64u, 255u, 1024u}) {
        auto x = random_vector(rng, n);
        const double scale = std::max(1.0, max_abs(x));
        for (int levels : {1, 2, 3}) {
            if (n < (static_cast<std::size_t>(1) << levels))
                continue;
            for (int order : {1, 2, 3, 4}) {
                for (UpdateMode mode : {UpdateMode::haar, UpdateMode::moment_preserving}) {
                    LiftingConfig cfg;
                    cfg.levels = levels;
                    cfg.poly_order = order;
                    cfg.update = mode;
                    cfg.standardize = (order % 2 == 0);
                    if (order == 3)
                        cfg.bandwidth = 1.25;
                    auto d = forward(mono(x), cfg);
                    CHECK(d.total_coefficients() == n);
                    auto back = inverse(d);
                    CHECK(max_abs_diff(back.samples[0], x) <= 1e-9 * scale);
                }
            }
        }
    }
}

TEST_CASE("forward refuses signals shorter than 2^levels") {
    LiftingConfig cfg;
    cfg.levels = 3;
    CHECK_THROWS_WITH_AS(forward(mono({1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0}), cfg),
                         "insufficient length: need >= 2^levels samples",
                         std::invalid_argument);
}

TEST_CASE("config validation") {
    LiftingConfig cfg;
    cfg.levels = 0;
    CHECK_THROWS_AS(forward(mono({1.0, 2.0}), cfg), std::invalid_argument);
    cfg.levels = 1;
    cfg.poly_order = 0;
    CHECK_THROWS_AS(forward(mono({1.0, 2.0}), cfg), std::invalid_argument);
    cfg.poly_order = 1;
    cfg.bandwidth = -2.0;
    CHECK_THROWS_AS(forward(mono({1.0, 2.0}), cfg), std::invalid_argument);
}

TEST_CASE("tampered decompositions are rejected") {
    LiftingConfig cfg;
    cfg.levels = 2;
    cfg.poly_order = 2;
    std::mt19937_64 rng(47);
    auto x = random_vector(rng, 32);
    auto d = forward(mono(x), cfg);

    auto extra = d;
    extra.details[1].coeffs.push_back(0.0);
    extra.details[1].grid.positions.push_back(31.5);
    CHECK_THROWS_AS(inverse(extra), std::invalid_argument);

    auto mismatch = d;
    mismatch.coarse_grid.positions.pop_back();
    CHECK_THROWS_AS(inverse(mismatch), std::invalid_argument);

    auto ragged_band = d;
    ragged_band.details[0].grid.positions.pop_back();
    CHECK_THROWS_AS(inverse(ragged_band), std::invalid_argument);

    auto duplicate = d;
    duplicate.details[1].grid.positions[0] = duplicate.coarse_grid.positions[0];
    CHECK_THROWS_AS(inverse(duplicate), std::invalid_argument);
}

TEST_CASE("multichannel forward and inverse") {
    std::mt19937_64 rng(53);
    Signal s;
    s.sample_rate_hz = 1234.0;
    for (int c = 0; c < 3; ++c)
        s.samples.push_back(random_vector(rng, 96));

    LiftingConfig cfg;
    cfg.levels = 2;
    cfg.poly_order = 3;
    auto decs = forward_multichannel(s, cfg);
    REQUIRE(decs.size() == 3);
    for (const auto& d : decs)
        CHECK(d.sample_rate_hz == 1234.0);

    auto back = inverse_multichannel(decs);
    REQUIRE(back.channels() == 3);
    CHECK(back.channel_ids == std::vector<std::string>{"ch0", "ch1", "ch2"});
    CHECK(back.sample_rate_hz == 1234.0);
    for (int c = 0; c < 3; ++c)
        CHECK(max_abs_diff(back.samples[c], s.samples[c]) < 1e-9);

    CHECK(forward_multichannel(Signal{{}, 100.0, {}, "", "", ""}, cfg).empty());
}

}  // TEST_SUITE
