#include "emglift/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emglift {

namespace {

void check_config(const LiftingConfig& cfg) {
    if (cfg.levels < 1)
        throw std::invalid_argument("levels must be >= 1");
    if (cfg.levels > 60)
        throw std::invalid_argument("levels out of range");
    if (cfg.poly_order < 1)
        throw std::invalid_argument("poly_order must be >= 1");
    if (cfg.bandwidth && !(*cfg.bandwidth > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
}

std::optional<double> bandwidth_at_depth(const LiftingConfig& cfg, int depth) {
    if (!cfg.bandwidth)
        return std::nullopt;
    return *cfg.bandwidth * std::ldexp(1.0, depth);
}

// Grow [lo, hi) outward until it holds `count` points, preferring the nearer
// side and, on a distance tie, the left one.
void grow_to_count(const std::vector<double>& x, double x0, int count, int& lo, int& hi) {
    const int n = static_cast<int>(x.size());
    while (hi - lo < count) {
        bool take_left;
        if (lo == 0)
            take_left = false;
        else if (hi == n)
            take_left = true;
        else
            take_left = (x0 - x[lo - 1]) <= (x[hi] - x0);
        if (take_left)
            --lo;
        else
            ++hi;
    }
}

// Weights of the degree-(q-1) least-squares fit over x[lo..hi), evaluated at
// x0. Coordinates are shifted to x0 and scaled before solving, and with
// q == hi-lo the fit degenerates to Lagrange interpolation.
void fit_weights(const std::vector<double>& x, int lo, int hi, double x0, int q,
                 WeightRow& row) {
    const int m = hi - lo;
    row.idx.resize(m);
    row.w.assign(m, 0.0);
    for (int j = 0; j < m; ++j)
        row.idx[j] = lo + j;
    if (m == 1) {
        row.w[0] = 1.0;
        return;
    }
    if (q == m) {
        for (int j = 0; j < m; ++j) {
            double w = 1.0;
            for (int k = 0; k < m; ++k) {
                if (k == j)
                    continue;
                w *= (x0 - x[lo + k]) / (x[lo + j] - x[lo + k]);
            }
            row.w[j] = w;
        }
        return;
    }

    double scale = 0.0;
    for (int j = 0; j < m; ++j)
        scale = std::max(scale, std::fabs(x[lo + j] - x0));
    std::vector<double> t(m);
    for (int j = 0; j < m; ++j)
        t[j] = (x[lo + j] - x0) / scale;

    // Normal equations A z = e0 with A = V^T V over the monomial basis in t;
    // the weight row is then V z.
    std::vector<double> a(static_cast<std::size_t>(q) * q, 0.0);
    for (int j = 0; j < m; ++j) {
        double pj = 1.0;
        std::vector<double> phi(q);
        for (int d = 0; d < q; ++d) {
            phi[d] = pj;
            pj *= t[j];
        }
        for (int r = 0; r < q; ++r)
            for (int c = 0; c < q; ++c)
                a[static_cast<std::size_t>(r) * q + c] += phi[r] * phi[c];
    }
    std::vector<double> z(q, 0.0);
    z[0] = 1.0;  // e0: evaluate the fit at t = 0

    // Gaussian elimination with partial pivoting.
    std::vector<int> piv(q);
    for (int c = 0; c < q; ++c) {
        int p = c;
        for (int r = c + 1; r < q; ++r)
            if (std::fabs(a[static_cast<std::size_t>(r) * q + c]) >
                std::fabs(a[static_cast<std::size_t>(p) * q + c]))
                p = r;
        if (a[static_cast<std::size_t>(p) * q + c] == 0.0)
            throw std::runtime_error("prediction fit is singular");
        if (p != c) {
            for (int k = 0; k < q; ++k)
                std::swap(a[static_cast<std::size_t>(p) * q + k],
                          a[static_cast<std::size_t>(c) * q + k]);
            std::swap(z[p], z[c]);
        }
        const double d = a[static_cast<std::size_t>(c) * q + c];
        for (int r = c + 1; r < q; ++r) {
            const double f = a[static_cast<std::size_t>(r) * q + c] / d;
            if (f == 0.0)
                continue;
            for (int k = c; k < q; ++k)
                a[static_cast<std::size_t>(r) * q + k] -= f * a[static_cast<std::size_t>(c) * q + k];
            z[r] -= f * z[c];
        }
    }
    for (int c = q - 1; c >= 0; --c) {
        for (int k = c + 1; k < q; ++k)
            z[c] -= a[static_cast<std::size_t>(c) * q + k] * z[k];
        z[c] /= a[static_cast<std::size_t>(c) * q + c];
    }
    for (int j = 0; j < m; ++j) {
        double pj = 1.0, acc = 0.0;
        for (int d = 0; d < q; ++d) {
            acc += z[d] * pj;
            pj *= t[j];
        }
        row.w[j] = acc;
    }
}

std::vector<double> apply_update(const UpdateOperator& upd, const std::vector<double>& even,
                                 const std::vector<double>& details, double sign) {
    std::vector<double> out = even;
    for (std::size_t i = 0; i < upd.rows.size(); ++i) {
        const auto& row = upd.rows[i];
        double acc = 0.0;
        for (std::size_t k = 0; k < row.idx.size(); ++k)
            acc += row.w[k] * details[static_cast<std::size_t>(row.idx[k])];
        out[i] += sign * acc;
    }
    return out;
}

}  // namespace

std::size_t Decomposition::total_coefficients() const {
    std::size_t n = coarse.size();
    for (const auto& band : details)
        n += band.coeffs.size();
    return n;
}

SplitResult split(const std::vector<double>& coeffs, const Grid& grid) {
    if (coeffs.size() < 2)
        throw std::invalid_argument("cannot split: need at least 2 coefficients");
    if (grid.size() != coeffs.size())
        throw std::invalid_argument("grid length does not match coefficients");
    SplitResult out;
    out.even.reserve((coeffs.size() + 1) / 2);
    out.odd.reserve(coeffs.size() / 2);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
        if (i % 2 == 0) {
            out.even.push_back(coeffs[i]);
            out.even_grid.positions.push_back(grid[i]);
        } else {
            out.odd.push_back(coeffs[i]);
            out.odd_grid.positions.push_back(grid[i]);
        }
    }
    return out;
}

PredictionOperator build_prediction(const Grid& even_grid, const Grid& odd_grid,
                                    int poly_order, std::optional<double> bandwidth) {
    if (even_grid.empty())
        throw std::invalid_argument("prediction has no even-grid support");
    if (poly_order < 1)
        throw std::invalid_argument("poly_order must be >= 1");
    const auto& xe = even_grid.positions;
    const int n_even = static_cast<int>(xe.size());
    const int want = std::min(poly_order, n_even);

    PredictionOperator op;
    op.rows.resize(odd_grid.size());
    op.normalization.resize(odd_grid.size());
    for (std::size_t j = 0; j < odd_grid.size(); ++j) {
        const double x0 = odd_grid[j];
        int lo, hi;
        if (bandwidth) {
            lo = static_cast<int>(std::lower_bound(xe.begin(), xe.end(), x0 - *bandwidth) -
                                  xe.begin());
            hi = static_cast<int>(std::upper_bound(xe.begin(), xe.end(), x0 + *bandwidth) -
                                  xe.begin());
            if (hi - lo < want)
                grow_to_count(xe, x0, want, lo, hi);
        } else {
            lo = hi = static_cast<int>(std::upper_bound(xe.begin(), xe.end(), x0) - xe.begin());
            grow_to_count(xe, x0, want, lo, hi);
        }
        const int q = std::min(poly_order, hi - lo);
        fit_weights(xe, lo, hi, x0, q, op.rows[j]);
        double ss = 0.0;
        for (double w : op.rows[j].w)
            ss += w * w;
        op.normalization[j] = std::sqrt(1.0 + ss);
    }
    return op;
}

UpdateOperator build_update(const Grid& even_grid, const Grid& odd_grid, UpdateMode mode) {
    UpdateOperator op;
    op.rows.resize(even_grid.size());
    if (mode == UpdateMode::haar) {
        // Pairwise: detail j belongs to even j; a trailing unpaired even
        // sample receives no update.
        for (std::size_t j = 0; j < odd_grid.size(); ++j) {
            op.rows[j].idx.push_back(static_cast<int>(j));
            op.rows[j].w.push_back(0.5);
        }
        return op;
    }
    const auto& xe = even_grid.positions;
    for (std::size_t j = 0; j < odd_grid.size(); ++j) {
        const double x0 = odd_grid[j];
        const int right =
            static_cast<int>(std::upper_bound(xe.begin(), xe.end(), x0) - xe.begin());
        const int left = right - 1;
        if (left >= 0 && right < static_cast<int>(xe.size())) {
            const double alpha = (x0 - xe[left]) / (xe[right] - xe[left]);
            op.rows[left].idx.push_back(static_cast<int>(j));
            op.rows[left].w.push_back(0.5 * (1.0 - alpha));
            op.rows[right].idx.push_back(static_cast<int>(j));
            op.rows[right].w.push_back(0.5 * alpha);
        } else {
            const int only = left >= 0 ? left : right;
            op.rows[only].idx.push_back(static_cast<int>(j));
            op.rows[only].w.push_back(0.5);
        }
    }
    return op;
}

std::vector<double> apply_prediction(const PredictionOperator& op,
                                     const std::vector<double>& even) {
    std::vector<double> out(op.rows.size(), 0.0);
    for (std::size_t j = 0; j < op.rows.size(); ++j) {
        const auto& row = op.rows[j];
        double acc = 0.0;
        for (std::size_t k = 0; k < row.idx.size(); ++k)
            acc += row.w[k] * even[static_cast<std::size_t>(row.idx[k])];
        out[j] = acc;
    }
    return out;
}

Decomposition forward(const Signal& s, const LiftingConfig& cfg) {
    check_config(cfg);
    if (s.channels() == 0)
        throw std::invalid_argument("forward: signal has no channels");
    const auto& x = s.samples.front();
    const std::size_t min_len = static_cast<std::size_t>(1) << cfg.levels;
    if (x.size() < min_len)
        throw std::invalid_argument("insufficient length: need >= 2^levels samples");

    Decomposition d;
    d.config = cfg;
    d.original_length = x.size();
    d.sample_rate_hz = s.sample_rate_hz;

    std::vector<double> coeffs = x;
    Grid grid;
    grid.positions.resize(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        grid.positions[i] = static_cast<double>(i);

    for (int depth = 1; depth <= cfg.levels; ++depth) {
        SplitResult sp = split(coeffs, grid);
        PredictionOperator pred = build_prediction(sp.even_grid, sp.odd_grid, cfg.poly_order,
                                                   bandwidth_at_depth(cfg, depth));
        std::vector<double> g = sp.odd;
        std::vector<double> predicted = apply_prediction(pred, sp.even);
        for (std::size_t j = 0; j < g.size(); ++j)
            g[j] -= predicted[j];
        if (cfg.standardize)
            for (std::size_t j = 0; j < g.size(); ++j)
                g[j] /= pred.normalization[j];
        UpdateOperator upd = build_update(sp.even_grid, sp.odd_grid, cfg.update);
        coeffs = apply_update(upd, sp.even, g, +1.0);
        grid = sp.even_grid;

        DetailBand band;
        band.depth = depth;
        band.coeffs = std::move(g);
        band.grid = std::move(sp.odd_grid);
        d.details.push_back(std::move(band));
    }
    std::reverse(d.details.begin(), d.details.end());  // coarse -> fine
    d.coarse = std::move(coeffs);
    d.coarse_grid = std::move(grid);
    return d;
}

Signal inverse(const Decomposition& d) {
    check_config(d.config);
    if (d.coarse.size() != d.coarse_grid.size())
        throw std::invalid_argument("corrupt decomposition: coarse/grid size mismatch");
    if (d.total_coefficients() != d.original_length)
        throw std::invalid_argument("corrupt decomposition: coefficient count mismatch");

    std::vector<double> s = d.coarse;
    Grid grid = d.coarse_grid;
    for (const auto& band : d.details) {
        if (band.coeffs.size() != band.grid.size() || band.coeffs.empty())
            throw std::invalid_argument("corrupt decomposition: band size mismatch");
        PredictionOperator pred = build_prediction(grid, band.grid, d.config.poly_order,
                                                   bandwidth_at_depth(d.config, band.depth));
        UpdateOperator upd = build_update(grid, band.grid, d.config.update);
        std::vector<double> even = apply_update(upd, s, band.coeffs, -1.0);
        std::vector<double> odd = band.coeffs;
        if (d.config.standardize)
            for (std::size_t j = 0; j < odd.size(); ++j)
                odd[j] *= pred.normalization[j];
        std::vector<double> predicted = apply_prediction(pred, even);
        for (std::size_t j = 0; j < odd.size(); ++j)
            odd[j] += predicted[j];

        // Interleave by position.
        std::vector<double> merged;
        Grid merged_grid;
        merged.reserve(even.size() + odd.size());
        merged_grid.positions.reserve(even.size() + odd.size());
        std::size_t ie = 0, io = 0;
        while (ie < even.size() || io < odd.size()) {
            bool take_even;
            if (ie == even.size())
                take_even = false;
            else if (io == odd.size())
                take_even = true;
            else if (grid[ie] == band.grid[io])
                throw std::invalid_argument("corrupt decomposition: duplicate grid position");
            else
                take_even = grid[ie] < band.grid[io];
            if (take_even) {
                merged.push_back(even[ie]);
                merged_grid.positions.push_back(grid[ie]);
                ++ie;
            } else {
                merged.push_back(odd[io]);
                merged_grid.positions.push_back(band.grid[io]);
                ++io;
            }
        }
        s = std::move(merged);
        grid = std::move(merged_grid);
    }
    if (s.size() != d.original_length)
        throw std::invalid_argument("corrupt decomposition: reconstructed length mismatch");

    Signal out;
    out.samples.push_back(std::move(s));
    out.sample_rate_hz = d.sample_rate_hz > 0.0 ? d.sample_rate_hz : 1.0;
    out.channel_ids = {"ch0"};
    return out;
}

std::vector<Decomposition> forward_multichannel(const Signal& s, const LiftingConfig& cfg) {
    std::vector<Decomposition> out;
    out.reserve(s.channels());
    for (std::size_t c = 0; c < s.channels(); ++c) {
        Signal mono;
        mono.samples.push_back(s.samples[c]);
        mono.sample_rate_hz = s.sample_rate_hz;
        out.push_back(forward(mono, cfg));
    }
    return out;
}

Signal inverse_multichannel(const std::vector<Decomposition>& per_channel) {
    Signal out;
    for (std::size_t c = 0; c < per_channel.size(); ++c) {
        Signal mono = inverse(per_channel[c]);
        if (c == 0)
            out.sample_rate_hz = mono.sample_rate_hz;
        out.samples.push_back(std::move(mono.samples.front()));
        out.channel_ids.push_back("ch" + std::to_string(c));
    }
    if (per_channel.empty())
        out.sample_rate_hz = 1.0;
    return out;
}

}  // namespace emglift
