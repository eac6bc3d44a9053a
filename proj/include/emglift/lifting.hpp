#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "emglift/signal.hpp"

namespace emglift {

enum class UpdateMode {
    haar,              // each detail updates its co-located even sample with weight 1/2
    moment_preserving  // each detail spreads weight 1/2 over the bracketing even samples
};

struct LiftingConfig {
    int levels = 2;      // number of split/predict/update stages
    int poly_order = 3;  // prediction fits a polynomial of degree poly_order - 1
    // Fixed base bandwidth h0 in index units, doubled at each coarser level.
    // Unset means auto: the stencil is the poly_order nearest even neighbours.
    std::optional<double> bandwidth;
    UpdateMode update = UpdateMode::haar;
    bool standardize = false;  // divide each detail by its residual-row norm
};

// Sparse row: weights over a small set of neighbour indices.
struct WeightRow {
    std::vector<int> idx;
    std::vector<double> w;
};

// One row per odd point, predicting it from even-side values. normalization
// holds sqrt(1 + sum w^2) per row, the detail scale used when standardizing.
struct PredictionOperator {
    std::vector<WeightRow> rows;
    std::vector<double> normalization;
};

// One row per even point, accumulating detail contributions into the coarse
// branch. Every detail's total weight across rows is exactly 1/2, so
// sum(coarse) == sum(even) + 1/2 * sum(details) in both modes.
struct UpdateOperator {
    std::vector<WeightRow> rows;
};

struct SplitResult {
    std::vector<double> even;
    Grid even_grid;
    std::vector<double> odd;
    Grid odd_grid;
};

struct DetailBand {
    int depth = 1;  // 1 = finest split
    std::vector<double> coeffs;
    Grid grid;  // odd-sample positions, original index units
};

struct Decomposition {
    std::vector<double> coarse;
    Grid coarse_grid;
    std::vector<DetailBand> details;  // ordered coarse -> fine
    LiftingConfig config;
    std::size_t original_length = 0;
    double sample_rate_hz = 0.0;

    std::size_t total_coefficients() const;
};

// Even indices {0,2,...} vs odd {1,3,...}, grids partitioned the same way.
SplitResult split(const std::vector<double>& coeffs, const Grid& grid);

// Least-squares local polynomial fit of even-grid values, evaluated at each
// odd location. With the auto rule (bandwidth unset) the stencil is exactly
// poly_order points and the fit reduces to interpolation. A fixed bandwidth
// takes every even point within distance h, expanding to the poly_order
// nearest when fewer are covered. Distance ties prefer the left neighbour.
PredictionOperator build_prediction(const Grid& even_grid, const Grid& odd_grid,
                                    int poly_order, std::optional<double> bandwidth);

UpdateOperator build_update(const Grid& even_grid, const Grid& odd_grid, UpdateMode mode);

std::vector<double> apply_prediction(const PredictionOperator& op,
                                     const std::vector<double>& even);

// Single-channel transform pair. forward consumes channel 0 of s.
Decomposition forward(const Signal& s, const LiftingConfig& cfg);
Signal inverse(const Decomposition& d);

std::vector<Decomposition> forward_multichannel(const Signal& s, const LiftingConfig& cfg);
Signal inverse_multichannel(const std::vector<Decomposition>& per_channel);

}  // namespace emglift
