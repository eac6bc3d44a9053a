#pragma once

#include <cstddef>
#include <vector>

#include "emglift/signal.hpp"
#include "emglift/thresholding.hpp"

namespace emglift {

enum class WaveletFamily { db4, coif5 };

// Orthonormal filter pair: h is the lowpass (sums to sqrt(2)), g its
// quadrature mirror g[m] = (-1)^m h[L-1-m]. Checked at first use.
struct WaveletFilter {
    std::vector<double> h;
    std::vector<double> g;
};

const WaveletFilter& wavelet_filter(WaveletFamily family);

struct WaveletBand {
    int depth = 1;  // 1 = finest
    std::vector<double> coeffs;
};

struct WaveletDecomposition {
    WaveletFamily family = WaveletFamily::db4;
    int levels = 0;
    std::size_t original_length = 0;
    double sample_rate_hz = 0.0;
    std::vector<double> coarse;
    std::vector<WaveletBand> details;  // coarse -> fine
};

// Periodized cascade; every stage needs an even input at least as long as the
// filter, and the overall length must be divisible by 2^levels.
WaveletDecomposition dwt_forward(const std::vector<double>& x, WaveletFamily family,
                                 int levels, double sample_rate_hz = 0.0);
std::vector<double> dwt_inverse(const WaveletDecomposition& d);

// Threshold every detail band and reconstruct. Sigma comes from the finest
// band unless the scheme asks for per-band estimates.
Signal wavelet_denoise(const Signal& s, WaveletFamily family, int levels,
                       const ThresholdScheme& scheme);

enum class BaselineMethod { db4, coif5, orgdat };

// orgdat returns the input untouched; the others run wavelet_denoise.
Signal baseline_denoise(const Signal& s, BaselineMethod method, int levels,
                        const ThresholdScheme& scheme);

}  // namespace emglift
