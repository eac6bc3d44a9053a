#include "emglift/wavelet.hpp"

#include <cmath>
#include <stdexcept>

namespace emglift {

namespace {

// 8-tap Daubechies lowpass, least-asymmetric ordering not applied (classic
// extremal-phase orientation), normalized to sum sqrt(2).
const std::vector<double> kDb4 = {
    +2.30377813308896506e-01, +7.14846570552915672e-01, +6.30880767929858921e-01,
    -2.79837694168598543e-02, -1.87034811719093086e-01, +3.08413818355607640e-02,
    +3.28830116668851966e-02, -1.05974017850690317e-02,
};

// 30-tap Coiflet lowpass with 10 vanishing moments on both the wavelet and
// (shifted) scaling sides.
const std::vector<double> kCoif5 = {
    -2.12081862067494000e-04, +3.58577741161757678e-04, +2.17829437784569473e-03,
    -4.15931262757864018e-03, -1.01315848469002764e-02, +2.34083221189277831e-02,
    +2.81697442705323535e-02, -9.19215880600860874e-02, -5.20466702535547637e-02,
    +4.21571266730754346e-01, +7.74293622860327435e-01, +4.37982306659163378e-01,
    -6.20377515749819600e-02, -1.05563151307337233e-01, +4.12875304721178338e-02,
    +3.26747994670573555e-02, -1.97583916009654650e-02, -9.15950733867616253e-03,
    +6.76152022062041693e-03, +2.43157544253828862e-03, -1.66162730392987882e-03,
    -6.37558926125881154e-04, +3.01857941668244784e-04, +1.40356328123732431e-04,
    -4.12198619242655010e-05, -2.12702216725156143e-05, +3.70072771133947962e-06,
    +2.06122039857887835e-06, -1.62379951720483376e-07, -9.60401011276789415e-08,
};

WaveletFilter make_filter(const std::vector<double>& h) {
    WaveletFilter f;
    f.h = h;
    const std::size_t L = h.size();
    f.g.resize(L);
    for (std::size_t m = 0; m < L; ++m)
        f.g[m] = (m % 2 == 0 ? 1.0 : -1.0) * h[L - 1 - m];

    double sum = 0.0;
    for (double v : h)
        sum += v;
    if (std::fabs(sum - std::sqrt(2.0)) > 1e-10)
        throw std::runtime_error("wavelet filter does not sum to sqrt(2)");
    for (std::size_t shift = 0; shift < L / 2; ++shift) {
        double dot = 0.0;
        for (std::size_t m = 0; m + 2 * shift < L; ++m)
            dot += h[m] * h[m + 2 * shift];
        const double want = shift == 0 ? 1.0 : 0.0;
        if (std::fabs(dot - want) > 1e-10)
            throw std::runtime_error("wavelet filter fails shift orthogonality");
    }
    return f;
}

const WaveletFilter& filter_db4() {
    static const WaveletFilter f = make_filter(kDb4);
    return f;
}

const WaveletFilter& filter_coif5() {
    static const WaveletFilter f = make_filter(kCoif5);
    return f;
}

void analysis_step(const std::vector<double>& x, const WaveletFilter& f,
                   std::vector<double>& approx, std::vector<double>& detail) {
    const std::size_t n = x.size();
    const std::size_t half = n / 2;
    const std::size_t L = f.h.size();
    approx.assign(half, 0.0);
    detail.assign(half, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        double a = 0.0, d = 0.0;
        for (std::size_t m = 0; m < L; ++m) {
            const double v = x[(2 * k + m) % n];
            a += f.h[m] * v;
            d += f.g[m] * v;
        }
        approx[k] = a;
        detail[k] = d;
    }
}

std::vector<double> synthesis_step(const std::vector<double>& approx,
                                   const std::vector<double>& detail,
                                   const WaveletFilter& f) {
    const std::size_t half = approx.size();
    const std::size_t n = 2 * half;
    const std::size_t L = f.h.size();
    std::vector<double> x(n, 0.0);
    for (std::size_t k = 0; k < half; ++k) {
        for (std::size_t m = 0; m < L; ++m)
            x[(2 * k + m) % n] += f.h[m] * approx[k] + f.g[m] * detail[k];
    }
    return x;
}

}  // namespace

const WaveletFilter& wavelet_filter(WaveletFamily family) {
    return family == WaveletFamily::db4 ? filter_db4() : filter_coif5();
}

WaveletDecomposition dwt_forward(const std::vector<double>& x, WaveletFamily family,
                                 int levels, double sample_rate_hz) {
    if (levels < 1 || levels > 60)
        throw std::invalid_argument("levels must be >= 1");
    const std::size_t block = static_cast<std::size_t>(1) << levels;
    if (x.empty() || x.size() % block != 0)
        throw std::invalid_argument("length must be a positive multiple of 2^levels");
    const WaveletFilter& f = wavelet_filter(family);

    WaveletDecomposition d;
    d.family = family;
    d.levels = levels;
    d.original_length = x.size();
    d.sample_rate_hz = sample_rate_hz;

    std::vector<double> cur = x;
    for (int depth = 1; depth <= levels; ++depth) {
        if (cur.size() < f.h.size())
            throw std::invalid_argument("signal too short for the filter at this depth");
        std::vector<double> approx, detail;
        analysis_step(cur, f, approx, detail);
        WaveletBand band;
        band.depth = depth;
        band.coeffs = std::move(detail);
        d.details.insert(d.details.begin(), std::move(band));
        cur = std::move(approx);
    }
    d.coarse = std::move(cur);
    return d;
}

std::vector<double> dwt_inverse(const WaveletDecomposition& d) {
    const WaveletFilter& f = wavelet_filter(d.family);
    std::vector<double> cur = d.coarse;
    for (const auto& band : d.details) {
        if (band.coeffs.size() != cur.size())
            throw std::invalid_argument("corrupt decomposition: band size mismatch");
        cur = synthesis_step(cur, band.coeffs, f);
    }
    if (cur.size() != d.original_length)
        throw std::invalid_argument("corrupt decomposition: reconstructed length mismatch");
    return cur;
}

Signal wavelet_denoise(const Signal& s, WaveletFamily family, int levels,
                       const ThresholdScheme& scheme) {
    if (auto v = validate_signal(s); !v)
        throw std::invalid_argument(v.issue);
    Signal out = s;
    for (std::size_t c = 0; c < s.channels(); ++c) {
        WaveletDecomposition d = dwt_forward(s.samples[c], family, levels, s.sample_rate_hz);
        const double sigma_ref = estimate_sigma(d.details.back().coeffs);
        for (auto& band : d.details) {
            const double sigma =
                scheme.per_level_sigma ? estimate_sigma(band.coeffs) : sigma_ref;
            const double t = threshold_for(band.coeffs, sigma, scheme);
            shrink_inplace(band.coeffs, t, scheme.shrink);
        }
        out.samples[c] = dwt_inverse(d);
    }
    return out;
}

Signal baseline_denoise(const Signal& s, BaselineMethod method, int levels,
                        const ThresholdScheme& scheme) {
    switch (method) {
        case BaselineMethod::orgdat:
            return s;
        case BaselineMethod::db4:
            return wavelet_denoise(s, WaveletFamily::db4, levels, scheme);
        case BaselineMethod::coif5:
            return wavelet_denoise(s, WaveletFamily::coif5, levels, scheme);
    }
    throw std::invalid_argument("unknown baseline method");
}

}  // namespace emglift
