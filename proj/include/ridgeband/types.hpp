#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace ridgeband {

using Complex = std::complex<double>;
using SampledSignal = std::vector<Complex>;

/// Row-major real matrix.
struct RealMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    RealMatrix() = default;
    RealMatrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const double& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Row-major complex matrix.
struct ComplexMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Complex> data;

    ComplexMatrix() = default;
    ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    Complex& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

/// Analysis parameters for the Gaussian-window STFT.
struct StftConfig {
    std::size_t n_samples = 0;       ///< N, signal length
    std::size_t n_bins = 0;          ///< M, frequency bins
    double time_spread = 0.0;        ///< L, window time spread in samples
    std::size_t window_halfwidth = 0;///< truncation radius of the window

    void validate() const {
        if (n_samples < 1) throw std::invalid_argument("StftConfig: n_samples must be >= 1");
        if (n_bins < 2) throw std::invalid_argument("StftConfig: n_bins must be >= 2");
        if (!(time_spread > 0.0)) throw std::invalid_argument("StftConfig: time_spread must be > 0");
        if (window_halfwidth < static_cast<std::size_t>(std::ceil(4.0 * time_spread)))
            throw std::invalid_argument("StftConfig: window_halfwidth must be >= ceil(4L)");
    }
};

/// StftConfig with the default window truncation at ceil(4L).
inline StftConfig make_stft_config(std::size_t n_samples, std::size_t n_bins, double time_spread) {
    StftConfig cfg;
    cfg.n_samples = n_samples;
    cfg.n_bins = n_bins;
    cfg.time_spread = time_spread;
    cfg.window_halfwidth = static_cast<std::size_t>(std::ceil(4.0 * time_spread));
    cfg.validate();
    return cfg;
}

/// STFT coefficients together with the configuration that produced them.
struct TimeFrequencyMap {
    ComplexMatrix coefficients; ///< N x M
    StftConfig config;
};

}  // namespace ridgeband
