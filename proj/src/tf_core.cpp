#include "ridgeband/tf_core.hpp"

#include <numbers>

namespace ridgeband {

namespace {

// e^{-j 2 pi k / M} for k in [0, M-1]
std::vector<Complex> twiddle_table(std::size_t m_bins, double sign) {
    std::vector<Complex> table(m_bins);
    for (std::size_t k = 0; k < m_bins; ++k) {
        double angle = sign * 2.0 * std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(m_bins);
        table[k] = Complex(std::cos(angle), std::sin(angle));
    }
    return table;
}

}  // namespace

std::vector<double> gaussian_window(const StftConfig& config) {
    config.validate();
    const double L = config.time_spread;
    const long H = static_cast<long>(config.window_halfwidth);
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * L);
    std::vector<double> window(static_cast<std::size_t>(2 * H + 1));
    for (long n = -H; n <= H; ++n) {
        double t = static_cast<double>(n) / L;
        window[static_cast<std::size_t>(n + H)] = norm * std::exp(-0.5 * t * t);
    }
    return window;
}

TimeFrequencyMap stft(const SampledSignal& signal, const StftConfig& config) {
    config.validate();
    const std::size_t N = config.n_samples;
    const std::size_t M = config.n_bins;
    if (signal.size() != N)
        throw std::invalid_argument("stft: signal length does not match config.n_samples");

    const long H = static_cast<long>(config.window_halfwidth);
    const std::vector<double> window = gaussian_window(config);
    const std::vector<Complex> twiddle = twiddle_table(M, -1.0);

    TimeFrequencyMap tfr;
    tfr.config = config;
    tfr.coefficients = ComplexMatrix(N, M);

    for (long n = 0; n < static_cast<long>(N); ++n) {
        const long l_lo = std::max<long>(0, n - H);
        const long l_hi = std::min<long>(static_cast<long>(N) - 1, n + H);
        Complex* row = &tfr.coefficients(static_cast<std::size_t>(n), 0);
        for (long l = l_lo; l <= l_hi; ++l) {
            const Complex weighted =
                signal[static_cast<std::size_t>(l)] * window[static_cast<std::size_t>(n - l + H)];
            if (weighted == Complex(0.0, 0.0)) continue;
            std::size_t phase = 0;
            const std::size_t step = static_cast<std::size_t>(l) % M;
            for (std::size_t m = 0; m < M; ++m) {
                row[m] += weighted * twiddle[phase];
                phase += step;
                if (phase >= M) phase -= M;
            }
        }
    }
    return tfr;
}

RealMatrix spectrogram(const TimeFrequencyMap& tfr) {
    RealMatrix s(tfr.coefficients.rows, tfr.coefficients.cols);
    for (std::size_t i = 0; i < tfr.coefficients.data.size(); ++i)
        s.data[i] = std::norm(tfr.coefficients.data[i]);
    return s;
}

SampledSignal istft(const TimeFrequencyMap& tfr) {
    const StftConfig& config = tfr.config;
    config.validate();
    const std::size_t N = config.n_samples;
    const std::size_t M = config.n_bins;
    if (tfr.coefficients.rows != N || tfr.coefficients.cols != M)
        throw std::invalid_argument("istft: coefficient dimensions do not match config");

    const long H = static_cast<long>(config.window_halfwidth);
    const std::vector<double> window = gaussian_window(config);
    const std::vector<Complex> twiddle = twiddle_table(M, +1.0);

    SampledSignal out(N, Complex(0.0, 0.0));
    for (long l = 0; l < static_cast<long>(N); ++l) {
        const long n_lo = std::max<long>(0, l - H);
        const long n_hi = std::min<long>(static_cast<long>(N) - 1, l + H);
        double norm = 0.0;
        Complex acc(0.0, 0.0);
        const std::size_t step = static_cast<std::size_t>(l) % M;
        for (long n = n_lo; n <= n_hi; ++n) {
            const double w = window[static_cast<std::size_t>(n - l + H)];
            norm += w * w;
            const Complex* row = &tfr.coefficients(static_cast<std::size_t>(n), 0);
            Complex inner(0.0, 0.0);
            std::size_t phase = 0;
            for (std::size_t m = 0; m < M; ++m) {
                inner += row[m] * twiddle[phase];
                phase += step;
                if (phase >= M) phase -= M;
            }
            acc += inner * w;
        }
        if (norm <= 0.0)
            throw std::runtime_error("istft: zero window normalizer at sample " + std::to_string(l));
        out[static_cast<std::size_t>(l)] = acc / (static_cast<double>(M) * norm);
    }
    return out;
}

double spectral_kernel(long offset, const StftConfig& config) {
    const double L = config.time_spread;
    const double M = static_cast<double>(config.n_bins);
    const double arg = 2.0 * std::numbers::pi * static_cast<double>(offset) * L / M;
    return (2.0 * std::sqrt(std::numbers::pi) * L / M) * std::exp(-arg * arg);
}

KernelTable::KernelTable(const StftConfig& config) : m_size(config.n_bins) {
    m_values.resize(m_size);
    const long m = static_cast<long>(m_size);
    for (long d = 0; d < m; ++d) {
        long signed_d = (d <= m / 2) ? d : d - m;
        m_values[static_cast<std::size_t>(d)] = spectral_kernel(signed_d, config);
    }
}

}  // namespace ridgeband
