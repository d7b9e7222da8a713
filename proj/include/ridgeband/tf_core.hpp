#pragma once

#include "ridgeband/types.hpp"

namespace ridgeband {

/// Gaussian analysis window theta(n) = exp(-n^2 / 2L^2) / (sqrt(2 pi) L),
/// sampled on n in [-halfwidth, +halfwidth]. Index i maps to n = i - halfwidth.
std::vector<double> gaussian_window(const StftConfig& config);

/// Discrete-time STFT with the truncated Gaussian window; the signal is
/// zero-padded outside [0, N-1].
TimeFrequencyMap stft(const SampledSignal& signal, const StftConfig& config);

/// Squared modulus of the STFT coefficients.
RealMatrix spectrogram(const TimeFrequencyMap& tfr);

/// Least-squares window-compensated inversion:
///   x(l) = sum_n theta(n-l) sum_m F[n,m] e^{+j 2 pi l m / M} / (M * sum_n theta(n-l)^2)
SampledSignal istft(const TimeFrequencyMap& tfr);

/// Spectral kernel g(m) = (2 sqrt(pi) L / M) exp(-(2 pi m L / M)^2): the
/// normalized, discretized squared modulus of the window's Fourier transform.
double spectral_kernel(long offset, const StftConfig& config);

/// g evaluated at every circular signed bin distance. kernel[d] for
/// d in [0, M-1] holds g at signed distance (d <= M/2 ? d : d - M).
class KernelTable {
public:
    explicit KernelTable(const StftConfig& config);

    /// g at the circular distance between bins a and b.
    double at(long a, long b) const {
        long m = static_cast<long>(m_size);
        long d = (a - b) % m;
        if (d < 0) d += m;
        return m_values[static_cast<std::size_t>(d)];
    }

    double at_offset(long d) const {
        long m = static_cast<long>(m_size);
        d %= m;
        if (d < 0) d += m;
        return m_values[static_cast<std::size_t>(d)];
    }

    std::size_t size() const { return m_size; }
    double peak() const { return m_values[0]; }

private:
    std::size_t m_size;
    std::vector<double> m_values;
};

}  // namespace ridgeband
