#pragma once

#include "ridgeband/types.hpp"

#include <cstdint>
#include <string>

namespace ridgeband {

/// One AM-FM component sampled on n in [0, N-1].
struct ModeSpec {
    std::vector<double> amplitude;  ///< a(n) >= 0
    std::vector<double> phase;      ///< phi(n), radians
    std::vector<double> inst_freq;  ///< phi'(n) / 2pi, normalized frequency

    std::size_t size() const { return amplitude.size(); }
    SampledSignal samples() const;
};

enum class NoiseFamily { GaussianComplexWhite, Poisson, Gamma, Mixture };

NoiseFamily noise_family_from_string(const std::string& name);
std::string to_string(NoiseFamily family);

struct NoiseSpec {
    NoiseFamily family = NoiseFamily::GaussianComplexWhite;
    double snr_db = 0.0;  ///< +infinity means "no noise"
    std::uint64_t seed = 0;
    /// Only for NoiseFamily::Mixture: component families and weights (sum 1).
    std::vector<NoiseFamily> mixture_families;
    std::vector<double> mixture_weights;

    void validate() const;
};

struct GroundTruth {
    std::vector<std::vector<long>> ridge_bins;  ///< K x N, true IF mapped to bins
    std::vector<ModeSpec> modes;
    std::vector<SampledSignal> clean_modes;
    SampledSignal mixture;
};

/// Linear chirp: phi(n) = 2 pi (f_start n + (f_end - f_start) n^2 / 2N),
/// so the instantaneous frequency f_start + (f_end - f_start) n / N is
/// exactly linear in n.
ModeSpec linear_chirp(std::size_t n_samples, double f_start, double f_end, double amplitude);

/// Pointwise complex sum of the modes; ridge bins are round(M * IF(n)).
GroundTruth synthesize(const std::vector<ModeSpec>& modes, std::size_t n_samples,
                       std::size_t n_bins);

/// Diagnostics of the realized noise draw.
struct NoiseDiagnostics {
    double realized_noise_power = 0.0;
    double average_noise_amplitude = 0.0;  ///< mean |nu(n)| after scaling
};

/// clean + nu, with nu drawn i.i.d. from the family, centered, then rescaled
/// so the realized SNR equals spec.snr_db exactly.
SampledSignal add_noise(const SampledSignal& clean, const NoiseSpec& spec,
                        NoiseDiagnostics* diagnostics = nullptr);

double signal_power(const SampledSignal& x);

}  // namespace ridgeband
