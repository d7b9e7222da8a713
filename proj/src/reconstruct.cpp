#include "ridgeband/reconstruct.hpp"

#include <algorithm>
#include <limits>

namespace ridgeband {

long ribbon_halfwidth(const StftConfig& config) {
    return static_cast<long>(std::ceil(3.0 * kernel_sigma(config)));
}

RibbonMask ribbon_mask(const RidgeMatrix& ridges, const StftConfig& config) {
    const std::size_t N = ridges.n_columns();
    const std::size_t M = config.n_bins;
    if (N != config.n_samples)
        throw std::invalid_argument("ribbon_mask: ridge length does not match n_samples");

    const long h = ribbon_halfwidth(config);
    RibbonMask mask;
    mask.n_columns = N;
    mask.n_bins = M;
    mask.components.assign(ridges.n_components(), std::vector<std::uint8_t>(N * M, 0));

    for (std::size_t k = 0; k < ridges.n_components(); ++k) {
        for (std::size_t n = 0; n < N; ++n) {
            const long center = ridges.bins[k][n];
            const long lo = std::max<long>(0, center - h);
            const long hi = std::min<long>(static_cast<long>(M) - 1, center + h);
            for (long m = lo; m <= hi; ++m)
                mask.components[k][n * M + static_cast<std::size_t>(m)] = 1;
        }
    }
    return mask;
}

SampledSignal reconstruct_mode(const TimeFrequencyMap& tfr, const RibbonMask& mask,
                               std::size_t component) {
    if (component >= mask.components.size())
        throw std::invalid_argument("reconstruct_mode: component index out of range");
    if (mask.n_columns != tfr.coefficients.rows || mask.n_bins != tfr.coefficients.cols)
        throw std::invalid_argument("reconstruct_mode: mask dimensions do not match TFR");

    TimeFrequencyMap masked;
    masked.config = tfr.config;
    masked.coefficients = tfr.coefficients;
    const auto& bits = mask.components[component];
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (!bits[i]) masked.coefficients.data[i] = Complex(0.0, 0.0);
    return istft(masked);
}

double rqf(const SampledSignal& reference, const SampledSignal& estimate) {
    if (reference.size() != estimate.size())
        throw std::invalid_argument("rqf: signal lengths differ");
    double ref_power = 0.0;
    double err_power = 0.0;
    for (std::size_t n = 0; n < reference.size(); ++n) {
        ref_power += std::norm(reference[n]);
        err_power += std::norm(reference[n] - estimate[n]);
    }
    if (ref_power <= 0.0) throw std::invalid_argument("rqf: zero reference signal");
    if (err_power == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(ref_power / err_power);
}

}  // namespace ridgeband
