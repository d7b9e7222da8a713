#include "ridgeband/baseline.hpp"

#include "ridgeband/inference.hpp"

namespace ridgeband {

RidgeMatrix argmax_ridges(const RealMatrix& spectrogram, std::size_t n_components, long discard,
                          const StftConfig& config) {
    if (spectrogram.rows != config.n_samples || spectrogram.cols != config.n_bins)
        throw std::invalid_argument("argmax_ridges: spectrogram dimensions do not match config");
    const long d = discard > 0 ? discard : discard_halfwidth(config);
    RidgeMatrix ridges = sequential_mmap(spectrogram, n_components, d, config);
    canonical_component_order(ridges);
    return ridges;
}

}  // namespace ridgeband
