#pragma once

#include "ridgeband/model.hpp"

namespace ridgeband {

/// Naive comparator: per-column sequential argmax-and-discard on the raw
/// spectrogram, no prior, no EM. Shares the discard rule and component
/// tracking with the SEM estimator. Pass discard <= 0 to derive d from the
/// STFT config.
RidgeMatrix argmax_ridges(const RealMatrix& spectrogram, std::size_t n_components, long discard,
                          const StftConfig& config);

}  // namespace ridgeband
