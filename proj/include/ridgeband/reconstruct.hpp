#pragma once

#include "ridgeband/model.hpp"
#include "ridgeband/tf_core.hpp"

namespace ridgeband {

/// Per-component binary TF masks: ones within h = ceil(3 sigma_d) bins of
/// the estimated ridge in every column, clipped to the band.
struct RibbonMask {
    std::vector<std::vector<std::uint8_t>> components;  ///< K masks, each N*M row-major
    std::size_t n_columns = 0;
    std::size_t n_bins = 0;
};

RibbonMask ribbon_mask(const RidgeMatrix& ridges, const StftConfig& config);

/// Ribbon halfwidth h = ceil(3 sigma_d); ribbon height is 2h + 1.
long ribbon_halfwidth(const StftConfig& config);

/// Hard-threshold the TFR with one component's mask and invert.
SampledSignal reconstruct_mode(const TimeFrequencyMap& tfr, const RibbonMask& mask,
                               std::size_t component);

/// Reconstruction quality factor 10 log10(||x||^2 / ||x - x_hat||^2) in dB;
/// +infinity when the estimate matches the reference exactly.
double rqf(const SampledSignal& reference, const SampledSignal& estimate);

}  // namespace ridgeband
