#pragma once

#include "ridgeband/inference.hpp"
#include "ridgeband/siggen.hpp"
#include "ridgeband/types.hpp"

#include <string>

namespace ridgeband {

/// Two-column CSV (real, imag) per sample; a non-numeric first line is
/// treated as a header.
SampledSignal read_signal_csv(const std::string& path);
void write_signal_csv(const std::string& path, const SampledSignal& signal);

void write_truth_json(const std::string& path, const GroundTruth& truth, const NoiseSpec& noise,
                      const StftConfig& config);

struct StoredResult {
    EstimationResult estimation;
    StftConfig config;
    std::string method;
    std::string prior;
};

void write_result_json(const std::string& path, const StoredResult& result);
StoredResult read_result_json(const std::string& path);

/// Debug-only TFR export: dimensions plus row-major real/imag arrays.
void write_tfr_json(const std::string& path, const TimeFrequencyMap& tfr);

}  // namespace ridgeband
