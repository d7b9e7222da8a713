#pragma once

#include "ridgeband/inference.hpp"
#include "ridgeband/siggen.hpp"

#include <string>

namespace ridgeband {

struct ChirpSpec {
    double f_start = 0.0;
    double f_end = 0.0;
    double amplitude = 1.0;
};

struct BenchConfig {
    std::vector<double> snr_grid_db = {-20, -15, -10, -5, 0, 5, 10, 15, 20};
    std::size_t realizations = 50;
    std::vector<std::string> methods = {"sem-tv", "sem-laplacian", "argmax"};
    double epsilon = 1e-3;
    double lambda = 1e-2;
    std::uint64_t base_seed = 1;
    NoiseFamily noise_family = NoiseFamily::GaussianComplexWhite;
    bool noiseless = false;
    StftConfig stft = make_stft_config(500, 500, 20.0);
    std::vector<ChirpSpec> chirps = {{0.10, 0.35, 1.0}, {0.325, 0.075, 1.0}};
    SemConfig sem;
    std::size_t threads = 0;  ///< 0 means hardware concurrency

    void validate() const;
};

BenchConfig bench_config_from_json_file(const std::string& path);
void write_bench_config(const std::string& path, const BenchConfig& config);

struct BenchRow {
    double snr_db = 0.0;
    std::string method;
    std::size_t realization = 0;
    std::size_t mode = 0;
    double rqf_db = 0.0;
    bool ok = true;
    std::string error;
    std::size_t iterations = 0;
    double wall_ms = 0.0;
};

struct BenchSummaryRow {
    double snr_db = 0.0;
    std::string method;
    std::size_t mode = 0;
    double mean_rqf = 0.0;
    double std_rqf = 0.0;
    std::size_t n_ok = 0;
    std::size_t n_failed = 0;
};

struct BenchResults {
    std::vector<BenchRow> rows;        ///< sorted by (snr, method, realization, mode)
    std::vector<BenchSummaryRow> summary;
    double total_seconds = 0.0;
};

/// Deterministic per-cell seed derivation.
std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t snr_index,
                        std::size_t realization_index);

/// Full SNR-sweep Monte-Carlo experiment: generate, estimate with every
/// method on the shared noisy signal, reconstruct each mode, score RQF.
BenchResults run_bench(const BenchConfig& config);

std::vector<BenchSummaryRow> summarize(const std::vector<BenchRow>& rows);

void write_raw_csv(const std::string& path, const std::vector<BenchRow>& rows);
void write_summary_csv(const std::string& path, const std::vector<BenchSummaryRow>& summary);

/// One CSV per mode with columns snr, method, mean_rqf, std_rqf, rows
/// ascending in snr.
void emit_plot_data(const BenchResults& results, const std::string& out_dir);

void write_run_metadata(const std::string& path, const BenchConfig& config,
                        const BenchResults& results);

/// Writes raw.csv, summary.csv, mode<k>_plot.csv and run-metadata.json.
void write_bench_outputs(const std::string& out_dir, const BenchConfig& config,
                         const BenchResults& results);

}  // namespace ridgeband
