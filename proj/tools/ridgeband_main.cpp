#include "ridgeband/baseline.hpp"
#include "ridgeband/bench.hpp"
#include "ridgeband/io.hpp"
#include "ridgeband/reconstruct.hpp"
#include "ridgeband/tf_core.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace ridgeband;

int main(int argc, char** argv) {
    CLI::App app{"ridgeband: IF ridge estimation of multicomponent signals from spectrograms"};
    app.require_subcommand(1);

    // --- generate ---
    auto* gen = app.add_subcommand("generate", "synthesize a noisy multicomponent test signal");
    std::string gen_config, gen_out = "signal.csv", gen_truth = "truth.json";
    std::string gen_family = "gaussian";
    double gen_snr = 0.0;
    bool gen_noiseless = false;
    std::uint64_t gen_seed = 1;
    gen->add_option("--config", gen_config, "bench-style JSON config with stft/chirps");
    gen->add_option("--out", gen_out, "output signal CSV");
    gen->add_option("--truth", gen_truth, "output ground-truth JSON");
    gen->add_option("--snr", gen_snr, "SNR in dB");
    gen->add_option("--family", gen_family, "noise family: gaussian|poisson|gamma");
    gen->add_option("--seed", gen_seed, "noise RNG seed");
    gen->add_flag("--noiseless", gen_noiseless, "emit the clean mixture");

    // --- estimate ---
    auto* est = app.add_subcommand("estimate", "estimate IF ridges from a signal");
    std::string est_signal, est_out = "result.json", est_prior = "tv", est_method = "sem";
    std::size_t est_k = 2, est_bins = 0;
    double est_eps = 1e-3, est_lambda = 1e-2, est_spread = 20.0;
    std::uint64_t est_seed = 1;
    est->add_option("--signal", est_signal, "input signal CSV")->required();
    est->add_option("--k", est_k, "number of components");
    est->add_option("--prior", est_prior, "ridge prior: tv|laplacian");
    est->add_option("--epsilon", est_eps, "TV prior strength");
    est->add_option("--lambda", est_lambda, "Laplacian prior strength");
    est->add_option("--seed", est_seed, "SEM RNG seed");
    est->add_option("--method", est_method, "sem|argmax");
    est->add_option("--m-bins", est_bins, "frequency bins (default: signal length)");
    est->add_option("--time-spread", est_spread, "window time spread L");
    est->add_option("--out", est_out, "output result JSON");

    // --- reconstruct ---
    auto* rec = app.add_subcommand("reconstruct", "ribbon-mask mode reconstruction");
    std::string rec_signal, rec_result, rec_prefix = "mode";
    rec->add_option("--tfr-from", rec_signal, "signal CSV to transform")->required();
    rec->add_option("--result", rec_result, "estimation result JSON")->required();
    rec->add_option("--out-mode", rec_prefix, "output prefix; writes <prefix><k>.csv per mode");

    // --- bench ---
    auto* bench = app.add_subcommand("bench", "SNR-sweep Monte-Carlo benchmark");
    std::string bench_config, bench_dir = "results";
    bench->add_option("--config", bench_config, "bench JSON config");
    bench->add_option("--out-dir", bench_dir, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            BenchConfig config =
                gen_config.empty() ? BenchConfig{} : bench_config_from_json_file(gen_config);
            std::vector<ModeSpec> modes;
            for (const ChirpSpec& c : config.chirps)
                modes.push_back(
                    linear_chirp(config.stft.n_samples, c.f_start, c.f_end, c.amplitude));
            GroundTruth truth = synthesize(modes, config.stft.n_samples, config.stft.n_bins);

            NoiseSpec noise;
            noise.family = noise_family_from_string(gen_family);
            noise.snr_db =
                gen_noiseless ? std::numeric_limits<double>::infinity() : gen_snr;
            noise.seed = gen_seed;
            write_signal_csv(gen_out, add_noise(truth.mixture, noise));
            write_truth_json(gen_truth, truth, noise, config.stft);
            std::cout << "wrote " << gen_out << " and " << gen_truth << "\n";
        } else if (*est) {
            const SampledSignal signal = read_signal_csv(est_signal);
            const std::size_t bins = est_bins ? est_bins : signal.size();
            const StftConfig config = make_stft_config(signal.size(), bins, est_spread);
            const RealMatrix spect = spectrogram(stft(signal, config));

            StoredResult stored;
            stored.config = config;
            stored.method = est_method;
            stored.prior = est_prior;
            if (est_method == "argmax") {
                stored.estimation.ridges = argmax_ridges(spect, est_k, -1, config);
                stored.estimation.weights.w = RealMatrix(config.n_samples, est_k, 0.0);
                stored.estimation.seed = est_seed;
            } else if (est_method == "sem") {
                PriorConfig prior;
                prior.kind = est_prior == "laplacian" ? PriorKind::Laplacian
                                                      : PriorKind::TotalVariation;
                prior.epsilon = est_eps;
                prior.lambda = est_lambda;
                SemConfig sem;
                sem.seed = est_seed;
                stored.estimation = run_sem(spect, est_k, prior, sem, config);
            } else {
                throw std::invalid_argument("unknown method: " + est_method);
            }
            write_result_json(est_out, stored);
            std::cout << "wrote " << est_out << "\n";
        } else if (*rec) {
            const SampledSignal signal = read_signal_csv(rec_signal);
            const StoredResult stored = read_result_json(rec_result);
            if (signal.size() != stored.config.n_samples)
                throw std::invalid_argument("signal length does not match result's STFT config");
            const TimeFrequencyMap tfr = stft(signal, stored.config);
            const RibbonMask mask = ribbon_mask(stored.estimation.ridges, stored.config);
            for (std::size_t k = 0; k < mask.components.size(); ++k) {
                const std::string path = rec_prefix + std::to_string(k) + ".csv";
                write_signal_csv(path, reconstruct_mode(tfr, mask, k));
                std::cout << "wrote " << path << "\n";
            }
        } else if (*bench) {
            BenchConfig config =
                bench_config.empty() ? BenchConfig{} : bench_config_from_json_file(bench_config);
            const BenchResults results = run_bench(config);
            write_bench_outputs(bench_dir, config, results);
            std::cout << "wrote " << results.rows.size() << " rows to " << bench_dir << " in "
                      << results.total_seconds << " s\n";
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
