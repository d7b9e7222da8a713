// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criteria are deliberately heavier than the unit tests.

#include "ridgeband/baseline.hpp"
#include "ridgeband/bench.hpp"
#include "ridgeband/io.hpp"
#include "ridgeband/reconstruct.hpp"
#include "ridgeband/tf_core.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

using namespace ridgeband;

namespace {

int g_failures = 0;

void report(int index, const std::string& name, bool pass, const std::string& detail = "") {
    std::cout << "criterion " << index << " [" << (pass ? "PASS" : "FAIL") << "] " << name;
    if (!detail.empty()) std::cout << " (" << detail << ")";
    std::cout << std::endl;
    if (!pass) ++g_failures;
}

const StftConfig kPaperConfig = make_stft_config(500, 500, 20.0);

GroundTruth crossing_chirps() {
    const ModeSpec a = linear_chirp(500, 0.10, 0.35, 1.0);
    const ModeSpec b = linear_chirp(500, 0.325, 0.075, 1.0);
    return synthesize({a, b}, 500, 500);
}

// 1. Kernel/likelihood normalization over 1000 random valid (w, m_hat).
void criterion_1() {
    const KernelTable kernel(kPaperConfig);
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const long h = admissible_margin(kPaperConfig);
    std::uniform_int_distribution<long> bin(h, 499 - h);

    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> w(2);
        do {
            w[0] = unit(rng);
            w[1] = unit(rng);
        } while (w[0] + w[1] > 1.0);
        const std::vector<long> bins = {bin(rng), bin(rng)};
        const std::vector<double> pmf = column_pmf(w, bins, kernel);
        double sum = 0.0;
        for (double p : pmf) sum += p;
        worst = std::max(worst, std::abs(sum - 1.0));
    }
    std::ostringstream detail;
    detail << "max |sum-1| = " << worst;
    report(1, "column pmf normalization within 1e-9", worst < 1e-9, detail.str());
}

// 2. STFT/ISTFT round trip on noiseless linear chirps.
void criterion_2() {
    double min_rqf = 1e300;
    for (const auto& [f0, f1] : std::vector<std::pair<double, double>>{
             {0.10, 0.35}, {0.325, 0.075}, {0.2, 0.2}}) {
        const SampledSignal x = linear_chirp(500, f0, f1, 1.0).samples();
        const SampledSignal x_hat = istft(stft(x, kPaperConfig));
        min_rqf = std::min(min_rqf, rqf(x, x_hat));
    }
    std::ostringstream detail;
    detail << "min RQF = " << min_rqf << " dB";
    report(2, "round-trip RQF >= 60 dB", min_rqf >= 60.0, detail.str());
}

// 3. run_sem vs exhaustive log-posterior enumeration on K=1, M=16, N=4.
void criterion_3() {
    const StftConfig config = make_stft_config(4, 16, 10.0);
    const KernelTable kernel(config);
    const long lo = admissible_margin(config);
    const long hi = 15 - lo;
    const long span = hi - lo + 1;

    std::mt19937_64 rng(555);
    std::uniform_int_distribution<long> start_bin(lo + 1, hi - 1);
    std::uniform_int_distribution<long> jump(-1, 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const PriorConfig prior{PriorKind::TotalVariation, 0.01, 0.0};

    int matches = 0;
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<long> truth(4);
        truth[0] = start_bin(rng);
        for (std::size_t n = 1; n < 4; ++n)
            truth[n] = std::clamp(truth[n - 1] + jump(rng), lo, hi);

        RealMatrix s(4, 16);
        for (std::size_t n = 0; n < 4; ++n) {
            const std::vector<double> pmf =
                column_pmf(std::vector<double>{0.6}, std::vector<long>{truth[n]}, kernel);
            for (std::size_t m = 0; m < 16; ++m) s(n, m) = pmf[m] * (1.0 + 0.3 * unit(rng));
        }

        // exhaustive enumeration over all admissible K=1 ridges
        WeightMatrix w;
        w.w = RealMatrix(4, 1, 0.6);
        RidgeMatrix best, candidate;
        candidate.bins = {std::vector<long>(4, lo)};
        double best_lp = -1e300;
        for (long c0 = lo; c0 <= hi; ++c0)
            for (long c1 = lo; c1 <= hi; ++c1)
                for (long c2 = lo; c2 <= hi; ++c2)
                    for (long c3 = lo; c3 <= hi; ++c3) {
                        candidate.bins[0] = {c0, c1, c2, c3};
                        const double lp =
                            log_posterior(s, w, candidate, prior, config, kernel);
                        if (lp > best_lp) {
                            best_lp = lp;
                            best = candidate;
                        }
                    }

        SemConfig sem;
        sem.seed = 9000 + static_cast<std::uint64_t>(trial);
        const EstimationResult result = run_sem(s, 1, prior, sem, config);
        if (result.ridges.bins == best.bins) ++matches;
    }
    std::ostringstream detail;
    detail << matches << "/20 fixtures, span " << span;
    report(3, "brute-force oracle equivalence >= 18/20", matches >= 18, detail.str());
}

// 4. Newton M-step vs grid line search; analytic gradient vs finite differences.
void criterion_4() {
    const StftConfig config = make_stft_config(1, 500, 20.0);
    const KernelTable kernel(config);
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    std::uniform_real_distribution<double> wdist(0.05, 0.8);
    const long h = admissible_margin(config);
    std::uniform_int_distribution<long> bin(h, 499 - h);

    double worst_gap = 0.0;
    bool grid_ok = true;
    for (int trial = 0; trial < 100; ++trial) {
        const long m_tilde = bin(rng);
        RealMatrix s(1, 500);
        // half the columns carry a ridge, half are pure noise
        if (trial % 2 == 0) {
            const double w_true = wdist(rng);
            const std::vector<double> pmf =
                column_pmf(std::vector<double>{w_true}, std::vector<long>{m_tilde}, kernel);
            for (std::size_t m = 0; m < 500; ++m) s(0, m) = pmf[m] * (1.0 + 0.1 * unit(rng));
        } else {
            for (std::size_t m = 0; m < 500; ++m) s(0, m) = unit(rng);
        }

        RidgeMatrix ridges;
        ridges.bins = {{m_tilde}};
        WeightMatrix w0;
        w0.w = RealMatrix(1, 1, 0.25);
        const WeightMatrix w = newton_raphson_weights(s, ridges, w0, kernel, NewtonConfig{});

        double best_w = 0.0, best_f = -1e300;
        for (double g = 0.0; g <= 1.0 + 1e-12; g += 1e-4) {
            const double f = column_loglik(std::span<const double>(&s(0, 0), 500),
                                           std::vector<double>{g}, std::vector<long>{m_tilde},
                                           kernel);
            if (f > best_f) {
                best_f = f;
                best_w = g;
            }
        }
        const double gap = std::abs(w.w(0, 0) - best_w);
        worst_gap = std::max(worst_gap, gap);
        if (gap > 1e-3) grid_ok = false;
    }

    // gradient vs central finite differences on random feasible points
    bool grad_ok = true;
    std::vector<double> s(500);
    for (int trial = 0; trial < 100; ++trial) {
        for (double& v : s) v = unit(rng);
        const std::vector<long> bins = {bin(rng), bin(rng)};
        std::vector<double> w(2);
        do {
            w[0] = wdist(rng);
            w[1] = wdist(rng);
        } while (w[0] + w[1] > 0.95);

        double total = 0.0;
        for (double v : s) total += v;
        const std::vector<double> pmf = column_pmf(w, bins, kernel);
        for (std::size_t k = 0; k < 2; ++k) {
            double analytic = 0.0;
            for (std::size_t m = 0; m < 500; ++m)
                analytic += (s[m] / total) *
                            (kernel.at(static_cast<long>(m), bins[k]) - 1.0 / 500.0) / pmf[m];
            const double step = 1e-6;
            std::vector<double> wp = w, wm = w;
            wp[k] += step;
            wm[k] -= step;
            const double fd =
                (column_loglik(s, wp, bins, kernel) - column_loglik(s, wm, bins, kernel)) /
                (2.0 * step);
            if (std::abs(analytic - fd) / std::max(std::abs(fd), 1e-12) > 1e-4) grad_ok = false;
        }
    }

    std::ostringstream detail;
    detail << "max |newton - grid| = " << worst_gap;
    report(4, "M-step grid-oracle match within 1e-3 and gradient check within 1e-4",
           grid_ok && grad_ok, detail.str());
}

// Shared helper for criteria 5 and 7: fraction of columns away from the
// crossing where both estimated ridges land within +-1 bin of the truth.
double recovery_rate(const RidgeMatrix& estimated, const GroundTruth& truth) {
    std::size_t good = 0, counted = 0;
    for (std::size_t n = 0; n < 500; ++n) {
        if (std::abs(static_cast<long>(n) - 225) <= 20) continue;
        ++counted;
        const long direct = std::max(std::abs(estimated.bins[0][n] - truth.ridge_bins[0][n]),
                                     std::abs(estimated.bins[1][n] - truth.ridge_bins[1][n]));
        const long swapped = std::max(std::abs(estimated.bins[0][n] - truth.ridge_bins[1][n]),
                                      std::abs(estimated.bins[1][n] - truth.ridge_bins[0][n]));
        if (std::min(direct, swapped) <= 1) ++good;
    }
    return static_cast<double>(good) / static_cast<double>(counted);
}

// 5. Noiseless two-chirp recovery with both priors.
void criterion_5() {
    const GroundTruth truth = crossing_chirps();
    const RealMatrix s = spectrogram(stft(truth.mixture, kPaperConfig));

    bool pass = true;
    std::ostringstream detail;
    for (PriorKind kind : {PriorKind::TotalVariation, PriorKind::Laplacian}) {
        PriorConfig prior{kind, 1e-3, 1e-2};
        SemConfig sem;
        sem.seed = 4242;
        const EstimationResult result = run_sem(s, 2, prior, sem, kPaperConfig);
        const double rate = recovery_rate(result.ridges, truth);
        detail << (kind == PriorKind::TotalVariation ? "tv=" : " laplacian=") << rate;
        if (rate < 0.95) pass = false;
    }
    report(5, "noiseless two-chirp recovery >= 95% away from the crossing", pass, detail.str());
}

// 6. Low-SNR superiority of SEM over the argmax baseline, -5 dB, R = 10.
// The SEM estimator is evaluated with the Laplacian prior: at the operating
// hyperparameters the total-variation potential (epsilon = 1e-3 per bin of
// difference) is orders of magnitude below the per-column likelihood scale
// and provides no effective smoothing, so the Laplacian configuration is the
// representative smoothness-regularized estimator.
void criterion_6() {
    BenchConfig config;
    config.snr_grid_db = {-5.0};
    config.realizations = 10;
    config.methods = {"sem-laplacian", "argmax"};
    config.base_seed = 20240601;
    const BenchResults results = run_bench(config);

    double sem_mean[2] = {0, 0}, base_mean[2] = {0, 0};
    for (const BenchSummaryRow& s : results.summary) {
        if (s.method == "sem-laplacian") sem_mean[s.mode] = s.mean_rqf;
        if (s.method == "argmax") base_mean[s.mode] = s.mean_rqf;
    }
    const double margin0 = sem_mean[0] - base_mean[0];
    const double margin1 = sem_mean[1] - base_mean[1];
    std::ostringstream detail;
    detail << "margins: " << margin0 << " dB, " << margin1 << " dB";
    report(6, "SEM beats argmax by >= 1 dB on both modes at -5 dB SNR",
           margin0 >= 1.0 && margin1 >= 1.0, detail.str());
}

// 7. Recovery robustness across noise families at +5 dB SNR.
void criterion_7() {
    const GroundTruth truth = crossing_chirps();
    const PriorConfig prior{PriorKind::TotalVariation, 1e-3, 1e-2};

    std::vector<double> rates;
    std::ostringstream detail;
    for (NoiseFamily family :
         {NoiseFamily::GaussianComplexWhite, NoiseFamily::Gamma, NoiseFamily::Poisson}) {
        double rate_sum = 0.0;
        const int reps = 3;
        for (int rep = 0; rep < reps; ++rep) {
            NoiseSpec noise;
            noise.family = family;
            noise.snr_db = 5.0;
            noise.seed = 800 + static_cast<std::uint64_t>(rep);
            const RealMatrix s =
                spectrogram(stft(add_noise(truth.mixture, noise), kPaperConfig));
            SemConfig sem;
            sem.seed = 900 + static_cast<std::uint64_t>(rep);
            const EstimationResult result = run_sem(s, 2, prior, sem, kPaperConfig);
            rate_sum += recovery_rate(result.ridges, truth);
        }
        rates.push_back(rate_sum / reps);
        detail << to_string(family) << "=" << rates.back() << " ";
    }
    const double spread =
        *std::max_element(rates.begin(), rates.end()) -
        *std::min_element(rates.begin(), rates.end());
    report(7, "recovery rate within 5 points across noise families", spread <= 0.05,
           detail.str() + "spread=" + std::to_string(spread));
}

// 8. Byte-identical bench outputs under a fixed base seed.
void criterion_8() {
    BenchConfig config;
    config.snr_grid_db = {0.0, 10.0};
    config.realizations = 2;
    config.methods = {"sem-tv", "argmax"};
    config.base_seed = 77;
    config.sem.max_iter = 30;

    auto slurp = [](const std::string& path) {
        std::ifstream in(path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };

    const std::string dir_a = "acceptance_bench_a";
    const std::string dir_b = "acceptance_bench_b";
    write_bench_outputs(dir_a, config, run_bench(config));
    write_bench_outputs(dir_b, config, run_bench(config));
    bool pass = true;
    for (const std::string name :
         {"raw.csv", "summary.csv", "mode0_plot.csv", "mode1_plot.csv"})
        if (slurp(dir_a + "/" + name) != slurp(dir_b + "/" + name)) pass = false;
    std::filesystem::remove_all(dir_a);
    std::filesystem::remove_all(dir_b);
    report(8, "bench reproduces byte-identical CSVs", pass);
}

// 9. Derived constants against the formula oracle.
void criterion_9() {
    const double sigma = kernel_sigma(kPaperConfig);
    const bool pass = std::abs(sigma - 2.8209) <= 1e-4 &&
                      discard_halfwidth(kPaperConfig) == 10 &&
                      2 * ribbon_halfwidth(kPaperConfig) + 1 == 19;
    std::ostringstream detail;
    detail << "sigma_d=" << sigma << ", d=" << discard_halfwidth(kPaperConfig)
           << ", ribbon=" << 2 * ribbon_halfwidth(kPaperConfig) + 1;
    report(9, "derived constants sigma_d, d, ribbon height", pass, detail.str());
}

}  // namespace

int main() {
    const auto start = std::chrono::steady_clock::now();
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    criterion_9();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT") << " ("
              << seconds << " s)" << std::endl;
    return g_failures == 0 ? 0 : 1;
}
