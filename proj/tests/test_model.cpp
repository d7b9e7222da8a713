#include "ridgeband/model.hpp"

#include <doctest.h>

#include <random>

using namespace ridgeband;

namespace {

const StftConfig kConfig = make_stft_config(500, 500, 20.0);

// Random feasible weight row and admissible ridge bins.
void random_column(std::size_t k, std::mt19937_64& rng, std::vector<double>& w,
                   std::vector<long>& bins, const StftConfig& config = kConfig) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const long h = admissible_margin(config);
    std::uniform_int_distribution<long> bin(h, static_cast<long>(config.n_bins) - 1 - h);
    w.resize(k);
    bins.resize(k);
    double total;
    do {
        total = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            w[i] = unit(rng);
            total += w[i];
        }
    } while (total > 1.0);
    for (std::size_t i = 0; i < k; ++i) bins[i] = bin(rng);
}

}  // namespace

TEST_CASE("derived window constants for M=500, L=20") {
    CHECK(kernel_sigma(kConfig) == doctest::Approx(2.8209).epsilon(1e-4));
    CHECK(admissible_margin(kConfig) == 9);
    CHECK(discard_halfwidth(kConfig) == 10);
}

TEST_CASE("column_pmf: pure-noise limit is uniform") {
    const KernelTable kernel(kConfig);
    const std::vector<double> w = {0.0, 0.0};
    const std::vector<long> bins = {100, 200};
    const std::vector<double> pmf = column_pmf(w, bins, kernel);
    for (double p : pmf) CHECK(p == doctest::Approx(1.0 / 500.0).epsilon(1e-12));
}

TEST_CASE("column_pmf: single saturated component peaks at g(0)") {
    const KernelTable kernel(kConfig);
    const std::vector<double> w = {1.0};
    const std::vector<long> bins = {250};
    const std::vector<double> pmf = column_pmf(w, bins, kernel);
    CHECK(pmf[250] == doctest::Approx(spectral_kernel(0, kConfig)).epsilon(1e-12));
    CHECK(pmf[250] == doctest::Approx(0.1417963).epsilon(1e-6));
    for (long d = 1; d < 30; ++d) {
        CHECK(pmf[250 + d] == doctest::Approx(pmf[250 - d]).epsilon(1e-12));
        CHECK(pmf[250 + d] < pmf[250 + d - 1]);
    }
}

TEST_CASE("column_pmf sums to one over 1000 random valid columns") {
    const KernelTable kernel(kConfig);
    std::mt19937_64 rng(11);
    std::vector<double> w;
    std::vector<long> bins;
    for (int trial = 0; trial < 1000; ++trial) {
        random_column(2, rng, w, bins);
        const std::vector<double> pmf = column_pmf(w, bins, kernel);
        double sum = 0.0;
        for (double p : pmf) sum += p;
        CHECK(std::abs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("column_pmf rejects invalid weights") {
    const KernelTable kernel(kConfig);
    CHECK_THROWS_AS(column_pmf(std::vector<double>{0.7, 0.6}, std::vector<long>{100, 200}, kernel),
                    std::invalid_argument);
    CHECK_THROWS_AS(column_pmf(std::vector<double>{-0.1}, std::vector<long>{100}, kernel),
                    std::invalid_argument);
}

TEST_CASE("column_loglik: uniform pmf gives -log M") {
    const KernelTable kernel(kConfig);
    std::vector<double> column(500, 1.0);
    const double ll = column_loglik(column, std::vector<double>{0.0}, std::vector<long>{100}, kernel);
    CHECK(ll == doctest::Approx(-std::log(500.0)).epsilon(1e-12));
}

TEST_CASE("column_loglik is maximized when the pmf equals the column (Gibbs)") {
    const KernelTable kernel(kConfig);
    std::mt19937_64 rng(17);
    std::vector<double> w, w_other;
    std::vector<long> bins, bins_other;
    for (int trial = 0; trial < 50; ++trial) {
        random_column(2, rng, w, bins);
        const std::vector<double> target = column_pmf(w, bins, kernel);
        const double self_ll = column_loglik(target, w, bins, kernel);

        double entropy = 0.0;
        for (double p : target)
            if (p > 0.0) entropy -= p * std::log(p);
        CHECK(self_ll == doctest::Approx(-entropy).epsilon(1e-9));

        random_column(2, rng, w_other, bins_other);
        CHECK(column_loglik(target, w_other, bins_other, kernel) <= self_ll + 1e-12);
    }
}

TEST_CASE("column_loglik rejects an all-zero column") {
    const KernelTable kernel(kConfig);
    std::vector<double> column(500, 0.0);
    CHECK_THROWS_AS(column_loglik(column, std::vector<double>{0.2}, std::vector<long>{100}, kernel),
                    std::invalid_argument);
}

TEST_CASE("ridge sweep on a noiseless tone column peaks at the true bin") {
    const KernelTable kernel(kConfig);
    // Noiseless tone column: the column itself follows the kernel around bin 180.
    const std::vector<double> truth_w = {0.9};
    const std::vector<long> truth_bins = {180};
    const std::vector<double> column = column_pmf(truth_w, truth_bins, kernel);

    const long h = admissible_margin(kConfig);
    double best = -1e300;
    long best_bin = -1;
    for (long m = h; m < 500 - h; ++m) {
        const double ll = column_loglik(column, truth_w, std::vector<long>{m}, kernel);
        if (ll > best) {
            best = ll;
            best_bin = m;
        }
    }
    CHECK(best_bin == 180);
}

TEST_CASE("total_loglik is additive and exchangeable over columns") {
    const StftConfig config = make_stft_config(2, 64, 4.0);
    const KernelTable kernel(config);

    RealMatrix s(2, 64);
    WeightMatrix w;
    w.w = RealMatrix(2, 1);
    RidgeMatrix ridges;
    ridges.bins = {{20, 35}};
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    for (std::size_t n = 0; n < 2; ++n) {
        for (std::size_t m = 0; m < 64; ++m) s(n, m) = unit(rng);
        w.w(n, 0) = 0.4;
    }

    const double ll = total_loglik(s, w, ridges, kernel);
    const double col0 = column_loglik(std::span<const double>(&s(0, 0), 64),
                                      std::vector<double>{0.4}, std::vector<long>{20}, kernel);
    const double col1 = column_loglik(std::span<const double>(&s(1, 0), 64),
                                      std::vector<double>{0.4}, std::vector<long>{35}, kernel);
    CHECK(ll == doctest::Approx(col0 + col1).epsilon(1e-12));

    // permute the columns together with the parameter rows
    RealMatrix s2(2, 64);
    for (std::size_t m = 0; m < 64; ++m) {
        s2(0, m) = s(1, m);
        s2(1, m) = s(0, m);
    }
    RidgeMatrix ridges2;
    ridges2.bins = {{35, 20}};
    CHECK(total_loglik(s2, w, ridges2, kernel) == doctest::Approx(ll).epsilon(1e-12));

    // duplicated identical column doubles the value
    RealMatrix s3(2, 64);
    for (std::size_t m = 0; m < 64; ++m) s3(0, m) = s3(1, m) = s(0, m);
    RidgeMatrix ridges3;
    ridges3.bins = {{20, 20}};
    CHECK(total_loglik(s3, w, ridges3, kernel) == doctest::Approx(2.0 * col0).epsilon(1e-12));
}

TEST_CASE("tv energy on constant, step and linear ridges") {
    RidgeMatrix constant;
    constant.bins = {{7, 7, 7, 7, 7}};
    CHECK(tv_energy(constant) == 0.0);

    RidgeMatrix step;
    step.bins = {{7, 7, 8, 8, 8}};
    CHECK(tv_energy(step) == 1.0);

    // Rounded linear ridge with slope 0.5 bins/sample over 9 samples.
    RidgeMatrix linear;
    linear.bins = {{10, 11, 11, 12, 12, 13, 13, 14, 14}};
    double expected = 0.0;
    for (std::size_t n = 0; n + 1 < linear.bins[0].size(); ++n)
        expected += std::abs(static_cast<double>(linear.bins[0][n + 1] - linear.bins[0][n]));
    CHECK(tv_energy(linear) == expected);
    CHECK(expected == 4.0);
}

TEST_CASE("laplacian energy on affine, spike and quadratic ridges") {
    RidgeMatrix affine;
    affine.bins = {{3, 5, 7, 9, 11, 13}};
    CHECK(laplacian_energy(affine) == 0.0);

    RidgeMatrix spike;
    spike.bins = {{5, 5, 6, 5, 5}};
    CHECK(laplacian_energy(spike) == 6.0);  // 1 + 4 + 1

    RidgeMatrix quadratic;
    quadratic.bins = {{0, 1, 4, 9, 16, 25}};
    // second difference of n^2 is 2, squared 4, at each interior point
    CHECK(laplacian_energy(quadratic) == 4.0 * 4.0);
}

TEST_CASE("log_posterior: prior off, smoothness preference, constraint sentinel") {
    const StftConfig config = make_stft_config(4, 64, 4.0);
    const KernelTable kernel(config);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unit(0.1, 1.0);
    RealMatrix s(4, 64);
    for (double& v : s.data) v = unit(rng);

    WeightMatrix w;
    w.w = RealMatrix(4, 1, 0.3);
    RidgeMatrix rough, smooth;
    rough.bins = {{20, 30, 20, 30}};
    smooth.bins = {{25, 25, 25, 25}};

    PriorConfig off{PriorKind::TotalVariation, 0.0, 0.0};
    CHECK(log_posterior(s, w, rough, off, config, kernel) ==
          doctest::Approx(total_loglik(s, w, rough, kernel)).epsilon(1e-12));

    // equal likelihood fixture: uniform S makes likelihood ridge-independent
    RealMatrix flat(4, 64, 1.0);
    PriorConfig tv{PriorKind::TotalVariation, 0.5, 0.0};
    CHECK(log_posterior(flat, w, smooth, tv, config, kernel) >
          log_posterior(flat, w, rough, tv, config, kernel));

    WeightMatrix bad;
    bad.w = RealMatrix(4, 1, 1.5);
    CHECK(log_posterior(s, bad, smooth, tv, config, kernel) ==
          -std::numeric_limits<double>::infinity());

    RidgeMatrix outside;
    outside.bins = {{0, 0, 0, 0}};
    CHECK(log_posterior(s, w, outside, tv, config, kernel) ==
          -std::numeric_limits<double>::infinity());
}

TEST_CASE("column objective is concave in W") {
    const KernelTable kernel(kConfig);
    std::mt19937_64 rng(23);
    std::vector<double> w1, w2;
    std::vector<long> bins;
    std::vector<double> column(500);
    std::uniform_real_distribution<double> unit(0.01, 1.0);
    for (int trial = 0; trial < 30; ++trial) {
        for (double& v : column) v = unit(rng);
        random_column(2, rng, w1, bins, kConfig);
        std::vector<long> bins_keep = bins;
        random_column(2, rng, w2, bins, kConfig);

        const double f1 = column_loglik(column, w1, bins_keep, kernel);
        const double f2 = column_loglik(column, w2, bins_keep, kernel);
        for (double alpha : {0.25, 0.5, 0.75}) {
            std::vector<double> mix(2);
            for (std::size_t k = 0; k < 2; ++k) mix[k] = alpha * w1[k] + (1 - alpha) * w2[k];
            const double fm = column_loglik(column, mix, bins_keep, kernel);
            CHECK(fm >= alpha * f1 + (1 - alpha) * f2 - 1e-9);
        }
    }
}
