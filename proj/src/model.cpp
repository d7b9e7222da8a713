#include "ridgeband/model.hpp"

#include <limits>
#include <numbers>

namespace ridgeband {

bool WeightMatrix::feasible(double slack) const {
    for (std::size_t n = 0; n < w.rows; ++n) {
        double row_sum = 0.0;
        for (std::size_t k = 0; k < w.cols; ++k) {
            double v = w(n, k);
            if (!(v >= -slack && v <= 1.0 + slack)) return false;
            row_sum += v;
        }
        if (row_sum > 1.0 + slack) return false;
    }
    return true;
}

double kernel_sigma(const StftConfig& config) {
    return std::sqrt(static_cast<double>(config.n_bins) /
                     (std::numbers::pi * config.time_spread));
}

long admissible_margin(const StftConfig& config) {
    return static_cast<long>(std::ceil(3.0 * kernel_sigma(config)));
}

long discard_halfwidth(const StftConfig& config) {
    return static_cast<long>(std::ceil(3.0 * kernel_sigma(config) + 1.0));
}

bool ridge_admissible(const RidgeMatrix& ridges, const StftConfig& config) {
    const long h = admissible_margin(config);
    const long hi = static_cast<long>(config.n_bins) - 1 - h;
    for (const auto& row : ridges.bins)
        for (long b : row)
            if (b < h || b > hi) return false;
    return true;
}

std::vector<double> column_pmf(std::span<const double> weights, std::span<const long> ridge_bins,
                               const KernelTable& kernel) {
    if (weights.size() != ridge_bins.size())
        throw std::invalid_argument("column_pmf: weights and ridge bins size mismatch");
    const std::size_t M = kernel.size();
    double w_sum = 0.0;
    for (double w : weights) {
        if (w < 0.0 || w > 1.0) throw std::invalid_argument("column_pmf: weight outside [0,1]");
        w_sum += w;
    }
    if (w_sum > 1.0 + 1e-12) throw std::invalid_argument("column_pmf: weight row sum exceeds 1");

    const double floor = (1.0 - w_sum) / static_cast<double>(M);
    std::vector<double> pmf(M, floor);
    for (std::size_t k = 0; k < weights.size(); ++k) {
        if (weights[k] == 0.0) continue;
        for (std::size_t m = 0; m < M; ++m)
            pmf[m] += weights[k] * kernel.at(static_cast<long>(m), ridge_bins[k]);
    }
    return pmf;
}

double column_loglik(std::span<const double> column, std::span<const double> weights,
                     std::span<const long> ridge_bins, const KernelTable& kernel) {
    if (column.size() != kernel.size())
        throw std::invalid_argument("column_loglik: column length does not match bin count");
    double total = 0.0;
    for (double s : column) {
        if (!(s >= 0.0) || !std::isfinite(s))
            throw std::invalid_argument("column_loglik: spectrogram entries must be finite and >= 0");
        total += s;
    }
    if (total <= 0.0) throw std::invalid_argument("column_loglik: all-zero column");

    const std::vector<double> pmf = column_pmf(weights, ridge_bins, kernel);
    double ll = 0.0;
    for (std::size_t m = 0; m < pmf.size(); ++m) {
        const double mass = column[m] / total;
        if (mass > 0.0) ll += mass * std::log(pmf[m]);
    }
    return ll;
}

double total_loglik(const RealMatrix& spectrogram, const WeightMatrix& weights,
                    const RidgeMatrix& ridges, const KernelTable& kernel) {
    const std::size_t N = spectrogram.rows;
    const std::size_t K = ridges.n_components();
    if (weights.n_columns() != N || ridges.n_columns() != N || weights.n_components() != K)
        throw std::invalid_argument("total_loglik: dimension mismatch");

    double ll = 0.0;
    std::vector<long> ridge_col(K);
    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t k = 0; k < K; ++k) ridge_col[k] = ridges.bins[k][n];
        ll += column_loglik(std::span<const double>(&spectrogram(n, 0), spectrogram.cols),
                            std::span<const double>(&weights.w(n, 0), K), ridge_col, kernel);
    }
    return ll;
}

double tv_energy(const RidgeMatrix& ridges) {
    double e = 0.0;
    for (const auto& row : ridges.bins)
        for (std::size_t n = 0; n + 1 < row.size(); ++n)
            e += std::abs(static_cast<double>(row[n + 1] - row[n]));
    return e;
}

double laplacian_energy(const RidgeMatrix& ridges) {
    double e = 0.0;
    for (const auto& row : ridges.bins)
        for (std::size_t n = 1; n + 1 < row.size(); ++n) {
            const double d2 =
                static_cast<double>(row[n - 1]) - 2.0 * static_cast<double>(row[n]) +
                static_cast<double>(row[n + 1]);
            e += d2 * d2;
        }
    return e;
}

double log_ridge_prior(const RidgeMatrix& ridges, const PriorConfig& prior) {
    if (prior.kind == PriorKind::TotalVariation) return -prior.epsilon * tv_energy(ridges);
    return -0.5 * prior.lambda * laplacian_energy(ridges);
}

double log_posterior(const RealMatrix& spectrogram, const WeightMatrix& weights,
                     const RidgeMatrix& ridges, const PriorConfig& prior,
                     const StftConfig& config, const KernelTable& kernel) {
    if (!weights.feasible() || !ridge_admissible(ridges, config))
        return -std::numeric_limits<double>::infinity();
    return total_loglik(spectrogram, weights, ridges, kernel) + log_ridge_prior(ridges, prior);
}

}  // namespace ridgeband
