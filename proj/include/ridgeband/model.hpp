#pragma once

#include "ridgeband/tf_core.hpp"
#include "ridgeband/types.hpp"

#include <span>

namespace ridgeband {

/// N x K mixture weights, each row in [0,1]^K with row sum <= 1.
struct WeightMatrix {
    RealMatrix w;  ///< N x K

    std::size_t n_columns() const { return w.rows; }
    std::size_t n_components() const { return w.cols; }
    bool feasible(double slack = 1e-12) const;
};

/// K x N hidden ridge positions (frequency-bin indices).
struct RidgeMatrix {
    std::vector<std::vector<long>> bins;  ///< K rows of length N

    std::size_t n_components() const { return bins.size(); }
    std::size_t n_columns() const { return bins.empty() ? 0 : bins[0].size(); }
};

enum class PriorKind { TotalVariation, Laplacian };

struct PriorConfig {
    PriorKind kind = PriorKind::TotalVariation;
    double epsilon = 1e-3;  ///< TV strength
    double lambda = 1e-2;   ///< Laplacian strength

    double strength() const { return kind == PriorKind::TotalVariation ? epsilon : lambda; }
};

/// sigma_d = sqrt(M / (pi L)), the standard deviation of the kernel g.
double kernel_sigma(const StftConfig& config);

/// Admissibility margin h = ceil(3 sigma_d): ridge bins stay h bins away
/// from the band edges so the kernel mass over admissible positions is
/// constant.
long admissible_margin(const StftConfig& config);

/// Discard halfwidth d = ceil(3 sigma_d + 1) for sequential extraction.
long discard_halfwidth(const StftConfig& config);

bool ridge_admissible(const RidgeMatrix& ridges, const StftConfig& config);

/// Observation pmf over the M bins of one column:
///   p(m) = sum_k w_k g(m - m_k) + (1 - sum_k w_k) / M
/// with circular signed bin distance.
std::vector<double> column_pmf(std::span<const double> weights, std::span<const long> ridge_bins,
                               const KernelTable& kernel);

/// Cross-entropy score of one spectrogram column against the observation
/// pmf: sum_m s_bar[m] log p(m), with s_bar the column normalized to sum 1.
double column_loglik(std::span<const double> column, std::span<const double> weights,
                     std::span<const long> ridge_bins, const KernelTable& kernel);

/// Sum of column_loglik over all N columns. S is N x M, W is N x K,
/// ridges is K x N.
double total_loglik(const RealMatrix& spectrogram, const WeightMatrix& weights,
                    const RidgeMatrix& ridges, const KernelTable& kernel);

/// Sum over components of absolute first differences of the ridge rows.
double tv_energy(const RidgeMatrix& ridges);

/// Sum over components of squared second differences of the ridge rows.
double laplacian_energy(const RidgeMatrix& ridges);

/// Log prior density of the ridges up to an additive constant:
/// -epsilon * tv_energy or -(lambda/2) * laplacian_energy.
double log_ridge_prior(const RidgeMatrix& ridges, const PriorConfig& prior);

/// total_loglik + log_ridge_prior, up to an additive constant. Returns
/// -infinity when the weights or ridges violate their constraints.
double log_posterior(const RealMatrix& spectrogram, const WeightMatrix& weights,
                     const RidgeMatrix& ridges, const PriorConfig& prior,
                     const StftConfig& config, const KernelTable& kernel);

}  // namespace ridgeband
