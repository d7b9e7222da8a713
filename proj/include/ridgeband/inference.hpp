#pragma once

#include "ridgeband/model.hpp"

#include <cstdint>
#include <random>

namespace ridgeband {

struct NewtonConfig {
    std::size_t max_inner_iter = 50;
    double step_damping = 0.5;          ///< backtracking factor
    double gradient_tolerance = 1e-8;
};

struct SemConfig {
    std::size_t n_prior_samples = 30;   ///< N_s retained Gibbs samples per iteration
    std::size_t max_iter = 50;
    double tol = 1e-4;                  ///< relative change of Q-hat
    long discard_halfwidth = -1;        ///< <= 0 means derive from the STFT config
    std::uint64_t seed = 0;
    NewtonConfig newton;
    bool icm_mode = false;              ///< conditional argmax instead of sampling

    void validate() const;
};

struct SemTrace {
    std::vector<double> q_hat;            ///< per iteration
    std::vector<double> weight_change;    ///< max-norm of W update
    std::vector<double> sample_ess;       ///< effective sample size of posterior weights
    std::vector<double> wall_seconds;
    std::size_t newton_fallbacks = 0;     ///< singular-Hessian gradient steps taken
};

struct EstimationResult {
    RidgeMatrix ridges;
    WeightMatrix weights;
    SemTrace trace;
    std::uint64_t seed = 0;
};

/// N_s ridge matrices drawn from the MRF prior with a systematic-scan
/// single-site Gibbs sampler, hot-started from `current`. One full scan
/// separates retained samples.
std::vector<RidgeMatrix> sample_ridge_candidates(const RidgeMatrix& current,
                                                 const PriorConfig& prior, const SemConfig& sem,
                                                 const StftConfig& config);

/// Normalized posterior weights over the prior samples:
/// weight_i proportional to exp(total_loglik(S, W, sample_i)).
std::vector<double> approx_ridge_posterior(const std::vector<RidgeMatrix>& samples,
                                           const RealMatrix& spectrogram,
                                           const WeightMatrix& weights,
                                           const KernelTable& kernel);

/// Per-column argmax-and-discard extraction of K bins from a score matrix
/// (N x M, higher is better) restricted to the admissible band, followed by
/// nearest-bin component tracking across columns.
RidgeMatrix sequential_mmap(const RealMatrix& scores, std::size_t n_components,
                            long discard, const StftConfig& config);

/// Per-column constrained maximization of the cross-entropy objective over
/// {w in [0,1]^K, sum w <= 1} with damped Newton ascent; never decreases the
/// column objective. `fallbacks`, when given, counts singular-Hessian
/// gradient steps.
WeightMatrix newton_raphson_weights(const RealMatrix& spectrogram, const RidgeMatrix& ridges,
                                    const WeightMatrix& w_init, const KernelTable& kernel,
                                    const NewtonConfig& newton, std::size_t* fallbacks = nullptr);

/// Reorders components by ascending mean bin so component indices are
/// deterministic regardless of per-column extraction order; permutes the
/// weight columns consistently when `weights` is given.
void canonical_component_order(RidgeMatrix& ridges, WeightMatrix* weights = nullptr);

/// Full SEM loop: Gibbs-sampled prior candidates, sample-weighted posterior
/// approximation, sequential MMAP ridge extraction, Newton M-step on W.
EstimationResult run_sem(const RealMatrix& spectrogram, std::size_t n_components,
                         const PriorConfig& prior, const SemConfig& sem,
                         const StftConfig& config);

}  // namespace ridgeband
