#include "ridgeband/inference.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <numbers>
#include <numeric>

namespace ridgeband {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double v) { return std::log(std::max(v, 1e-300)); }

struct AdmissibleBand {
    long lo;
    long hi;
    long count() const { return hi - lo + 1; }
};

AdmissibleBand admissible_band(const StftConfig& config) {
    const long h = admissible_margin(config);
    AdmissibleBand band{h, static_cast<long>(config.n_bins) - 1 - h};
    if (band.count() < 1)
        throw std::invalid_argument("admissible band is empty; n_bins too small for this L");
    return band;
}

// Effective kernel radius: beyond it the Gaussian kernel is below e^-30 of
// its peak.
long kernel_radius(const StftConfig& config) {
    const double M = static_cast<double>(config.n_bins);
    const long r = static_cast<long>(
        std::ceil(std::sqrt(30.0) * M / (2.0 * std::numbers::pi * config.time_spread)));
    return std::min<long>(r, static_cast<long>(config.n_bins) / 2);
}

// Draws an index from unnormalized weights by inverse CDF; `total` is their
// sum. Ties and ranges are deterministic given the RNG stream.
std::size_t draw_index(const std::vector<double>& weights, double total, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double target = unit(rng) * total;
    double acc = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        acc += weights[i];
        if (target < acc) return i;
    }
    return weights.size() - 1;
}

class SiteSampler {
public:
    SiteSampler(const PriorConfig& prior, const AdmissibleBand& band, std::size_t n_bins)
        : m_prior(prior), m_band(band) {
        if (prior.kind == PriorKind::TotalVariation) {
            // |m-a|+|m-b| is an integer <= 2M; tabulate exp(-eps * t) once.
            m_tv_table.resize(2 * n_bins + 1);
            for (std::size_t t = 0; t < m_tv_table.size(); ++t)
                m_tv_table[t] = std::exp(-prior.epsilon * static_cast<double>(t));
        }
        m_weights.resize(static_cast<std::size_t>(band.count()));
    }

    // Resample ridge row `row` at position n from its local prior
    // conditional; argmax instead when icm is set.
    void update_site(std::vector<long>& row, std::size_t n, std::mt19937_64& rng, bool icm) {
        const long N = static_cast<long>(row.size());
        const long ln = static_cast<long>(n);
        double total = 0.0;

        if (m_prior.kind == PriorKind::TotalVariation) {
            const bool has_left = ln > 0;
            const bool has_right = ln + 1 < N;
            const long a = has_left ? row[n - 1] : 0;
            const long b = has_right ? row[n + 1] : 0;
            for (long m = m_band.lo; m <= m_band.hi; ++m) {
                long t = 0;
                if (has_left) t += std::abs(m - a);
                if (has_right) t += std::abs(m - b);
                m_weights[static_cast<std::size_t>(m - m_band.lo)] = m_tv_table[static_cast<std::size_t>(t)];
            }
            for (double w : m_weights) total += w;
        } else {
            // Squared-second-difference terms whose stencil covers site n.
            double e_min = std::numeric_limits<double>::max();
            for (long m = m_band.lo; m <= m_band.hi; ++m) {
                double e = 0.0;
                if (ln >= 2)
                    e += sq(static_cast<double>(row[n - 2]) - 2.0 * row[n - 1] + m);
                if (ln >= 1 && ln + 1 < N)
                    e += sq(static_cast<double>(row[n - 1]) - 2.0 * m + row[n + 1]);
                if (ln + 2 < N)
                    e += sq(static_cast<double>(m) - 2.0 * row[n + 1] + row[n + 2]);
                m_weights[static_cast<std::size_t>(m - m_band.lo)] = e;
                e_min = std::min(e_min, e);
            }
            const double half_lambda = 0.5 * m_prior.lambda;
            for (double& w : m_weights) {
                const double excess = half_lambda * (w - e_min);
                w = (excess > 40.0) ? 0.0 : std::exp(-excess);
                total += w;
            }
        }

        std::size_t pick;
        if (icm) {
            pick = static_cast<std::size_t>(
                std::max_element(m_weights.begin(), m_weights.end()) - m_weights.begin());
        } else {
            pick = draw_index(m_weights, total, rng);
        }
        row[n] = m_band.lo + static_cast<long>(pick);
    }

private:
    static double sq(double v) { return v * v; }

    const PriorConfig& m_prior;
    AdmissibleBand m_band;
    std::vector<double> m_tv_table;
    std::vector<double> m_weights;
};

std::vector<RidgeMatrix> gibbs_samples(const RidgeMatrix& current, const PriorConfig& prior,
                                       const SemConfig& sem, const StftConfig& config,
                                       std::mt19937_64& rng) {
    const AdmissibleBand band = admissible_band(config);
    const std::size_t K = current.n_components();
    const std::size_t N = current.n_columns();

    RidgeMatrix chain = current;
    for (auto& row : chain.bins)
        for (long& b : row) b = std::clamp(b, band.lo, band.hi);

    SiteSampler sampler(prior, band, config.n_bins);
    std::vector<RidgeMatrix> samples;
    samples.reserve(sem.n_prior_samples);
    for (std::size_t i = 0; i < sem.n_prior_samples; ++i) {
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t n = 0; n < N; ++n)
                sampler.update_site(chain.bins[k], n, rng, sem.icm_mode);
        samples.push_back(chain);
    }
    return samples;
}

// Normalizes each spectrogram column to unit mass.
RealMatrix normalized_columns(const RealMatrix& spectrogram) {
    RealMatrix s_bar = spectrogram;
    for (std::size_t n = 0; n < s_bar.rows; ++n) {
        double total = 0.0;
        for (std::size_t m = 0; m < s_bar.cols; ++m) total += s_bar(n, m);
        if (total <= 0.0)
            throw std::invalid_argument("spectrogram column " + std::to_string(n) + " is all zero");
        for (std::size_t m = 0; m < s_bar.cols; ++m) s_bar(n, m) /= total;
    }
    return s_bar;
}

// Match extracted bins to the previous column's component bins, minimizing
// total jump; ties resolved toward the first permutation in lexicographic
// order (deterministic).
std::vector<std::size_t> match_components(const std::vector<long>& previous,
                                          const std::vector<long>& extracted) {
    const std::size_t K = previous.size();
    std::vector<std::size_t> perm(K);
    std::iota(perm.begin(), perm.end(), 0);
    if (K <= 4) {
        std::vector<std::size_t> best = perm;
        double best_cost = std::numeric_limits<double>::max();
        std::vector<std::size_t> p = perm;
        std::sort(p.begin(), p.end());
        do {
            double cost = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                cost += std::abs(static_cast<double>(previous[k] - extracted[p[k]]));
            if (cost < best_cost) {
                best_cost = cost;
                best = p;
            }
        } while (std::next_permutation(p.begin(), p.end()));
        return best;
    }
    // Greedy nearest-bin continuation for larger K: repeatedly bind the
    // unmatched (component, candidate) pair with the smallest jump.
    std::vector<std::size_t> assign(K, K);
    std::vector<bool> comp_done(K, false), cand_done(K, false);
    for (std::size_t round = 0; round < K; ++round) {
        double best_jump = std::numeric_limits<double>::max();
        std::size_t best_k = 0, best_j = 0;
        for (std::size_t k = 0; k < K; ++k) {
            if (comp_done[k]) continue;
            for (std::size_t j = 0; j < K; ++j) {
                if (cand_done[j]) continue;
                const double jump = std::abs(static_cast<double>(previous[k] - extracted[j]));
                if (jump < best_jump) {
                    best_jump = jump;
                    best_k = k;
                    best_j = j;
                }
            }
        }
        assign[best_k] = best_j;
        comp_done[best_k] = true;
        cand_done[best_j] = true;
    }
    return assign;
}

}  // namespace

void SemConfig::validate() const {
    if (n_prior_samples < 1) throw std::invalid_argument("SemConfig: n_prior_samples must be >= 1");
    if (max_iter < 1) throw std::invalid_argument("SemConfig: max_iter must be >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("SemConfig: tol must be > 0");
    if (!(newton.gradient_tolerance > 0.0) || newton.max_inner_iter < 1 ||
        !(newton.step_damping > 0.0 && newton.step_damping < 1.0))
        throw std::invalid_argument("SemConfig: invalid Newton settings");
}

std::vector<RidgeMatrix> sample_ridge_candidates(const RidgeMatrix& current,
                                                 const PriorConfig& prior, const SemConfig& sem,
                                                 const StftConfig& config) {
    sem.validate();
    std::mt19937_64 rng(sem.seed);
    return gibbs_samples(current, prior, sem, config, rng);
}

std::vector<double> approx_ridge_posterior(const std::vector<RidgeMatrix>& samples,
                                           const RealMatrix& spectrogram,
                                           const WeightMatrix& weights,
                                           const KernelTable& kernel) {
    if (samples.empty())
        throw std::invalid_argument("approx_ridge_posterior: need at least one sample");

    std::vector<double> log_w(samples.size());
    double max_log = kNegInf;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        log_w[i] = total_loglik(spectrogram, weights, samples[i], kernel);
        max_log = std::max(max_log, log_w[i]);
    }
    if (!std::isfinite(max_log))
        throw std::runtime_error("approx_ridge_posterior: degenerate posterior (all samples underflow)");

    double z = 0.0;
    for (double& lw : log_w) {
        lw = std::exp(lw - max_log);
        z += lw;
    }
    for (double& lw : log_w) lw /= z;
    return log_w;
}

RidgeMatrix sequential_mmap(const RealMatrix& scores, std::size_t n_components, long discard,
                            const StftConfig& config) {
    const AdmissibleBand band = admissible_band(config);
    const std::size_t N = scores.rows;
    const std::size_t K = n_components;
    if (scores.cols != config.n_bins)
        throw std::invalid_argument("sequential_mmap: score columns do not match n_bins");
    if (discard < 0) throw std::invalid_argument("sequential_mmap: discard must be >= 0");
    if (static_cast<long>(K) * (2 * discard + 1) > band.count())
        throw std::invalid_argument("sequential_mmap: overcrowded column, K*(2d+1) exceeds admissible bins");

    RidgeMatrix ridges;
    ridges.bins.assign(K, std::vector<long>(N, band.lo));

    std::vector<char> blocked(static_cast<std::size_t>(band.count()));
    std::vector<long> extracted(K);
    std::vector<long> previous(K);

    for (std::size_t n = 0; n < N; ++n) {
        std::fill(blocked.begin(), blocked.end(), 0);
        for (std::size_t k = 0; k < K; ++k) {
            long best_m = -1;
            double best_score = kNegInf;
            for (long m = band.lo; m <= band.hi; ++m) {
                if (blocked[static_cast<std::size_t>(m - band.lo)]) continue;
                const double v = scores(n, static_cast<std::size_t>(m));
                if (v > best_score) {  // ties stay at the lower bin
                    best_score = v;
                    best_m = m;
                }
            }
            if (best_m < 0)
                throw std::runtime_error("sequential_mmap: no admissible bin left in column " +
                                         std::to_string(n));
            extracted[k] = best_m;
            const long b_lo = std::max(band.lo, best_m - discard);
            const long b_hi = std::min(band.hi, best_m + discard);
            for (long m = b_lo; m <= b_hi; ++m)
                blocked[static_cast<std::size_t>(m - band.lo)] = 1;
        }

        if (n == 0) {
            for (std::size_t k = 0; k < K; ++k) ridges.bins[k][0] = extracted[k];
        } else {
            const std::vector<std::size_t> pick = match_components(previous, extracted);
            for (std::size_t k = 0; k < K; ++k) ridges.bins[k][n] = extracted[pick[k]];
        }
        for (std::size_t k = 0; k < K; ++k) previous[k] = ridges.bins[k][n];
    }
    return ridges;
}

namespace {

// Curvature part of the Laplacian log-prior touched by placing component
// bin m at column n: the three second-difference stencils involving n, with
// boundary stencils dropped.
double laplacian_conditional(const std::vector<long>& track, std::size_t n, long m,
                             double lambda) {
    const std::size_t N = track.size();
    const auto sq = [](double v) { return v * v; };
    double energy = 0.0;
    if (n >= 2) energy += sq(static_cast<double>(track[n - 2]) - 2.0 * track[n - 1] + m);
    if (n >= 1 && n + 1 < N)
        energy += sq(static_cast<double>(track[n - 1]) - 2.0 * m + track[n + 1]);
    if (n + 2 < N) energy += sq(static_cast<double>(m) - 2.0 * track[n + 1] + track[n + 2]);
    return -0.5 * lambda * energy;
}

// Coordinate polish of the extracted tracks under the exact Laplacian
// stencils. The dynamic program above uses a first-difference surrogate, which
// leaves the track free to drift where the data is weak (most visibly at the
// signal edges, where window truncation halves the component's energy); the
// exact curvature terms instead favor straight continuation of the anchored
// interior. Columns are re-bound greedily with the same discard blocking as
// the extraction; a forward and a backward pass heal the right and left tails
// respectively.
void laplacian_polish(const RealMatrix& scores, RidgeMatrix& tracks, const PriorConfig& prior,
                      long discard, const StftConfig& config, bool forward) {
    const AdmissibleBand band = admissible_band(config);
    const std::size_t N = scores.rows;
    const std::size_t K = tracks.n_components();
    std::vector<char> blocked(static_cast<std::size_t>(band.count()));
    std::vector<char> placed(K);

    for (std::size_t step_n = 0; step_n < N; ++step_n) {
        const std::size_t n = forward ? step_n : N - 1 - step_n;
        std::fill(blocked.begin(), blocked.end(), 0);
        std::fill(placed.begin(), placed.end(), 0);
        for (std::size_t step = 0; step < K; ++step) {
            std::size_t best_k = 0;
            long best_m = -1;
            double best_score = kNegInf;
            for (std::size_t k = 0; k < K; ++k) {
                if (placed[k]) continue;
                for (long m = band.lo; m <= band.hi; ++m) {
                    if (blocked[static_cast<std::size_t>(m - band.lo)]) continue;
                    const double v = scores(n, static_cast<std::size_t>(m)) +
                                     laplacian_conditional(tracks.bins[k], n, m, prior.lambda);
                    if (v > best_score) {
                        best_score = v;
                        best_k = k;
                        best_m = m;
                    }
                }
            }
            if (best_m < 0)
                throw std::runtime_error("sequential_mmap: no admissible bin left in column " +
                                         std::to_string(n));
            placed[best_k] = 1;
            tracks.bins[best_k][n] = best_m;
            const long b_lo = std::max(band.lo, best_m - discard);
            const long b_hi = std::min(band.hi, best_m + discard);
            for (long m = b_lo; m <= b_hi; ++m)
                blocked[static_cast<std::size_t>(m - band.lo)] = 1;
        }
    }
}

// Robust local linear-fit smoothing per component track (Theil-Sen estimator
// in a sliding window): slope = median of pairwise slopes, intercept = median
// of slope-corrected values, each column replaced by the fitted line at the
// column. Any locally linear track (tones, chirps) is an exact fixed point,
// while noise deflections of the path in low-SNR columns are rejected up to
// an outlier fraction of ~29%. Windows are clipped (asymmetric) at the
// signal edges.
void linear_smooth_tracks(RidgeMatrix& tracks, long halfwidth = 10) {
    std::vector<double> slopes;
    std::vector<double> residuals;
    for (std::vector<long>& track : tracks.bins) {
        const long n_cols = static_cast<long>(track.size());
        const long h = std::min(halfwidth, n_cols / 8);
        if (h <= 0) continue;
        std::vector<long> smoothed(track.size());
        for (long n = 0; n < n_cols; ++n) {
            const long lo = std::max<long>(0, n - h);
            const long hi = std::min(n_cols - 1, n + h);
            slopes.clear();
            for (long i = lo; i <= hi; ++i)
                for (long j = i + 1; j <= hi; ++j)
                    slopes.push_back(
                        static_cast<double>(track[static_cast<std::size_t>(j)] -
                                            track[static_cast<std::size_t>(i)]) /
                        static_cast<double>(j - i));
            std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2, slopes.end());
            const double slope = slopes[slopes.size() / 2];
            residuals.clear();
            for (long i = lo; i <= hi; ++i)
                residuals.push_back(static_cast<double>(track[static_cast<std::size_t>(i)]) -
                                    slope * static_cast<double>(i - n));
            std::nth_element(residuals.begin(), residuals.begin() + residuals.size() / 2,
                             residuals.end());
            smoothed[static_cast<std::size_t>(n)] = std::lround(residuals[residuals.size() / 2]);
        }
        track = std::move(smoothed);
    }
}

// Sliding-window temporal median per component track; exact on any locally
// linear track, removes isolated outliers.
void median_filter_tracks(RidgeMatrix& tracks, long halfwidth = 4) {
    for (std::vector<long>& track : tracks.bins) {
        const long n_cols = static_cast<long>(track.size());
        // Scale the window down on short tracks so the filter never spans a
        // sizeable fraction of the signal; below 8 columns it is a no-op.
        halfwidth = std::min(halfwidth, n_cols / 8);
        if (halfwidth <= 0) return;
        std::vector<long> filtered(track.size());
        std::vector<long> window;
        for (long n = 0; n < n_cols; ++n) {
            const long lo = std::max<long>(0, n - halfwidth);
            const long hi = std::min(n_cols - 1, n + halfwidth);
            window.assign(track.begin() + lo, track.begin() + hi + 1);
            std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
            filtered[static_cast<std::size_t>(n)] = window[window.size() / 2];
        }
        track = std::move(filtered);
    }
}

// Theil-Sen line fit of a track segment [lo, hi] in global column
// coordinates: slope = median of pairwise slopes, intercept = median of
// slope-corrected values. Returns {slope, intercept} so the line value at
// column n is slope * n + intercept.
std::pair<double, double> robust_line(const std::vector<long>& track, long lo, long hi) {
    const long n_cols = static_cast<long>(track.size());
    lo = std::max<long>(0, lo);
    hi = std::min(n_cols - 1, hi);
    if (hi < lo) return {0.0, 0.0};
    if (hi == lo) return {0.0, static_cast<double>(track[static_cast<std::size_t>(lo)])};
    std::vector<double> slopes;
    for (long i = lo; i <= hi; ++i)
        for (long j = i + 1; j <= hi; ++j)
            slopes.push_back(static_cast<double>(track[static_cast<std::size_t>(j)] -
                                                 track[static_cast<std::size_t>(i)]) /
                             static_cast<double>(j - i));
    std::nth_element(slopes.begin(), slopes.begin() + slopes.size() / 2, slopes.end());
    const double slope = slopes[slopes.size() / 2];
    std::vector<double> intercepts;
    for (long i = lo; i <= hi; ++i)
        intercepts.push_back(static_cast<double>(track[static_cast<std::size_t>(i)]) -
                             slope * static_cast<double>(i));
    std::nth_element(intercepts.begin(), intercepts.begin() + intercepts.size() / 2,
                     intercepts.end());
    return {slope, intercepts[intercepts.size() / 2]};
}

// Boundary correction: near the signal edges the analysis window is
// truncated, which biases the spectrogram peak of a modulated component by
// several bins (the shortened window averages the instantaneous frequency
// over a one-sided span). The bias is a known artifact of the analysis chain,
// decaying within about one window halfwidth of the edge, so each track's
// first and last stretch is replaced by the robust line fitted just inside
// the unbiased interior.
void extrapolate_edges(RidgeMatrix& tracks, const StftConfig& config) {
    for (std::vector<long>& track : tracks.bins) {
        const long n_cols = static_cast<long>(track.size());
        const long edge =
            std::min(static_cast<long>(std::ceil(1.25 * config.time_spread)), n_cols / 8);
        if (edge <= 0) continue;
        const long fit_len =
            std::min(4 * static_cast<long>(std::lround(config.time_spread)), n_cols / 4);
        const auto [sl, il] = robust_line(track, edge, edge + fit_len);
        for (long n = 0; n < edge; ++n)
            track[static_cast<std::size_t>(n)] = std::lround(sl * static_cast<double>(n) + il);
        const auto [sr, ir] = robust_line(track, n_cols - 1 - edge - fit_len, n_cols - 1 - edge);
        for (long n = n_cols - edge; n < n_cols; ++n)
            track[static_cast<std::size_t>(n)] = std::lround(sr * static_cast<double>(n) + ir);
    }
}

// Interference bridging: where two components' spectral kernels overlap
// (track gap below about twice the kernel support) their cross term displaces
// both spectrogram peaks by a few bins, oscillating with the beat phase -
// another deterministic artifact of the analysis chain rather than noise.
// Each track is carried across such a zone by blending the robust lines
// fitted on the clean columns on either side; with one anchored side only the
// available line is extrapolated, and with none (two components close over
// the whole signal) the segment is replaced by its own robust fit.
void bridge_interference(RidgeMatrix& tracks, long discard) {
    const std::size_t K = tracks.n_components();
    if (K < 2) return;
    const long N = static_cast<long>(tracks.bins[0].size());
    const long overlap = 2 * discard - 2;
    const long anchor_len = std::min<long>(40, N / 8);
    for (std::size_t k1 = 0; k1 + 1 < K; ++k1) {
        for (std::size_t k2 = k1 + 1; k2 < K; ++k2) {
            for (long n = 0; n < N;) {
                if (std::abs(tracks.bins[k1][static_cast<std::size_t>(n)] -
                             tracks.bins[k2][static_cast<std::size_t>(n)]) > overlap) {
                    ++n;
                    continue;
                }
                long end = n;
                while (end < N && std::abs(tracks.bins[k1][static_cast<std::size_t>(end)] -
                                           tracks.bins[k2][static_cast<std::size_t>(end)]) <=
                                      overlap)
                    ++end;
                const bool has_left = n >= 5;
                const bool has_right = end + 5 <= N;
                for (std::size_t k : {k1, k2}) {
                    std::vector<long>& t = tracks.bins[k];
                    if (has_left && has_right) {
                        const auto [sl, il] = robust_line(t, n - anchor_len, n - 1);
                        const auto [sr, ir] = robust_line(t, end, end + anchor_len - 1);
                        const double span = static_cast<double>(end - n + 1);
                        for (long i = n; i < end; ++i) {
                            const double w = static_cast<double>(i - n + 1) / (span + 1.0);
                            const double left = sl * static_cast<double>(i) + il;
                            const double right = sr * static_cast<double>(i) + ir;
                            t[static_cast<std::size_t>(i)] =
                                std::lround((1.0 - w) * left + w * right);
                        }
                    } else if (has_left || has_right) {
                        const auto [s, c] = has_left ? robust_line(t, n - anchor_len, n - 1)
                                                     : robust_line(t, end, end + anchor_len - 1);
                        for (long i = n; i < end; ++i)
                            t[static_cast<std::size_t>(i)] =
                                std::lround(s * static_cast<double>(i) + c);
                    } else if (end - n >= 5) {
                        const auto [s, c] = robust_line(t, n, end - 1);
                        for (long i = n; i < end; ++i)
                            t[static_cast<std::size_t>(i)] =
                                std::lround(s * static_cast<double>(i) + c);
                    }
                }
                n = end;
            }
        }
    }
}

// Max-product transition step for total-variation pairwise potentials:
// out[b] = max_p (prev[p] - eps*|b-p|), with the maximizing p recorded in
// parent[b]. Two linear passes (a distance transform), O(B).
void tv_transition_max(const std::vector<double>& prev, std::vector<double>& out,
                       std::vector<long>& parent, double eps) {
    const long n_bins = static_cast<long>(prev.size());
    double run = kNegInf;
    long arg = -1;
    for (long b = 0; b < n_bins; ++b) {
        run -= eps;
        if (prev[static_cast<std::size_t>(b)] >= run) {
            run = prev[static_cast<std::size_t>(b)];
            arg = b;
        }
        out[static_cast<std::size_t>(b)] = run;
        parent[static_cast<std::size_t>(b)] = arg;
    }
    run = kNegInf;
    arg = -1;
    for (long b = n_bins - 1; b >= 0; --b) {
        run -= eps;
        if (prev[static_cast<std::size_t>(b)] >= run) {
            run = prev[static_cast<std::size_t>(b)];
            arg = b;
        }
        if (run > out[static_cast<std::size_t>(b)]) {
            out[static_cast<std::size_t>(b)] = run;
            parent[static_cast<std::size_t>(b)] = arg;
        }
    }
}

// Max-product transition step for quadratic potentials:
// out[b] = max_p (prev[p] - c*(b-p)^2), parent[b] = argmax. Lower-envelope
// (Felzenszwalb-Huttenlocher) distance transform, O(B); -inf sources are
// skipped.
void quad_transition_max(const std::vector<double>& prev, std::vector<double>& out,
                         std::vector<long>& parent, double c) {
    const long n_bins = static_cast<long>(prev.size());
    std::vector<long> hull(static_cast<std::size_t>(n_bins));
    std::vector<double> breaks(static_cast<std::size_t>(n_bins) + 1);
    long top = -1;
    for (long q = 0; q < n_bins; ++q) {
        const double fq = prev[static_cast<std::size_t>(q)];
        if (!std::isfinite(fq)) continue;
        double s = 0.0;
        while (top >= 0) {
            const long p = hull[static_cast<std::size_t>(top)];
            const double fp = prev[static_cast<std::size_t>(p)];
            // Abscissa where parabola q overtakes parabola p.
            s = ((fp - fq) / c + static_cast<double>(q * q - p * p)) /
                (2.0 * static_cast<double>(q - p));
            if (top > 0 && s <= breaks[static_cast<std::size_t>(top)])
                --top;
            else
                break;
        }
        ++top;
        hull[static_cast<std::size_t>(top)] = q;
        breaks[static_cast<std::size_t>(top)] = top == 0 ? -1e300 : s;
        breaks[static_cast<std::size_t>(top) + 1] = 1e300;
    }
    if (top < 0) {
        std::fill(out.begin(), out.end(), kNegInf);
        std::fill(parent.begin(), parent.end(), -1L);
        return;
    }
    long j = 0;
    for (long b = 0; b < n_bins; ++b) {
        while (j < top && breaks[static_cast<std::size_t>(j) + 1] < static_cast<double>(b)) ++j;
        const long p = hull[static_cast<std::size_t>(j)];
        const double delta = static_cast<double>(b - p);
        out[static_cast<std::size_t>(b)] = prev[static_cast<std::size_t>(p)] - c * delta * delta;
        parent[static_cast<std::size_t>(b)] = p;
    }
}

// Global per-component extraction: an exact max-product dynamic program along
// time for each component in turn, blocking the discard neighborhood of the
// components already placed before extracting the next. Transition costs
// follow the prior: eps*|delta| for total variation (its exact pairwise
// potential) and (lambda/2)*delta^2 for the Laplacian (a first-difference
// surrogate; the curvature stencil has no pairwise decomposition). Global
// path integration is what rejects locally bright noise streaks that any
// column-by-column decision latches onto: entering and leaving a streak costs
// two large transitions while the streak's score advantage is bounded by its
// duration.
RidgeMatrix viterbi_extract(const RealMatrix& scores, std::size_t n_components,
                            const PriorConfig& prior, long discard, const StftConfig& config) {
    const AdmissibleBand band = admissible_band(config);
    const std::size_t N = scores.rows;
    const long n_bins = band.count();
    if (static_cast<long>(n_components) * (2 * discard + 1) > n_bins)
        throw std::invalid_argument("sequential_mmap: overcrowded column, K*(2d+1) exceeds admissible bins");

    RidgeMatrix tracks;
    tracks.bins.assign(n_components, std::vector<long>(N));
    std::vector<std::vector<char>> blocked(N, std::vector<char>(static_cast<std::size_t>(n_bins), 0));
    std::vector<double> dp(static_cast<std::size_t>(n_bins));
    std::vector<double> trans(static_cast<std::size_t>(n_bins));
    std::vector<std::vector<long>> parents(N, std::vector<long>(static_cast<std::size_t>(n_bins)));

    for (std::size_t k = 0; k < n_components; ++k) {
        for (long b = 0; b < n_bins; ++b)
            dp[static_cast<std::size_t>(b)] =
                blocked[0][static_cast<std::size_t>(b)]
                    ? kNegInf
                    : scores(0, static_cast<std::size_t>(band.lo + b));
        for (std::size_t n = 1; n < N; ++n) {
            if (prior.kind == PriorKind::TotalVariation)
                tv_transition_max(dp, trans, parents[n], prior.epsilon);
            else
                // Surrogate scale calibrated so an isolated one-column step of
                // size delta costs the same as under the exact curvature
                // stencils: 3*lambda*delta^2.
                quad_transition_max(dp, trans, parents[n], 1.5 * prior.lambda);
            for (long b = 0; b < n_bins; ++b)
                dp[static_cast<std::size_t>(b)] =
                    blocked[n][static_cast<std::size_t>(b)]
                        ? kNegInf
                        : trans[static_cast<std::size_t>(b)] +
                              scores(n, static_cast<std::size_t>(band.lo + b));
        }
        long best = 0;
        for (long b = 1; b < n_bins; ++b)
            if (dp[static_cast<std::size_t>(b)] > dp[static_cast<std::size_t>(best)]) best = b;
        if (!std::isfinite(dp[static_cast<std::size_t>(best)]))
            throw std::runtime_error("sequential_mmap: no admissible path left for component " +
                                     std::to_string(k));
        tracks.bins[k][N - 1] = band.lo + best;
        for (std::size_t n = N - 1; n > 0; --n) {
            best = parents[n][static_cast<std::size_t>(best)];
            tracks.bins[k][n - 1] = band.lo + best;
        }
        for (std::size_t n = 0; n < N; ++n) {
            const long m = tracks.bins[k][n];
            const long b_lo = std::max(band.lo, m - discard);
            const long b_hi = std::min(band.hi, m + discard);
            for (long b = b_lo; b <= b_hi; ++b)
                blocked[n][static_cast<std::size_t>(b - band.lo)] = 1;
        }
    }
    return tracks;
}

// Column-wise continuity relabeling: the per-column sets of extracted bins
// are kept, but the assignment of bins to component labels is rebuilt left to
// right so each label continues its nearest value from the previous column.
// The dynamic programs decide each path independently, and where two
// components have near-identical score profiles (e.g. equal-amplitude tones)
// a path may hop between them on tie-breaking noise while the other path
// takes the complement; nearest-continuation labeling removes such hops.
void relabel_for_continuity(RidgeMatrix& tracks) {
    const std::size_t K = tracks.n_components();
    if (K < 2) return;
    const std::size_t N = tracks.bins[0].size();
    std::vector<std::size_t> perm(K), best_perm(K);
    std::vector<long> previous(K), current(K);
    for (std::size_t k = 0; k < K; ++k) previous[k] = tracks.bins[k][0];
    for (std::size_t n = 1; n < N; ++n) {
        for (std::size_t k = 0; k < K; ++k) {
            current[k] = tracks.bins[k][n];
            perm[k] = k;
        }
        double best_cost = std::numeric_limits<double>::infinity();
        std::sort(perm.begin(), perm.end());
        do {
            double cost = 0.0;
            for (std::size_t k = 0; k < K; ++k)
                cost += std::abs(static_cast<double>(current[perm[k]] - previous[k]));
            if (cost < best_cost) {
                best_cost = cost;
                best_perm = perm;
            }
        } while (std::next_permutation(perm.begin(), perm.end()));
        for (std::size_t k = 0; k < K; ++k) {
            tracks.bins[k][n] = current[best_perm[k]];
            previous[k] = tracks.bins[k][n];
        }
    }
}

// Two extracted tracks cannot cross: the discard blocking keeps them at least
// 2d+1 bins apart in every column, so where two physical components do cross,
// the extracted paths bounce off each other and each one continues on the
// other component's branch (the outputs degenerate to lower/upper envelopes).
// This repairs the labeling: where a pair of tracks pinch, compare the slopes
// entering and leaving the pinch and swap the tails when each track's
// incoming slope is continued by the other track's outgoing slope. The bin
// jump this creates at the pinch column is intended - the two ribbons overlap
// there anyway - while each label now follows one physical component end to
// end.
void repair_crossing_identity(RidgeMatrix& tracks, long discard) {
    const std::size_t K = tracks.n_components();
    if (K < 2) return;
    const long N = static_cast<long>(tracks.bins[0].size());
    // Robust local slope: median of one-sided 5-column differences.
    const auto slope = [N](const std::vector<long>& t, long lo, long hi) {
        std::vector<double> d;
        lo = std::max<long>(0, lo);
        hi = std::min(N - 1, hi);
        for (long i = lo; i + 5 <= hi; ++i)
            d.push_back(static_cast<double>(t[static_cast<std::size_t>(i + 5)] -
                                            t[static_cast<std::size_t>(i)]) /
                        5.0);
        if (d.empty()) return 0.0;
        std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
        return d[d.size() / 2];
    };
    const auto sq = [](double v) { return v * v; };
    // A pair of tracks may pinch several times (each contiguous run of
    // near-touching columns is one candidate crossing event); scan left to
    // right and decide each event on the tracks as repaired so far.
    const long touch = 2 * discard + 2;
    for (std::size_t k1 = 0; k1 + 1 < K; ++k1) {
        for (std::size_t k2 = k1 + 1; k2 < K; ++k2) {
            std::vector<long>& a = tracks.bins[k1];
            std::vector<long>& b = tracks.bins[k2];
            for (long n = 0; n < N;) {
                if (std::abs(a[static_cast<std::size_t>(n)] - b[static_cast<std::size_t>(n)]) >
                    touch) {
                    ++n;
                    continue;
                }
                long pinch = n;
                long gap = std::numeric_limits<long>::max();
                long end = n;
                while (end < N && std::abs(a[static_cast<std::size_t>(end)] -
                                           b[static_cast<std::size_t>(end)]) <= touch) {
                    const long g = std::abs(a[static_cast<std::size_t>(end)] -
                                            b[static_cast<std::size_t>(end)]);
                    if (g < gap) {
                        gap = g;
                        pinch = end;
                    }
                    ++end;
                }
                if (pinch < 40 || pinch >= N - 40) {
                    n = end;
                    continue;
                }
                // Slopes are measured outside the whole near-touching run:
                // inside it the tracks ride the blocking floor and their
                // slopes say nothing about which branch each one came from.
                const long start = n;
                const double a_in = slope(a, start - 40, start - 2);
                const double b_in = slope(b, start - 40, start - 2);
                const double a_out = slope(a, end + 2, end + 40);
                const double b_out = slope(b, end + 2, end + 40);
                const double keep = sq(a_in - a_out) + sq(b_in - b_out);
                const double swap = sq(a_in - b_out) + sq(b_in - a_out) + 0.02;
                if (swap < keep)
                    for (long i = pinch; i < N; ++i)
                        std::swap(a[static_cast<std::size_t>(i)], b[static_cast<std::size_t>(i)]);
                n = end;
            }
        }
    }
}

// Permute the freshly extracted components so each one continues the track it
// was closest to in the previous iteration; the weight columns stay attached
// to the same physical component across iterations.
void match_component_identity(const RidgeMatrix& previous, RidgeMatrix& extracted) {
    const std::size_t K = extracted.n_components();
    if (K < 2 || previous.n_components() != K) return;
    const std::size_t N = extracted.bins[0].size();
    std::vector<std::size_t> perm(K), best_perm(K);
    for (std::size_t k = 0; k < K; ++k) perm[k] = k;
    best_perm = perm;
    double best_cost = std::numeric_limits<double>::infinity();
    do {
        double cost = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t n = 0; n < N; ++n)
                cost += std::abs(
                    static_cast<double>(extracted.bins[perm[k]][n] - previous.bins[k][n]));
        if (cost < best_cost) {
            best_cost = cost;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    std::vector<std::vector<long>> reordered(K);
    for (std::size_t k = 0; k < K; ++k) reordered[k] = std::move(extracted.bins[best_perm[k]]);
    extracted.bins = std::move(reordered);
}

// Projection onto {w >= 0, w <= 1, sum w <= 1 - margin}: clip, then scale
// back onto the simplex face if the row sum overshoots.
void project_feasible(std::vector<double>& w, double margin = 1e-9) {
    double sum = 0.0;
    for (double& v : w) {
        v = std::clamp(v, 0.0, 1.0);
        sum += v;
    }
    const double cap = 1.0 - margin;
    if (sum <= cap) return;
    // Euclidean projection onto {sum w = cap, w >= 0}.
    std::vector<double> u = w;
    std::sort(u.begin(), u.end(), std::greater<double>());
    double cum = 0.0;
    double tau = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cum += u[j];
        const double t = (cum - cap) / static_cast<double>(j + 1);
        if (j + 1 == u.size() || u[j + 1] <= t) {
            tau = t;
            break;
        }
    }
    for (double& v : w) v = std::max(0.0, v - tau);
}

// Solves the K x K symmetric system A x = b by Gaussian elimination with
// partial pivoting; returns false when (numerically) singular.
bool solve_symmetric(std::vector<double> a, std::vector<double> b, std::size_t k,
                     std::vector<double>& x) {
    for (std::size_t col = 0; col < k; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < k; ++r)
            if (std::abs(a[r * k + col]) > std::abs(a[pivot * k + col])) pivot = r;
        if (std::abs(a[pivot * k + col]) < 1e-14) return false;
        if (pivot != col) {
            for (std::size_t c = 0; c < k; ++c) std::swap(a[col * k + c], a[pivot * k + c]);
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < k; ++r) {
            const double f = a[r * k + col] / a[col * k + col];
            for (std::size_t c = col; c < k; ++c) a[r * k + c] -= f * a[col * k + c];
            b[r] -= f * b[col];
        }
    }
    x.assign(k, 0.0);
    for (std::size_t r = k; r-- > 0;) {
        double v = b[r];
        for (std::size_t c = r + 1; c < k; ++c) v -= a[r * k + c] * x[c];
        x[r] = v / a[r * k + r];
    }
    return true;
}

struct ColumnObjective {
    std::span<const double> s_bar;         // normalized column, length M
    std::vector<std::vector<double>> g;    // K kernel columns, each length M

    double value(const std::vector<double>& w) const {
        const std::size_t M = s_bar.size();
        const std::size_t K = g.size();
        double w_sum = 0.0;
        for (double v : w) w_sum += v;
        const double floor = (1.0 - w_sum) / static_cast<double>(M);
        double f = 0.0;
        for (std::size_t m = 0; m < M; ++m) {
            if (s_bar[m] == 0.0) continue;
            double p = floor;
            for (std::size_t k = 0; k < K; ++k) p += w[k] * g[k][m];
            f += s_bar[m] * safe_log(p);
        }
        return f;
    }

    void gradient_hessian(const std::vector<double>& w, std::vector<double>& grad,
                          std::vector<double>& hess) const {
        const std::size_t M = s_bar.size();
        const std::size_t K = g.size();
        const double inv_m = 1.0 / static_cast<double>(M);
        double w_sum = 0.0;
        for (double v : w) w_sum += v;
        const double floor = (1.0 - w_sum) * inv_m;

        grad.assign(K, 0.0);
        hess.assign(K * K, 0.0);
        std::vector<double> diff(K);
        for (std::size_t m = 0; m < M; ++m) {
            if (s_bar[m] == 0.0) continue;
            double p = floor;
            for (std::size_t k = 0; k < K; ++k) p += w[k] * g[k][m];
            p = std::max(p, 1e-300);
            const double sp = s_bar[m] / p;
            for (std::size_t k = 0; k < K; ++k) {
                diff[k] = g[k][m] - inv_m;
                grad[k] += sp * diff[k];
            }
            const double spp = sp / p;
            for (std::size_t k = 0; k < K; ++k)
                for (std::size_t j = k; j < K; ++j) hess[k * K + j] -= spp * diff[k] * diff[j];
        }
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t j = 0; j < k; ++j) hess[k * K + j] = hess[j * K + k];
    }
};

}  // namespace

WeightMatrix newton_raphson_weights(const RealMatrix& spectrogram, const RidgeMatrix& ridges,
                                    const WeightMatrix& w_init, const KernelTable& kernel,
                                    const NewtonConfig& newton, std::size_t* fallbacks) {
    const std::size_t N = spectrogram.rows;
    const std::size_t M = spectrogram.cols;
    const std::size_t K = ridges.n_components();
    if (w_init.n_columns() != N || w_init.n_components() != K || ridges.n_columns() != N)
        throw std::invalid_argument("newton_raphson_weights: dimension mismatch");
    if (!w_init.feasible())
        throw std::invalid_argument("newton_raphson_weights: infeasible initial weights");

    const RealMatrix s_bar = normalized_columns(spectrogram);

    WeightMatrix result;
    result.w = RealMatrix(N, K);

    ColumnObjective obj;
    obj.g.assign(K, std::vector<double>(M));
    std::vector<double> w(K), grad(K), hess(K * K), step(K), trial(K);

    for (std::size_t n = 0; n < N; ++n) {
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t m = 0; m < M; ++m)
                obj.g[k][m] = kernel.at(static_cast<long>(m), ridges.bins[k][n]);
        obj.s_bar = std::span<const double>(&s_bar(n, 0), M);

        for (std::size_t k = 0; k < K; ++k) w[k] = w_init.w(n, k);
        project_feasible(w);
        double f_cur = obj.value(w);

        for (std::size_t it = 0; it < newton.max_inner_iter; ++it) {
            obj.gradient_hessian(w, grad, hess);

            double grad_norm = 0.0;
            for (double gk : grad) grad_norm += gk * gk;
            grad_norm = std::sqrt(grad_norm);
            if (grad_norm < newton.gradient_tolerance) break;

            // Newton ascent direction: solve (-H) step = grad.
            std::vector<double> neg_h = hess;
            for (double& v : neg_h) v = -v;
            bool ok = solve_symmetric(neg_h, grad, K, step);
            double dir_dot = 0.0;
            if (ok)
                for (std::size_t k = 0; k < K; ++k) dir_dot += step[k] * grad[k];
            if (!ok || dir_dot <= 0.0) {
                step = grad;  // gradient fallback
                if (fallbacks) ++(*fallbacks);
            }

            double t = 1.0;
            bool accepted = false;
            for (int bt = 0; bt < 40; ++bt) {
                for (std::size_t k = 0; k < K; ++k) trial[k] = w[k] + t * step[k];
                project_feasible(trial);
                const double f_trial = obj.value(trial);
                if (f_trial > f_cur + 1e-15) {
                    w = trial;
                    f_cur = f_trial;
                    accepted = true;
                    break;
                }
                t *= newton.step_damping;
            }
            if (!accepted) break;
        }
        for (std::size_t k = 0; k < K; ++k) result.w(n, k) = w[k];
    }
    return result;
}

namespace {

// Per-column MMAP scores: kernel-smoothed sample marginal combined with the
// single-component likelihood lift over the uniform noise floor.
RealMatrix build_column_scores(const std::vector<RidgeMatrix>& samples,
                               const std::vector<double>& sample_weights, double sample_ess,
                               const RealMatrix& s_bar, const WeightMatrix& weights,
                               const StftConfig& config, const KernelTable& kernel) {
    const std::size_t N = s_bar.rows;
    const std::size_t M = s_bar.cols;
    const std::size_t K = samples.front().n_components();
    const long r = kernel_radius(config);
    const AdmissibleBand band = admissible_band(config);

    RealMatrix prior_marg(N, M, 0.0);
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double omega = sample_weights[i];
        if (omega <= 0.0) continue;
        for (std::size_t k = 0; k < K; ++k) {
            const auto& row = samples[i].bins[k];
            for (std::size_t n = 0; n < N; ++n) {
                const long center = row[n];
                const long lo = std::max<long>(0, center - r);
                const long hi = std::min<long>(static_cast<long>(M) - 1, center + r);
                for (long m = lo; m <= hi; ++m)
                    prior_marg(n, static_cast<std::size_t>(m)) +=
                        omega * kernel.at(m, center);
            }
        }
    }

    RealMatrix scores(N, M, kNegInf);
    for (std::size_t n = 0; n < N; ++n) {
        double w_mean = 0.0;
        for (std::size_t k = 0; k < K; ++k) w_mean += weights.w(n, k);
        const double w_probe = std::clamp(w_mean / static_cast<double>(K), 0.05, 0.95);
        const double floor = (1.0 - w_probe) / static_cast<double>(M);
        const double log_floor = std::log(floor);

        for (long m = band.lo; m <= band.hi; ++m) {
            const long lo = std::max<long>(0, m - r);
            const long hi = std::min<long>(static_cast<long>(M) - 1, m + r);
            double lift = 0.0;
            double near_mass = 0.0;
            for (long mp = lo; mp <= hi; ++mp) {
                const double s = s_bar(n, static_cast<std::size_t>(mp));
                if (s == 0.0) continue;
                near_mass += s;
                lift += s * safe_log(w_probe * kernel.at(mp, m) + floor);
            }
            lift += (1.0 - near_mass) * log_floor;
            scores(n, static_cast<std::size_t>(m)) = lift;
        }

        // Mix the sample marginal with a uniform floor, shrinking toward
        // uniform when the effective sample size is small: a handful of
        // importance-weighted random-walk candidates is a noisy estimate of a
        // near-flat prior and must not override the data lift, while a prior
        // strong enough to pin all chains to one path still tilts the scores.
        double marg_total = 0.0;
        for (long m = band.lo; m <= band.hi; ++m)
            marg_total += prior_marg(n, static_cast<std::size_t>(m));
        const double uniform = 1.0 / static_cast<double>(band.count());
        constexpr double kShrinkage = 1000.0;
        const double mix_floor = kShrinkage / (kShrinkage + std::max(sample_ess, 0.0));
        for (long m = band.lo; m <= band.hi; ++m) {
            const double marg_norm =
                marg_total > 0.0 ? prior_marg(n, static_cast<std::size_t>(m)) / marg_total : uniform;
            scores(n, static_cast<std::size_t>(m)) +=
                std::log((1.0 - mix_floor) * marg_norm + mix_floor * uniform);
        }
    }
    return scores;
}

}  // namespace

void canonical_component_order(RidgeMatrix& ridges, WeightMatrix* weights) {
    const std::size_t K = ridges.n_components();
    if (K < 2) return;
    std::vector<std::size_t> order(K);
    for (std::size_t k = 0; k < K; ++k) order[k] = k;
    std::vector<double> mean_bin(K, 0.0);
    for (std::size_t k = 0; k < K; ++k) {
        for (long b : ridges.bins[k]) mean_bin[k] += static_cast<double>(b);
        mean_bin[k] /= static_cast<double>(std::max<std::size_t>(ridges.bins[k].size(), 1));
    }
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return mean_bin[a] < mean_bin[b]; });

    std::vector<std::vector<long>> bins(K);
    for (std::size_t k = 0; k < K; ++k) bins[k] = std::move(ridges.bins[order[k]]);
    ridges.bins = std::move(bins);

    if (weights != nullptr && weights->w.cols == K) {
        RealMatrix permuted(weights->w.rows, K);
        for (std::size_t n = 0; n < weights->w.rows; ++n)
            for (std::size_t k = 0; k < K; ++k) permuted(n, k) = weights->w(n, order[k]);
        weights->w = std::move(permuted);
    }
}

EstimationResult run_sem(const RealMatrix& spectrogram, std::size_t n_components,
                         const PriorConfig& prior, const SemConfig& sem,
                         const StftConfig& config) {
    sem.validate();
    config.validate();
    if (n_components < 1) throw std::invalid_argument("run_sem: n_components must be >= 1");
    if (spectrogram.rows != config.n_samples || spectrogram.cols != config.n_bins)
        throw std::invalid_argument("run_sem: spectrogram dimensions do not match config");

    const KernelTable kernel(config);
    const RealMatrix s_bar = normalized_columns(spectrogram);
    const long d = sem.discard_halfwidth > 0 ? sem.discard_halfwidth : discard_halfwidth(config);

    EstimationResult result;
    result.seed = sem.seed;

    // Hot start: raw-spectrogram extraction with a temporal median filter per
    // component (an isolated noise spike in the raw extraction would otherwise
    // seed the conditional-prior terms with an outlier), interior feasible
    // weights.
    result.ridges = sequential_mmap(spectrogram, n_components, d, config);
    median_filter_tracks(result.ridges);
    result.weights.w = RealMatrix(config.n_samples, n_components,
                                  1.0 / (2.0 * static_cast<double>(n_components)));

    std::mt19937_64 rng(sem.seed);
    double q_prev = kNegInf;

    for (std::size_t iter = 0; iter < sem.max_iter; ++iter) {
        const auto t0 = std::chrono::steady_clock::now();

        const std::vector<RidgeMatrix> samples =
            gibbs_samples(result.ridges, prior, sem, config, rng);
        std::vector<double> omega;
        try {
            omega = approx_ridge_posterior(samples, spectrogram, result.weights, kernel);
        } catch (const std::runtime_error&) {
            if (iter == 0) throw std::runtime_error("run_sem: estimation failed, degenerate posterior");
            break;  // keep the last consistent estimate
        }

        double ess = 0.0;
        for (double o : omega) ess += o * o;
        ess = 1.0 / ess;

        const RealMatrix scores =
            build_column_scores(samples, omega, ess, s_bar, result.weights, config, kernel);
        RidgeMatrix extracted = viterbi_extract(scores, n_components, prior, d, config);
        if (prior.kind == PriorKind::Laplacian) {
            laplacian_polish(scores, extracted, prior, d, config, true);
            laplacian_polish(scores, extracted, prior, d, config, false);
        }
        relabel_for_continuity(extracted);
        repair_crossing_identity(extracted, d);
        median_filter_tracks(extracted);
        linear_smooth_tracks(extracted);
        bridge_interference(extracted, d);
        extrapolate_edges(extracted, config);
        match_component_identity(result.ridges, extracted);
        result.ridges = std::move(extracted);

        const WeightMatrix w_next =
            newton_raphson_weights(spectrogram, result.ridges, result.weights, kernel, sem.newton,
                                   &result.trace.newton_fallbacks);
        double w_change = 0.0;
        for (std::size_t i = 0; i < w_next.w.data.size(); ++i)
            w_change = std::max(w_change, std::abs(w_next.w.data[i] - result.weights.w.data[i]));
        result.weights = w_next;

        const double q_hat = total_loglik(spectrogram, result.weights, result.ridges, kernel) +
                             log_ridge_prior(result.ridges, prior);

        const auto t1 = std::chrono::steady_clock::now();
        result.trace.q_hat.push_back(q_hat);
        result.trace.weight_change.push_back(w_change);
        result.trace.sample_ess.push_back(ess);
        result.trace.wall_seconds.push_back(std::chrono::duration<double>(t1 - t0).count());

        if (std::isfinite(q_prev)) {
            const double rel = std::abs(q_hat - q_prev) / std::max(std::abs(q_prev), 1e-12);
            if (rel < sem.tol) break;
        }
        q_prev = q_hat;
    }
    canonical_component_order(result.ridges, &result.weights);
    return result;
}

}  // namespace ridgeband
