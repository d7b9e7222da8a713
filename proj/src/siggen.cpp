#include "ridgeband/siggen.hpp"

#include <algorithm>
#include <numbers>
#include <random>

namespace ridgeband {

SampledSignal ModeSpec::samples() const {
    SampledSignal x(amplitude.size());
    for (std::size_t n = 0; n < x.size(); ++n)
        x[n] = amplitude[n] * Complex(std::cos(phase[n]), std::sin(phase[n]));
    return x;
}

NoiseFamily noise_family_from_string(const std::string& name) {
    if (name == "gaussian" || name == "gaussian-complex-white") return NoiseFamily::GaussianComplexWhite;
    if (name == "poisson") return NoiseFamily::Poisson;
    if (name == "gamma") return NoiseFamily::Gamma;
    if (name == "mixture") return NoiseFamily::Mixture;
    throw std::invalid_argument("unknown noise family: " + name);
}

std::string to_string(NoiseFamily family) {
    switch (family) {
        case NoiseFamily::GaussianComplexWhite: return "gaussian";
        case NoiseFamily::Poisson: return "poisson";
        case NoiseFamily::Gamma: return "gamma";
        case NoiseFamily::Mixture: return "mixture";
    }
    return "unknown";
}

void NoiseSpec::validate() const {
    if (!std::isfinite(snr_db) && !(std::isinf(snr_db) && snr_db > 0))
        throw std::invalid_argument("NoiseSpec: snr_db must be finite or +inf");
    if (family == NoiseFamily::Mixture) {
        if (mixture_families.empty() || mixture_families.size() != mixture_weights.size())
            throw std::invalid_argument("NoiseSpec: mixture needs matching families and weights");
        double sum = 0.0;
        for (double w : mixture_weights) {
            if (w < 0.0) throw std::invalid_argument("NoiseSpec: mixture weights must be >= 0");
            sum += w;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("NoiseSpec: mixture weights must sum to 1");
        for (NoiseFamily f : mixture_families)
            if (f == NoiseFamily::Mixture)
                throw std::invalid_argument("NoiseSpec: nested mixtures not supported");
    }
}

ModeSpec linear_chirp(std::size_t n_samples, double f_start, double f_end, double amplitude) {
    if (f_start < 0.0 || f_start >= 0.5 || f_end < 0.0 || f_end >= 0.5)
        throw std::invalid_argument("linear_chirp: frequencies must lie in [0, 0.5)");
    if (!(amplitude > 0.0))
        throw std::invalid_argument("linear_chirp: amplitude must be > 0");

    const double N = static_cast<double>(n_samples);
    ModeSpec mode;
    mode.amplitude.assign(n_samples, amplitude);
    mode.phase.resize(n_samples);
    mode.inst_freq.resize(n_samples);
    for (std::size_t n = 0; n < n_samples; ++n) {
        const double t = static_cast<double>(n);
        mode.phase[n] = 2.0 * std::numbers::pi *
                        (f_start * t + (f_end - f_start) * t * t / (2.0 * N));
        mode.inst_freq[n] = f_start + (f_end - f_start) * t / N;
    }
    return mode;
}

GroundTruth synthesize(const std::vector<ModeSpec>& modes, std::size_t n_samples,
                       std::size_t n_bins) {
    if (modes.empty()) throw std::invalid_argument("synthesize: need at least one mode");

    GroundTruth truth;
    truth.modes = modes;
    truth.mixture.assign(n_samples, Complex(0.0, 0.0));
    for (const ModeSpec& mode : modes) {
        if (mode.size() != n_samples)
            throw std::invalid_argument("synthesize: mode length does not match n_samples");
        SampledSignal x = mode.samples();
        for (std::size_t n = 0; n < n_samples; ++n) truth.mixture[n] += x[n];
        truth.clean_modes.push_back(std::move(x));

        std::vector<long> bins(n_samples);
        for (std::size_t n = 0; n < n_samples; ++n) {
            long b = std::lround(static_cast<double>(n_bins) * mode.inst_freq[n]);
            bins[n] = std::clamp<long>(b, 0, static_cast<long>(n_bins) - 1);
        }
        truth.ridge_bins.push_back(std::move(bins));
    }
    return truth;
}

double signal_power(const SampledSignal& x) {
    double p = 0.0;
    for (const Complex& v : x) p += std::norm(v);
    return p;
}

namespace {

// One centered real draw from the family. Poisson: rate 1 minus its mean.
// Gamma: shape 2, scale 1, minus its mean.
double centered_real_draw(NoiseFamily family, std::mt19937_64& rng) {
    switch (family) {
        case NoiseFamily::Poisson: {
            std::poisson_distribution<long> dist(1.0);
            return static_cast<double>(dist(rng)) - 1.0;
        }
        case NoiseFamily::Gamma: {
            std::gamma_distribution<double> dist(2.0, 1.0);
            return dist(rng) - 2.0;
        }
        default:
            throw std::logic_error("centered_real_draw: unexpected family");
    }
}

Complex draw_noise_sample(NoiseFamily family, std::mt19937_64& rng,
                          std::normal_distribution<double>& gauss) {
    if (family == NoiseFamily::GaussianComplexWhite) {
        double re = gauss(rng);
        double im = gauss(rng);
        return Complex(re, im);
    }
    double re = centered_real_draw(family, rng);
    double im = centered_real_draw(family, rng);
    return Complex(re, im);
}

}  // namespace

SampledSignal add_noise(const SampledSignal& clean, const NoiseSpec& spec,
                        NoiseDiagnostics* diagnostics) {
    spec.validate();
    if (std::isinf(spec.snr_db)) {
        if (diagnostics) *diagnostics = NoiseDiagnostics{};
        return clean;
    }
    const double clean_power = signal_power(clean);
    if (clean_power <= 0.0)
        throw std::invalid_argument("add_noise: SNR undefined for a zero signal");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::discrete_distribution<std::size_t> pick_component(spec.mixture_weights.begin(),
                                                           spec.mixture_weights.end());

    SampledSignal noise(clean.size());
    for (std::size_t n = 0; n < clean.size(); ++n) {
        NoiseFamily f = spec.family;
        if (f == NoiseFamily::Mixture) f = spec.mixture_families[pick_component(rng)];
        noise[n] = draw_noise_sample(f, rng, gauss);
    }

    double noise_power = signal_power(noise);
    if (noise_power <= 0.0) {
        // All-zero draw (possible for centered poisson); re-draw gaussian fallback.
        for (std::size_t n = 0; n < noise.size(); ++n)
            noise[n] = Complex(gauss(rng), gauss(rng));
        noise_power = signal_power(noise);
    }

    // Rescale so the realized SNR matches exactly.
    const double target_power = clean_power * std::pow(10.0, -spec.snr_db / 10.0);
    const double scale = std::sqrt(target_power / noise_power);

    SampledSignal out(clean.size());
    double realized_power = 0.0;
    double amp_sum = 0.0;
    for (std::size_t n = 0; n < clean.size(); ++n) {
        const Complex nu = noise[n] * scale;
        out[n] = clean[n] + nu;
        realized_power += std::norm(nu);
        amp_sum += std::abs(nu);
    }
    if (diagnostics) {
        diagnostics->realized_noise_power = realized_power;
        diagnostics->average_noise_amplitude = amp_sum / static_cast<double>(clean.size());
    }
    return out;
}

}  // namespace ridgeband
