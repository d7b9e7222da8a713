#include "ridgeband/reconstruct.hpp"
#include "ridgeband/siggen.hpp"
#include "ridgeband/tf_core.hpp"

#include <doctest.h>

#include <numbers>
#include <random>

using namespace ridgeband;

TEST_CASE("gaussian window matches the closed form") {
    const StftConfig config = make_stft_config(500, 500, 20.0);
    const std::vector<double> w = gaussian_window(config);
    const long H = static_cast<long>(config.window_halfwidth);

    // theta(0) = 1 / (sqrt(2 pi) * 20)
    const double expected_peak = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * 20.0);
    CHECK(w[static_cast<std::size_t>(H)] == doctest::Approx(expected_peak).epsilon(1e-12));
    CHECK(expected_peak == doctest::Approx(0.0199471).epsilon(1e-5));

    // theta(20) = theta(0) * e^{-1/2}
    CHECK(w[static_cast<std::size_t>(H + 20)] ==
          doctest::Approx(expected_peak * std::exp(-0.5)).epsilon(1e-12));

    // symmetry, positivity, peak at 0
    for (long n = 0; n <= H; ++n) {
        CHECK(w[static_cast<std::size_t>(H + n)] == w[static_cast<std::size_t>(H - n)]);
        CHECK(w[static_cast<std::size_t>(H + n)] > 0.0);
        CHECK(w[static_cast<std::size_t>(H + n)] <= w[static_cast<std::size_t>(H)]);
    }
}

TEST_CASE("gaussian window rejects non-positive L") {
    StftConfig config = make_stft_config(500, 500, 20.0);
    config.time_spread = 0.0;
    CHECK_THROWS_AS(gaussian_window(config), std::invalid_argument);
}

TEST_CASE("stft of zero signal is zero") {
    const StftConfig config = make_stft_config(64, 64, 4.0);
    const SampledSignal zero(64, Complex(0.0, 0.0));
    const TimeFrequencyMap tfr = stft(zero, config);
    for (const Complex& c : tfr.coefficients.data) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("stft rejects length mismatch") {
    const StftConfig config = make_stft_config(64, 64, 4.0);
    const SampledSignal x(63, Complex(1.0, 0.0));
    CHECK_THROWS_AS(stft(x, config), std::invalid_argument);
}

TEST_CASE("pure tone spectrogram peaks at the tone bin") {
    const StftConfig config = make_stft_config(128, 128, 8.0);
    const std::size_t m0 = 32;
    SampledSignal x(128);
    for (std::size_t l = 0; l < 128; ++l) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(l * m0) / 128.0;
        x[l] = Complex(std::cos(angle), std::sin(angle));
    }
    const RealMatrix s = spectrogram(stft(x, config));
    // interior column, away from boundary effects
    const std::size_t n = 64;
    std::size_t peak = 0;
    for (std::size_t m = 1; m < 128; ++m)
        if (s(n, m) > s(n, peak)) peak = m;
    CHECK(peak == m0);
}

TEST_CASE("stft is linear") {
    const StftConfig config = make_stft_config(64, 64, 4.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> gauss;
    SampledSignal x(64), y(64), mix(64);
    const Complex alpha(1.5, -0.25), beta(-0.5, 2.0);
    for (std::size_t i = 0; i < 64; ++i) {
        x[i] = Complex(gauss(rng), gauss(rng));
        y[i] = Complex(gauss(rng), gauss(rng));
        mix[i] = alpha * x[i] + beta * y[i];
    }
    const TimeFrequencyMap fx = stft(x, config);
    const TimeFrequencyMap fy = stft(y, config);
    const TimeFrequencyMap fm = stft(mix, config);
    double max_err = 0.0;
    for (std::size_t i = 0; i < fm.coefficients.data.size(); ++i)
        max_err = std::max(max_err, std::abs(fm.coefficients.data[i] -
                                             (alpha * fx.coefficients.data[i] +
                                              beta * fy.coefficients.data[i])));
    CHECK(max_err < 1e-10);
}

TEST_CASE("spectrogram is the squared modulus") {
    TimeFrequencyMap tfr;
    tfr.config = make_stft_config(4, 4, 0.5);
    tfr.coefficients = ComplexMatrix(4, 4);
    tfr.coefficients(1, 2) = Complex(1.0, 1.0);
    const RealMatrix s = spectrogram(tfr);
    CHECK(s(1, 2) == doctest::Approx(2.0));
    for (double v : s.data) CHECK(v >= 0.0);
}

TEST_CASE("istft round trip reaches 60 dB on band-limited chirps") {
    const StftConfig config = make_stft_config(500, 500, 20.0);
    const ModeSpec chirp = linear_chirp(500, 0.10, 0.35, 1.0);
    const SampledSignal x = chirp.samples();
    const SampledSignal x_hat = istft(stft(x, config));
    CHECK(rqf(x, x_hat) >= 60.0);
}

TEST_CASE("istft of zero map is zero, and scales linearly") {
    const StftConfig config = make_stft_config(100, 100, 5.0);
    const ModeSpec tone = linear_chirp(100, 0.2, 0.2, 1.0);
    TimeFrequencyMap tfr = stft(tone.samples(), config);

    TimeFrequencyMap zero = tfr;
    for (Complex& c : zero.coefficients.data) c = Complex(0.0, 0.0);
    for (const Complex& v : istft(zero)) CHECK(std::abs(v) == 0.0);

    const SampledSignal base = istft(tfr);
    TimeFrequencyMap scaled = tfr;
    const Complex alpha(0.5, 1.25);
    for (Complex& c : scaled.coefficients.data) c *= alpha;
    const SampledSignal scaled_out = istft(scaled);
    for (std::size_t i = 0; i < base.size(); ++i)
        CHECK(std::abs(scaled_out[i] - alpha * base[i]) < 1e-12);
}

TEST_CASE("spectral kernel: closed form, symmetry, normalization") {
    const StftConfig config = make_stft_config(500, 500, 20.0);

    // g(0) = 2 sqrt(pi) L / M
    const double expected = 2.0 * std::sqrt(std::numbers::pi) * 20.0 / 500.0;
    CHECK(spectral_kernel(0, config) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(expected == doctest::Approx(0.1417963).epsilon(1e-6));

    for (long m = 1; m <= 250; ++m)
        CHECK(spectral_kernel(m, config) == spectral_kernel(-m, config));

    // Riemann sum of g over [-M/2, M/2] approximates the unit integral.
    double sum = 0.0;
    for (long m = -250; m <= 250; ++m) sum += spectral_kernel(m, config);
    CHECK(std::abs(sum - 1.0) < 1e-6);
}

TEST_CASE("kernel table uses circular signed distance") {
    const StftConfig config = make_stft_config(500, 500, 20.0);
    const KernelTable kernel(config);
    CHECK(kernel.at(0, 0) == doctest::Approx(spectral_kernel(0, config)));
    CHECK(kernel.at(3, 499) == doctest::Approx(spectral_kernel(4, config)));
    CHECK(kernel.at(499, 3) == doctest::Approx(spectral_kernel(4, config)));
}
