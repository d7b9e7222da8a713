#include "ridgeband/baseline.hpp"
#include "ridgeband/bench.hpp"
#include "ridgeband/reconstruct.hpp"
#include "ridgeband/tf_core.hpp"

#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace ridgeband;

namespace {

py::array_t<double> to_numpy(const RealMatrix& m) {
    py::array_t<double> out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

RealMatrix from_numpy(const py::array_t<double, py::array::c_style | py::array::forcecast>& a) {
    if (a.ndim() != 2) throw std::invalid_argument("expected a 2-D array");
    RealMatrix m(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)));
    std::copy(a.data(), a.data() + m.data.size(), m.data.begin());
    return m;
}

py::array_t<std::complex<double>> complex_to_numpy(const ComplexMatrix& m) {
    py::array_t<std::complex<double>> out({m.rows, m.cols});
    std::copy(m.data.begin(), m.data.end(), out.mutable_data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_ridgeband, m) {
    m.doc() = "IF ridge estimation of multicomponent signals from spectrograms";

    py::class_<StftConfig>(m, "StftConfig")
        .def(py::init(&make_stft_config), py::arg("n_samples"), py::arg("n_bins"),
             py::arg("time_spread"))
        .def_readonly("n_samples", &StftConfig::n_samples)
        .def_readonly("n_bins", &StftConfig::n_bins)
        .def_readonly("time_spread", &StftConfig::time_spread)
        .def_readonly("window_halfwidth", &StftConfig::window_halfwidth);

    m.def("gaussian_window", &gaussian_window);
    m.def("spectral_kernel", &spectral_kernel, py::arg("offset"), py::arg("config"));
    m.def("kernel_sigma", &kernel_sigma);
    m.def("discard_halfwidth", &discard_halfwidth);
    m.def("ribbon_halfwidth", &ribbon_halfwidth);

    m.def(
        "stft",
        [](const SampledSignal& x, const StftConfig& config) {
            return complex_to_numpy(stft(x, config).coefficients);
        },
        py::arg("signal"), py::arg("config"));
    m.def(
        "spectrogram",
        [](const SampledSignal& x, const StftConfig& config) {
            return to_numpy(spectrogram(stft(x, config)));
        },
        py::arg("signal"), py::arg("config"));
    m.def(
        "istft",
        [](const py::array_t<std::complex<double>, py::array::c_style>& coeffs,
           const StftConfig& config) {
            TimeFrequencyMap tfr;
            tfr.config = config;
            tfr.coefficients = ComplexMatrix(static_cast<std::size_t>(coeffs.shape(0)),
                                             static_cast<std::size_t>(coeffs.shape(1)));
            std::copy(coeffs.data(), coeffs.data() + tfr.coefficients.data.size(),
                      tfr.coefficients.data.begin());
            return istft(tfr);
        },
        py::arg("coefficients"), py::arg("config"));

    py::class_<ModeSpec>(m, "ModeSpec")
        .def_readonly("amplitude", &ModeSpec::amplitude)
        .def_readonly("phase", &ModeSpec::phase)
        .def_readonly("inst_freq", &ModeSpec::inst_freq)
        .def("samples", &ModeSpec::samples);

    m.def("linear_chirp", &linear_chirp, py::arg("n_samples"), py::arg("f_start"),
          py::arg("f_end"), py::arg("amplitude") = 1.0);

    py::class_<GroundTruth>(m, "GroundTruth")
        .def_readonly("ridge_bins", &GroundTruth::ridge_bins)
        .def_readonly("clean_modes", &GroundTruth::clean_modes)
        .def_readonly("mixture", &GroundTruth::mixture);

    m.def("synthesize", &synthesize, py::arg("modes"), py::arg("n_samples"), py::arg("n_bins"));

    m.def(
        "add_noise",
        [](const SampledSignal& clean, const std::string& family, double snr_db,
           std::uint64_t seed) {
            NoiseSpec spec;
            spec.family = noise_family_from_string(family);
            spec.snr_db = snr_db;
            spec.seed = seed;
            return add_noise(clean, spec);
        },
        py::arg("clean"), py::arg("family") = "gaussian", py::arg("snr_db") = 0.0,
        py::arg("seed") = 0);

    py::class_<EstimationResult>(m, "EstimationResult")
        .def_property_readonly("ridges",
                               [](const EstimationResult& r) { return r.ridges.bins; })
        .def_property_readonly("weights",
                               [](const EstimationResult& r) { return to_numpy(r.weights.w); })
        .def_property_readonly("q_hat",
                               [](const EstimationResult& r) { return r.trace.q_hat; })
        .def_readonly("seed", &EstimationResult::seed);

    m.def(
        "run_sem",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& s,
           std::size_t k, const std::string& prior_kind, double epsilon, double lambda,
           std::uint64_t seed, const StftConfig& config) {
            PriorConfig prior;
            prior.kind = prior_kind == "laplacian" ? PriorKind::Laplacian
                                                   : PriorKind::TotalVariation;
            prior.epsilon = epsilon;
            prior.lambda = lambda;
            SemConfig sem;
            sem.seed = seed;
            return run_sem(from_numpy(s), k, prior, sem, config);
        },
        py::arg("spectrogram"), py::arg("k"), py::arg("prior") = "tv",
        py::arg("epsilon") = 1e-3, py::arg("lambda_") = 1e-2, py::arg("seed") = 0,
        py::arg("config"));

    m.def(
        "argmax_ridges",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& s,
           std::size_t k, const StftConfig& config) {
            return argmax_ridges(from_numpy(s), k, -1, config).bins;
        },
        py::arg("spectrogram"), py::arg("k"), py::arg("config"));

    m.def(
        "reconstruct_modes",
        [](const SampledSignal& signal, const std::vector<std::vector<long>>& ridge_bins,
           const StftConfig& config) {
            const TimeFrequencyMap tfr = stft(signal, config);
            RidgeMatrix ridges;
            ridges.bins = ridge_bins;
            const RibbonMask mask = ribbon_mask(ridges, config);
            std::vector<SampledSignal> modes;
            for (std::size_t k = 0; k < ridge_bins.size(); ++k)
                modes.push_back(reconstruct_mode(tfr, mask, k));
            return modes;
        },
        py::arg("signal"), py::arg("ridge_bins"), py::arg("config"));

    m.def("rqf", &rqf, py::arg("reference"), py::arg("estimate"));
}
