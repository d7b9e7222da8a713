#include "ridgeband/io.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace ridgeband {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

json config_to_json(const StftConfig& config) {
    return json{{"n_samples", config.n_samples},
                {"n_bins", config.n_bins},
                {"time_spread", config.time_spread},
                {"window_halfwidth", config.window_halfwidth}};
}

StftConfig config_from_json(const json& j) {
    StftConfig config;
    config.n_samples = j.at("n_samples").get<std::size_t>();
    config.n_bins = j.at("n_bins").get<std::size_t>();
    config.time_spread = j.at("time_spread").get<double>();
    config.window_halfwidth = j.at("window_halfwidth").get<std::size_t>();
    config.validate();
    return config;
}

}  // namespace

SampledSignal read_signal_csv(const std::string& path) {
    std::ifstream in = open_input(path);
    SampledSignal signal;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string re_field, im_field;
        if (!std::getline(row, re_field, ',') || !std::getline(row, im_field, ','))
            throw std::runtime_error("malformed signal CSV row in " + path + ": " + line);
        try {
            const double re = std::stod(re_field);
            const double im = std::stod(im_field);
            signal.emplace_back(re, im);
        } catch (const std::exception&) {
            if (first) {
                first = false;
                continue;  // header
            }
            throw std::runtime_error("malformed signal CSV row in " + path + ": " + line);
        }
        first = false;
    }
    if (signal.empty()) throw std::runtime_error("empty signal file: " + path);
    return signal;
}

void write_signal_csv(const std::string& path, const SampledSignal& signal) {
    std::ofstream out = open_output(path);
    out << "real,imag\n";
    out.precision(17);
    for (const Complex& v : signal) out << v.real() << ',' << v.imag() << '\n';
}

void write_truth_json(const std::string& path, const GroundTruth& truth, const NoiseSpec& noise,
                      const StftConfig& config) {
    json j;
    j["stft"] = config_to_json(config);
    j["ridge_bins"] = truth.ridge_bins;
    j["seed"] = noise.seed;
    j["snr_db"] = std::isinf(noise.snr_db) ? json("inf") : json(noise.snr_db);
    j["noise_family"] = to_string(noise.family);
    json modes = json::array();
    for (const ModeSpec& mode : truth.modes) {
        modes.push_back({{"amplitude_0", mode.amplitude.front()},
                         {"f_start", mode.inst_freq.front()},
                         {"f_end", mode.inst_freq.back()}});
    }
    j["modes"] = modes;
    open_output(path) << j.dump(2) << '\n';
}

void write_result_json(const std::string& path, const StoredResult& result) {
    json j;
    j["method"] = result.method;
    j["prior"] = result.prior;
    j["stft"] = config_to_json(result.config);
    j["seed"] = result.estimation.seed;
    j["ridges"] = result.estimation.ridges.bins;

    const RealMatrix& w = result.estimation.weights.w;
    json weights = json::array();
    for (std::size_t n = 0; n < w.rows; ++n) {
        json row = json::array();
        for (std::size_t k = 0; k < w.cols; ++k) row.push_back(w(n, k));
        weights.push_back(std::move(row));
    }
    j["weights"] = weights;

    const SemTrace& trace = result.estimation.trace;
    j["trace"] = {{"q_hat", trace.q_hat},
                  {"weight_change", trace.weight_change},
                  {"sample_ess", trace.sample_ess},
                  {"wall_seconds", trace.wall_seconds},
                  {"newton_fallbacks", trace.newton_fallbacks}};
    open_output(path) << j.dump(2) << '\n';
}

StoredResult read_result_json(const std::string& path) {
    json j = json::parse(open_input(path));
    StoredResult result;
    result.method = j.at("method").get<std::string>();
    result.prior = j.value("prior", std::string{});
    result.config = config_from_json(j.at("stft"));
    result.estimation.seed = j.at("seed").get<std::uint64_t>();
    result.estimation.ridges.bins = j.at("ridges").get<std::vector<std::vector<long>>>();

    const auto weights = j.at("weights").get<std::vector<std::vector<double>>>();
    const std::size_t n = weights.size();
    const std::size_t k = n ? weights[0].size() : 0;
    result.estimation.weights.w = RealMatrix(n, k);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < k; ++c) result.estimation.weights.w(r, c) = weights[r][c];

    if (j.contains("trace")) {
        const json& t = j["trace"];
        result.estimation.trace.q_hat = t.value("q_hat", std::vector<double>{});
        result.estimation.trace.weight_change = t.value("weight_change", std::vector<double>{});
        result.estimation.trace.sample_ess = t.value("sample_ess", std::vector<double>{});
        result.estimation.trace.wall_seconds = t.value("wall_seconds", std::vector<double>{});
        result.estimation.trace.newton_fallbacks = t.value("newton_fallbacks", std::size_t{0});
    }
    return result;
}

void write_tfr_json(const std::string& path, const TimeFrequencyMap& tfr) {
    json j;
    j["stft"] = config_to_json(tfr.config);
    std::vector<double> re, im;
    re.reserve(tfr.coefficients.data.size());
    im.reserve(tfr.coefficients.data.size());
    for (const Complex& c : tfr.coefficients.data) {
        re.push_back(c.real());
        im.push_back(c.imag());
    }
    j["real"] = re;
    j["imag"] = im;
    open_output(path) << j.dump() << '\n';
}

}  // namespace ridgeband
