#include "ridgeband/bench.hpp"

#include "ridgeband/baseline.hpp"
#include "ridgeband/reconstruct.hpp"
#include "ridgeband/tf_core.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <thread>

namespace ridgeband {

namespace {

using nlohmann::json;

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::ofstream open_output(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

void format_value(std::ostream& out, double v) {
    if (std::isinf(v)) {
        out << (v > 0 ? "inf" : "-inf");
        return;
    }
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    out << buf;
}

// Assign estimated components to ground-truth modes by minimizing the total
// absolute bin distance over permutations.
std::vector<std::size_t> match_modes(const RidgeMatrix& estimated,
                                     const std::vector<std::vector<long>>& truth) {
    const std::size_t K = truth.size();
    std::vector<std::size_t> perm(K), best(K);
    std::iota(perm.begin(), perm.end(), 0);
    best = perm;
    double best_cost = std::numeric_limits<double>::max();
    do {
        double cost = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            for (std::size_t n = 0; n < truth[k].size(); ++n)
                cost += std::abs(static_cast<double>(estimated.bins[perm[k]][n] - truth[k][n]));
        if (cost < best_cost) {
            best_cost = cost;
            best = perm;
        }
    } while (K <= 5 && std::next_permutation(perm.begin(), perm.end()));
    return best;
}

struct MethodSpec {
    std::string name;
    bool is_sem = false;
    PriorConfig prior;
};

MethodSpec parse_method(const std::string& name, const BenchConfig& config) {
    MethodSpec spec;
    spec.name = name;
    if (name == "argmax") return spec;
    spec.is_sem = true;
    if (name == "sem-tv") {
        spec.prior = PriorConfig{PriorKind::TotalVariation, config.epsilon, config.lambda};
        return spec;
    }
    if (name == "sem-laplacian") {
        spec.prior = PriorConfig{PriorKind::Laplacian, config.epsilon, config.lambda};
        return spec;
    }
    throw std::invalid_argument("unknown method: " + name);
}

}  // namespace

void BenchConfig::validate() const {
    if (realizations < 1) throw std::invalid_argument("BenchConfig: realizations must be >= 1");
    if (snr_grid_db.empty()) throw std::invalid_argument("BenchConfig: snr grid must be nonempty");
    if (methods.empty()) throw std::invalid_argument("BenchConfig: methods list must be nonempty");
    if (chirps.empty()) throw std::invalid_argument("BenchConfig: need at least one chirp");
    stft.validate();
    sem.validate();
    for (const std::string& m : methods) parse_method(m, *this);
}

std::uint64_t cell_seed(std::uint64_t base_seed, std::size_t snr_index,
                        std::size_t realization_index) {
    std::uint64_t s = splitmix64(base_seed ^ 0x632be59bd9b4e019ULL);
    s = splitmix64(s ^ static_cast<std::uint64_t>(snr_index));
    s = splitmix64(s ^ (static_cast<std::uint64_t>(realization_index) << 20));
    return s;
}

BenchConfig bench_config_from_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open bench config: " + path);
    json j = json::parse(in);

    BenchConfig config;
    if (j.contains("snr_grid_db")) config.snr_grid_db = j["snr_grid_db"].get<std::vector<double>>();
    if (j.contains("realizations")) config.realizations = j["realizations"].get<std::size_t>();
    if (j.contains("methods")) config.methods = j["methods"].get<std::vector<std::string>>();
    if (j.contains("epsilon")) config.epsilon = j["epsilon"].get<double>();
    if (j.contains("lambda")) config.lambda = j["lambda"].get<double>();
    if (j.contains("base_seed")) config.base_seed = j["base_seed"].get<std::uint64_t>();
    if (j.contains("noise_family"))
        config.noise_family = noise_family_from_string(j["noise_family"].get<std::string>());
    if (j.contains("noiseless")) config.noiseless = j["noiseless"].get<bool>();
    if (j.contains("threads")) config.threads = j["threads"].get<std::size_t>();
    if (j.contains("stft")) {
        const json& s = j["stft"];
        config.stft = make_stft_config(s.value("n_samples", std::size_t{500}),
                                       s.value("n_bins", std::size_t{500}),
                                       s.value("time_spread", 20.0));
    }
    if (j.contains("chirps")) {
        config.chirps.clear();
        for (const json& c : j["chirps"])
            config.chirps.push_back({c.at("f_start").get<double>(), c.at("f_end").get<double>(),
                                     c.value("amplitude", 1.0)});
    }
    if (j.contains("sem")) {
        const json& s = j["sem"];
        config.sem.n_prior_samples = s.value("n_prior_samples", config.sem.n_prior_samples);
        config.sem.max_iter = s.value("max_iter", config.sem.max_iter);
        config.sem.tol = s.value("tol", config.sem.tol);
        config.sem.discard_halfwidth = s.value("discard_halfwidth", config.sem.discard_halfwidth);
        config.sem.icm_mode = s.value("icm_mode", config.sem.icm_mode);
    }
    config.validate();
    return config;
}

void write_bench_config(const std::string& path, const BenchConfig& config) {
    json chirps = json::array();
    for (const ChirpSpec& c : config.chirps)
        chirps.push_back({{"f_start", c.f_start}, {"f_end", c.f_end}, {"amplitude", c.amplitude}});
    json j{{"snr_grid_db", config.snr_grid_db},
           {"realizations", config.realizations},
           {"methods", config.methods},
           {"epsilon", config.epsilon},
           {"lambda", config.lambda},
           {"base_seed", config.base_seed},
           {"noise_family", to_string(config.noise_family)},
           {"noiseless", config.noiseless},
           {"stft",
            {{"n_samples", config.stft.n_samples},
             {"n_bins", config.stft.n_bins},
             {"time_spread", config.stft.time_spread}}},
           {"chirps", chirps},
           {"sem",
            {{"n_prior_samples", config.sem.n_prior_samples},
             {"max_iter", config.sem.max_iter},
             {"tol", config.sem.tol},
             {"discard_halfwidth", config.sem.discard_halfwidth},
             {"icm_mode", config.sem.icm_mode}}}};
    open_output(path) << j.dump(2) << '\n';
}

namespace {

std::vector<BenchRow> run_cell(const BenchConfig& config, const GroundTruth& truth,
                               std::size_t snr_index, std::size_t realization) {
    std::vector<BenchRow> rows;
    const double snr = config.snr_grid_db[snr_index];
    const std::uint64_t seed = cell_seed(config.base_seed, snr_index, realization);

    NoiseSpec noise;
    noise.family = config.noise_family;
    noise.snr_db = config.noiseless ? std::numeric_limits<double>::infinity() : snr;
    noise.seed = seed;

    const SampledSignal observed = add_noise(truth.mixture, noise);
    const TimeFrequencyMap tfr = stft(observed, config.stft);
    const RealMatrix spect = spectrogram(tfr);
    const std::size_t K = config.chirps.size();

    for (const std::string& method_name : config.methods) {
        const MethodSpec method = parse_method(method_name, config);
        const auto t0 = std::chrono::steady_clock::now();
        try {
            RidgeMatrix ridges;
            std::size_t iterations = 0;
            if (method.is_sem) {
                SemConfig sem = config.sem;
                sem.seed = splitmix64(seed ^ std::hash<std::string>{}(method_name));
                EstimationResult est = run_sem(spect, K, method.prior, sem, config.stft);
                ridges = std::move(est.ridges);
                iterations = est.trace.q_hat.size();
            } else {
                ridges = argmax_ridges(spect, K, config.sem.discard_halfwidth, config.stft);
            }
            const auto t1 = std::chrono::steady_clock::now();
            const double wall_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

            const RibbonMask mask = ribbon_mask(ridges, config.stft);
            const std::vector<std::size_t> assignment = match_modes(ridges, truth.ridge_bins);
            for (std::size_t k = 0; k < K; ++k) {
                BenchRow row;
                row.snr_db = snr;
                row.method = method_name;
                row.realization = realization;
                row.mode = k;
                row.iterations = iterations;
                row.wall_ms = wall_ms;
                const SampledSignal mode_hat = reconstruct_mode(tfr, mask, assignment[k]);
                row.rqf_db = rqf(truth.clean_modes[k], mode_hat);
                rows.push_back(std::move(row));
            }
        } catch (const std::exception& e) {
            for (std::size_t k = 0; k < K; ++k) {
                BenchRow row;
                row.snr_db = snr;
                row.method = method_name;
                row.realization = realization;
                row.mode = k;
                row.ok = false;
                row.error = e.what();
                rows.push_back(std::move(row));
            }
        }
    }
    return rows;
}

}  // namespace

BenchResults run_bench(const BenchConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();

    std::vector<ModeSpec> modes;
    for (const ChirpSpec& c : config.chirps)
        modes.push_back(linear_chirp(config.stft.n_samples, c.f_start, c.f_end, c.amplitude));
    const GroundTruth truth = synthesize(modes, config.stft.n_samples, config.stft.n_bins);

    struct Cell {
        std::size_t snr_index;
        std::size_t realization;
    };
    std::vector<Cell> cells;
    for (std::size_t s = 0; s < config.snr_grid_db.size(); ++s)
        for (std::size_t r = 0; r < config.realizations; ++r) cells.push_back({s, r});

    std::vector<std::vector<BenchRow>> cell_rows(cells.size());
    std::atomic<std::size_t> next{0};
    const std::size_t n_threads =
        std::max<std::size_t>(1, std::min<std::size_t>(cells.size(),
            config.threads ? config.threads : std::thread::hardware_concurrency()));

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) return;
            cell_rows[i] = run_cell(config, truth, cells[i].snr_index, cells[i].realization);
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t + 1 < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (std::thread& t : pool) t.join();

    BenchResults results;
    for (auto& rows : cell_rows)
        for (BenchRow& row : rows) results.rows.push_back(std::move(row));
    std::sort(results.rows.begin(), results.rows.end(), [](const BenchRow& a, const BenchRow& b) {
        return std::tie(a.snr_db, a.method, a.realization, a.mode) <
               std::tie(b.snr_db, b.method, b.realization, b.mode);
    });
    results.summary = summarize(results.rows);
    results.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return results;
}

std::vector<BenchSummaryRow> summarize(const std::vector<BenchRow>& rows) {
    struct Key {
        double snr;
        std::string method;
        std::size_t mode;
        bool operator<(const Key& o) const {
            return std::tie(snr, method, mode) < std::tie(o.snr, o.method, o.mode);
        }
    };
    std::map<Key, std::vector<double>> ok_values;
    std::map<Key, std::size_t> failures;
    for (const BenchRow& row : rows) {
        Key key{row.snr_db, row.method, row.mode};
        if (row.ok)
            ok_values[key].push_back(row.rqf_db);
        else
            ++failures[key];
        failures.try_emplace(key, 0);
        ok_values.try_emplace(key);
    }

    std::vector<BenchSummaryRow> summary;
    for (const auto& [key, values] : ok_values) {
        BenchSummaryRow s;
        s.snr_db = key.snr;
        s.method = key.method;
        s.mode = key.mode;
        s.n_ok = values.size();
        s.n_failed = failures[key];
        if (!values.empty()) {
            s.mean_rqf = std::accumulate(values.begin(), values.end(), 0.0) /
                         static_cast<double>(values.size());
            double var = 0.0;
            for (double v : values) var += (v - s.mean_rqf) * (v - s.mean_rqf);
            s.std_rqf = std::sqrt(var / static_cast<double>(values.size()));
        }
        summary.push_back(std::move(s));
    }
    return summary;
}

void write_raw_csv(const std::string& path, const std::vector<BenchRow>& rows) {
    std::ofstream out = open_output(path);
    // Wall times live in run-metadata.json: the CSVs must be byte-identical
    // across reruns with the same base seed.
    out << "snr_db,method,realization,mode,rqf_db,status,iterations\n";
    for (const BenchRow& row : rows) {
        format_value(out, row.snr_db);
        out << ',' << row.method << ',' << row.realization << ',' << row.mode << ',';
        if (row.ok) format_value(out, row.rqf_db);
        out << ',' << (row.ok ? "ok" : "failed") << ',' << row.iterations << '\n';
    }
}

void write_summary_csv(const std::string& path, const std::vector<BenchSummaryRow>& summary) {
    std::ofstream out = open_output(path);
    out << "snr_db,method,mode,mean_rqf,std_rqf,n_ok,n_failed\n";
    for (const BenchSummaryRow& s : summary) {
        format_value(out, s.snr_db);
        out << ',' << s.method << ',' << s.mode << ',';
        format_value(out, s.mean_rqf);
        out << ',';
        format_value(out, s.std_rqf);
        out << ',' << s.n_ok << ',' << s.n_failed << '\n';
    }
}

void emit_plot_data(const BenchResults& results, const std::string& out_dir) {
    std::set<std::size_t> mode_ids;
    for (const BenchSummaryRow& s : results.summary) mode_ids.insert(s.mode);
    for (std::size_t mode : mode_ids) {
        std::ofstream out =
            open_output(out_dir + "/mode" + std::to_string(mode) + "_plot.csv");
        out << "snr,method,mean_rqf,std_rqf\n";
        for (const BenchSummaryRow& s : results.summary) {
            if (s.mode != mode) continue;
            format_value(out, s.snr_db);
            out << ',' << s.method << ',';
            format_value(out, s.mean_rqf);
            out << ',';
            format_value(out, s.std_rqf);
            out << '\n';
        }
    }
}

void write_run_metadata(const std::string& path, const BenchConfig& config,
                        const BenchResults& results) {
    json j{{"base_seed", config.base_seed},
           {"version", "ridgeband 0.1.0"},
           {"total_seconds", results.total_seconds},
           {"n_rows", results.rows.size()},
           {"methods", config.methods},
           {"realizations", config.realizations},
           {"noise_family", to_string(config.noise_family)}};
    open_output(path) << j.dump(2) << '\n';
}

void write_bench_outputs(const std::string& out_dir, const BenchConfig& config,
                         const BenchResults& results) {
    std::filesystem::create_directories(out_dir);
    write_raw_csv(out_dir + "/raw.csv", results.rows);
    write_summary_csv(out_dir + "/summary.csv", results.summary);
    emit_plot_data(results, out_dir);
    write_run_metadata(out_dir + "/run-metadata.json", config, results);
}

}  // namespace ridgeband
