#include "driftlane/experiment.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "driftlane/errors.hpp"

namespace driftlane {

namespace {

using nlohmann::json;

PhaseModel parse_phases(const json& j) {
    PhaseModel p;
    auto read3 = [&](const char* key, std::array<double, 3>& out) {
        if (!j.contains(key)) return;
        const auto& arr = j.at(key);
        if (!arr.is_array() || arr.size() != 3) {
            throw ConfigError(std::string("synthetic.phases.") + key +
                              " must be an array of 3 numbers [free-flow, congestion, bottleneck]");
        }
        for (int i = 0; i < 3; ++i) out[static_cast<std::size_t>(i)] = arr.at(i).get<double>();
    };
    read3("mean_mph", p.mean_mph);
    read3("std_mph", p.std_mph);
    read3("dwell_mean_slots", p.dwell_mean_slots);
    return p;
}

CorridorConfig parse_corridor(const json& j, const PhaseModel& phases) {
    CorridorConfig cfg;
    cfg.n_slots = j.value("n_slots", std::int64_t{0});
    cfg.seed = j.value("seed", std::uint64_t{0});
    cfg.n_sensors = j.value("n_sensors", 9);
    cfg.propagation_delay = j.value("propagation_delay", 4);
    if (j.contains("label_flip_slot")) {
        cfg = inject_label_flip(cfg, j.at("label_flip_slot").get<std::int64_t>(), phases);
    }
    return cfg;
}

} // namespace

ExperimentSpec parse_experiment_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open experiment spec: " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();

    json j;
    try {
        j = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ConfigError("spec " + path + ": " + e.what());
    }

    ExperimentSpec spec;
    spec.spec_json = buffer.str();
    try {
        if (j.contains("synthetic")) {
            spec.synthetic = true;
            spec.phases = parse_phases(j.at("synthetic").value("phases", json::object()));
            spec.corridor = parse_corridor(j.at("synthetic"), spec.phases);
        } else if (j.contains("data")) {
            spec.data_csv = j.at("data").at("csv").get<std::string>();
            spec.meta_csv = j.at("data").at("meta").get<std::string>();
        } else {
            throw ConfigError("spec must define either 'data' or 'synthetic'");
        }

        spec.target_sensor = j.at("target_sensor").get<std::string>();
        if (j.contains("thresholds")) {
            spec.thresholds.free_flow_above = j.at("thresholds").value("free_flow_above", 42.0);
            spec.thresholds.bottleneck_below = j.at("thresholds").value("bottleneck_below", 22.0);
            if (!(spec.thresholds.bottleneck_below < spec.thresholds.free_flow_above)) {
                throw ConfigError("thresholds: bottleneck_below must be < free_flow_above");
            }
        }
        spec.n_lags = j.value("n_lags", 5);
        spec.n_init = j.value("n_init", std::size_t{2016});

        spec.methods = j.at("methods").get<std::vector<std::string>>();
        if (spec.methods.empty()) throw ConfigError("methods must be non-empty");
        for (const auto& m : spec.methods) {
            if (!is_known_method(m)) throw ConfigError("unknown method id '" + m + "'");
        }

        spec.modes.clear();
        for (const auto& m : j.at("modes").get<std::vector<std::string>>()) {
            if (m == "offline") {
                spec.modes.push_back(EvalMode::Offline);
            } else if (m == "online") {
                spec.modes.push_back(EvalMode::Online);
            } else {
                throw ConfigError("mode must be 'offline' or 'online', got '" + m + "'");
            }
        }
        if (spec.modes.empty()) throw ConfigError("modes must be non-empty");

        if (j.contains("horizons")) spec.horizons = j.at("horizons").get<std::vector<int>>();
        if (spec.horizons.empty()) throw ConfigError("horizons must be non-empty");
        for (int h : spec.horizons) {
            if (h < 1) throw ConfigError("horizons must all be >= 1");
        }

        if (j.contains("seeds")) spec.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        if (spec.seeds.empty()) throw ConfigError("seeds must be non-empty");

        if (j.contains("method_params")) {
            for (const auto& [method, params] : j.at("method_params").items()) {
                if (!is_known_method(method)) {
                    throw ConfigError("method_params: unknown method id '" + method + "'");
                }
                for (const auto& [key, value] : params.items()) {
                    spec.method_params[method][key] = value.get<double>();
                }
            }
        }

        spec.output_dir = j.value("output_dir", std::string{});
    } catch (const json::exception& e) {
        throw ConfigError("spec " + path + ": " + e.what());
    }
    return spec;
}

ExperimentResult run_experiment(const ExperimentSpec& spec, int workers, bool quiet) {
    LoopMatrix matrix;
    std::vector<AtrMeta> meta;
    if (spec.synthetic) {
        CorridorConfig corridor = spec.corridor;
        meta = corridor_meta(corridor);
        // Scoped drift events follow the sensor under evaluation.
        for (std::size_t i = 0; i < meta.size(); ++i) {
            if (meta[i].sensor_id == spec.target_sensor) {
                corridor.target_sensor_index = static_cast<int>(i);
            }
        }
        matrix = gen_corridor(corridor, spec.phases);
    } else {
        std::tie(matrix, meta) = parse_loop_csv(spec.data_csv, spec.meta_csv);
    }

    // Sensors that never appear in the data cannot be neighbors.
    std::vector<AtrMeta> usable;
    for (const auto& m : meta) {
        if (matrix.column_of(m.sensor_id) >= 0) usable.push_back(m);
    }
    const NeighborSet nb = select_neighbors(usable, spec.target_sensor);

    // One instance stream per horizon, shared across every run.
    std::map<int, std::vector<LabeledInstance>> streams;
    for (int h : spec.horizons) {
        if (streams.count(h)) continue;
        WindowSpec window;
        window.n_lags = spec.n_lags;
        window.horizon = h;
        streams[h] = build_instances(matrix, nb, window, spec.thresholds);
    }

    std::vector<RunConfig> configs;
    for (const auto& method : spec.methods) {
        for (const EvalMode mode : spec.modes) {
            for (const int horizon : spec.horizons) {
                for (const std::uint64_t seed : spec.seeds) {
                    RunConfig cfg;
                    cfg.method = method;
                    cfg.mode = mode;
                    cfg.horizon = horizon;
                    cfg.location = spec.target_sensor;
                    cfg.seed = seed;
                    cfg.n_init = spec.n_init;
                    cfg.thresholds = spec.thresholds;
                    configs.push_back(std::move(cfg));
                }
            }
        }
    }

    ExperimentResult result;
    result.runs.resize(configs.size());

    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> failed{0};
    auto work = [&]() {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= configs.size()) return;
            RunOutcome& outcome = result.runs[i];
            outcome.config = configs[i];
            try {
                MethodParams params;
                const auto it = spec.method_params.find(configs[i].method);
                if (it != spec.method_params.end()) params = it->second;
                ClassifierPtr learner =
                    make_classifier(configs[i].method, configs[i].seed, params);
                learner->reset(configs[i].seed);
                outcome.report = prequential_run(streams.at(configs[i].horizon), *learner,
                                                 configs[i]);
                outcome.ok = true;
            } catch (const std::exception& e) {
                outcome.ok = false;
                outcome.error = e.what();
                failed.fetch_add(1);
            }
            if (!quiet) {
                std::ostringstream line;
                line << (outcome.ok ? "done " : "FAIL ") << configs[i].method << ' '
                     << to_string(configs[i].mode) << " h=" << configs[i].horizon
                     << " seed=" << configs[i].seed;
                if (!outcome.ok) line << " (" << outcome.error << ')';
                line << '\n';
                std::cerr << line.str();
            }
        }
    };

    const int n_workers = std::max(1, workers);
    if (n_workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    result.n_failed = failed.load();
    return result;
}

namespace {

void atomic_write(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw ConfigError("cannot write: " + tmp);
        out << content;
    }
    std::filesystem::rename(tmp, path);
}

} // namespace

void write_results_csv(const ExperimentResult& result, const std::string& path) {
    std::ostringstream out;
    out << report_csv_header() << '\n';
    for (const auto& run : result.runs) {
        if (run.ok) append_report_csv(out, run.report);
    }
    atomic_write(path, out.str());
}

void write_manifest(const ExperimentSpec& spec, const ExperimentResult& result,
                    const std::string& path) {
    json manifest;
    try {
        manifest["spec"] = json::parse(spec.spec_json);
    } catch (const json::parse_error&) {
        manifest["spec"] = spec.spec_json;
    }
    manifest["n_runs"] = result.runs.size();
    manifest["n_failed"] = result.n_failed;
    json runs = json::array();
    for (const auto& run : result.runs) {
        json r;
        r["method"] = run.config.method;
        r["mode"] = to_string(run.config.mode);
        r["horizon"] = run.config.horizon;
        r["seed"] = run.config.seed;
        r["location"] = run.config.location;
        r["status"] = run.ok ? "ok" : "error";
        if (!run.ok) r["error"] = run.error;
        runs.push_back(std::move(r));
    }
    manifest["runs"] = std::move(runs);
    atomic_write(path, manifest.dump(2) + "\n");
}

} // namespace driftlane
