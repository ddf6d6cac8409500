// Command-line front end: `run` executes an experiment spec, `synth` writes a
// synthetic corridor dataset, `report` renders tables and charts from a
// results file. Every behavior is a thin shell over the library.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftlane/errors.hpp"
#include "driftlane/experiment.hpp"
#include "driftlane/ingest.hpp"
#include "driftlane/report.hpp"
#include "driftlane/synth.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitRunFailures = 1;
constexpr int kExitBadInput = 2;

std::string output_dir_or_default(const std::string& from_spec) {
    if (!from_spec.empty()) return from_spec;
    if (const char* env = std::getenv("DRIFTLANE_OUT")) return env;
    return ".";
}

int cmd_run(const std::string& spec_path, int workers, bool quiet,
            std::optional<std::uint64_t> seed_override) {
    driftlane::ExperimentSpec spec;
    try {
        spec = driftlane::parse_experiment_spec(spec_path);
        if (seed_override) spec.seeds = {*seed_override};
        if (!spec.synthetic) {
            if (!fs::exists(spec.data_csv)) {
                throw driftlane::ConfigError("data file does not exist: " + spec.data_csv);
            }
            if (!fs::exists(spec.meta_csv)) {
                throw driftlane::ConfigError("metadata file does not exist: " + spec.meta_csv);
            }
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    }

    try {
        const driftlane::ExperimentResult result = driftlane::run_experiment(spec, workers, quiet);

        const fs::path out_dir = output_dir_or_default(spec.output_dir);
        fs::create_directories(out_dir);
        driftlane::write_results_csv(result, (out_dir / "results.csv").string());
        driftlane::write_manifest(spec, result, (out_dir / "manifest.json").string());

        if (result.n_failed > 0) {
            std::cerr << result.n_failed << " of " << result.runs.size()
                      << " runs failed; see manifest.json\n";
            return kExitRunFailures;
        }
        if (!quiet) {
            std::cout << "wrote " << (out_dir / "results.csv").string() << " ("
                      << result.runs.size() << " runs)\n";
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
}

int cmd_synth(const std::string& config_path, const std::string& out_path,
              std::optional<std::uint64_t> seed_override, bool quiet) {
    try {
        std::ifstream in(config_path);
        if (!in) throw driftlane::ConfigError("cannot open config: " + config_path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        json j;
        try {
            j = json::parse(buffer.str());
        } catch (const json::parse_error& e) {
            throw driftlane::ConfigError(std::string("config ") + config_path + ": " + e.what());
        }

        driftlane::PhaseModel phases;
        if (j.contains("phases")) {
            const auto& p = j.at("phases");
            auto read3 = [&](const char* key, std::array<double, 3>& out) {
                if (!p.contains(key)) return;
                for (int i = 0; i < 3; ++i) {
                    out[static_cast<std::size_t>(i)] = p.at(key).at(i).get<double>();
                }
            };
            read3("mean_mph", phases.mean_mph);
            read3("std_mph", phases.std_mph);
            read3("dwell_mean_slots", phases.dwell_mean_slots);
        }
        driftlane::CorridorConfig cfg;
        cfg.n_slots = j.value("n_slots", std::int64_t{0});
        cfg.seed = j.value("seed", std::uint64_t{0});
        cfg.n_sensors = j.value("n_sensors", 9);
        cfg.propagation_delay = j.value("propagation_delay", 4);
        if (seed_override) cfg.seed = *seed_override;
        if (j.contains("label_flip_slot")) {
            cfg = driftlane::inject_label_flip(cfg, j.at("label_flip_slot").get<std::int64_t>(),
                                               phases);
        }

        const driftlane::LoopMatrix matrix = driftlane::gen_corridor(cfg, phases);
        driftlane::write_loop_csv(matrix, out_path);

        fs::path meta_path(out_path);
        meta_path.replace_extension(".meta.csv");
        driftlane::write_meta_csv(driftlane::corridor_meta(cfg), meta_path.string());

        if (!quiet) {
            std::cout << "wrote " << out_path << " (" << matrix.n_rows << " slots, "
                      << matrix.n_cols() << " sensors) and " << meta_path.string() << '\n';
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
}

int cmd_report(const std::string& results_path, const std::string& out_dir, bool quiet) {
    try {
        const auto rows = driftlane::parse_results_csv(results_path);
        const auto written = driftlane::write_report_files(rows, out_dir);
        if (!quiet) {
            for (const auto& path : written) std::cout << "wrote " << path << '\n';
        }
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitBadInput;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"driftlane: congestion-level stream learning experiments"};
    app.require_subcommand(1);

    int workers = 1;
    bool quiet = false;
    std::optional<std::uint64_t> seed_override;
    app.add_option("--workers", workers, "parallel runs for `run`")->check(CLI::PositiveNumber);
    app.add_flag("--quiet", quiet, "suppress progress output");
    app.add_option("--seed-override", seed_override, "replace the spec's seed list");

    std::string spec_path;
    auto* run = app.add_subcommand("run", "execute an experiment spec (JSON)");
    run->add_option("spec", spec_path, "experiment spec file")->required();

    std::string synth_config, synth_out;
    auto* synth = app.add_subcommand("synth", "generate a synthetic corridor CSV");
    synth->add_option("config", synth_config, "corridor config file (JSON)")->required();
    synth->add_option("out", synth_out, "output CSV path")->required();

    std::string results_path, report_dir;
    auto* report = app.add_subcommand("report", "render summary table and charts");
    report->add_option("results", results_path, "results.csv from `run`")->required();
    report->add_option("outdir", report_dir, "output directory")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) return cmd_run(spec_path, workers, quiet, seed_override);
    if (synth->parsed()) return cmd_synth(synth_config, synth_out, seed_override, quiet);
    if (report->parsed()) return cmd_report(results_path, report_dir, quiet);
    return kExitBadInput;
}
