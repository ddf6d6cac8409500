#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "driftlane/eval.hpp"
#include "driftlane/ingest.hpp"
#include "driftlane/registry.hpp"
#include "driftlane/synth.hpp"

namespace driftlane {

// A full experiment: one data source, one target sensor, the cross-product
// methods x modes x horizons x seeds.
struct ExperimentSpec {
    // File source; ignored when synthetic is set.
    std::string data_csv;
    std::string meta_csv;

    bool synthetic = false;
    CorridorConfig corridor;
    PhaseModel phases;

    std::string target_sensor;
    LabelThresholds thresholds;
    int n_lags = 5;
    std::size_t n_init = 2016;

    std::vector<std::string> methods;
    std::vector<EvalMode> modes;
    std::vector<int> horizons = {1, 5, 10, 15, 20};
    std::vector<std::uint64_t> seeds = {0};
    std::map<std::string, MethodParams> method_params;

    std::string output_dir;
    std::string spec_json; // raw text, echoed into the manifest
};

// Parses and validates the JSON experiment file. Throws ConfigError with the
// offending key (and the parser's byte position for syntax errors).
ExperimentSpec parse_experiment_spec(const std::string& path);

struct RunOutcome {
    RunConfig config;
    bool ok = false;
    EvalReport report;
    std::string error;
};

struct ExperimentResult {
    std::vector<RunOutcome> runs;
    std::size_t n_failed = 0;
};

// Executes every run in the cross-product, optionally across worker threads;
// the result order is the spec order regardless of worker count.
ExperimentResult run_experiment(const ExperimentSpec& spec, int workers = 1, bool quiet = true);

// results.csv / manifest.json emission; both written atomically
// (temp file + rename).
void write_results_csv(const ExperimentResult& result, const std::string& path);
void write_manifest(const ExperimentSpec& spec, const ExperimentResult& result,
                    const std::string& path);

} // namespace driftlane
