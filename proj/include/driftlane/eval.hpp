#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "driftlane/core.hpp"
#include "driftlane/ingest.hpp"

namespace driftlane {

enum class EvalMode { Offline, Online };

inline const char* to_string(EvalMode m) { return m == EvalMode::Offline ? "offline" : "online"; }

// Strategy B classifies labels directly; strategy A predicts the raw speed
// and labels it afterwards. A is supported for the naive baseline only,
// where the two are provably equivalent.
enum class Strategy { Classification, NaiveRegression };

struct RunConfig {
    std::string method = "NM";
    EvalMode mode = EvalMode::Online;
    int horizon = 1;
    std::string location;
    std::uint64_t seed = 0;
    std::size_t n_init = 2016;
    LabelThresholds thresholds;
    Strategy strategy = Strategy::Classification;
};

struct ConfusionMatrix {
    std::array<std::array<std::int64_t, kNumClasses>, kNumClasses> counts{}; // [true][predicted]

    void add(CongestionLevel truth, CongestionLevel predicted) {
        counts[ordinal(truth)][ordinal(predicted)] += 1;
    }
    std::int64_t total() const {
        std::int64_t t = 0;
        for (const auto& row : counts) {
            for (std::int64_t v : row) t += v;
        }
        return t;
    }
    bool operator==(const ConfusionMatrix&) const = default;
};

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// One-vs-rest precision/recall/F1 per class; 0/0 ratios are defined as 0,
// penalizing classes that are never predicted.
std::array<ClassMetrics, kNumClasses> f1_scores(const ConfusionMatrix& cm);

// Unweighted (macro) mean of the three per-class F1 scores.
double umf1(const std::array<double, kNumClasses>& per_class_f1);

struct EvalReport {
    RunConfig config;
    ConfusionMatrix cm;
    std::array<ClassMetrics, kNumClasses> per_class{};
    double umf1 = 0.0;
    std::int64_t n_evaluated = 0;
    double runtime_seconds = 0.0; // wall clock over the test phase, ms resolution
    double sliding_umf1 = 0.0;    // over the final 2016-prediction window
};

// Thrown when the learner fails mid-stream; carries what was measured up to
// the failing instance.
class AbortedRunError : public std::runtime_error {
public:
    AbortedRunError(std::string msg, EvalReport partial, std::size_t failing_index)
        : std::runtime_error(std::move(msg)),
          partial_report(std::move(partial)),
          failing_index(failing_index) {}

    EvalReport partial_report;
    std::size_t failing_index;
};

// Test-then-train evaluation. Phase 1 trains on the first n_init instances
// (batch size one). Phase 2 predicts each remaining instance, records it,
// and trains only in online mode. Metrics cover phase 2 only.
EvalReport prequential_run(const std::vector<LabeledInstance>& stream, Classifier& learner,
                           const RunConfig& cfg);

using LearnerFactory = std::function<ClassifierPtr(const std::string& method, std::uint64_t seed)>;

struct SweepEntry {
    int horizon = 0;
    bool ok = false;
    EvalReport report;
    std::string error;
};

// Rebuilds the instance stream per horizon and runs a fresh learner on each;
// failures are recorded in the entry and the sweep continues.
std::vector<SweepEntry> horizon_sweep(const RunConfig& base, const std::vector<int>& horizons,
                                      const LoopMatrix& data, const NeighborSet& nb,
                                      const LearnerFactory& factory);

// results.csv schema: one row per (run, class) plus an ALL summary row.
std::string report_csv_header();
void append_report_csv(std::ostream& out, const EvalReport& report);

} // namespace driftlane
