#include "driftlane/eval.hpp"

#include <chrono>
#include <cmath>
#include <deque>
#include <iomanip>
#include <optional>
#include <sstream>

#include "driftlane/errors.hpp"

namespace driftlane {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::string format_metric(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(6) << v;
    return out.str();
}

// UMF1 over a window of (truth, predicted) pairs.
double window_umf1(const std::deque<std::pair<CongestionLevel, CongestionLevel>>& window) {
    ConfusionMatrix cm;
    for (const auto& [truth, pred] : window) cm.add(truth, pred);
    const auto metrics = f1_scores(cm);
    return umf1({metrics[0].f1, metrics[1].f1, metrics[2].f1});
}

} // namespace

std::array<ClassMetrics, kNumClasses> f1_scores(const ConfusionMatrix& cm) {
    std::array<ClassMetrics, kNumClasses> out{};
    for (int c = 0; c < kNumClasses; ++c) {
        double tp = 0.0, fp = 0.0, fn = 0.0;
        tp = static_cast<double>(cm.counts[c][c]);
        for (int other = 0; other < kNumClasses; ++other) {
            if (other == c) continue;
            fp += static_cast<double>(cm.counts[other][c]);
            fn += static_cast<double>(cm.counts[c][other]);
        }
        ClassMetrics& m = out[c];
        m.precision = safe_ratio(tp, tp + fp);
        m.recall = safe_ratio(tp, tp + fn);
        m.f1 = safe_ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
    }
    return out;
}

double umf1(const std::array<double, kNumClasses>& per_class_f1) {
    return (per_class_f1[0] + per_class_f1[1] + per_class_f1[2]) / 3.0;
}

EvalReport prequential_run(const std::vector<LabeledInstance>& stream, Classifier& learner,
                           const RunConfig& cfg) {
    if (stream.size() <= cfg.n_init) {
        throw InsufficientDataError("prequential_run: stream of " + std::to_string(stream.size()) +
                                    " cannot warm-start on " + std::to_string(cfg.n_init));
    }
    if (cfg.strategy == Strategy::NaiveRegression && cfg.method != "NM") {
        throw ConfigError("naive-regression strategy is defined for method NM only");
    }

    EvalReport report;
    report.config = cfg;

    const bool naive_regression = cfg.strategy == Strategy::NaiveRegression;
    std::optional<double> last_speed; // strategy A state

    auto predict = [&](const LabeledInstance& inst) -> CongestionLevel {
        if (naive_regression) {
            // Predict the carried-forward speed, then label it.
            if (!last_speed) return CongestionLevel::FreeFlow;
            return label_speed(*last_speed, cfg.thresholds);
        }
        return argmax_class(learner.predict_one(inst.features));
    };
    auto learn = [&](const LabeledInstance& inst) {
        if (naive_regression) {
            last_speed = inst.target_speed;
        } else {
            learner.learn_one(inst.features, inst.target);
        }
    };

    auto finalize = [&]() {
        report.n_evaluated = report.cm.total();
        report.per_class = f1_scores(report.cm);
        report.umf1 = umf1({report.per_class[0].f1, report.per_class[1].f1, report.per_class[2].f1});
    };

    std::deque<std::pair<CongestionLevel, CongestionLevel>> window;
    constexpr std::size_t kSlidingWindow = 2016;

    // Offline freezes the model, except that a training-free learner (and
    // the naive regression carry-forward) has no model to freeze: it keeps
    // seeing the stream in both modes, as the baseline is defined.
    const bool learn_in_test_phase = cfg.mode == EvalMode::Online || naive_regression ||
                                     learner.is_training_free();

    std::size_t i = 0;
    try {
        for (; i < cfg.n_init; ++i) learn(stream[i]);

        const auto started = std::chrono::steady_clock::now();
        for (; i < stream.size(); ++i) {
            const LabeledInstance& inst = stream[i];
            const CongestionLevel predicted = predict(inst);
            report.cm.add(inst.target, predicted);
            window.emplace_back(inst.target, predicted);
            if (window.size() > kSlidingWindow) window.pop_front();
            if (learn_in_test_phase) learn(inst);
        }
        const auto finished = std::chrono::steady_clock::now();
        const auto ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(finished - started).count();
        report.runtime_seconds = static_cast<double>(ms) / 1000.0;
    } catch (const std::exception& e) {
        finalize();
        throw AbortedRunError("run aborted at instance " + std::to_string(i) + ": " + e.what(),
                              report, i);
    }

    finalize();
    report.sliding_umf1 = window.empty() ? 0.0 : window_umf1(window);
    return report;
}

std::vector<SweepEntry> horizon_sweep(const RunConfig& base, const std::vector<int>& horizons,
                                      const LoopMatrix& data, const NeighborSet& nb,
                                      const LearnerFactory& factory) {
    if (horizons.empty()) throw ConfigError("horizon_sweep: empty horizon list");
    std::vector<SweepEntry> out;
    out.reserve(horizons.size());
    for (int h : horizons) {
        SweepEntry entry;
        entry.horizon = h;
        try {
            WindowSpec spec;
            spec.horizon = h;
            const auto stream = build_instances(data, nb, spec, base.thresholds);
            RunConfig cfg = base;
            cfg.horizon = h;
            ClassifierPtr learner = factory(cfg.method, cfg.seed);
            learner->reset(cfg.seed);
            entry.report = prequential_run(stream, *learner, cfg);
            entry.ok = true;
        } catch (const std::exception& e) {
            entry.ok = false;
            entry.error = e.what();
        }
        out.push_back(std::move(entry));
    }
    return out;
}

std::string report_csv_header() {
    return "method,location,mode,horizon,seed,class,precision,recall,f1,umf1,n_eval,runtime_s";
}

void append_report_csv(std::ostream& out, const EvalReport& report) {
    const RunConfig& cfg = report.config;
    std::ostringstream prefix;
    prefix << cfg.method << ',' << cfg.location << ',' << to_string(cfg.mode) << ',' << cfg.horizon
           << ',' << cfg.seed << ',';

    std::ostringstream runtime;
    runtime << std::fixed << std::setprecision(3) << report.runtime_seconds;

    for (int c = 0; c < kNumClasses; ++c) {
        const ClassMetrics& m = report.per_class[c];
        out << prefix.str() << to_string(level_from_ordinal(c)) << ',' << format_metric(m.precision)
            << ',' << format_metric(m.recall) << ',' << format_metric(m.f1) << ",,"
            << report.n_evaluated << ',' << runtime.str() << '\n';
    }
    out << prefix.str() << "ALL,,,," << format_metric(report.umf1) << ',' << report.n_evaluated
        << ',' << runtime.str() << '\n';
}

} // namespace driftlane
