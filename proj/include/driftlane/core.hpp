#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "driftlane/errors.hpp"

namespace driftlane {

// Traffic phase. Ordinal order is part of the contract: argmax tie-breaking
// and one-hot encodings depend on it.
enum class CongestionLevel : int {
    FreeFlow = 0,
    Congestion = 1,
    Bottleneck = 2,
};

inline constexpr int kNumClasses = 3;

inline const char* to_string(CongestionLevel level) {
    switch (level) {
        case CongestionLevel::FreeFlow: return "free-flow";
        case CongestionLevel::Congestion: return "congestion";
        case CongestionLevel::Bottleneck: return "bottleneck";
    }
    return "?";
}

inline int ordinal(CongestionLevel level) { return static_cast<int>(level); }

inline CongestionLevel level_from_ordinal(int i) {
    if (i < 0 || i >= kNumClasses) throw ValueError("congestion level ordinal out of range");
    return static_cast<CongestionLevel>(i);
}

// Per-class score vector. Raw margins are allowed; only argmax is
// contractually meaningful.
using ClassScores = std::array<double, kNumClasses>;

// Speeds are plain mph doubles throughout; ingest enforces the domain.
using Speed = double;

inline constexpr double kMaxSpeedMph = 150.0;

inline bool is_valid_speed(double s) {
    return std::isfinite(s) && s >= 0.0 && s <= kMaxSpeedMph;
}

// One training/evaluation example: lagged speeds from the sensor
// neighborhood, the phase label of the target sensor at target_time, and the
// raw speed that produced the label (kept for the naive regression-then-label
// strategy).
struct LabeledInstance {
    std::vector<double> features;
    CongestionLevel target = CongestionLevel::FreeFlow;
    double target_speed = 0.0;
    std::int64_t target_time = 0; // 5-minute slot index
    std::string location_id;
};

// Ties break toward the lowest ordinal so runs are reproducible.
inline CongestionLevel argmax_class(const ClassScores& scores) {
    for (double s : scores) {
        if (!std::isfinite(s)) throw InvalidInputError("argmax_class: non-finite score");
    }
    int best = 0;
    for (int i = 1; i < kNumClasses; ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return static_cast<CongestionLevel>(best);
}

inline ClassScores one_hot(CongestionLevel level) {
    ClassScores s{0.0, 0.0, 0.0};
    s[ordinal(level)] = 1.0;
    return s;
}

// The uniform incremental-learner contract. predict_one must not mutate
// state; learn_one consumes exactly one instance; reset(seed) followed by an
// identical call sequence reproduces identical outputs.
class Classifier {
public:
    virtual ~Classifier() = default;

    virtual ClassScores predict_one(const std::vector<double>& features) const = 0;
    virtual void learn_one(const std::vector<double>& features, CongestionLevel target) = 0;
    virtual void reset(std::uint64_t seed) = 0;
    virtual std::string name() const = 0;

    // True for learners with no trainable model (the naive baseline): their
    // learn_one merely records the arriving stream, which both evaluation
    // modes are allowed to see. Freezing such a learner is meaningless, so
    // offline evaluation keeps feeding it.
    virtual bool is_training_free() const { return false; }
};

using ClassifierPtr = std::unique_ptr<Classifier>;

// Streaming mean/variance accumulator (Welford). Shared by the Gaussian NB
// learner, tree leaf statistics, and the online standardizer.
struct GaussianEstimator {
    double count = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x, double weight = 1.0) {
        count += weight;
        const double delta = x - mean;
        mean += weight * delta / count;
        m2 += weight * delta * (x - mean);
    }

    double variance(double floor = 0.0) const {
        if (count <= 0.0) return floor;
        const double v = m2 / count;
        return v < floor ? floor : v;
    }

    double stddev(double floor = 0.0) const { return std::sqrt(variance(floor)); }

    double log_pdf(double x, double variance_floor) const {
        constexpr double two_pi = 6.283185307179586;
        const double var = variance(variance_floor);
        const double d = x - mean;
        return -0.5 * (std::log(two_pi * var) + d * d / var);
    }

    // Fraction of the fitted Gaussian's mass below the threshold.
    double cdf(double threshold, double variance_floor) const {
        constexpr double sqrt2 = 1.4142135623730951;
        const double sd = std::sqrt(variance(variance_floor));
        if (sd <= 0.0) return mean <= threshold ? 1.0 : 0.0;
        return 0.5 * std::erfc(-(threshold - mean) / (sd * sqrt2));
    }
};

} // namespace driftlane
