#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "driftlane/core.hpp"
#include "driftlane/drift.hpp"

namespace driftlane {

// Per-feature running standardization. Margin-based learners consume
// standardized inputs; trees, NB and kNN see raw mph.
class OnlineStandardizer {
public:
    void observe(const std::vector<double>& x);
    std::vector<double> transform(const std::vector<double>& x) const;
    std::int64_t count() const { return count_; }
    void clear();

private:
    std::vector<GaussianEstimator> stats_;
    std::int64_t count_ = 0;
};

// Predicts whatever class the last example carried; free-flow before any
// example has been seen.
class NaiveLastClass final : public Classifier {
public:
    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return "NM"; }
    bool is_training_free() const override { return true; }

private:
    std::optional<CongestionLevel> last_label_;
};

// Gaussian naive Bayes with streaming per-(class, feature) moments.
class GaussianNbClassifier final : public Classifier {
public:
    static constexpr double kVarianceFloor = 1e-6;

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return "NB"; }

private:
    void ensure_dim(std::size_t dim);
    void check_dim(std::size_t dim) const;

    std::array<double, kNumClasses> class_counts_{};
    std::vector<std::array<GaussianEstimator, kNumClasses>> feature_stats_; // [feature][class]
};

// Weight state for the one-vs-rest linear learners. The step functions below
// expect already-standardized features.
struct LinearModelState {
    std::vector<std::array<double, kNumClasses>> weights; // [feature][class]
    std::array<double, kNumClasses> bias{};

    void ensure_dim(std::size_t dim);
    ClassScores scores(const std::vector<double>& x) const;
};

// Multiclass perceptron update: on argmax error, move the true class toward
// the input and the predicted class away.
void perceptron_step(LinearModelState& s, const std::vector<double>& x, CongestionLevel target);

// PA-I: per binary problem, tau = min(C, hinge_loss / ||x||^2). No bias term.
void pa_step(LinearModelState& s, const std::vector<double>& x, CongestionLevel target,
             double aggressiveness);

// One-vs-rest logistic regression step at a constant learning rate.
void sgd_step(LinearModelState& s, const std::vector<double>& x, CongestionLevel target,
              double learning_rate);

// Shared wrapper: standardize, then apply one of the step rules above.
class LinearClassifier final : public Classifier {
public:
    enum class Algo { Perceptron, PassiveAggressive, Sgd };

    explicit LinearClassifier(Algo algo, double pa_aggressiveness = 1.0,
                              double sgd_learning_rate = 0.01, bool standardize = true);

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override;

    const LinearModelState& state() const { return state_; }

private:
    Algo algo_;
    double pa_c_;
    double sgd_eta_;
    bool standardize_;
    LinearModelState state_;
    OnlineStandardizer standardizer_;
};

// Sliding-window kNN; the ADWIN variant shrinks the window when the 0/1
// error stream changes.
class KnnClassifier final : public Classifier {
public:
    struct Config {
        int k = 5;
        std::size_t max_window = 1000;
        bool use_adwin = false;
        double adwin_delta = 0.002;
    };

    KnnClassifier() : KnnClassifier(Config()) {}
    explicit KnnClassifier(Config cfg);

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return cfg_.use_adwin ? "KNNA" : "KNN"; }

    std::size_t window_size() const { return buffer_.size(); }

private:
    struct Entry {
        std::vector<double> features;
        CongestionLevel label;
    };

    Config cfg_;
    std::deque<Entry> buffer_;
    std::optional<AdwinDetector> detector_;
};

} // namespace driftlane
