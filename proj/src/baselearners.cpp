#include "driftlane/baselearners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "driftlane/errors.hpp"

namespace driftlane {

namespace {
// Large negative but finite sentinel for classes with no evidence.
constexpr double kNoEvidenceScore = -1e300;
} // namespace

// ---------------------------------------------------------------------------
// OnlineStandardizer

void OnlineStandardizer::observe(const std::vector<double>& x) {
    if (stats_.empty()) stats_.resize(x.size());
    if (stats_.size() != x.size()) throw ShapeError("standardizer: feature dimension changed");
    for (std::size_t i = 0; i < x.size(); ++i) stats_[i].add(x[i]);
    ++count_;
}

std::vector<double> OnlineStandardizer::transform(const std::vector<double>& x) const {
    if (count_ < 2 || stats_.size() != x.size()) return x;
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double sd = stats_[i].stddev(GaussianNbClassifier::kVarianceFloor);
        out[i] = (x[i] - stats_[i].mean) / sd;
    }
    return out;
}

void OnlineStandardizer::clear() {
    stats_.clear();
    count_ = 0;
}

// ---------------------------------------------------------------------------
// NaiveLastClass

ClassScores NaiveLastClass::predict_one(const std::vector<double>&) const {
    return one_hot(last_label_.value_or(CongestionLevel::FreeFlow));
}

void NaiveLastClass::learn_one(const std::vector<double>&, CongestionLevel target) {
    last_label_ = target;
}

void NaiveLastClass::reset(std::uint64_t) { last_label_.reset(); }

// ---------------------------------------------------------------------------
// GaussianNbClassifier

void GaussianNbClassifier::ensure_dim(std::size_t dim) {
    if (feature_stats_.empty()) feature_stats_.resize(dim);
    check_dim(dim);
}

void GaussianNbClassifier::check_dim(std::size_t dim) const {
    if (!feature_stats_.empty() && feature_stats_.size() != dim) {
        throw ShapeError("naive bayes: expected " + std::to_string(feature_stats_.size()) +
                         " features, got " + std::to_string(dim));
    }
}

void GaussianNbClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    ensure_dim(features.size());
    const int c = ordinal(target);
    class_counts_[c] += 1.0;
    for (std::size_t f = 0; f < features.size(); ++f) feature_stats_[f][c].add(features[f]);
}

ClassScores GaussianNbClassifier::predict_one(const std::vector<double>& features) const {
    check_dim(features.size());
    double total = class_counts_[0] + class_counts_[1] + class_counts_[2];
    ClassScores scores{};
    for (int c = 0; c < kNumClasses; ++c) {
        if (class_counts_[c] <= 0.0 || total <= 0.0) {
            scores[c] = kNoEvidenceScore;
            continue;
        }
        double s = std::log(class_counts_[c] / total);
        for (std::size_t f = 0; f < features.size() && f < feature_stats_.size(); ++f) {
            s += feature_stats_[f][c].log_pdf(features[f], kVarianceFloor);
        }
        scores[c] = s;
    }
    return scores;
}

void GaussianNbClassifier::reset(std::uint64_t) {
    class_counts_ = {};
    feature_stats_.clear();
}

// ---------------------------------------------------------------------------
// Linear models

void LinearModelState::ensure_dim(std::size_t dim) {
    if (weights.empty()) weights.resize(dim);
    if (weights.size() != dim) {
        throw ShapeError("linear model: expected " + std::to_string(weights.size()) +
                         " features, got " + std::to_string(dim));
    }
}

ClassScores LinearModelState::scores(const std::vector<double>& x) const {
    ClassScores s = bias;
    const std::size_t dim = std::min(weights.size(), x.size());
    for (std::size_t f = 0; f < dim; ++f) {
        for (int c = 0; c < kNumClasses; ++c) s[c] += weights[f][c] * x[f];
    }
    return s;
}

void perceptron_step(LinearModelState& s, const std::vector<double>& x, CongestionLevel target) {
    s.ensure_dim(x.size());
    const CongestionLevel predicted = argmax_class(s.scores(x));
    if (predicted == target) return;
    const int yi = ordinal(target);
    const int pi = ordinal(predicted);
    for (std::size_t f = 0; f < x.size(); ++f) {
        s.weights[f][yi] += x[f];
        s.weights[f][pi] -= x[f];
    }
    s.bias[yi] += 1.0;
    s.bias[pi] -= 1.0;
}

void pa_step(LinearModelState& s, const std::vector<double>& x, CongestionLevel target,
             double aggressiveness) {
    s.ensure_dim(x.size());
    double norm_sq = 0.0;
    for (double v : x) norm_sq += v * v;
    if (norm_sq <= 0.0) return;

    const ClassScores margins = s.scores(x);
    for (int c = 0; c < kNumClasses; ++c) {
        const double y = (c == ordinal(target)) ? 1.0 : -1.0;
        const double loss = std::max(0.0, 1.0 - y * margins[c]);
        if (loss <= 0.0) continue; // passive state
        const double tau = std::min(aggressiveness, loss / norm_sq);
        for (std::size_t f = 0; f < x.size(); ++f) s.weights[f][c] += tau * y * x[f];
    }
}

void sgd_step(LinearModelState& s, const std::vector<double>& x, CongestionLevel target,
              double learning_rate) {
    s.ensure_dim(x.size());
    const ClassScores margins = s.scores(x);
    for (int c = 0; c < kNumClasses; ++c) {
        const double t = (c == ordinal(target)) ? 1.0 : 0.0;
        const double p = 1.0 / (1.0 + std::exp(-margins[c]));
        const double g = t - p;
        for (std::size_t f = 0; f < x.size(); ++f) s.weights[f][c] += learning_rate * g * x[f];
        s.bias[c] += learning_rate * g;
    }
}

LinearClassifier::LinearClassifier(Algo algo, double pa_aggressiveness, double sgd_learning_rate,
                                   bool standardize)
    : algo_(algo), pa_c_(pa_aggressiveness), sgd_eta_(sgd_learning_rate), standardize_(standardize) {}

ClassScores LinearClassifier::predict_one(const std::vector<double>& features) const {
    const std::vector<double> x = standardize_ ? standardizer_.transform(features) : features;
    if (state_.weights.empty()) return ClassScores{0.0, 0.0, 0.0};
    return state_.scores(x);
}

void LinearClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    std::vector<double> x = features;
    if (standardize_) {
        standardizer_.observe(features);
        x = standardizer_.transform(features);
    }
    switch (algo_) {
        case Algo::Perceptron: perceptron_step(state_, x, target); break;
        case Algo::PassiveAggressive: pa_step(state_, x, target, pa_c_); break;
        case Algo::Sgd: sgd_step(state_, x, target, sgd_eta_); break;
    }
}

void LinearClassifier::reset(std::uint64_t) {
    state_ = LinearModelState{};
    standardizer_.clear();
}

std::string LinearClassifier::name() const {
    switch (algo_) {
        case Algo::Perceptron: return "P";
        case Algo::PassiveAggressive: return "PA";
        case Algo::Sgd: return "SGD";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// KnnClassifier

KnnClassifier::KnnClassifier(Config cfg) : cfg_(cfg) {
    if (cfg_.use_adwin) detector_.emplace(cfg_.adwin_delta);
}

ClassScores KnnClassifier::predict_one(const std::vector<double>& features) const {
    if (buffer_.empty()) return one_hot(CongestionLevel::FreeFlow);

    // (distance^2, buffer position); stable ordering keeps older entries
    // ahead on ties.
    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(buffer_.size());
    for (std::size_t i = 0; i < buffer_.size(); ++i) {
        const auto& e = buffer_[i];
        double d = 0.0;
        const std::size_t dim = std::min(e.features.size(), features.size());
        for (std::size_t f = 0; f < dim; ++f) {
            const double diff = e.features[f] - features[f];
            d += diff * diff;
        }
        dist.emplace_back(d, i);
    }
    const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(cfg_.k), dist.size());
    std::stable_sort(dist.begin(), dist.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    ClassScores votes{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < k; ++i) votes[ordinal(buffer_[dist[i].second].label)] += 1.0;
    for (double& v : votes) v /= static_cast<double>(k);
    return votes;
}

void KnnClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    if (detector_) {
        const CongestionLevel predicted = argmax_class(predict_one(features));
        const bool changed = detector_->insert(predicted == target ? 0.0 : 1.0);
        if (changed) {
            const std::size_t keep = static_cast<std::size_t>(detector_->width());
            while (buffer_.size() > keep) buffer_.pop_front();
        }
    }
    buffer_.push_back(Entry{features, target});
    while (buffer_.size() > cfg_.max_window) buffer_.pop_front();
}

void KnnClassifier::reset(std::uint64_t) {
    buffer_.clear();
    if (cfg_.use_adwin) detector_.emplace(cfg_.adwin_delta);
}

} // namespace driftlane
