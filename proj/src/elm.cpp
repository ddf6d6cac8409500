#include "driftlane/elm.hpp"

#include <cmath>

#include "driftlane/errors.hpp"

namespace driftlane {

DenseMatrix DenseMatrix::identity(std::size_t n) {
    DenseMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

bool DenseMatrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols != b.rows) throw ShapeError("matmul: inner dimensions differ");
    DenseMatrix out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

DenseMatrix transpose(const DenseMatrix& a) {
    DenseMatrix out(a.cols, a.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) out(j, i) = a(i, j);
    }
    return out;
}

namespace {

// Cholesky A = L L^T; false when A is not positive definite.
bool cholesky(const DenseMatrix& a, DenseMatrix& lower) {
    const std::size_t n = a.rows;
    lower = DenseMatrix(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = a(i, j);
            for (std::size_t k = 0; k < j; ++k) sum -= lower(i, k) * lower(j, k);
            if (i == j) {
                if (sum <= 0.0 || !std::isfinite(sum)) return false;
                lower(i, i) = std::sqrt(sum);
            } else {
                lower(i, j) = sum / lower(j, j);
            }
        }
    }
    return true;
}

DenseMatrix cholesky_solve(const DenseMatrix& lower, const DenseMatrix& b) {
    const std::size_t n = lower.rows;
    DenseMatrix x(n, b.cols);
    // Forward: L y = b, then backward: L^T x = y.
    for (std::size_t col = 0; col < b.cols; ++col) {
        for (std::size_t i = 0; i < n; ++i) {
            double sum = b(i, col);
            for (std::size_t k = 0; k < i; ++k) sum -= lower(i, k) * x(k, col);
            x(i, col) = sum / lower(i, i);
        }
        for (std::size_t ii = n; ii-- > 0;) {
            double sum = x(ii, col);
            for (std::size_t k = ii + 1; k < n; ++k) sum -= lower(k, ii) * x(k, col);
            x(ii, col) = sum / lower(ii, ii);
        }
    }
    return x;
}

DenseMatrix gaussian_solve(DenseMatrix a, DenseMatrix b) {
    const std::size_t n = a.rows;
    double scale = 0.0;
    for (double v : a.data) scale = std::max(scale, std::fabs(v));
    const double pivot_floor = std::max(1e-300, scale * 1e-13);
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r) {
            if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
        }
        if (std::fabs(a(pivot, col)) < pivot_floor) {
            throw NumericError("solve: singular system; a positive ridge regularizer is required");
        }
        if (pivot != col) {
            for (std::size_t j = 0; j < n; ++j) std::swap(a(col, j), a(pivot, j));
            for (std::size_t j = 0; j < b.cols; ++j) std::swap(b(col, j), b(pivot, j));
        }
        const double d = a(col, col);
        for (std::size_t r = col + 1; r < n; ++r) {
            const double factor = a(r, col) / d;
            if (factor == 0.0) continue;
            for (std::size_t j = col; j < n; ++j) a(r, j) -= factor * a(col, j);
            for (std::size_t j = 0; j < b.cols; ++j) b(r, j) -= factor * b(col, j);
        }
    }
    DenseMatrix x(n, b.cols);
    for (std::size_t col = 0; col < b.cols; ++col) {
        for (std::size_t ii = n; ii-- > 0;) {
            double sum = b(ii, col);
            for (std::size_t k = ii + 1; k < n; ++k) sum -= a(ii, k) * x(k, col);
            x(ii, col) = sum / a(ii, ii);
        }
    }
    return x;
}

} // namespace

DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.rows != a.cols) throw ShapeError("solve: matrix must be square");
    if (a.rows != b.rows) throw ShapeError("solve: dimension mismatch");
    DenseMatrix lower;
    if (cholesky(a, lower)) return cholesky_solve(lower, b);
    return gaussian_solve(a, b);
}

// ---------------------------------------------------------------------------
// Oselm

Oselm::Oselm(std::size_t input_dim, std::size_t hidden_units, double ridge, std::uint64_t seed)
    : input_dim_(input_dim), hidden_units_(hidden_units), ridge_(ridge) {
    Rng rng(seed);
    input_weights_ = DenseMatrix(hidden_units_, input_dim_);
    for (double& w : input_weights_.data) w = rng.uniform(-1.0, 1.0);
    biases_.resize(hidden_units_);
    for (double& b : biases_) b = rng.uniform(-1.0, 1.0);
}

std::vector<double> Oselm::hidden_activation(const std::vector<double>& features) const {
    if (features.size() != input_dim_) throw ShapeError("oselm: feature dimension mismatch");
    std::vector<double> h(hidden_units_);
    for (std::size_t u = 0; u < hidden_units_; ++u) {
        double z = biases_[u];
        for (std::size_t f = 0; f < input_dim_; ++f) z += input_weights_(u, f) * features[f];
        h[u] = 1.0 / (1.0 + std::exp(-z));
    }
    return h;
}

void Oselm::init_batch(const std::vector<std::vector<double>>& features,
                       const std::vector<CongestionLevel>& targets) {
    if (features.empty() || features.size() != targets.size()) {
        throw ShapeError("oselm: warm set empty or features/targets differ in length");
    }
    const std::size_t n0 = features.size();
    DenseMatrix h(n0, hidden_units_);
    for (std::size_t i = 0; i < n0; ++i) {
        const std::vector<double> row = hidden_activation(features[i]);
        for (std::size_t u = 0; u < hidden_units_; ++u) h(i, u) = row[u];
    }
    DenseMatrix t(n0, kNumClasses);
    for (std::size_t i = 0; i < n0; ++i) t(i, ordinal(targets[i])) = 1.0;

    const DenseMatrix ht = transpose(h);
    DenseMatrix k = matmul(ht, h);
    for (std::size_t u = 0; u < hidden_units_; ++u) k(u, u) += ridge_;

    p_ = solve(k, DenseMatrix::identity(hidden_units_));
    beta_ = matmul(p_, matmul(ht, t));
    if (!p_.all_finite() || !beta_.all_finite()) {
        throw NumericError("oselm: non-finite initialization");
    }
    initialized_ = true;
}

void Oselm::update(const std::vector<double>& features, CongestionLevel target) {
    if (!initialized_) throw UninitializedError("oselm: update before initialization");
    update_with_activation(hidden_activation(features), target);
}

void Oselm::update_with_activation(const std::vector<double>& h, CongestionLevel target) {
    if (!initialized_) throw UninitializedError("oselm: update before initialization");
    if (h.size() != hidden_units_) throw ShapeError("oselm: activation row dimension mismatch");

    const std::size_t n = hidden_units_;
    // ph = P h^T
    std::vector<double> ph(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += p_(i, j) * h[j];
        ph[i] = s;
    }
    double denom = 1.0;
    for (std::size_t j = 0; j < n; ++j) denom += h[j] * ph[j];
    if (!std::isfinite(denom) || denom == 0.0) {
        throw NumericError("oselm: degenerate update denominator");
    }

    DenseMatrix p_new = p_;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) p_new(i, j) -= ph[i] * ph[j] / denom;
    }
    // Re-symmetrize to keep the accumulator from drifting.
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double avg = 0.5 * (p_new(i, j) + p_new(j, i));
            p_new(i, j) = avg;
            p_new(j, i) = avg;
        }
    }

    // residual = one_hot(target) - h beta
    std::array<double, kNumClasses> residual{};
    for (int c = 0; c < kNumClasses; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < n; ++j) s += h[j] * beta_(j, static_cast<std::size_t>(c));
        residual[c] = (c == ordinal(target) ? 1.0 : 0.0) - s;
    }
    // beta += P_new h^T residual
    DenseMatrix beta_new = beta_;
    for (std::size_t i = 0; i < n; ++i) {
        double pnh = 0.0;
        for (std::size_t j = 0; j < n; ++j) pnh += p_new(i, j) * h[j];
        for (int c = 0; c < kNumClasses; ++c) {
            beta_new(i, static_cast<std::size_t>(c)) += pnh * residual[c];
        }
    }

    if (!p_new.all_finite() || !beta_new.all_finite()) {
        throw NumericError("oselm: non-finite update; state unchanged");
    }
    p_ = std::move(p_new);
    beta_ = std::move(beta_new);
}

ClassScores Oselm::predict(const std::vector<double>& features) const {
    if (!initialized_) throw UninitializedError("oselm: predict before initialization");
    const std::vector<double> h = hidden_activation(features);
    ClassScores scores{};
    for (int c = 0; c < kNumClasses; ++c) {
        double s = 0.0;
        for (std::size_t j = 0; j < hidden_units_; ++j) {
            s += h[j] * beta_(j, static_cast<std::size_t>(c));
        }
        scores[c] = s;
    }
    return scores;
}

// ---------------------------------------------------------------------------
// OselmClassifier

OselmClassifier::OselmClassifier(std::uint64_t seed, Config cfg) : cfg_(cfg), seed_(seed) {}

ClassScores OselmClassifier::predict_one(const std::vector<double>& features) const {
    if (!model_ || !model_->initialized()) {
        throw UninitializedError(
            "OSELM: predict before batch initialization (needs " +
            std::to_string(cfg_.init_batch) + " warm instances, has " +
            std::to_string(pending_features_.size()) + ")");
    }
    return model_->predict(cfg_.standardize ? standardizer_.transform(features) : features);
}

void OselmClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    if (cfg_.standardize) standardizer_.observe(features);
    if (model_ && model_->initialized()) {
        model_->update(cfg_.standardize ? standardizer_.transform(features) : features, target);
        return;
    }
    pending_features_.push_back(features);
    pending_targets_.push_back(target);
    if (pending_features_.size() >= cfg_.init_batch) {
        model_ = std::make_unique<Oselm>(features.size(), cfg_.hidden_units, cfg_.ridge, seed_);
        std::vector<std::vector<double>> warm;
        warm.reserve(pending_features_.size());
        for (const auto& f : pending_features_) {
            warm.push_back(cfg_.standardize ? standardizer_.transform(f) : f);
        }
        model_->init_batch(warm, pending_targets_);
        pending_features_.clear();
        pending_targets_.clear();
    }
}

void OselmClassifier::reset(std::uint64_t seed) {
    seed_ = seed;
    model_.reset();
    standardizer_.clear();
    pending_features_.clear();
    pending_targets_.clear();
}

} // namespace driftlane
