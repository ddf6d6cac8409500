#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftlane/baselearners.hpp"
#include "driftlane/core.hpp"
#include "driftlane/rng.hpp"

namespace driftlane {

// Minimal dense matrix, row-major. Just enough linear algebra for the
// recursive least-squares updates below; no external dependency.
struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    static DenseMatrix identity(std::size_t n);

    double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }

    bool all_finite() const;
};

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix transpose(const DenseMatrix& a);

// Solves A X = B for square A. Tries Cholesky (A symmetric positive
// definite), falls back to partial-pivot Gaussian elimination. Throws
// NumericError when A is singular.
DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& b);

// Online-sequential extreme learning machine: a fixed random hidden layer
// (weights untouched after construction) with recursively updated linear
// output weights.
class Oselm {
public:
    Oselm(std::size_t input_dim, std::size_t hidden_units, double ridge, std::uint64_t seed);

    // Batch initialization on the warm set: beta = (H^T H + ridge I)^-1 H^T T.
    // Throws NumericError when ridge is zero and the system is singular.
    void init_batch(const std::vector<std::vector<double>>& features,
                    const std::vector<CongestionLevel>& targets);

    // One RLS step. Throws NumericError (state rolled back) on overflow and
    // UninitializedError before init_batch.
    void update(const std::vector<double>& features, CongestionLevel target);

    // Raw regression scores h * beta. Throws UninitializedError before init.
    ClassScores predict(const std::vector<double>& features) const;

    bool initialized() const { return initialized_; }
    std::size_t hidden_units() const { return hidden_units_; }

    // Hidden activation row, exposed so batch oracles can rebuild H exactly.
    std::vector<double> hidden_activation(const std::vector<double>& features) const;

    const DenseMatrix& output_weights() const { return beta_; }
    const DenseMatrix& inverse_covariance() const { return p_; }

    // RLS step on a precomputed activation row (update() computes the row
    // and delegates here).
    void update_with_activation(const std::vector<double>& h, CongestionLevel target);

private:
    std::size_t input_dim_;
    std::size_t hidden_units_;
    double ridge_;
    DenseMatrix input_weights_; // hidden x input
    std::vector<double> biases_;
    DenseMatrix beta_; // hidden x 3
    DenseMatrix p_;    // hidden x hidden
    bool initialized_ = false;
};

// ClassifierContract adapter: buffers the first init_batch instances, runs
// the batch initialization, then switches to per-sample RLS updates.
// Features are standardized with running statistics.
class OselmClassifier final : public Classifier {
public:
    struct Config {
        std::size_t hidden_units = 1500;
        double ridge = 1e-3;
        std::size_t init_batch = 2016;
        bool standardize = true;
    };

    explicit OselmClassifier(std::uint64_t seed) : OselmClassifier(seed, Config()) {}
    OselmClassifier(std::uint64_t seed, Config cfg);

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return "OSELM"; }

    bool initialized() const { return model_ && model_->initialized(); }

private:
    Config cfg_;
    std::uint64_t seed_;
    std::unique_ptr<Oselm> model_;
    OnlineStandardizer standardizer_;
    std::vector<std::vector<double>> pending_features_;
    std::vector<CongestionLevel> pending_targets_;
};

} // namespace driftlane
