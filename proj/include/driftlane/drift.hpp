#pragma once

#include <cstdint>
#include <vector>

namespace driftlane {

// ADWIN adaptive-windowing change detector over a [0,1] input stream,
// backed by an exponential histogram: row r holds buckets of capacity 2^r,
// at most kMaxBucketsPerRow per row. The window shrinks from the old side
// whenever two sub-windows split at a bucket boundary differ in mean by more
// than the confidence threshold.
class AdwinDetector {
public:
    static constexpr int kMaxBucketsPerRow = 5;

    explicit AdwinDetector(double delta = 0.002);

    // Appends x (clamped to [0,1]) and runs the cut check; returns true when
    // the window shrank. Throws InvalidInputError on non-finite input.
    bool insert(double x);

    std::int64_t width() const { return width_; }
    double mean() const { return width_ > 0 ? total_ / static_cast<double>(width_) : 0.0; }
    double delta() const { return delta_; }

    // Confidence threshold for a cut into sub-windows of sizes n0, n1 out of
    // a window of total width. Exposed for direct verification.
    static double cut_threshold(std::int64_t n0, std::int64_t n1, std::int64_t total_width,
                                double delta);

    // insert() plus the usual adaptation filter: report a change only when
    // the retained window's mean did not improve. Error-monitoring users
    // (trees, ensembles, kNN) react to degradation, not to a model getting
    // better.
    bool insert_and_detect_degradation(double x) {
        const double before = mean();
        const bool changed = insert(x);
        return changed && mean() >= before;
    }

private:
    struct Bucket {
        double sum = 0.0;
        double variance = 0.0;
    };
    struct Row {
        std::vector<Bucket> buckets; // oldest first
    };

    void append_unit_bucket(double x);
    void compress();
    void drop_oldest_bucket();
    bool shrink_if_cut_found();

    double delta_;
    std::vector<Row> rows_; // rows_[r] holds buckets of capacity 2^r
    std::int64_t width_ = 0;
    double total_ = 0.0;
    double variance_ = 0.0;
};

} // namespace driftlane
