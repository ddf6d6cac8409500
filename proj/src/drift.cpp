#include "driftlane/drift.hpp"

#include <cmath>

#include "driftlane/errors.hpp"

namespace driftlane {

AdwinDetector::AdwinDetector(double delta) : delta_(delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInputError("adwin: delta must be in (0,1)");
    rows_.emplace_back();
}

double AdwinDetector::cut_threshold(std::int64_t n0, std::int64_t n1, std::int64_t total_width,
                                    double delta) {
    const double m = (static_cast<double>(n0) * static_cast<double>(n1)) /
                     (static_cast<double>(n0) + static_cast<double>(n1));
    return std::sqrt(1.0 / (2.0 * m) * std::log(4.0 * static_cast<double>(total_width) / delta));
}

bool AdwinDetector::insert(double x) {
    if (!std::isfinite(x)) throw InvalidInputError("adwin: non-finite input");
    if (x < 0.0) x = 0.0;
    if (x > 1.0) x = 1.0;

    append_unit_bucket(x);
    compress();

    bool shrank = false;
    while (width_ > 1 && shrink_if_cut_found()) shrank = true;
    return shrank;
}

void AdwinDetector::append_unit_bucket(double x) {
    if (width_ > 0) {
        const double prev_mean = total_ / static_cast<double>(width_);
        const double d = x - prev_mean;
        variance_ += static_cast<double>(width_) * d * d / static_cast<double>(width_ + 1);
    }
    rows_[0].buckets.push_back(Bucket{x, 0.0});
    width_ += 1;
    total_ += x;
}

void AdwinDetector::compress() {
    for (std::size_t r = 0; r < rows_.size(); ++r) {
        if (rows_[r].buckets.size() <= static_cast<std::size_t>(kMaxBucketsPerRow)) break;
        if (r + 1 == rows_.size()) rows_.emplace_back();

        // Merge the two oldest buckets of this row into one of double capacity.
        const double cap = std::pow(2.0, static_cast<double>(r));
        Bucket a = rows_[r].buckets[0];
        Bucket b = rows_[r].buckets[1];
        rows_[r].buckets.erase(rows_[r].buckets.begin(), rows_[r].buckets.begin() + 2);

        const double mean_a = a.sum / cap;
        const double mean_b = b.sum / cap;
        Bucket merged;
        merged.sum = a.sum + b.sum;
        merged.variance =
            a.variance + b.variance + cap * cap * (mean_a - mean_b) * (mean_a - mean_b) / (2.0 * cap);
        rows_[r + 1].buckets.push_back(merged);
    }
}

void AdwinDetector::drop_oldest_bucket() {
    // Oldest bucket lives at the front of the highest non-empty row.
    for (std::size_t r = rows_.size(); r-- > 0;) {
        if (rows_[r].buckets.empty()) continue;
        const double cap = std::pow(2.0, static_cast<double>(r));
        const Bucket old = rows_[r].buckets.front();
        rows_[r].buckets.erase(rows_[r].buckets.begin());

        width_ -= static_cast<std::int64_t>(cap);
        total_ -= old.sum;
        if (width_ > 0) {
            const double mean_old = old.sum / cap;
            const double mean_rest = total_ / static_cast<double>(width_);
            const double d = mean_old - mean_rest;
            variance_ -= old.variance + cap * static_cast<double>(width_) * d * d /
                                            (cap + static_cast<double>(width_));
            if (variance_ < 0.0) variance_ = 0.0;
        } else {
            variance_ = 0.0;
        }
        return;
    }
}

bool AdwinDetector::shrink_if_cut_found() {
    // Walk boundaries from the oldest bucket toward the newest, accumulating
    // the older sub-window. A firing cut drops the oldest bucket; the caller
    // repeats until no boundary fires.
    std::int64_t n0 = 0;
    double sum0 = 0.0;
    for (std::size_t r = rows_.size(); r-- > 0;) {
        const double cap = std::pow(2.0, static_cast<double>(r));
        for (const Bucket& b : rows_[r].buckets) {
            n0 += static_cast<std::int64_t>(cap);
            sum0 += b.sum;
            const std::int64_t n1 = width_ - n0;
            if (n1 <= 0) break;
            const double mu0 = sum0 / static_cast<double>(n0);
            const double mu1 = (total_ - sum0) / static_cast<double>(n1);
            if (std::fabs(mu0 - mu1) >= cut_threshold(n0, n1, width_, delta_)) {
                drop_oldest_bucket();
                return true;
            }
        }
    }
    return false;
}

} // namespace driftlane
