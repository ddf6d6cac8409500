#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "driftlane/core.hpp"
#include "driftlane/drift.hpp"

namespace driftlane {

// Range of a 3-class information gain, the R of the Hoeffding bound.
inline constexpr double kThreeClassGainRange = 1.584962500721156; // log2(3)

// epsilon = sqrt(R^2 ln(1/delta) / (2n)). Throws ValueError outside the
// domain R > 0, 0 < delta < 1, n >= 1.
double hoeffding_bound(double range, double delta, double n);

struct HoeffdingConfig {
    enum class LeafMode { MajorityClass, NbAdaptive };

    std::int64_t grace_period = 200;
    double split_confidence = 1e-7;
    double tie_threshold = 0.05;
    LeafMode leaf_mode = LeafMode::NbAdaptive;
    int candidates_per_feature = 10;
    double variance_floor = 1e-6;
    double hat_delta = 0.002; // per-node detector confidence (adaptive variant)
};

struct HoeffdingNode;

// Hoeffding-bound incremental decision trees over numeric features.
// Variant::Plain is the classic VFDT; Variant::Adaptive adds a per-node ADWIN
// with alternate subtrees grown after a detected error increase;
// Variant::Anytime re-evaluates internal splits and replaces them when a
// better feature is proven.
class HoeffdingTreeClassifier final : public Classifier {
public:
    enum class Variant { Plain, Adaptive, Anytime };

    explicit HoeffdingTreeClassifier(Variant variant = Variant::Plain, HoeffdingConfig cfg = {});
    ~HoeffdingTreeClassifier() override;
    HoeffdingTreeClassifier(const HoeffdingTreeClassifier&) = delete;
    HoeffdingTreeClassifier& operator=(const HoeffdingTreeClassifier&) = delete;

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override;

    // Weighted update; learn_one(x, y) == learn_weighted(x, y, 1).
    void learn_weighted(const std::vector<double>& features, CongestionLevel target, double weight);

    std::int64_t splits_performed() const { return n_splits_; }
    std::int64_t node_count() const;
    std::int64_t depth() const;
    std::int64_t alternates_spawned() const { return n_alternates_spawned_; }
    std::int64_t subtree_replacements() const { return n_replacements_; }
    std::int64_t total_learned() const { return n_learned_; }

    // Root split observability for split-correctness checks; -1 while the
    // root is a leaf.
    int root_split_feature() const;
    double root_split_threshold() const;

    // One node per line, two-space indent per depth:
    //   split f<idx> <= <threshold> | leaf [c0 c1 c2]
    std::string describe() const;

    // Sum of class counts over every node that ever acted as a leaf; equals
    // total_learned() for the plain variant.
    double sum_node_class_counts() const;

private:
    std::unique_ptr<HoeffdingNode> make_leaf() const;
    void learn_plain(HoeffdingNode* node, const std::vector<double>& x, CongestionLevel y,
                     double w);
    void learn_anytime(std::unique_ptr<HoeffdingNode>& slot, const std::vector<double>& x,
                       CongestionLevel y, double w);
    void learn_adaptive(std::unique_ptr<HoeffdingNode>& slot, const std::vector<double>& x,
                        CongestionLevel y, double w);

    Variant variant_;
    HoeffdingConfig cfg_;
    std::unique_ptr<HoeffdingNode> root_;
    std::int64_t n_splits_ = 0;
    std::int64_t n_alternates_spawned_ = 0;
    std::int64_t n_replacements_ = 0;
    std::int64_t n_learned_ = 0;
};

} // namespace driftlane
