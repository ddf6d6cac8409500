#include "driftlane/trees.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "driftlane/errors.hpp"

namespace driftlane {

namespace {

// Evidence both windows must carry before an alternate may take over.
constexpr std::int64_t kMinSwitchEvidence = 64;

double entropy_bits(const std::array<double, kNumClasses>& counts) {
    double total = 0.0;
    for (double c : counts) total += c;
    if (total <= 0.0) return 0.0;
    double h = 0.0;
    for (double c : counts) {
        if (c <= 0.0) continue;
        const double p = c / total;
        h -= p * std::log2(p);
    }
    return h;
}

} // namespace

double hoeffding_bound(double range, double delta, double n) {
    if (!(range > 0.0) || !(delta > 0.0 && delta < 1.0) || !(n >= 1.0)) {
        throw ValueError("hoeffding_bound: need range > 0, delta in (0,1), n >= 1");
    }
    return std::sqrt(range * range * std::log(1.0 / delta) / (2.0 * n));
}

struct HoeffdingNode {
    // Split structure (internal nodes).
    bool is_leaf = true;
    int split_feature = -1;
    double split_threshold = 0.0;
    std::unique_ptr<HoeffdingNode> left;
    std::unique_ptr<HoeffdingNode> right;

    // Class counts survive a split (frozen for the plain variant, live for
    // the anytime one); feature summaries are dropped on split except in the
    // anytime variant.
    std::array<double, kNumClasses> class_counts{};
    std::vector<std::array<GaussianEstimator, kNumClasses>> feat_stats; // [feature][class]
    std::vector<double> feat_min;
    std::vector<double> feat_max;
    double weight_since_attempt = 0.0;

    // Leaf-mode selection counters.
    double mc_correct = 0.0;
    double nb_correct = 0.0;

    // Adaptive-variant extras.
    std::unique_ptr<AdwinDetector> error_detector;
    std::unique_ptr<HoeffdingNode> alternate;

    double total_count() const { return class_counts[0] + class_counts[1] + class_counts[2]; }

    int classes_observed() const {
        int n = 0;
        for (double c : class_counts) n += c > 0.0 ? 1 : 0;
        return n;
    }

    void ensure_dims(std::size_t dim) {
        if (feat_stats.empty()) {
            feat_stats.resize(dim);
            feat_min.assign(dim, std::numeric_limits<double>::infinity());
            feat_max.assign(dim, -std::numeric_limits<double>::infinity());
        }
        if (feat_stats.size() != dim) throw ShapeError("hoeffding tree: feature dimension changed");
    }

    ClassScores majority_scores() const {
        const double total = total_count();
        if (total <= 0.0) return ClassScores{0.0, 0.0, 0.0};
        return ClassScores{class_counts[0] / total, class_counts[1] / total,
                           class_counts[2] / total};
    }

    ClassScores nb_scores(const std::vector<double>& x, double variance_floor) const {
        const double total = total_count();
        if (total <= 0.0) return ClassScores{0.0, 0.0, 0.0};
        std::array<double, kNumClasses> logp{};
        double max_lp = -std::numeric_limits<double>::infinity();
        for (int c = 0; c < kNumClasses; ++c) {
            if (class_counts[c] <= 0.0) {
                logp[c] = -std::numeric_limits<double>::infinity();
                continue;
            }
            double lp = std::log(class_counts[c] / total);
            for (std::size_t f = 0; f < feat_stats.size() && f < x.size(); ++f) {
                if (feat_stats[f][c].count > 0.0) lp += feat_stats[f][c].log_pdf(x[f], variance_floor);
            }
            logp[c] = lp;
            max_lp = std::max(max_lp, lp);
        }
        ClassScores scores{0.0, 0.0, 0.0};
        double norm = 0.0;
        for (int c = 0; c < kNumClasses; ++c) {
            scores[c] = std::isfinite(logp[c]) ? std::exp(logp[c] - max_lp) : 0.0;
            norm += scores[c];
        }
        if (norm > 0.0) {
            for (double& s : scores) s /= norm;
        }
        return scores;
    }

    ClassScores leaf_scores(const std::vector<double>& x, const HoeffdingConfig& cfg) const {
        if (cfg.leaf_mode == HoeffdingConfig::LeafMode::MajorityClass) return majority_scores();
        // Adaptive choice: whichever rule has been right more often at this
        // leaf; naive Bayes wins ties.
        if (mc_correct > nb_correct) return majority_scores();
        return nb_scores(x, cfg.variance_floor);
    }

    const HoeffdingNode* route(const std::vector<double>& x) const {
        const HoeffdingNode* n = this;
        while (!n->is_leaf) {
            n = x[static_cast<std::size_t>(n->split_feature)] <= n->split_threshold
                    ? n->left.get()
                    : n->right.get();
        }
        return n;
    }

    ClassScores subtree_scores(const std::vector<double>& x, const HoeffdingConfig& cfg) const {
        return route(x)->leaf_scores(x, cfg);
    }

    void update_stats(const std::vector<double>& x, CongestionLevel y, double w,
                      const HoeffdingConfig& cfg, bool update_leaf_counters) {
        ensure_dims(x.size());
        if (update_leaf_counters && total_count() > 0.0) {
            const CongestionLevel mc = argmax_class(majority_scores());
            const CongestionLevel nb = argmax_class(nb_scores(x, cfg.variance_floor));
            if (mc == y) mc_correct += w;
            if (nb == y) nb_correct += w;
        }
        const int c = ordinal(y);
        class_counts[c] += w;
        for (std::size_t f = 0; f < x.size(); ++f) {
            feat_stats[f][c].add(x[f], w);
            feat_min[f] = std::min(feat_min[f], x[f]);
            feat_max[f] = std::max(feat_max[f], x[f]);
        }
        weight_since_attempt += w;
    }

    struct FeatureGain {
        int feature = -1;
        double threshold = 0.0;
        double gain = -1.0;
    };

    // Best candidate threshold per feature, by information gain estimated
    // from the per-class Gaussian summaries.
    std::vector<FeatureGain> evaluate_features(const HoeffdingConfig& cfg) const {
        std::vector<FeatureGain> out;
        const double parent_entropy = entropy_bits(class_counts);
        const double total = total_count();
        if (total <= 0.0) return out;

        for (std::size_t f = 0; f < feat_stats.size(); ++f) {
            if (!(feat_min[f] < feat_max[f])) continue;
            FeatureGain best;
            best.feature = static_cast<int>(f);
            for (int i = 1; i <= cfg.candidates_per_feature; ++i) {
                const double thr = feat_min[f] + (feat_max[f] - feat_min[f]) * i /
                                                     (cfg.candidates_per_feature + 1);
                std::array<double, kNumClasses> left{};
                std::array<double, kNumClasses> right{};
                for (int c = 0; c < kNumClasses; ++c) {
                    const auto& g = feat_stats[f][c];
                    if (g.count <= 0.0) continue;
                    const double frac = g.cdf(thr, cfg.variance_floor);
                    left[c] = g.count * frac;
                    right[c] = g.count * (1.0 - frac);
                }
                const double n_left = left[0] + left[1] + left[2];
                const double n_right = right[0] + right[1] + right[2];
                if (n_left < 1e-9 || n_right < 1e-9) continue;
                const double gain = parent_entropy - (n_left / total) * entropy_bits(left) -
                                    (n_right / total) * entropy_bits(right);
                if (gain > best.gain) {
                    best.gain = gain;
                    best.threshold = thr;
                }
            }
            if (best.gain >= 0.0) out.push_back(best);
        }
        return out;
    }
};

namespace {

// Split decision shared by all variants: the best gain must beat the runner-up
// by the Hoeffding bound, or the bound must have shrunk under the tie
// threshold.
struct SplitDecision {
    bool split = false;
    int feature = -1;
    double threshold = 0.0;
};

SplitDecision decide_split(const std::vector<HoeffdingNode::FeatureGain>& gains, double n,
                           const HoeffdingConfig& cfg) {
    SplitDecision d;
    if (gains.empty() || n < 1.0) return d;
    std::size_t best = 0;
    double second_gain = 0.0;
    for (std::size_t i = 1; i < gains.size(); ++i) {
        if (gains[i].gain > gains[best].gain) best = i;
    }
    for (std::size_t i = 0; i < gains.size(); ++i) {
        if (i != best) second_gain = std::max(second_gain, gains[i].gain);
    }
    if (gains[best].gain <= 0.0) return d;
    const double eps = hoeffding_bound(kThreeClassGainRange, cfg.split_confidence, n);
    if (gains[best].gain - second_gain > eps || eps < cfg.tie_threshold) {
        d.split = true;
        d.feature = gains[best].feature;
        d.threshold = gains[best].threshold;
    }
    return d;
}

template <typename F>
void visit_nodes(const HoeffdingNode* node, F&& fn) {
    fn(node);
    if (!node->is_leaf) {
        visit_nodes(node->left.get(), fn);
        visit_nodes(node->right.get(), fn);
    }
}

} // namespace

HoeffdingTreeClassifier::HoeffdingTreeClassifier(Variant variant, HoeffdingConfig cfg)
    : variant_(variant), cfg_(cfg) {
    if (!(cfg_.split_confidence > 0.0 && cfg_.split_confidence < 1.0) ||
        cfg_.tie_threshold < 0.0 || cfg_.grace_period < 1 || cfg_.candidates_per_feature < 1) {
        throw ValueError("hoeffding tree: invalid configuration");
    }
    root_ = make_leaf();
}

HoeffdingTreeClassifier::~HoeffdingTreeClassifier() = default;

std::unique_ptr<HoeffdingNode> HoeffdingTreeClassifier::make_leaf() const {
    auto node = std::make_unique<HoeffdingNode>();
    if (variant_ == Variant::Adaptive) {
        node->error_detector = std::make_unique<AdwinDetector>(cfg_.hat_delta);
    }
    return node;
}

ClassScores HoeffdingTreeClassifier::predict_one(const std::vector<double>& features) const {
    return root_->subtree_scores(features, cfg_);
}

void HoeffdingTreeClassifier::learn_one(const std::vector<double>& features,
                                        CongestionLevel target) {
    learn_weighted(features, target, 1.0);
}

void HoeffdingTreeClassifier::learn_weighted(const std::vector<double>& features,
                                             CongestionLevel target, double weight) {
    if (weight <= 0.0) return;
    n_learned_ += 1;
    switch (variant_) {
        case Variant::Plain: learn_plain(root_.get(), features, target, weight); break;
        case Variant::Anytime: learn_anytime(root_, features, target, weight); break;
        case Variant::Adaptive: learn_adaptive(root_, features, target, weight); break;
    }
}

void HoeffdingTreeClassifier::learn_plain(HoeffdingNode* node, const std::vector<double>& x,
                                          CongestionLevel y, double w) {
    while (!node->is_leaf) {
        node = x[static_cast<std::size_t>(node->split_feature)] <= node->split_threshold
                   ? node->left.get()
                   : node->right.get();
    }
    node->update_stats(x, y, w, cfg_, /*update_leaf_counters=*/true);
    if (node->weight_since_attempt >= static_cast<double>(cfg_.grace_period)) {
        node->weight_since_attempt = 0.0;
        if (node->classes_observed() >= 2) {
            const auto gains = node->evaluate_features(cfg_);
            const SplitDecision d = decide_split(gains, node->total_count(), cfg_);
            if (d.split) {
                node->is_leaf = false;
                node->split_feature = d.feature;
                node->split_threshold = d.threshold;
                node->left = make_leaf();
                node->right = make_leaf();
                // Children start empty; the summaries are no longer needed.
                node->feat_stats.clear();
                node->feat_min.clear();
                node->feat_max.clear();
                n_splits_ += 1;
            }
        }
    }
}

void HoeffdingTreeClassifier::learn_anytime(std::unique_ptr<HoeffdingNode>& slot,
                                            const std::vector<double>& x, CongestionLevel y,
                                            double w) {
    HoeffdingNode* node = slot.get();
    if (node->is_leaf) {
        learn_plain(node, x, y, w);
        return;
    }

    // Internal nodes keep accumulating statistics and periodically re-check
    // whether the chosen split is still the best one.
    node->update_stats(x, y, w, cfg_, /*update_leaf_counters=*/false);
    if (node->weight_since_attempt >= static_cast<double>(cfg_.grace_period)) {
        node->weight_since_attempt = 0.0;
        const auto gains = node->evaluate_features(cfg_);
        double current_gain = 0.0;
        HoeffdingNode::FeatureGain best_other;
        for (const auto& g : gains) {
            if (g.feature == node->split_feature) {
                current_gain = g.gain;
            } else if (g.gain > best_other.gain) {
                best_other = g;
            }
        }
        const double eps =
            hoeffding_bound(kThreeClassGainRange, cfg_.split_confidence, node->total_count());
        if (best_other.feature >= 0 && best_other.gain - current_gain > eps) {
            // Replace the subtree with a leaf that immediately splits on the
            // better feature.
            node->split_feature = best_other.feature;
            node->split_threshold = best_other.threshold;
            node->left = make_leaf();
            node->right = make_leaf();
            n_splits_ += 1;
            n_replacements_ += 1;
        }
    }
    auto& child = x[static_cast<std::size_t>(node->split_feature)] <= node->split_threshold
                      ? node->left
                      : node->right;
    learn_anytime(child, x, y, w);
}

void HoeffdingTreeClassifier::learn_adaptive(std::unique_ptr<HoeffdingNode>& slot,
                                             const std::vector<double>& x, CongestionLevel y,
                                             double w) {
    HoeffdingNode* node = slot.get();

    // Feed this node's subtree error; react only to degradation.
    const CongestionLevel pred = argmax_class(node->subtree_scores(x, cfg_));
    const double before = node->error_detector->mean();
    const bool changed = node->error_detector->insert(pred == y ? 0.0 : 1.0);
    if (changed && node->error_detector->mean() >= before && !node->alternate) {
        node->alternate = make_leaf();
        n_alternates_spawned_ += 1;
    }

    if (node->alternate) {
        learn_adaptive(node->alternate, x, y, w);
        const auto& alt_det = *node->alternate->error_detector;
        const auto& own_det = *node->error_detector;
        if (alt_det.width() >= kMinSwitchEvidence && own_det.width() >= kMinSwitchEvidence &&
            alt_det.mean() < own_det.mean()) {
            auto promoted = std::move(node->alternate);
            slot = std::move(promoted);
            n_replacements_ += 1;
            return;
        }
    }

    if (node->is_leaf) {
        learn_plain(node, x, y, w);
        return;
    }
    auto& child = x[static_cast<std::size_t>(node->split_feature)] <= node->split_threshold
                      ? node->left
                      : node->right;
    learn_adaptive(child, x, y, w);
}

void HoeffdingTreeClassifier::reset(std::uint64_t) {
    root_ = make_leaf();
    n_splits_ = 0;
    n_alternates_spawned_ = 0;
    n_replacements_ = 0;
    n_learned_ = 0;
}

std::string HoeffdingTreeClassifier::name() const {
    switch (variant_) {
        case Variant::Plain: return "HT";
        case Variant::Adaptive: return "HAT";
        case Variant::Anytime: return "HATT";
    }
    return "?";
}

std::int64_t HoeffdingTreeClassifier::node_count() const {
    std::int64_t n = 0;
    visit_nodes(root_.get(), [&](const HoeffdingNode*) { ++n; });
    return n;
}

std::int64_t HoeffdingTreeClassifier::depth() const {
    std::int64_t max_depth = 0;
    struct Rec {
        static void go(const HoeffdingNode* n, std::int64_t d, std::int64_t& out) {
            if (n->is_leaf) {
                out = std::max(out, d);
                return;
            }
            go(n->left.get(), d + 1, out);
            go(n->right.get(), d + 1, out);
        }
    };
    Rec::go(root_.get(), 0, max_depth);
    return max_depth;
}

int HoeffdingTreeClassifier::root_split_feature() const {
    return root_->is_leaf ? -1 : root_->split_feature;
}

double HoeffdingTreeClassifier::root_split_threshold() const {
    return root_->is_leaf ? 0.0 : root_->split_threshold;
}

double HoeffdingTreeClassifier::sum_node_class_counts() const {
    double sum = 0.0;
    visit_nodes(root_.get(), [&](const HoeffdingNode* n) { sum += n->total_count(); });
    return sum;
}

std::string HoeffdingTreeClassifier::describe() const {
    std::ostringstream out;
    struct Rec {
        static void go(const HoeffdingNode* n, int depth, std::ostringstream& out) {
            for (int i = 0; i < depth; ++i) out << "  ";
            if (n->is_leaf) {
                out << "leaf [" << n->class_counts[0] << ' ' << n->class_counts[1] << ' '
                    << n->class_counts[2] << "]\n";
                return;
            }
            out << "split f" << n->split_feature << " <= " << n->split_threshold << '\n';
            go(n->left.get(), depth + 1, out);
            go(n->right.get(), depth + 1, out);
        }
    };
    Rec::go(root_.get(), 0, out);
    return out.str();
}

} // namespace driftlane
