#include "driftlane/ensembles.hpp"

#include <algorithm>
#include <cmath>

#include "driftlane/errors.hpp"

namespace driftlane {

MemberFactory hoeffding_tree_member_factory(HoeffdingConfig cfg) {
    return [cfg](std::uint64_t) -> ClassifierPtr {
        return std::make_unique<HoeffdingTreeClassifier>(HoeffdingTreeClassifier::Variant::Plain,
                                                         cfg);
    };
}

namespace {

ClassScores normalized_votes(ClassScores votes) {
    const double total = votes[0] + votes[1] + votes[2];
    if (total > 0.0) {
        for (double& v : votes) v /= total;
    }
    return votes;
}

} // namespace

// ---------------------------------------------------------------------------
// DwmClassifier

DwmClassifier::DwmClassifier(MemberFactory factory, std::uint64_t seed, Config cfg)
    : factory_(std::move(factory)), cfg_(cfg) {
    init(seed);
}

void DwmClassifier::init(std::uint64_t seed) {
    rng_.reseed(seed);
    experts_.clear();
    experts_.push_back(Expert{factory_(rng_.next_u64()), 1.0});
    instances_ = 0;
}

void DwmClassifier::reset(std::uint64_t seed) { init(seed); }

ClassScores DwmClassifier::predict_one(const std::vector<double>& features) const {
    ClassScores votes{0.0, 0.0, 0.0};
    for (const auto& e : experts_) {
        votes[ordinal(argmax_class(e.learner->predict_one(features)))] += e.weight;
    }
    return normalized_votes(votes);
}

void DwmClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    ++instances_;
    if (instances_ % cfg_.period == 0) {
        ClassScores votes{0.0, 0.0, 0.0};
        std::vector<CongestionLevel> preds;
        preds.reserve(experts_.size());
        for (const auto& e : experts_) {
            const CongestionLevel p = argmax_class(e.learner->predict_one(features));
            preds.push_back(p);
            votes[ordinal(p)] += e.weight;
        }
        const CongestionLevel ensemble_pred = argmax_class(votes);

        for (std::size_t i = 0; i < experts_.size(); ++i) {
            if (preds[i] != target) experts_[i].weight *= cfg_.beta;
        }
        double max_weight = 0.0;
        for (const auto& e : experts_) max_weight = std::max(max_weight, e.weight);
        if (max_weight > 0.0) {
            for (auto& e : experts_) e.weight /= max_weight;
        }
        std::erase_if(experts_, [&](const Expert& e) { return e.weight < cfg_.weight_floor; });
        if (ensemble_pred != target) {
            experts_.push_back(Expert{factory_(rng_.next_u64()), 1.0});
        }
    }
    for (auto& e : experts_) e.learner->learn_one(features, target);
}

// ---------------------------------------------------------------------------
// AeeClassifier

AeeClassifier::AeeClassifier(MemberFactory factory, std::uint64_t seed, Config cfg)
    : factory_(std::move(factory)), cfg_(cfg) {
    init(seed);
}

void AeeClassifier::init(std::uint64_t seed) {
    rng_.reseed(seed);
    experts_.clear();
    experts_.push_back(Expert{factory_(rng_.next_u64()), 1.0});
}

void AeeClassifier::reset(std::uint64_t seed) { init(seed); }

double AeeClassifier::total_weight() const {
    double t = 0.0;
    for (const auto& e : experts_) t += e.weight;
    return t;
}

ClassScores AeeClassifier::predict_one(const std::vector<double>& features) const {
    // The single heaviest expert decides; an exact tie falls back to the
    // weighted vote.
    std::size_t top = 0;
    bool tie = false;
    for (std::size_t i = 1; i < experts_.size(); ++i) {
        if (experts_[i].weight > experts_[top].weight) {
            top = i;
            tie = false;
        } else if (experts_[i].weight == experts_[top].weight) {
            tie = true;
        }
    }
    if (!tie) return one_hot(argmax_class(experts_[top].learner->predict_one(features)));

    ClassScores votes{0.0, 0.0, 0.0};
    for (const auto& e : experts_) {
        votes[ordinal(argmax_class(e.learner->predict_one(features)))] += e.weight;
    }
    return normalized_votes(votes);
}

void AeeClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    const CongestionLevel ensemble_pred = argmax_class(predict_one(features));

    for (auto& e : experts_) {
        if (argmax_class(e.learner->predict_one(features)) != target) e.weight *= cfg_.beta;
    }
    if (ensemble_pred != target) {
        experts_.push_back(Expert{factory_(rng_.next_u64()), cfg_.new_expert_fraction * total_weight()});
        if (experts_.size() > cfg_.max_experts) {
            std::stable_sort(experts_.begin(), experts_.end(),
                             [](const Expert& a, const Expert& b) { return a.weight > b.weight; });
            experts_.resize(cfg_.max_experts);
        }
    }
    double max_weight = 0.0;
    for (const auto& e : experts_) max_weight = std::max(max_weight, e.weight);
    if (max_weight > 0.0) {
        for (auto& e : experts_) e.weight /= max_weight;
    }
    for (auto& e : experts_) e.learner->learn_one(features, target);
}

// ---------------------------------------------------------------------------
// OzaBaggingClassifier

OzaBaggingClassifier::OzaBaggingClassifier(MemberFactory factory, std::uint64_t seed, Config cfg)
    : factory_(std::move(factory)), cfg_(cfg) {
    init(seed);
}

void OzaBaggingClassifier::init(std::uint64_t seed) {
    rng_.reseed(seed);
    members_.clear();
    detectors_.clear();
    update_counts_.assign(static_cast<std::size_t>(cfg_.n_members), 0);
    for (int i = 0; i < cfg_.n_members; ++i) {
        members_.push_back(factory_(rng_.next_u64()));
        detectors_.emplace_back(cfg_.adwin_delta);
    }
    n_replacements_ = 0;
}

void OzaBaggingClassifier::reset(std::uint64_t seed) { init(seed); }

ClassScores OzaBaggingClassifier::predict_one(const std::vector<double>& features) const {
    ClassScores votes{0.0, 0.0, 0.0};
    for (const auto& m : members_) {
        votes[ordinal(argmax_class(m->predict_one(features)))] += 1.0;
    }
    return normalized_votes(votes);
}

void OzaBaggingClassifier::replace_member(std::size_t index) {
    members_[index] = factory_(rng_.next_u64());
    detectors_[index] = AdwinDetector(cfg_.adwin_delta);
    update_counts_[index] = 0;
    n_replacements_ += 1;
}

void OzaBaggingClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    bool degraded = false;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (cfg_.use_adwin) {
            const bool err = argmax_class(members_[i]->predict_one(features)) != target;
            if (detectors_[i].insert_and_detect_degradation(err ? 1.0 : 0.0)) degraded = true;
        }
        const int k = rng_.poisson(cfg_.lambda);
        for (int j = 0; j < k; ++j) members_[i]->learn_one(features, target);
        update_counts_[i] += k;
    }
    if (degraded) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < detectors_.size(); ++i) {
            if (detectors_[i].mean() > detectors_[worst].mean()) worst = i;
        }
        replace_member(worst);
    }
}

// ---------------------------------------------------------------------------
// OnlineBoostClassifier

OnlineBoostClassifier::OnlineBoostClassifier(MemberFactory factory, std::uint64_t seed, Config cfg)
    : factory_(std::move(factory)), cfg_(cfg) {
    init(seed);
}

void OnlineBoostClassifier::init(std::uint64_t seed) {
    rng_.reseed(seed);
    members_.clear();
    detectors_.clear();
    lambda_correct_.assign(static_cast<std::size_t>(cfg_.n_members), 0.0);
    lambda_wrong_.assign(static_cast<std::size_t>(cfg_.n_members), 0.0);
    for (int i = 0; i < cfg_.n_members; ++i) {
        members_.push_back(factory_(rng_.next_u64()));
        detectors_.emplace_back(cfg_.adwin_delta);
    }
    n_replacements_ = 0;
}

void OnlineBoostClassifier::reset(std::uint64_t seed) { init(seed); }

double OnlineBoostClassifier::member_error_estimate(std::size_t i) const {
    const double total = lambda_correct_[i] + lambda_wrong_[i];
    if (total <= 0.0) return 0.5;
    double e = lambda_wrong_[i] / total;
    return std::clamp(e, cfg_.error_clamp, 1.0 - cfg_.error_clamp);
}

ClassScores OnlineBoostClassifier::predict_one(const std::vector<double>& features) const {
    ClassScores votes{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (lambda_correct_[i] + lambda_wrong_[i] <= 0.0) continue;
        const double e = member_error_estimate(i);
        const double w = std::log((1.0 - e) / e);
        votes[ordinal(argmax_class(members_[i]->predict_one(features)))] += w;
    }
    return votes;
}

void OnlineBoostClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    bool degraded = false;
    double lambda_d = 1.0;
    for (std::size_t i = 0; i < members_.size(); ++i) {
        if (cfg_.use_adwin) {
            const bool err = argmax_class(members_[i]->predict_one(features)) != target;
            if (detectors_[i].insert_and_detect_degradation(err ? 1.0 : 0.0)) degraded = true;
        }
        const int k = rng_.poisson(lambda_d);
        for (int j = 0; j < k; ++j) members_[i]->learn_one(features, target);

        const bool correct_now = argmax_class(members_[i]->predict_one(features)) == target;
        if (correct_now) {
            lambda_correct_[i] += lambda_d;
            const double n = lambda_correct_[i] + lambda_wrong_[i];
            lambda_d *= n / (2.0 * lambda_correct_[i]);
        } else {
            lambda_wrong_[i] += lambda_d;
            const double n = lambda_correct_[i] + lambda_wrong_[i];
            lambda_d *= n / (2.0 * lambda_wrong_[i]);
        }
    }
    if (degraded) {
        std::size_t worst = 0;
        for (std::size_t i = 1; i < detectors_.size(); ++i) {
            if (detectors_[i].mean() > detectors_[worst].mean()) worst = i;
        }
        members_[worst] = factory_(rng_.next_u64());
        detectors_[worst] = AdwinDetector(cfg_.adwin_delta);
        lambda_correct_[worst] = 0.0;
        lambda_wrong_[worst] = 0.0;
        n_replacements_ += 1;
    }
}

// ---------------------------------------------------------------------------
// ArfClassifier

ArfClassifier::ArfClassifier(std::uint64_t seed, Config cfg) : cfg_(cfg) { init(seed); }

void ArfClassifier::init(std::uint64_t seed) {
    rng_.reseed(seed);
    members_.clear();
    n_replacements_ = 0;
}

void ArfClassifier::reset(std::uint64_t seed) { init(seed); }

std::vector<int> ArfClassifier::draw_subspace(std::size_t feature_dim) {
    const std::size_t size =
        std::min<std::size_t>(static_cast<std::size_t>(cfg_.subspace_size), feature_dim);
    std::vector<int> all(feature_dim);
    for (std::size_t i = 0; i < feature_dim; ++i) all[i] = static_cast<int>(i);
    // Partial Fisher-Yates, then sorted for stable projection order.
    for (std::size_t i = 0; i < size; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng_.below(feature_dim - i));
        std::swap(all[i], all[j]);
    }
    std::vector<int> subspace(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
    std::sort(subspace.begin(), subspace.end());
    return subspace;
}

ArfClassifier::Member ArfClassifier::make_member(std::size_t feature_dim) {
    Member m;
    m.tree = std::make_unique<HoeffdingTreeClassifier>(HoeffdingTreeClassifier::Variant::Plain,
                                                       cfg_.tree);
    m.subspace = draw_subspace(feature_dim);
    m.warning.emplace(cfg_.warning_delta);
    m.drift.emplace(cfg_.drift_delta);
    return m;
}

std::vector<double> ArfClassifier::project(const std::vector<double>& x,
                                           const std::vector<int>& subspace) {
    std::vector<double> out;
    out.reserve(subspace.size());
    for (int f : subspace) out.push_back(x[static_cast<std::size_t>(f)]);
    return out;
}

ClassScores ArfClassifier::predict_one(const std::vector<double>& features) const {
    if (members_.empty()) return one_hot(CongestionLevel::FreeFlow);
    ClassScores votes{0.0, 0.0, 0.0};
    for (const auto& m : members_) {
        const double weight = (m.correct + 1.0) / (static_cast<double>(m.seen) + 2.0);
        const ClassScores s = m.tree->predict_one(project(features, m.subspace));
        votes[ordinal(argmax_class(s))] += weight;
    }
    return normalized_votes(votes);
}

void ArfClassifier::learn_one(const std::vector<double>& features, CongestionLevel target) {
    if (members_.empty()) {
        for (int i = 0; i < cfg_.n_members; ++i) members_.push_back(make_member(features.size()));
    }
    for (auto& m : members_) {
        const std::vector<double> proj = project(features, m.subspace);
        const bool err = argmax_class(m.tree->predict_one(proj)) != target;
        m.seen += 1;
        if (!err) m.correct += 1.0;

        const int k = rng_.poisson(cfg_.lambda);
        if (k > 0) {
            m.tree->learn_weighted(proj, target, static_cast<double>(k));
            if (m.background_tree) {
                m.background_tree->learn_weighted(project(features, m.background_subspace), target,
                                                  static_cast<double>(k));
            }
        }

        const double e = err ? 1.0 : 0.0;
        if (m.warning->insert_and_detect_degradation(e) && !m.background_tree) {
            m.background_tree = std::make_unique<HoeffdingTreeClassifier>(
                HoeffdingTreeClassifier::Variant::Plain, cfg_.tree);
            m.background_subspace = draw_subspace(features.size());
        }
        if (m.drift->insert_and_detect_degradation(e)) {
            if (m.background_tree) {
                m.tree = std::move(m.background_tree);
                m.subspace = std::move(m.background_subspace);
            } else {
                m.tree = std::make_unique<HoeffdingTreeClassifier>(
                    HoeffdingTreeClassifier::Variant::Plain, cfg_.tree);
                m.subspace = draw_subspace(features.size());
            }
            m.background_tree.reset();
            m.background_subspace.clear();
            m.warning.emplace(cfg_.warning_delta);
            m.drift.emplace(cfg_.drift_delta);
            m.correct = 0.0;
            m.seen = 0;
            n_replacements_ += 1;
        }
    }
}

} // namespace driftlane
