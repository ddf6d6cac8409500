#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "driftlane/core.hpp"
#include "driftlane/drift.hpp"
#include "driftlane/rng.hpp"
#include "driftlane/trees.hpp"

namespace driftlane {

using MemberFactory = std::function<ClassifierPtr(std::uint64_t seed)>;

// Default ensemble member: a plain Hoeffding tree.
MemberFactory hoeffding_tree_member_factory(HoeffdingConfig cfg = HoeffdingConfig());

// Dynamic Weighted Majority: every instance trains all experts; at period
// boundaries erring experts are down-weighted, light experts pruned, and a
// fresh expert added when the ensemble itself erred.
class DwmClassifier final : public Classifier {
public:
    struct Config {
        double beta = 0.5;
        double weight_floor = 0.01; // theta
        std::int64_t period = 50;
    };

    DwmClassifier(MemberFactory factory, std::uint64_t seed)
        : DwmClassifier(std::move(factory), seed, Config()) {}
    DwmClassifier(MemberFactory factory, std::uint64_t seed, Config cfg);

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return "DWM"; }

    std::size_t expert_count() const { return experts_.size(); }

private:
    struct Expert {
        ClassifierPtr learner;
        double weight = 1.0;
    };

    void init(std::uint64_t seed);

    MemberFactory factory_;
    Config cfg_;
    std::vector<Expert> experts_;
    Rng rng_;
    std::int64_t instances_ = 0;
};

// Additive Expert Ensemble: the top-weight expert predicts; erring experts
// are down-weighted every instance and an ensemble error adds a new expert.
class AeeClassifier final : public Classifier {
public:
    struct Config {
        double beta = 0.5;
        double new_expert_fraction = 0.1; // gamma
        std::size_t max_experts = 10;
    };

    AeeClassifier(MemberFactory factory, std::uint64_t seed)
        : AeeClassifier(std::move(factory), seed, Config()) {}
    AeeClassifier(MemberFactory factory, std::uint64_t seed, Config cfg);

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return "AEE"; }

    std::size_t expert_count() const { return experts_.size(); }
    double total_weight() const;

private:
    struct Expert {
        ClassifierPtr learner;
        double weight = 1.0;
    };

    void init(std::uint64_t seed);

    MemberFactory factory_;
    Config cfg_;
    std::vector<Expert> experts_;
    Rng rng_;
};

// Oza online bagging: each member trains k ~ Poisson(lambda) times per
// instance. The ADWIN variant watches per-member error and replaces the
// worst member after a detected degradation.
class OzaBaggingClassifier final : public Classifier {
public:
    struct Config {
        int n_members = 10;
        double lambda = 1.0;
        bool use_adwin = false;
        double adwin_delta = 0.002;
    };

    OzaBaggingClassifier(MemberFactory factory, std::uint64_t seed)
        : OzaBaggingClassifier(std::move(factory), seed, Config()) {}
    OzaBaggingClassifier(MemberFactory factory, std::uint64_t seed, Config cfg);

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return cfg_.use_adwin ? "OZBA" : "OZB"; }

    // Replaces one member with a fresh learner, leaving the others untouched.
    void replace_member(std::size_t index);

    std::size_t member_count() const { return members_.size(); }
    const Classifier& member(std::size_t i) const { return *members_[i]; }
    std::int64_t member_update_count(std::size_t i) const { return update_counts_[i]; }
    std::int64_t replacements() const { return n_replacements_; }

private:
    void init(std::uint64_t seed);

    MemberFactory factory_;
    Config cfg_;
    std::vector<ClassifierPtr> members_;
    std::vector<AdwinDetector> detectors_;
    std::vector<std::int64_t> update_counts_;
    Rng rng_;
    std::int64_t n_replacements_ = 0;
};

// Oza online AdaBoost with per-member ADWIN: the instance weight lambda_d
// grows through members that misclassify, and members vote with
// log((1-e)/e).
class OnlineBoostClassifier final : public Classifier {
public:
    struct Config {
        int n_members = 10;
        bool use_adwin = true;
        double adwin_delta = 0.002;
        double error_clamp = 1e-6;
    };

    OnlineBoostClassifier(MemberFactory factory, std::uint64_t seed)
        : OnlineBoostClassifier(std::move(factory), seed, Config()) {}
    OnlineBoostClassifier(MemberFactory factory, std::uint64_t seed, Config cfg);

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return "OB"; }

    double member_error_estimate(std::size_t i) const;
    std::int64_t replacements() const { return n_replacements_; }

private:
    void init(std::uint64_t seed);

    MemberFactory factory_;
    Config cfg_;
    std::vector<ClassifierPtr> members_;
    std::vector<AdwinDetector> detectors_;
    std::vector<double> lambda_correct_;
    std::vector<double> lambda_wrong_;
    Rng rng_;
    std::int64_t n_replacements_ = 0;
};

// Adaptive Random Forest: Hoeffding trees over random feature subspaces,
// Poisson(6) training, a warning detector that starts a background tree and
// a drift detector that swaps it in.
class ArfClassifier final : public Classifier {
public:
    struct Config {
        int n_members = 10;
        int subspace_size = 7; // ceil(sqrt(45))
        double lambda = 6.0;
        double warning_delta = 0.01;
        double drift_delta = 0.001;
        HoeffdingConfig tree;
    };

    explicit ArfClassifier(std::uint64_t seed) : ArfClassifier(seed, Config()) {}
    ArfClassifier(std::uint64_t seed, Config cfg);

    ClassScores predict_one(const std::vector<double>& features) const override;
    void learn_one(const std::vector<double>& features, CongestionLevel target) override;
    void reset(std::uint64_t seed) override;
    std::string name() const override { return "ARF"; }

    std::size_t member_count() const { return members_.size(); }
    const std::vector<int>& member_subspace(std::size_t i) const { return members_[i].subspace; }
    std::int64_t member_instances_seen(std::size_t i) const { return members_[i].seen; }
    std::int64_t replacements() const { return n_replacements_; }

private:
    struct Member {
        std::unique_ptr<HoeffdingTreeClassifier> tree;
        std::vector<int> subspace;
        std::optional<AdwinDetector> warning;
        std::optional<AdwinDetector> drift;
        std::unique_ptr<HoeffdingTreeClassifier> background_tree;
        std::vector<int> background_subspace;
        double correct = 0.0;
        std::int64_t seen = 0;
    };

    void init(std::uint64_t seed);
    Member make_member(std::size_t feature_dim);
    std::vector<int> draw_subspace(std::size_t feature_dim);
    static std::vector<double> project(const std::vector<double>& x, const std::vector<int>& subspace);

    Config cfg_;
    std::vector<Member> members_;
    Rng rng_;
    std::int64_t n_replacements_ = 0;
};

} // namespace driftlane
