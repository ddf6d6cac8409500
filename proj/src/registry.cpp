#include "driftlane/registry.hpp"

#include <algorithm>
#include <set>

#include "driftlane/baselearners.hpp"
#include "driftlane/elm.hpp"
#include "driftlane/ensembles.hpp"
#include "driftlane/errors.hpp"
#include "driftlane/trees.hpp"

namespace driftlane {

const std::vector<std::string>& method_roster() {
    static const std::vector<std::string> roster = {"NM",  "NB",  "KNNA", "P",   "PA",  "SGD",
                                                    "HT",  "HAT", "HATT", "DWM", "AEE", "OB",
                                                    "OZB", "OZBA", "ARF", "OSELM"};
    return roster;
}

bool is_known_method(const std::string& id) {
    const auto& roster = method_roster();
    return std::find(roster.begin(), roster.end(), id) != roster.end();
}

namespace {

double param_or(const MethodParams& params, const std::string& key, double fallback) {
    const auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

void reject_unknown_keys(const std::string& id, const MethodParams& params,
                         const std::set<std::string>& known) {
    for (const auto& [key, value] : params) {
        if (!known.count(key)) {
            throw ConfigError("method " + id + ": unknown parameter '" + key + "'");
        }
    }
}

HoeffdingConfig tree_config(const MethodParams& params) {
    HoeffdingConfig cfg;
    cfg.grace_period = static_cast<std::int64_t>(param_or(params, "grace_period", 200));
    cfg.split_confidence = param_or(params, "split_confidence", 1e-7);
    cfg.tie_threshold = param_or(params, "tie_threshold", 0.05);
    return cfg;
}

} // namespace

ClassifierPtr make_classifier(const std::string& id, std::uint64_t seed,
                              const MethodParams& params) {
    if (id == "NM") {
        reject_unknown_keys(id, params, {});
        return std::make_unique<NaiveLastClass>();
    }
    if (id == "NB") {
        reject_unknown_keys(id, params, {});
        return std::make_unique<GaussianNbClassifier>();
    }
    if (id == "KNNA") {
        reject_unknown_keys(id, params, {"k", "max_window"});
        KnnClassifier::Config cfg;
        cfg.k = static_cast<int>(param_or(params, "k", 5));
        cfg.max_window = static_cast<std::size_t>(param_or(params, "max_window", 1000));
        cfg.use_adwin = true;
        return std::make_unique<KnnClassifier>(cfg);
    }
    if (id == "P") {
        reject_unknown_keys(id, params, {});
        return std::make_unique<LinearClassifier>(LinearClassifier::Algo::Perceptron);
    }
    if (id == "PA") {
        reject_unknown_keys(id, params, {"aggressiveness"});
        return std::make_unique<LinearClassifier>(LinearClassifier::Algo::PassiveAggressive,
                                                  param_or(params, "aggressiveness", 1.0));
    }
    if (id == "SGD") {
        reject_unknown_keys(id, params, {"learning_rate"});
        return std::make_unique<LinearClassifier>(LinearClassifier::Algo::Sgd, 1.0,
                                                  param_or(params, "learning_rate", 0.01));
    }
    if (id == "HT" || id == "HAT" || id == "HATT") {
        reject_unknown_keys(id, params, {"grace_period", "split_confidence", "tie_threshold"});
        const auto variant = id == "HT"    ? HoeffdingTreeClassifier::Variant::Plain
                             : id == "HAT" ? HoeffdingTreeClassifier::Variant::Adaptive
                                           : HoeffdingTreeClassifier::Variant::Anytime;
        return std::make_unique<HoeffdingTreeClassifier>(variant, tree_config(params));
    }
    if (id == "DWM") {
        reject_unknown_keys(id, params, {"grace_period", "split_confidence", "tie_threshold"});
        return std::make_unique<DwmClassifier>(hoeffding_tree_member_factory(tree_config(params)),
                                               seed);
    }
    if (id == "AEE") {
        reject_unknown_keys(id, params, {"grace_period", "split_confidence", "tie_threshold"});
        return std::make_unique<AeeClassifier>(hoeffding_tree_member_factory(tree_config(params)),
                                               seed);
    }
    if (id == "OZB" || id == "OZBA") {
        reject_unknown_keys(id, params, {"n_members", "grace_period", "split_confidence",
                                         "tie_threshold"});
        OzaBaggingClassifier::Config cfg;
        cfg.n_members = static_cast<int>(param_or(params, "n_members", 10));
        cfg.use_adwin = id == "OZBA";
        return std::make_unique<OzaBaggingClassifier>(
            hoeffding_tree_member_factory(tree_config(params)), seed, cfg);
    }
    if (id == "OB") {
        reject_unknown_keys(id, params, {"n_members", "grace_period", "split_confidence",
                                         "tie_threshold"});
        OnlineBoostClassifier::Config cfg;
        cfg.n_members = static_cast<int>(param_or(params, "n_members", 10));
        return std::make_unique<OnlineBoostClassifier>(
            hoeffding_tree_member_factory(tree_config(params)), seed, cfg);
    }
    if (id == "ARF") {
        reject_unknown_keys(id, params, {"n_members", "subspace_size", "lambda", "grace_period",
                                         "split_confidence", "tie_threshold"});
        ArfClassifier::Config cfg;
        cfg.n_members = static_cast<int>(param_or(params, "n_members", 10));
        cfg.subspace_size = static_cast<int>(param_or(params, "subspace_size", 7));
        cfg.lambda = param_or(params, "lambda", 6.0);
        cfg.tree = tree_config(params);
        return std::make_unique<ArfClassifier>(seed, cfg);
    }
    if (id == "OSELM") {
        reject_unknown_keys(id, params, {"hidden_units", "ridge", "init_batch"});
        OselmClassifier::Config cfg;
        cfg.hidden_units = static_cast<std::size_t>(param_or(params, "hidden_units", 1500));
        cfg.ridge = param_or(params, "ridge", 1e-3);
        cfg.init_batch = static_cast<std::size_t>(param_or(params, "init_batch", 2016));
        return std::make_unique<OselmClassifier>(seed, cfg);
    }
    throw ConfigError("unknown method id '" + id + "'");
}

} // namespace driftlane
