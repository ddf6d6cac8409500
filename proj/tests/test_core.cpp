#include <doctest.h>

#include <vector>

#include "driftlane/baselearners.hpp"
#include "driftlane/core.hpp"
#include "driftlane/registry.hpp"
#include "driftlane/rng.hpp"

using namespace driftlane;

TEST_CASE("argmax_class picks the maximal score") {
    CHECK(argmax_class({0.1, 0.7, 0.2}) == CongestionLevel::Congestion);
    CHECK(argmax_class({0.0, 0.0, 1.0}) == CongestionLevel::Bottleneck);
}

TEST_CASE("argmax_class breaks ties toward the lowest ordinal") {
    CHECK(argmax_class({0.5, 0.5, 0.0}) == CongestionLevel::FreeFlow);
    CHECK(argmax_class({0.0, 0.3, 0.3}) == CongestionLevel::Congestion);
    CHECK(argmax_class({1.0, 1.0, 1.0}) == CongestionLevel::FreeFlow);
}

TEST_CASE("argmax_class rejects non-finite scores") {
    CHECK_THROWS_AS(argmax_class({std::nan(""), 0.0, 0.0}), InvalidInputError);
    CHECK_THROWS_AS(argmax_class({0.0, std::numeric_limits<double>::infinity(), 0.0}),
                    InvalidInputError);
}

TEST_CASE("one_hot places the single 1 at the ordinal index") {
    CHECK(one_hot(CongestionLevel::FreeFlow) == ClassScores{1.0, 0.0, 0.0});
    CHECK(one_hot(CongestionLevel::Congestion) == ClassScores{0.0, 1.0, 0.0});
    CHECK(one_hot(CongestionLevel::Bottleneck) == ClassScores{0.0, 0.0, 1.0});
}

TEST_CASE("argmax of one_hot round-trips every class") {
    for (int c = 0; c < kNumClasses; ++c) {
        const CongestionLevel level = level_from_ordinal(c);
        CHECK(argmax_class(one_hot(level)) == level);
    }
}

TEST_CASE("streaming Gaussian estimator matches two-pass moments") {
    Rng rng(7);
    std::vector<double> xs;
    GaussianEstimator est;
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.normal(30.0, 12.0);
        xs.push_back(x);
        est.add(x);
    }
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size());

    CHECK(est.mean == doctest::Approx(mean).epsilon(1e-9));
    CHECK(est.variance() == doctest::Approx(var).epsilon(1e-9));
}

TEST_CASE("the registry rejects unknown methods and parameter keys") {
    CHECK_THROWS_AS(make_classifier("NOPE", 0), ConfigError);
    CHECK_THROWS_AS(make_classifier("HT", 0, {{"bogus_knob", 1.0}}), ConfigError);
    for (const auto& id : method_roster()) {
        CHECK(is_known_method(id));
        CHECK(make_classifier(id, 0) != nullptr);
    }
    CHECK(method_roster().size() == 16);
}

// Contract: reset(seed) + identical call interleaving reproduces identical
// score sequences, and predict is stateless.
TEST_CASE("classifier determinism and predict statelessness across the roster") {
    Rng gen(42);
    std::vector<std::pair<std::vector<double>, CongestionLevel>> stream;
    for (int i = 0; i < 300; ++i) {
        std::vector<double> x(9);
        for (double& v : x) v = gen.uniform(0.0, 70.0);
        stream.emplace_back(x, level_from_ordinal(static_cast<int>(gen.below(3))));
    }

    for (const std::string& id : {"NM", "NB", "KNNA", "P", "PA", "SGD", "HT", "HAT", "HATT",
                                  "DWM", "AEE", "OB", "OZB", "OZBA", "ARF"}) {
        CAPTURE(id);
        auto run = [&](std::uint64_t seed) {
            auto learner = make_classifier(id, seed);
            learner->reset(seed);
            std::vector<ClassScores> scores;
            for (const auto& [x, y] : stream) {
                const ClassScores first = learner->predict_one(x);
                const ClassScores again = learner->predict_one(x);
                CHECK(first == again);
                scores.push_back(first);
                learner->learn_one(x, y);
            }
            return scores;
        };
        CHECK(run(5) == run(5));
    }
}
