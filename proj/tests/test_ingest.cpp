#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <tuple>
#include <unistd.h>

#include "driftlane/errors.hpp"
#include "driftlane/ingest.hpp"
#include "driftlane/rng.hpp"

using namespace driftlane;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("driftlane_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    static int& counter() {
        static int c = 0;
        return c;
    }
    std::string file(const std::string& name, const std::string& content) const {
        const std::string p = (path / name).string();
        std::ofstream out(p);
        out << content;
        return p;
    }
};

std::string meta_for(int n, const std::string& route = "R1") {
    std::string s = "sensor_id,route,milepost\n";
    for (int i = 0; i < n; ++i) {
        s += "S" + std::to_string(i) + "," + route + "," + std::to_string(i) + "\n";
    }
    return s;
}

std::vector<AtrMeta> route_meta(const std::vector<double>& mileposts,
                                const std::string& route = "R1") {
    std::vector<AtrMeta> meta;
    for (std::size_t i = 0; i < mileposts.size(); ++i) {
        meta.push_back(AtrMeta{"S" + std::to_string(i), route, mileposts[i]});
    }
    return meta;
}

} // namespace

TEST_CASE("a well-formed 3x2 file parses with row order preserved") {
    TempDir dir;
    const auto data = dir.file("d.csv", "timestamp,S0,S1\n0,60,50\n1,61,51\n2,62,52\n");
    const auto meta = dir.file("m.csv", meta_for(2));
    const auto [m, atr] = parse_loop_csv(data, meta);
    CHECK(m.n_rows == 3);
    CHECK(m.n_cols() == 2);
    CHECK(m.at(0, 0) == 60.0);
    CHECK(m.at(2, 1) == 52.0);
    CHECK(atr.size() == 2);
}

TEST_CASE("ragged rows fail with the row number") {
    TempDir dir;
    const auto data = dir.file("d.csv", "timestamp,S0,S1\n0,60,50\n1,61\n");
    const auto meta = dir.file("m.csv", meta_for(2));
    CHECK_THROWS_WITH_AS(parse_loop_csv(data, meta), doctest::Contains("row 3"), FormatError);
}

TEST_CASE("non-numeric and out-of-range speeds fail with coordinates") {
    TempDir dir;
    const auto meta = dir.file("m.csv", meta_for(2));
    const auto bad_text = dir.file("a.csv", "timestamp,S0,S1\n0,60,abc\n");
    CHECK_THROWS_WITH_AS(parse_loop_csv(bad_text, meta), doctest::Contains("S1"), ValueError);
    const auto too_fast = dir.file("b.csv", "timestamp,S0,S1\n0,60,151\n");
    CHECK_THROWS_WITH_AS(parse_loop_csv(too_fast, meta), doctest::Contains("row 2"), ValueError);
    const auto negative = dir.file("c.csv", "timestamp,S0,S1\n0,-1,50\n");
    CHECK_THROWS_AS(parse_loop_csv(negative, meta), ValueError);
}

TEST_CASE("a data sensor missing from metadata is a metadata error") {
    TempDir dir;
    const auto data = dir.file("d.csv", "timestamp,S0,SX\n0,60,50\n");
    const auto meta = dir.file("m.csv", meta_for(2));
    CHECK_THROWS_WITH_AS(parse_loop_csv(data, meta), doctest::Contains("SX"), MetadataError);
}

TEST_CASE("matrix CSV round-trips exactly") {
    TempDir dir;
    LoopMatrix m;
    m.sensor_ids = {"S0", "S1", "S2"};
    m.n_rows = 4;
    Rng rng(11);
    for (int i = 0; i < 12; ++i) m.speeds.push_back(rng.uniform(0.0, 75.0));

    const auto path = (dir.path / "roundtrip.csv").string();
    write_loop_csv(m, path);
    const auto meta = dir.file("m.csv", meta_for(3));
    const auto [back, atr] = parse_loop_csv(path, meta);
    CHECK(back.n_rows == m.n_rows);
    CHECK(back.sensor_ids == m.sensor_ids);
    CHECK(back.speeds == m.speeds);
}

TEST_CASE("label_speed applies strict thresholds") {
    const LabelThresholds th;
    CHECK(label_speed(55.0, th) == CongestionLevel::FreeFlow);
    CHECK(label_speed(30.0, th) == CongestionLevel::Congestion);
    CHECK(label_speed(42.0, th) == CongestionLevel::Congestion); // boundary stays congestion
    CHECK(label_speed(22.0, th) == CongestionLevel::Congestion);
    CHECK(label_speed(21.99, th) == CongestionLevel::Bottleneck);
    CHECK(label_speed(42.01, th) == CongestionLevel::FreeFlow);
}

TEST_CASE("higher speed never maps to a more congested class") {
    const LabelThresholds th;
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const double a = rng.uniform(0.0, 80.0);
        const double b = rng.uniform(0.0, 80.0);
        const double lo = std::min(a, b), hi = std::max(a, b);
        CHECK(ordinal(label_speed(lo, th)) >= ordinal(label_speed(hi, th)));
    }
}

TEST_CASE("select_neighbors returns all nine sensors in milepost order") {
    const auto meta = route_meta({0, 1, 2, 3, 4, 5, 6, 7, 8});
    const NeighborSet nb = select_neighbors(meta, "S4");
    CHECK(nb.sensor_ids ==
          std::vector<std::string>{"S0", "S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8"});
    CHECK(nb.target_index == 4);
    CHECK_FALSE(nb.span_exceeded);
}

TEST_CASE("select_neighbors names the deficient side") {
    const auto meta = route_meta({0, 1, 2, 3, 4, 5, 6, 7, 8});
    CHECK_THROWS_WITH_AS(select_neighbors(meta, "S0"), doctest::Contains("upstream"),
                         InsufficientNeighborsError);
    CHECK_THROWS_WITH_AS(select_neighbors(meta, "S8"), doctest::Contains("downstream"),
                         InsufficientNeighborsError);
}

// Brute-force check: nearest-by-milepost selection on a spread route; the
// 8-mile extreme is flagged, not rejected.
TEST_CASE("select_neighbors matches nearest-by-milepost selection on a spread route") {
    const auto meta = route_meta({0, 2, 4, 6, 8, 10, 12, 14, 16});
    const NeighborSet nb = select_neighbors(meta, "S4");
    CHECK(nb.sensor_ids ==
          std::vector<std::string>{"S0", "S1", "S2", "S3", "S4", "S5", "S6", "S7", "S8"});
    CHECK(nb.span_exceeded);
}

TEST_CASE("select_neighbors ignores sensors on other routes") {
    auto meta = route_meta({0, 1, 2, 3, 4, 5, 6, 7, 8});
    for (int i = 0; i < 4; ++i) {
        meta.push_back(AtrMeta{"X" + std::to_string(i), "R2", 4.0 + i * 0.1});
    }
    const NeighborSet nb = select_neighbors(meta, "S4");
    for (const auto& id : nb.sensor_ids) CHECK(id[0] == 'S');
}

namespace {

LoopMatrix encoded_matrix(std::int64_t rows, int sensors) {
    // Cell (t, j) = t * 100 + j encodes its own coordinates.
    LoopMatrix m;
    m.n_rows = rows;
    for (int j = 0; j < sensors; ++j) m.sensor_ids.push_back("S" + std::to_string(j));
    for (std::int64_t t = 0; t < rows; ++t) {
        for (int j = 0; j < sensors; ++j) m.speeds.push_back(static_cast<double>(t * 100 + j));
    }
    return m;
}

NeighborSet all_sensor_neighborhood(const LoopMatrix& m, std::size_t target_index) {
    NeighborSet nb;
    nb.sensor_ids = m.sensor_ids;
    nb.target_index = target_index;
    nb.target_id = m.sensor_ids[target_index];
    return nb;
}

const LabelThresholds kEncodedThresholds{1e9, -1.0}; // everything labels congestion

} // namespace

TEST_CASE("build_instances emits 45 features in sensor-major, oldest-first order") {
    const LoopMatrix m = encoded_matrix(10, 9);
    const NeighborSet nb = all_sensor_neighborhood(m, 4);
    WindowSpec spec; // n_lags 5, horizon 1
    const auto stream = build_instances(m, nb, spec, kEncodedThresholds);
    REQUIRE(!stream.empty());
    CHECK(stream.front().features.size() == 45);

    // First instance: t = 5, window slots 0..4.
    const LabeledInstance& inst = stream.front();
    CHECK(inst.target_time == 5);
    CHECK(inst.features[0] == 0.0);    // sensor 0, slot 0
    CHECK(inst.features[4] == 400.0);  // sensor 0, slot 4
    CHECK(inst.features[5] == 1.0);    // sensor 1, slot 0
    CHECK(inst.features[44] == 408.0); // sensor 8, slot 4
    CHECK(inst.target_speed == 504.0); // target sensor 4 at slot 5
}

TEST_CASE("no feature looks past slot t - h") {
    const LoopMatrix m = encoded_matrix(14, 9);
    const NeighborSet nb = all_sensor_neighborhood(m, 4);
    for (int h : {1, 3, 5}) {
        WindowSpec spec;
        spec.horizon = h;
        for (const auto& inst : build_instances(m, nb, spec, kEncodedThresholds)) {
            double max_encoded_slot = 0.0;
            for (double f : inst.features) {
                max_encoded_slot = std::max(max_encoded_slot, std::floor(f / 100.0));
            }
            CHECK(max_encoded_slot == static_cast<double>(inst.target_time - h));
        }
    }
}

TEST_CASE("instance count is n_rows - n_lags - horizon + 1") {
    for (const auto [rows, lags, h] :
         {std::tuple{10, 5, 1}, std::tuple{6, 5, 1}, std::tuple{30, 5, 20}, std::tuple{9, 3, 2}}) {
        const LoopMatrix m = encoded_matrix(rows, 9);
        const NeighborSet nb = all_sensor_neighborhood(m, 4);
        WindowSpec spec;
        spec.n_lags = lags;
        spec.horizon = h;
        const auto stream = build_instances(m, nb, spec, kEncodedThresholds);
        CHECK(stream.size() == static_cast<std::size_t>(rows - lags - h + 1));
    }
}

TEST_CASE("a matrix of exactly n_lags + h rows yields one instance") {
    const LoopMatrix m = encoded_matrix(6, 9);
    const NeighborSet nb = all_sensor_neighborhood(m, 4);
    WindowSpec spec;
    const auto stream = build_instances(m, nb, spec, kEncodedThresholds);
    CHECK(stream.size() == 1);
}

TEST_CASE("a matrix shorter than n_lags + h is an empty-stream error") {
    const LoopMatrix m = encoded_matrix(5, 9);
    const NeighborSet nb = all_sensor_neighborhood(m, 4);
    WindowSpec spec;
    CHECK_THROWS_AS(build_instances(m, nb, spec, kEncodedThresholds), EmptyStreamError);
}

TEST_CASE("split_warm_start keeps order and hits the documented boundaries") {
    std::vector<LabeledInstance> stream(2017);
    for (std::size_t i = 0; i < stream.size(); ++i) {
        stream[i].target_time = static_cast<std::int64_t>(i);
    }

    auto [warm, test] = split_warm_start(stream, 2016);
    CHECK(warm.size() == 2016);
    CHECK(test.size() == 1);
    CHECK(warm.front().target_time == 0);
    CHECK(test.front().target_time == 2016);

    std::vector<LabeledInstance> too_short(2016);
    CHECK_THROWS_AS(split_warm_start(too_short, 2016), InsufficientDataError);
}

TEST_CASE("one week of 5-minute slots is 2016 instances") {
    CHECK(7 * 24 * 12 == 2016);
}
