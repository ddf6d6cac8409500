#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "driftlane/core.hpp"

namespace driftlane {

// Dense timestamp-by-sensor grid of speed readings. One row per 5-minute
// slot; the source dataset has no missing cells, so absence is an error,
// never an imputation target.
struct LoopMatrix {
    std::int64_t n_rows = 0;
    std::vector<std::string> sensor_ids;
    std::vector<double> speeds; // row-major, n_rows x sensor_ids.size()

    std::int64_t n_cols() const { return static_cast<std::int64_t>(sensor_ids.size()); }

    double at(std::int64_t row, std::int64_t col) const {
        return speeds[static_cast<std::size_t>(row * n_cols() + col)];
    }
    double& at(std::int64_t row, std::int64_t col) {
        return speeds[static_cast<std::size_t>(row * n_cols() + col)];
    }

    // -1 when the sensor is not a column of this matrix.
    std::int64_t column_of(const std::string& sensor_id) const;
};

struct AtrMeta {
    std::string sensor_id;
    std::string route;
    double milepost = 0.0; // miles
};

// The 4-upstream / target / 4-downstream sensor group, milepost ascending.
struct NeighborSet {
    std::vector<std::string> sensor_ids;
    std::string target_id;
    std::size_t target_index = 0; // position of the target within sensor_ids
    bool span_exceeded = false;   // true when some member is > 6 miles from the target
};

struct WindowSpec {
    int n_lags = 5;
    int horizon = 1; // slots ahead of the last observable feature
};

// Speeds strictly above free_flow_above are free-flow, strictly below
// bottleneck_below are bottleneck; both thresholds themselves label
// congestion.
struct LabelThresholds {
    double free_flow_above = 42.0;
    double bottleneck_below = 22.0;
};

CongestionLevel label_speed(double speed, const LabelThresholds& th);

// Reads the data CSV (header `timestamp,<sensor ids...>`) and the metadata
// CSV (`sensor_id,route,milepost`). Every sensor in the data must appear in
// the metadata. Throws FormatError / ValueError / MetadataError with the
// offending row or cell named.
std::pair<LoopMatrix, std::vector<AtrMeta>> parse_loop_csv(const std::string& data_path,
                                                           const std::string& meta_path);

// Writes the same CSV format parse_loop_csv reads (round-trip exact for
// values printed by this writer). Slot index is used as the timestamp.
void write_loop_csv(const LoopMatrix& m, const std::string& path);
void write_meta_csv(const std::vector<AtrMeta>& meta, const std::string& path);

// k nearest-by-milepost sensors on each side of the target, same route only.
// Throws InsufficientNeighborsError naming the deficient side.
NeighborSet select_neighbors(const std::vector<AtrMeta>& meta, const std::string& target_id,
                             int k = 4);

// Builds the lagged instance stream for one (neighborhood, window, horizon).
// For target time t the features are speeds at slots {t-h-n_lags+1, ..., t-h}
// for each neighbor in milepost order, oldest lag first; the label comes from
// the target sensor's speed at slot t.
std::vector<LabeledInstance> build_instances(const LoopMatrix& m, const NeighborSet& nb,
                                             const WindowSpec& spec, const LabelThresholds& th);

// First n_init instances warm-start the model; the rest are the test stream.
std::pair<std::vector<LabeledInstance>, std::vector<LabeledInstance>> split_warm_start(
    std::vector<LabeledInstance> stream, std::size_t n_init = 2016);

} // namespace driftlane
