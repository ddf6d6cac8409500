#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "driftlane/core.hpp"
#include "driftlane/ingest.hpp"

namespace driftlane {

// Three-phase speed model: per-phase emission mean/std and geometric dwell
// times. Transitions always pass through congestion; the chain never jumps
// free-flow <-> bottleneck directly. When a congestion spell ends it
// resolves back to the phase it came from with return_probability, and
// crosses to the opposite extreme otherwise.
struct PhaseModel {
    std::array<double, kNumClasses> mean_mph = {58.0, 32.0, 10.0};
    std::array<double, kNumClasses> std_mph = {4.0, 5.0, 6.0};
    std::array<double, kNumClasses> dwell_mean_slots = {60.0, 2.0, 30.0};
    double return_probability = 0.5;
};

struct DriftEvent {
    std::int64_t slot = 0;
    PhaseModel phases;
    // A scoped event swaps the emission model of the labeled (target) sensor
    // only. That inverts what the surrounding sensors' readings mean for the
    // label; applying the swap corridor-wide would merely re-code every
    // channel consistently and leave the feature-to-label mapping intact.
    bool target_sensor_only = false;
};

struct CorridorConfig {
    int n_sensors = 9;
    int propagation_delay = 4; // slots per sensor hop, downstream shift
    std::int64_t n_slots = 0;
    std::uint64_t seed = 0;
    std::vector<DriftEvent> schedule; // slots strictly increasing
    int target_sensor_index = -1;     // -1: the middle sensor
};

struct CorridorTrace {
    LoopMatrix matrix;
    // Hidden phase of sensor j at time t is head_chain[t + (n_sensors-1-j) *
    // propagation_delay]; index warmup_offset + t is the head's phase at t.
    std::vector<CongestionLevel> head_chain;
    std::int64_t warmup_offset = 0;
};

// Deterministic generation from (config, phases, seed). Emitted speed is the
// phase mean plus Gaussian noise, clamped to [0, 80] mph; drift events swap
// the emission parameters from their slot onward. Throws ConfigError when
// the phase means are inconsistent with the default label thresholds.
CorridorTrace gen_corridor_trace(const CorridorConfig& cfg, const PhaseModel& phases);
LoopMatrix gen_corridor(const CorridorConfig& cfg, const PhaseModel& phases);

// Metadata for the virtual corridor: sensors S0..S{n-1} on route SYN at
// mileposts 0..n-1.
std::vector<AtrMeta> corridor_meta(const CorridorConfig& cfg);

// Schedules an abrupt real drift: free-flow and bottleneck emission means
// swap at the given slot.
CorridorConfig inject_label_flip(CorridorConfig cfg, std::int64_t slot, const PhaseModel& base);

} // namespace driftlane
