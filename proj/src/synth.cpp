#include "driftlane/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "driftlane/errors.hpp"
#include "driftlane/rng.hpp"

namespace driftlane {

namespace {

void validate(const CorridorConfig& cfg, const PhaseModel& phases) {
    if (cfg.n_slots < 1) throw ConfigError("corridor: n_slots must be >= 1");
    if (cfg.n_sensors < 1) throw ConfigError("corridor: n_sensors must be >= 1");
    if (cfg.propagation_delay < 0) throw ConfigError("corridor: propagation delay must be >= 0");
    for (std::size_t i = 1; i < cfg.schedule.size(); ++i) {
        if (cfg.schedule[i].slot <= cfg.schedule[i - 1].slot) {
            throw ConfigError("corridor: drift slots must be strictly increasing");
        }
    }
    const LabelThresholds th;
    auto check = [&](const PhaseModel& p, const char* what) {
        if (!(p.mean_mph[0] > th.free_flow_above) ||
            !(p.mean_mph[1] > th.bottleneck_below && p.mean_mph[1] < th.free_flow_above) ||
            !(p.mean_mph[2] < th.bottleneck_below)) {
            throw ConfigError(std::string("corridor: ") + what +
                              " phase means are inconsistent with the label thresholds");
        }
        if (!(p.mean_mph[0] > p.mean_mph[1] && p.mean_mph[1] > p.mean_mph[2])) {
            throw ConfigError(std::string("corridor: ") + what +
                              " phase means must be ordered free-flow > congestion > bottleneck");
        }
        if (!(p.return_probability >= 0.0 && p.return_probability < 1.0)) {
            throw ConfigError(std::string("corridor: ") + what +
                              " return probability must be in [0, 1)");
        }
    };
    check(phases, "base");
    // Drift overrides deliberately break the label <-> phase correspondence;
    // only the base model is checked.
}

std::int64_t sample_dwell(Rng& rng, double mean_slots, std::int64_t cap) {
    if (std::isinf(mean_slots) || mean_slots >= 1e18) return cap;
    return rng.geometric_dwell(mean_slots);
}

} // namespace

CorridorTrace gen_corridor_trace(const CorridorConfig& cfg, const PhaseModel& phases) {
    validate(cfg, phases);

    const std::int64_t warmup =
        static_cast<std::int64_t>(cfg.n_sensors - 1) * cfg.propagation_delay;
    const std::int64_t chain_len = cfg.n_slots + warmup;

    Rng rng(cfg.seed);

    // Hidden phase chain at the corridor head. Congestion is the mandatory
    // transition band: leaving it either resolves back to where it came from
    // or crosses to the opposite extreme.
    std::vector<CongestionLevel> chain;
    chain.reserve(static_cast<std::size_t>(chain_len));
    CongestionLevel phase = CongestionLevel::FreeFlow;
    CongestionLevel previous_extreme = CongestionLevel::FreeFlow;
    while (static_cast<std::int64_t>(chain.size()) < chain_len) {
        const std::int64_t dwell = sample_dwell(rng, phases.dwell_mean_slots[ordinal(phase)],
                                                chain_len);
        for (std::int64_t i = 0; i < dwell && static_cast<std::int64_t>(chain.size()) < chain_len;
             ++i) {
            chain.push_back(phase);
        }
        if (phase == CongestionLevel::Congestion) {
            const CongestionLevel opposite = previous_extreme == CongestionLevel::FreeFlow
                                                 ? CongestionLevel::Bottleneck
                                                 : CongestionLevel::FreeFlow;
            phase = rng.flip(phases.return_probability) ? previous_extreme : opposite;
            previous_extreme = phase;
        } else {
            previous_extreme = phase;
            phase = CongestionLevel::Congestion;
        }
    }

    CorridorTrace trace;
    trace.head_chain = std::move(chain);
    trace.warmup_offset = warmup;

    LoopMatrix& m = trace.matrix;
    m.n_rows = cfg.n_slots;
    for (int j = 0; j < cfg.n_sensors; ++j) m.sensor_ids.push_back("S" + std::to_string(j));
    m.speeds.resize(static_cast<std::size_t>(cfg.n_slots) * cfg.n_sensors);

    const int target_idx =
        cfg.target_sensor_index >= 0 ? cfg.target_sensor_index : cfg.n_sensors / 2;
    std::size_t next_event = 0;
    const PhaseModel* active_global = &phases;
    const PhaseModel* active_target = &phases;
    for (std::int64_t t = 0; t < cfg.n_slots; ++t) {
        while (next_event < cfg.schedule.size() && cfg.schedule[next_event].slot <= t) {
            const DriftEvent& event = cfg.schedule[next_event];
            if (!event.target_sensor_only) active_global = &event.phases;
            active_target = &event.phases;
            ++next_event;
        }
        for (int j = 0; j < cfg.n_sensors; ++j) {
            const std::int64_t chain_idx = t + warmup - static_cast<std::int64_t>(j) * cfg.propagation_delay;
            const int p = ordinal(trace.head_chain[static_cast<std::size_t>(chain_idx)]);
            const PhaseModel* active = j == target_idx ? active_target : active_global;
            const double z = rng.normal();
            const double speed =
                std::clamp(active->mean_mph[p] + active->std_mph[p] * z, 0.0, 80.0);
            m.at(t, j) = speed;
        }
    }
    return trace;
}

LoopMatrix gen_corridor(const CorridorConfig& cfg, const PhaseModel& phases) {
    return gen_corridor_trace(cfg, phases).matrix;
}

std::vector<AtrMeta> corridor_meta(const CorridorConfig& cfg) {
    std::vector<AtrMeta> meta;
    for (int j = 0; j < cfg.n_sensors; ++j) {
        meta.push_back(AtrMeta{"S" + std::to_string(j), "SYN", static_cast<double>(j)});
    }
    return meta;
}

CorridorConfig inject_label_flip(CorridorConfig cfg, std::int64_t slot, const PhaseModel& base) {
    PhaseModel flipped = base;
    std::swap(flipped.mean_mph[ordinal(CongestionLevel::FreeFlow)],
              flipped.mean_mph[ordinal(CongestionLevel::Bottleneck)]);
    // Scoped to the labeled sensor: its speeds (and therefore its labels)
    // invert while the surrounding readings keep their meaning, which is the
    // abrupt real drift the adaptation tests need.
    cfg.schedule.push_back(DriftEvent{slot, flipped, /*target_sensor_only=*/true});
    std::sort(cfg.schedule.begin(), cfg.schedule.end(),
              [](const DriftEvent& a, const DriftEvent& b) { return a.slot < b.slot; });
    return cfg;
}

} // namespace driftlane
