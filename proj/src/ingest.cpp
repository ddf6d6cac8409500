#include "driftlane/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "driftlane/errors.hpp"

namespace driftlane {

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

double parse_number(const std::string& field, const std::string& context) {
    double value = 0.0;
    const char* begin = field.data();
    const char* end = begin + field.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end) {
        throw ValueError("non-numeric value '" + field + "' at " + context);
    }
    return value;
}

} // namespace

std::int64_t LoopMatrix::column_of(const std::string& sensor_id) const {
    for (std::size_t i = 0; i < sensor_ids.size(); ++i) {
        if (sensor_ids[i] == sensor_id) return static_cast<std::int64_t>(i);
    }
    return -1;
}

CongestionLevel label_speed(double speed, const LabelThresholds& th) {
    if (speed > th.free_flow_above) return CongestionLevel::FreeFlow;
    if (speed < th.bottleneck_below) return CongestionLevel::Bottleneck;
    return CongestionLevel::Congestion;
}

std::pair<LoopMatrix, std::vector<AtrMeta>> parse_loop_csv(const std::string& data_path,
                                                           const std::string& meta_path) {
    std::ifstream meta_file(meta_path);
    if (!meta_file) throw FormatError("cannot open metadata file: " + meta_path);

    std::vector<AtrMeta> meta;
    std::unordered_set<std::string> meta_ids;
    std::string line;
    std::int64_t meta_row = 0;
    while (std::getline(meta_file, line)) {
        line = strip_cr(line);
        ++meta_row;
        if (line.empty()) continue;
        if (meta_row == 1) {
            if (line != "sensor_id,route,milepost") {
                throw FormatError("metadata header must be 'sensor_id,route,milepost', got '" +
                                  line + "'");
            }
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 3) {
            throw FormatError("metadata row " + std::to_string(meta_row) + ": expected 3 fields, got " +
                              std::to_string(fields.size()));
        }
        AtrMeta m;
        m.sensor_id = fields[0];
        m.route = fields[1];
        m.milepost = parse_number(fields[2], "metadata row " + std::to_string(meta_row));
        if (m.milepost < 0.0) {
            throw ValueError("metadata row " + std::to_string(meta_row) + ": negative milepost");
        }
        meta.push_back(m);
        meta_ids.insert(m.sensor_id);
    }

    std::ifstream data_file(data_path);
    if (!data_file) throw FormatError("cannot open data file: " + data_path);

    LoopMatrix m;
    std::int64_t row_number = 0;
    while (std::getline(data_file, line)) {
        line = strip_cr(line);
        ++row_number;
        if (line.empty()) continue;
        const auto fields = split_csv_line(line);
        if (row_number == 1) {
            if (fields.size() < 2 || fields[0] != "timestamp") {
                throw FormatError("data header must start with 'timestamp' and name at least one sensor");
            }
            m.sensor_ids.assign(fields.begin() + 1, fields.end());
            for (const auto& id : m.sensor_ids) {
                if (!meta_ids.count(id)) {
                    throw MetadataError("sensor '" + id + "' present in data but missing from metadata");
                }
            }
            continue;
        }
        if (fields.size() != m.sensor_ids.size() + 1) {
            throw FormatError("data row " + std::to_string(row_number) + ": expected " +
                              std::to_string(m.sensor_ids.size() + 1) + " fields, got " +
                              std::to_string(fields.size()));
        }
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const std::string where =
                "data row " + std::to_string(row_number) + ", column '" + m.sensor_ids[c - 1] + "'";
            const double v = parse_number(fields[c], where);
            if (!is_valid_speed(v)) {
                throw ValueError("speed out of range [0," + std::to_string(kMaxSpeedMph) + "] at " +
                                 where);
            }
            m.speeds.push_back(v);
        }
        m.n_rows += 1;
    }
    return {std::move(m), std::move(meta)};
}

void write_loop_csv(const LoopMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open output file: " + path);
    out << "timestamp";
    for (const auto& id : m.sensor_ids) out << ',' << id;
    out << '\n';
    out.precision(17);
    for (std::int64_t r = 0; r < m.n_rows; ++r) {
        out << r;
        for (std::int64_t c = 0; c < m.n_cols(); ++c) out << ',' << m.at(r, c);
        out << '\n';
    }
}

void write_meta_csv(const std::vector<AtrMeta>& meta, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw FormatError("cannot open output file: " + path);
    out << "sensor_id,route,milepost\n";
    out.precision(17);
    for (const auto& s : meta) out << s.sensor_id << ',' << s.route << ',' << s.milepost << '\n';
}

NeighborSet select_neighbors(const std::vector<AtrMeta>& meta, const std::string& target_id, int k) {
    const AtrMeta* target = nullptr;
    for (const auto& s : meta) {
        if (s.sensor_id == target_id) {
            target = &s;
            break;
        }
    }
    if (!target) throw MetadataError("target sensor '" + target_id + "' not found in metadata");

    std::vector<AtrMeta> route_sensors;
    for (const auto& s : meta) {
        if (s.route == target->route) route_sensors.push_back(s);
    }
    std::sort(route_sensors.begin(), route_sensors.end(),
              [](const AtrMeta& a, const AtrMeta& b) { return a.milepost < b.milepost; });

    std::size_t target_pos = 0;
    for (std::size_t i = 0; i < route_sensors.size(); ++i) {
        if (route_sensors[i].sensor_id == target_id) {
            target_pos = i;
            break;
        }
    }

    const std::size_t below = target_pos;
    const std::size_t above = route_sensors.size() - target_pos - 1;
    if (below < static_cast<std::size_t>(k)) {
        throw InsufficientNeighborsError("target '" + target_id + "' has only " +
                                         std::to_string(below) + " upstream sensor(s) on route " +
                                         target->route + ", need " + std::to_string(k));
    }
    if (above < static_cast<std::size_t>(k)) {
        throw InsufficientNeighborsError("target '" + target_id + "' has only " +
                                         std::to_string(above) + " downstream sensor(s) on route " +
                                         target->route + ", need " + std::to_string(k));
    }

    NeighborSet nb;
    nb.target_id = target_id;
    for (std::size_t i = target_pos - k; i <= target_pos + k; ++i) {
        nb.sensor_ids.push_back(route_sensors[i].sensor_id);
        const double span = std::fabs(route_sensors[i].milepost - target->milepost);
        if (span > 6.0) nb.span_exceeded = true;
    }
    nb.target_index = static_cast<std::size_t>(k);
    if (nb.span_exceeded) {
        std::cerr << "warning: neighborhood of '" << target_id << "' spans more than 6 miles\n";
    }
    return nb;
}

std::vector<LabeledInstance> build_instances(const LoopMatrix& m, const NeighborSet& nb,
                                             const WindowSpec& spec, const LabelThresholds& th) {
    if (spec.n_lags < 1) throw ValueError("n_lags must be >= 1");
    if (spec.horizon < 1) throw ValueError("horizon must be >= 1");

    std::vector<std::int64_t> cols;
    cols.reserve(nb.sensor_ids.size());
    for (const auto& id : nb.sensor_ids) {
        const std::int64_t c = m.column_of(id);
        if (c < 0) throw MetadataError("neighbor sensor '" + id + "' is not a column of the matrix");
        cols.push_back(c);
    }
    const std::int64_t target_col = cols[nb.target_index];

    const std::int64_t first_t = spec.horizon + spec.n_lags - 1;
    if (m.n_rows <= first_t) {
        throw EmptyStreamError("matrix has " + std::to_string(m.n_rows) +
                               " rows; need more than " + std::to_string(first_t) +
                               " for n_lags=" + std::to_string(spec.n_lags) +
                               ", horizon=" + std::to_string(spec.horizon));
    }

    std::vector<LabeledInstance> out;
    out.reserve(static_cast<std::size_t>(m.n_rows - first_t));
    for (std::int64_t t = first_t; t < m.n_rows; ++t) {
        LabeledInstance inst;
        inst.features.reserve(cols.size() * static_cast<std::size_t>(spec.n_lags));
        const std::int64_t window_start = t - spec.horizon - spec.n_lags + 1;
        for (const std::int64_t c : cols) {
            for (int lag = 0; lag < spec.n_lags; ++lag) {
                inst.features.push_back(m.at(window_start + lag, c));
            }
        }
        inst.target_speed = m.at(t, target_col);
        inst.target = label_speed(inst.target_speed, th);
        inst.target_time = t;
        inst.location_id = nb.target_id;
        out.push_back(std::move(inst));
    }
    return out;
}

std::pair<std::vector<LabeledInstance>, std::vector<LabeledInstance>> split_warm_start(
    std::vector<LabeledInstance> stream, std::size_t n_init) {
    if (stream.size() <= n_init) {
        throw InsufficientDataError("stream has " + std::to_string(stream.size()) +
                                    " instances; warm start needs more than " +
                                    std::to_string(n_init));
    }
    std::vector<LabeledInstance> warm(stream.begin(), stream.begin() + static_cast<std::ptrdiff_t>(n_init));
    std::vector<LabeledInstance> test(stream.begin() + static_cast<std::ptrdiff_t>(n_init), stream.end());
    return {std::move(warm), std::move(test)};
}

} // namespace driftlane
