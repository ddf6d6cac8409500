#include "driftlane/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include "driftlane/errors.hpp"

namespace driftlane {

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::stringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

double parse_double_field(const std::string& s, const std::string& where) {
    if (s.empty()) return 0.0;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw FormatError("results: non-numeric field '" + s + "' at " + where);
    }
    return v;
}

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) {
        out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '-');
    }
    return out;
}

std::string fmt3(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << v;
    return out.str();
}

struct SeriesKey {
    std::string method;
    std::string mode;
    bool operator<(const SeriesKey& o) const {
        return method != o.method ? method < o.method : mode < o.mode;
    }
};

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
                          "#e377c2", "#17becf", "#bcbd22", "#7f7f7f"};

} // namespace

std::vector<ResultRow> parse_results_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open results file: " + path);

    std::vector<ResultRow> rows;
    std::string line;
    std::int64_t line_no = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        ++line_no;
        if (line.empty()) continue;
        if (line_no == 1) {
            if (line != "method,location,mode,horizon,seed,class,precision,recall,f1,umf1,"
                         "n_eval,runtime_s") {
                throw FormatError("results row 1: unexpected header");
            }
            continue;
        }
        const auto f = split_line(line);
        if (f.size() != 12) {
            throw FormatError("results row " + std::to_string(line_no) + ": expected 12 fields, got " +
                              std::to_string(f.size()));
        }
        const std::string where = "row " + std::to_string(line_no);
        ResultRow r;
        r.method = f[0];
        r.location = f[1];
        r.mode = f[2];
        if (r.mode != "offline" && r.mode != "online") {
            throw FormatError("results " + where + ": bad mode '" + r.mode + "'");
        }
        r.horizon = static_cast<int>(parse_double_field(f[3], where));
        r.seed = static_cast<std::uint64_t>(parse_double_field(f[4], where));
        r.cls = f[5];
        r.precision = parse_double_field(f[6], where);
        r.recall = parse_double_field(f[7], where);
        r.f1 = parse_double_field(f[8], where);
        r.umf1 = parse_double_field(f[9], where);
        r.n_eval = static_cast<std::int64_t>(parse_double_field(f[10], where));
        r.runtime_s = parse_double_field(f[11], where);
        rows.push_back(std::move(r));
    }
    if (rows.empty()) throw FormatError("results file has no data rows: " + path);
    return rows;
}

std::string umf1_summary_markdown(const std::vector<ResultRow>& rows) {
    int min_horizon = rows.front().horizon;
    for (const auto& r : rows) min_horizon = std::min(min_horizon, r.horizon);

    std::vector<std::string> methods;
    std::set<std::string> locations;
    for (const auto& r : rows) {
        if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) {
            methods.push_back(r.method);
        }
        locations.insert(r.location);
    }

    // Seed-averaged UMF1 per (method, location, mode) at the base horizon.
    std::map<std::string, std::pair<double, int>> acc;
    for (const auto& r : rows) {
        if (r.cls != "ALL" || r.horizon != min_horizon) continue;
        auto& [sum, n] = acc[r.method + '|' + r.location + '|' + r.mode];
        sum += r.umf1;
        n += 1;
    }
    auto cell = [&](const std::string& method, const std::string& location,
                    const std::string& mode) -> std::string {
        const auto it = acc.find(method + '|' + location + '|' + mode);
        if (it == acc.end() || it->second.second == 0) return "-";
        return fmt3(it->second.first / it->second.second);
    };

    std::ostringstream md;
    md << "# UMF1 summary (h=" << min_horizon << ")\n\n";
    md << "| Method |";
    for (const auto& loc : locations) md << ' ' << loc << " offline | " << loc << " online |";
    md << '\n';
    md << "|---|";
    for (std::size_t i = 0; i < locations.size(); ++i) md << "---|---|";
    md << '\n';
    for (const auto& method : methods) {
        md << "| " << method << " |";
        for (const auto& loc : locations) {
            md << ' ' << cell(method, loc, "offline") << " | " << cell(method, loc, "online")
               << " |";
        }
        md << '\n';
    }
    return md.str();
}

std::string f1_horizon_svg(const std::vector<ResultRow>& rows, const std::string& location,
                           const std::string& cls) {
    // Seed-averaged F1 per (method, mode, horizon).
    std::map<SeriesKey, std::map<int, std::pair<double, int>>> series;
    std::set<int> horizons;
    for (const auto& r : rows) {
        if (r.location != location || r.cls != cls) continue;
        auto& [sum, n] = series[SeriesKey{r.method, r.mode}][r.horizon];
        sum += r.f1;
        n += 1;
        horizons.insert(r.horizon);
    }

    constexpr double width = 640.0, height = 420.0;
    constexpr double left = 56.0, right = 16.0, top = 56.0, bottom = 40.0;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    const int h_min = horizons.empty() ? 1 : *horizons.begin();
    const int h_max = horizons.empty() ? 1 : *horizons.rbegin();
    auto x_of = [&](int h) {
        if (h_max == h_min) return left + plot_w / 2.0;
        return left + plot_w * (h - h_min) / static_cast<double>(h_max - h_min);
    };
    auto y_of = [&](double f1) { return top + plot_h * (1.0 - std::clamp(f1, 0.0, 1.0)); };

    std::ostringstream svg;
    svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    svg << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    svg << "<text x=\"" << width / 2 << "\" y=\"20\" text-anchor=\"middle\" font-family=\"sans-serif\" "
        << "font-size=\"14\">F1 vs horizon - " << location << " / " << cls << "</text>\n";

    // Axes and ticks.
    svg << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
        << top + plot_h << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << top + plot_h << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double f1 = i / 4.0;
        const double y = y_of(f1);
        svg << "<line x1=\"" << left - 4 << "\" y1=\"" << y << "\" x2=\"" << left << "\" y2=\"" << y
            << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">" << fmt3(f1)
            << "</text>\n";
    }
    for (int h : horizons) {
        const double x = x_of(h);
        svg << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x << "\" y2=\""
            << top + plot_h + 4 << "\" stroke=\"black\"/>\n";
        svg << "<text x=\"" << x << "\" y=\"" << top + plot_h + 18
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">" << h
            << "</text>\n";
    }
    svg << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 6
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">horizon"
        << "</text>\n";

    // Series: one color per method, dashed offline, solid online.
    std::vector<std::string> methods;
    for (const auto& [key, points] : series) {
        if (std::find(methods.begin(), methods.end(), key.method) == methods.end()) {
            methods.push_back(key.method);
        }
    }
    double legend_x = left;
    for (const auto& [key, points] : series) {
        const std::size_t color_idx =
            static_cast<std::size_t>(std::find(methods.begin(), methods.end(), key.method) -
                                     methods.begin()) %
            (sizeof(kPalette) / sizeof(kPalette[0]));
        const char* color = kPalette[color_idx];
        const char* dash = key.mode == "offline" ? " stroke-dasharray=\"6 3\"" : "";

        std::ostringstream path;
        bool first = true;
        for (const auto& [h, sum_n] : points) {
            const double f1 = sum_n.first / sum_n.second;
            path << (first ? 'M' : 'L') << x_of(h) << ' ' << y_of(f1) << ' ';
            first = false;
        }
        svg << "<path d=\"" << path.str() << "\" fill=\"none\" stroke=\"" << color << "\""
            << dash << " stroke-width=\"1.5\"/>\n";
        for (const auto& [h, sum_n] : points) {
            const double f1 = sum_n.first / sum_n.second;
            svg << "<circle cx=\"" << x_of(h) << "\" cy=\"" << y_of(f1) << "\" r=\"2.5\" fill=\""
                << color << "\"/>\n";
        }

        svg << "<line x1=\"" << legend_x << "\" y1=\"36\" x2=\"" << legend_x + 18
            << "\" y2=\"36\" stroke=\"" << color << "\"" << dash << " stroke-width=\"1.5\"/>\n";
        svg << "<text x=\"" << legend_x + 22 << "\" y=\"40\" font-family=\"sans-serif\" "
            << "font-size=\"11\">" << key.method << ' ' << key.mode << "</text>\n";
        legend_x += 30.0 + 7.0 * static_cast<double>(key.method.size() + key.mode.size() + 1);
    }

    svg << "</svg>\n";
    return svg.str();
}

std::vector<std::string> write_report_files(const std::vector<ResultRow>& rows,
                                            const std::string& out_dir) {
    std::filesystem::create_directories(out_dir);
    std::vector<std::string> written;

    auto atomic_write = [&](const std::string& path, const std::string& content) {
        const std::string tmp = path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary);
            if (!out) throw FormatError("cannot write: " + tmp);
            out << content;
        }
        std::filesystem::rename(tmp, path);
        written.push_back(path);
    };

    atomic_write((std::filesystem::path(out_dir) / "summary.md").string(),
                 umf1_summary_markdown(rows));

    std::set<std::string> locations;
    std::set<std::string> classes;
    for (const auto& r : rows) {
        locations.insert(r.location);
        if (r.cls != "ALL") classes.insert(r.cls);
    }
    for (const auto& loc : locations) {
        for (const auto& cls : classes) {
            const std::string name = "f1_" + slug(loc) + "_" + slug(cls) + ".svg";
            atomic_write((std::filesystem::path(out_dir) / name).string(),
                         f1_horizon_svg(rows, loc, cls));
        }
    }
    return written;
}

} // namespace driftlane
