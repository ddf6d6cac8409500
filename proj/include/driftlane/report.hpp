#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace driftlane {

// One parsed results.csv row; class rows carry per-class metrics, ALL rows
// carry the run's UMF1.
struct ResultRow {
    std::string method;
    std::string location;
    std::string mode;
    int horizon = 0;
    std::uint64_t seed = 0;
    std::string cls; // class name or "ALL"
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double umf1 = 0.0;
    std::int64_t n_eval = 0;
    double runtime_s = 0.0;
};

// Throws FormatError naming the offending row.
std::vector<ResultRow> parse_results_csv(const std::string& path);

// Markdown UMF1 table (methods x offline/online per location, at the
// smallest horizon present, seed-averaged).
std::string umf1_summary_markdown(const std::vector<ResultRow>& rows);

// Self-contained SVG line chart of F1 versus horizon for one (location,
// class): one series per (method, mode), y axis fixed to [0, 1].
std::string f1_horizon_svg(const std::vector<ResultRow>& rows, const std::string& location,
                           const std::string& cls);

// Emits summary.md plus one SVG per (location, class) into out_dir; returns
// the paths written.
std::vector<std::string> write_report_files(const std::vector<ResultRow>& rows,
                                            const std::string& out_dir);

} // namespace driftlane
