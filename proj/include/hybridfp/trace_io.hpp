#pragma once

#include "hybridfp/hybrid_iteration.hpp"

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace hybridfp {

/// Shortest decimal string that parses back to exactly `v`.
std::string format_double(double v);

/// Columns n, step_norm, phi_anchor, residual_xy, residual_fp, cert_eq,
/// cert_vi, cert_R and, when any record has one, sol_dist.
std::string trace_csv(const IterationTrace& trace);

/// Full vectors per record plus terminal_status, as a JSON document.
std::string trace_json(const IterationTrace& trace);

/// terminal_status, iterations, final residuals and final ||x||.
std::string summary_json(const IterationTrace& trace);

void write_text(const std::filesystem::path& path, const std::string& text);

/// Sidecar path for a trace CSV: same stem, .json extension.
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

class TraceReadError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct TraceTable {
    std::vector<std::string> columns;
    std::map<std::string, std::vector<double>> values;
    std::size_t rows() const;
};

TraceTable read_trace_csv(const std::filesystem::path& path);

/// Log-scale SVG of step_norm, residual_xy, residual_fp and sol_dist
/// (whichever are present) against n. One polyline per column.
std::string render_svg(const TraceTable& table, const std::string& title = "convergence trace");

}  // namespace hybridfp
