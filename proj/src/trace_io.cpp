#include "hybridfp/trace_io.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace hybridfp {

using nlohmann::json;

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    std::array<char, 64> buf{};
    auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

namespace {

bool has_sol_dist(const IterationTrace& trace) {
    return std::any_of(trace.records.begin(), trace.records.end(), [](const auto& r) { return r.sol_dist.has_value(); });
}

json vec(const Vector& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

json scalar(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

std::string trace_csv(const IterationTrace& trace) {
    const bool sol = has_sol_dist(trace);
    std::string out = "n,step_norm,phi_anchor,residual_xy,residual_fp,cert_eq,cert_vi,cert_R";
    out += sol ? ",sol_dist\n" : "\n";
    for (const auto& r : trace.records) {
        out += std::to_string(r.n);
        for (double v : {r.step_norm, r.phi_anchor, r.residual_xy, r.residual_fp, r.cert_eq, r.cert_vi, r.cert_r}) {
            out += ',';
            out += format_double(v);
        }
        if (sol) {
            out += ',';
            out += r.sol_dist ? format_double(*r.sol_dist) : "";
        }
        out += '\n';
    }
    return out;
}

std::string trace_json(const IterationTrace& trace) {
    json doc;
    doc["terminal_status"] = to_string(trace.status);
    doc["message"] = trace.message;
    doc["space"] = trace.final_point.space().describe();
    doc["final_point"] = vec(trace.final_point.coords());
    json recs = json::array();
    for (const auto& r : trace.records) {
        json j;
        j["n"] = r.n;
        j["x"] = vec(r.x.coords());
        j["y"] = vec(r.y.coords());
        j["z"] = vec(r.z.coords());
        j["u"] = vec(r.u.coords());
        j["step_norm"] = scalar(r.step_norm);
        j["phi_anchor"] = scalar(r.phi_anchor);
        j["residual_xy"] = scalar(r.residual_xy);
        j["residual_fp"] = scalar(r.residual_fp);
        j["cert_eq"] = scalar(r.cert_eq);
        j["cert_vi"] = scalar(r.cert_vi);
        j["cert_R"] = scalar(r.cert_r);
        j["sol_dist"] = r.sol_dist ? scalar(*r.sol_dist) : json(nullptr);
        if (r.next) j["x_next"] = vec(r.next->coords());
        if (r.cut) j["cut"] = {{"normal", vec(r.cut->normal.coords())}, {"offset", scalar(r.cut->offset)}};
        recs.push_back(std::move(j));
    }
    doc["records"] = std::move(recs);
    return doc.dump(1) + "\n";
}

std::string summary_json(const IterationTrace& trace) {
    json doc;
    doc["terminal_status"] = to_string(trace.status);
    doc["message"] = trace.message;
    const bool empty = trace.records.empty();
    const auto* last = empty ? nullptr : &trace.records.back();
    doc["iterations"] = empty ? 0 : last->n;
    doc["final_norm"] = scalar(norm(trace.final_point));
    doc["final_step_norm"] = last ? scalar(last->step_norm) : json(nullptr);
    doc["final_residual_xy"] = last ? scalar(last->residual_xy) : json(nullptr);
    doc["final_residual_fp"] = last ? scalar(last->residual_fp) : json(nullptr);
    doc["final_sol_dist"] = (last && last->sol_dist) ? scalar(*last->sol_dist) : json(nullptr);
    doc["ledger_size"] = trace.ledger.size();
    return doc.dump(2) + "\n";
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
    std::filesystem::path p = csv_path;
    p.replace_extension(".json");
    return p;
}

std::size_t TraceTable::rows() const { return values.empty() ? 0 : values.begin()->second.size(); }

TraceTable read_trace_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw TraceReadError("cannot read trace " + path.string());
    TraceTable t;
    std::string line;
    if (!std::getline(f, line) || line.empty()) throw TraceReadError("trace " + path.string() + " is empty");
    {
        std::stringstream ss(line);
        std::string col;
        while (std::getline(ss, col, ',')) t.columns.push_back(col);
    }
    if (std::find(t.columns.begin(), t.columns.end(), "n") == t.columns.end())
        throw TraceReadError("trace " + path.string() + " has no 'n' column");
    for (const auto& c : t.columns) t.values[c];
    int lineno = 1;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        if (cells.size() != t.columns.size())
            throw TraceReadError("trace line " + std::to_string(lineno) + ": expected " +
                                 std::to_string(t.columns.size()) + " cells");
        for (std::size_t i = 0; i < cells.size(); ++i) {
            double v = std::numeric_limits<double>::quiet_NaN();
            if (!cells[i].empty()) {
                try {
                    v = std::stod(cells[i]);
                } catch (const std::exception&) {
                    if (cells[i] != "nan") throw TraceReadError("trace line " + std::to_string(lineno) + ": bad number");
                }
            }
            t.values[t.columns[i]].push_back(v);
        }
    }
    if (t.rows() == 0) throw TraceReadError("trace " + path.string() + " has no rows");
    return t;
}

std::string render_svg(const TraceTable& table, const std::string& title) {
    static const std::array<const char*, 4> kCurves{"step_norm", "residual_xy", "residual_fp", "sol_dist"};
    static const std::array<const char*, 4> kColors{"#1f77b4", "#d62728", "#2ca02c", "#9467bd"};
    const double w = 800, h = 500, left = 80, right = 170, top = 40, bottom = 50;
    const double pw = w - left - right, ph = h - top - bottom;

    const auto& ns = table.values.at("n");
    double nmin = *std::min_element(ns.begin(), ns.end());
    double nmax = *std::max_element(ns.begin(), ns.end());
    if (nmax <= nmin) nmax = nmin + 1;

    std::vector<int> present;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (int k = 0; k < 4; ++k) {
        auto it = table.values.find(kCurves[k]);
        if (it == table.values.end()) continue;
        present.push_back(k);
        for (double v : it->second)
            if (v > 0 && std::isfinite(v)) {
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
    }
    if (!std::isfinite(lo)) lo = 1e-16, hi = 1;
    double dlo = std::floor(std::log10(lo)), dhi = std::ceil(std::log10(hi));
    if (dhi <= dlo) dhi = dlo + 1;

    auto sx = [&](double n) { return left + pw * (n - nmin) / (nmax - nmin); };
    auto sy = [&](double v) {
        const double lv = (v > 0 && std::isfinite(v)) ? std::log10(v) : dlo;
        return top + ph * (dhi - lv) / (dhi - dlo);
    };

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\" viewBox=\"0 0 " << w
      << ' ' << h << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    s << "<text x=\"" << left + pw / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n";
    s << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << pw << "\" height=\"" << ph
      << "\" fill=\"none\" stroke=\"black\"/>\n";
    const int step = std::max(1, static_cast<int>((dhi - dlo) / 10));
    for (int d = static_cast<int>(dlo); d <= static_cast<int>(dhi); d += step) {
        const double y = sy(std::pow(10.0, d));
        s << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + pw << "\" y2=\"" << y
          << "\" stroke=\"#ddd\"/>\n";
        s << "<text x=\"" << left - 6 << "\" y=\"" << y + 4 << "\" text-anchor=\"end\">1e" << d << "</text>\n";
    }
    for (int i = 0; i <= 5; ++i) {
        const double n = nmin + (nmax - nmin) * i / 5.0;
        s << "<text x=\"" << sx(n) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
          << static_cast<long>(std::lround(n)) << "</text>\n";
    }
    s << "<text x=\"" << left + pw / 2 << "\" y=\"" << h - 10 << "\" text-anchor=\"middle\">n</text>\n";

    int legend = 0;
    for (int k : present) {
        const auto& vals = table.values.at(kCurves[k]);
        s << "<polyline class=\"" << kCurves[k] << "\" fill=\"none\" stroke=\"" << kColors[k]
          << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < vals.size(); ++i) s << sx(ns[i]) << ',' << sy(vals[i]) << ' ';
        s << "\"/>\n";
        const double ly = top + 16 + 20 * legend++;
        s << "<line x1=\"" << left + pw + 12 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 36 << "\" y2=\"" << ly
          << "\" stroke=\"" << kColors[k] << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << left + pw + 42 << "\" y=\"" << ly + 4 << "\">" << kCurves[k] << "</text>\n";
    }
    s << "</svg>\n";
    return s.str();
}

}  // namespace hybridfp
