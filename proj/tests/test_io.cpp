#include "generators.hpp"

#include "hybridfp/config.hpp"
#include "hybridfp/trace_io.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

using namespace hybridfp;
namespace fs = std::filesystem;

namespace {

IterationTrace short_trace(bool with_solution) {
    auto inst = example_problem(2.0, 4);
    if (!with_solution) inst.known_common_solutions.clear();
    AlgorithmParams prm(Point(inst.space, {0.5, 0.0, 0.0, 0.0}));
    prm.max_iters = 12;
    return run(inst, prm, SolverSettings{});
}

fs::path temp_dir(const std::string& name) {
    const fs::path d = fs::temp_directory_path() / ("hybridfp_test_" + name);
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
}

std::vector<std::string> lines(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    for (std::string l; std::getline(ss, l);) out.push_back(l);
    return out;
}

}  // namespace

TEST_CASE("shortest decimal formatting round-trips") {
    std::mt19937_64 rng(3);
    for (int k = 0; k < 5000; ++k) {
        double v;
        const std::uint64_t bits = rng();
        std::memcpy(&v, &bits, sizeof v);
        if (!std::isfinite(v)) continue;
        CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
    }
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1e-300) == "1e-300");
}

TEST_CASE("trace csv layout") {
    const auto with = trace_csv(short_trace(true));
    const auto rows = lines(with);
    CHECK(rows.front() == "n,step_norm,phi_anchor,residual_xy,residual_fp,cert_eq,cert_vi,cert_R,sol_dist");
    CHECK(rows.size() == 13);
    CHECK(rows[1].rfind("1,", 0) == 0);
    const auto without = lines(trace_csv(short_trace(false)));
    CHECK(without.front() == "n,step_norm,phi_anchor,residual_xy,residual_fp,cert_eq,cert_vi,cert_R");
}

TEST_CASE("csv and json sidecar agree") {
    const auto trace = short_trace(true);
    const auto doc = nlohmann::json::parse(trace_json(trace));
    CHECK(doc["terminal_status"] == "MaxIters");
    const auto rows = lines(trace_csv(trace));
    REQUIRE(doc["records"].size() + 1 == rows.size());
    const char* cols[] = {"n", "step_norm", "phi_anchor", "residual_xy", "residual_fp", "cert_eq", "cert_vi", "cert_R",
                          "sol_dist"};
    for (std::size_t r = 1; r < rows.size(); ++r) {
        std::stringstream ss(rows[r]);
        std::string cell;
        int c = 0;
        while (std::getline(ss, cell, ',')) {
            const double csv = std::stod(cell);
            const double js = doc["records"][r - 1][cols[c]].get<double>();
            CHECK(std::abs(csv - js) <= 1e-12 * std::max(1.0, std::abs(js)));
            ++c;
        }
        CHECK(c == 9);
        CHECK(doc["records"][r - 1]["x"].size() == 4);
    }
    const auto summary = nlohmann::json::parse(summary_json(trace));
    CHECK(summary["iterations"] == 12);
    CHECK(summary["final_norm"].get<double>() == doctest::Approx(norm(trace.final_point)));
}

TEST_CASE("svg has one polyline per plotted column") {
    const fs::path dir = temp_dir("svg");
    write_text(dir / "a.csv", trace_csv(short_trace(true)));
    write_text(dir / "b.csv", trace_csv(short_trace(false)));
    auto count = [](const std::string& svg) {
        std::size_t n = 0;
        for (auto pos = svg.find("<polyline"); pos != std::string::npos; pos = svg.find("<polyline", pos + 1)) ++n;
        return n;
    };
    const std::string a = render_svg(read_trace_csv(dir / "a.csv"));
    const std::string b = render_svg(read_trace_csv(dir / "b.csv"));
    CHECK(count(a) == 4);
    CHECK(count(b) == 3);
    CHECK(b.find("sol_dist") == std::string::npos);
    CHECK(a.rfind("<svg", 0) == 0);

    write_text(dir / "empty.csv", "");
    CHECK_THROWS_AS(read_trace_csv(dir / "empty.csv"), TraceReadError);
    CHECK_THROWS_AS(read_trace_csv(dir / "missing.csv"), TraceReadError);
}

TEST_CASE("config parsing") {
    const RunConfig cfg = parse_config(R"({"problem": {"builtin": "paper-example", "p": 3, "d": 5},
        "params": {"max_iters": 7, "r": {"type": "linear", "base": 2, "slope": 0.5}},
        "settings": {"rng_seed": 4, "certificate_samples": 16},
        "outputs": {"trace": "t.csv"}})",
                                       "/base");
    CHECK(cfg.instance.space.p() == 3.0);
    CHECK(cfg.instance.space.dim() == 5);
    CHECK(cfg.params.max_iters == 7);
    CHECK(cfg.params.r_rule(3) == doctest::Approx(3.0));
    CHECK(cfg.params.a == 2.0);
    CHECK(cfg.params.anchor[0] == 0.5);
    CHECK(cfg.settings.rng_seed == 4);
    CHECK(cfg.settings.certificate_samples == 16);
    CHECK(*cfg.outputs.trace == fs::path("/base/t.csv"));

    const RunConfig inl = parse_config(R"({"problem": {
        "space": {"geometry": "hilbert", "dim": 2},
        "feasible_set": {"ball": {"center": [0, 0], "radius": 3}, "halfspaces": [{"normal": [1, 0], "offset": 2}]},
        "operators": [{"type": "affine", "matrix": [[1, 0], [0, 2]]}, {"type": "scaled_duality", "scale": 0.5}],
        "bifunctions": [{"type": "affine_operator_form", "matrix": [[1, 0], [0, 1]], "offset": [0, 0]}],
        "maps": {"type": "truncated_shift", "alpha_rule": {"type": "constant", "value": 0.25}},
        "known_solutions": [[0, 0]]},
        "params": {"anchor": [0.5, 0.5]}})");
    CHECK(inl.instance.operators.size() == 2);
    CHECK(inl.instance.bifunctions.size() == 1);
    CHECK(inl.instance.feasible_set.halfspaces().size() == 1);
    CHECK(inl.instance.known_common_solutions.size() == 1);
}

TEST_CASE("config rejects bad input") {
    auto rejects = [](const std::string& text, const char* fragment) {
        try {
            parse_config(text);
            return false;
        } catch (const ConfigError& e) {
            return std::string(e.what()).find(fragment) != std::string::npos;
        }
    };
    CHECK(rejects(R"({"problem": {"builtin": "paper-example"}, "extra": 1})", "unknown key 'extra'"));
    CHECK(rejects(R"({"problem": {"builtin": "paper-example", "q": 2}})", "unknown key 'q'"));
    CHECK(rejects(R"({"problem": {"builtin": "paper-example"}, "params": {"alpha": [0.3, 0.3, 0.3]}})", "simplex"));
    CHECK(rejects(R"({"problem": {"builtin": "nope"}})", "unknown built-in"));
    CHECK(rejects(R"({"problem": {"builtin": "paper-example"}, "params": {"anchor": [2, 0, 0, 0, 0, 0, 0, 0]}})",
                  "anchor"));
    CHECK(rejects(R"({"problem": {"builtin": "paper-example"}, "settings": {"certificate_tol": -1}})", "settings"));
    CHECK(rejects(R"({"problem": {"space": {"geometry": "lp", "p": 3, "dim": 2},
        "feasible_set": {"ball": {"center": [0.5, 0], "radius": 1}}}, "params": {"anchor": [0.5, 0]}})", "centred"));
    CHECK(rejects(R"({"problem": {"space": {"geometry": "hilbert", "dim": 2}, "feasible_set": {},
        "operators": [{"type": "affine", "matrix": [[-1, 0], [0, 1]]}]}})", "positive semidefinite"));
    CHECK(rejects("{not json", "not valid JSON"));
    CHECK(rejects(R"({"problem": {"builtin": "paper-example"}, "params": {"max_iters": "ten"}})", "integer"));
}

TEST_CASE("load_config resolves paths next to the file") {
    const fs::path dir = temp_dir("cfg");
    {
        std::ofstream f(dir / "c.json");
        f << R"({"problem": {"builtin": "hilbert-affine-vi", "d": 3, "seed": 1, "space": "lp2"},
                 "outputs": {"summary": "s.json"}})";
    }
    const RunConfig cfg = load_config(dir / "c.json");
    CHECK(*cfg.outputs.summary == dir / "s.json");
    CHECK(cfg.instance.space.geometry() == Geometry::Lp);
    CHECK_THROWS_AS(load_config(dir / "missing.json"), ConfigError);
}
