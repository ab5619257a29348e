#include "hybridfp/config.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace hybridfp {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ConfigError(where + ": " + what);
}

void only_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(where, "expected an object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : obj.items())
        if (!ok.count(key)) fail(where, "unknown key '" + key + "'");
}

const json& need(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing required key '") + key + "'");
    return *it;
}

double number(const json& v, const std::string& where) {
    if (!v.is_number()) fail(where, "expected a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) fail(where, "expected a finite number");
    return d;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : number(*it, where + "." + key);
}

long integer(const json& v, const std::string& where) {
    if (!v.is_number_integer()) fail(where, "expected an integer");
    return v.get<long>();
}

long integer_or(const json& obj, const char* key, long fallback, const std::string& where) {
    auto it = obj.find(key);
    return it == obj.end() ? fallback : integer(*it, where + "." + key);
}

std::string text(const json& v, const std::string& where) {
    if (!v.is_string()) fail(where, "expected a string");
    return v.get<std::string>();
}

Vector vector_of(const json& v, int dim, const std::string& where) {
    if (!v.is_array()) fail(where, "expected an array");
    if (static_cast<int>(v.size()) != dim)
        fail(where, "expected " + std::to_string(dim) + " entries, got " + std::to_string(v.size()));
    Vector out(dim);
    for (int i = 0; i < dim; ++i) out[i] = number(v[i], where + "[" + std::to_string(i) + "]");
    return out;
}

Matrix matrix_of(const json& v, int dim, const std::string& where) {
    if (!v.is_array() || static_cast<int>(v.size()) != dim) fail(where, "expected " + std::to_string(dim) + " rows");
    Matrix m(dim, dim);
    for (int i = 0; i < dim; ++i) m.row(i) = vector_of(v[i], dim, where + "[" + std::to_string(i) + "]").transpose();
    return m;
}

AlphaRule alpha_rule_of(const json& v, const std::string& where) {
    only_keys(v, where, {"type", "value"});
    const std::string type = text(need(v, "type", where), where + ".type");
    if (type == "harmonic") return default_alpha_rule();
    if (type == "constant") {
        const double a = number(need(v, "value", where), where + ".value");
        return [a](int) { return a; };
    }
    fail(where + ".type", "unknown alpha rule '" + type + "' (expected harmonic or constant)");
}

SpaceDescriptor space_of(const json& v, const std::string& where) {
    only_keys(v, where, {"geometry", "p", "dim"});
    const std::string g = text(need(v, "geometry", where), where + ".geometry");
    const long dim = integer(need(v, "dim", where), where + ".dim");
    if (dim < 1) fail(where + ".dim", "must be >= 1");
    if (g == "hilbert") {
        if (v.contains("p")) fail(where + ".p", "not allowed for hilbert geometry");
        return SpaceDescriptor::hilbert(static_cast<int>(dim));
    }
    if (g == "lp") {
        const double p = number(need(v, "p", where), where + ".p");
        if (!(p > 1.0)) fail(where + ".p", "must be > 1");
        return SpaceDescriptor::lp(static_cast<int>(dim), p);
    }
    fail(where + ".geometry", "expected hilbert or lp");
}

FeasibleSet feasible_set_of(const json& v, const SpaceDescriptor& sp, const std::string& where) {
    only_keys(v, where, {"ball", "box", "halfspaces"});
    if (v.contains("ball") && v.contains("box")) fail(where, "ball and box cannot be combined");
    const int d = sp.dim();
    std::optional<FeasibleSet> base;
    if (auto it = v.find("ball"); it != v.end()) {
        const std::string w = where + ".ball";
        only_keys(*it, w, {"center", "radius"});
        const Vector c = it->contains("center") ? vector_of(it->at("center"), d, w + ".center") : Vector::Zero(d);
        const double rad = number(need(*it, "radius", w), w + ".radius");
        if (!(rad > 0.0)) fail(w + ".radius", "must be positive");
        base = FeasibleSet::ball(Point(sp, c), rad);
    } else if (auto it = v.find("box"); it != v.end()) {
        const std::string w = where + ".box";
        only_keys(*it, w, {"lower", "upper"});
        const Vector lo = vector_of(need(*it, "lower", w), d, w + ".lower");
        const Vector hi = vector_of(need(*it, "upper", w), d, w + ".upper");
        if ((lo.array() > hi.array()).any()) fail(w, "lower must not exceed upper");
        base = FeasibleSet::box(sp, lo, hi);
    } else {
        base = FeasibleSet::whole_space(sp);
    }
    if (auto it = v.find("halfspaces"); it != v.end()) {
        if (!it->is_array()) fail(where + ".halfspaces", "expected an array");
        std::vector<HalfSpace> hs;
        for (std::size_t i = 0; i < it->size(); ++i) {
            const std::string w = where + ".halfspaces[" + std::to_string(i) + "]";
            only_keys((*it)[i], w, {"normal", "offset"});
            hs.push_back(HalfSpace{DualPoint(sp, vector_of(need((*it)[i], "normal", w), d, w + ".normal")),
                                   number(need((*it)[i], "offset", w), w + ".offset"), 0});
        }
        base = base->intersect(hs);
    }
    return *base;
}

MonotoneOperator operator_of(const json& v, const SpaceDescriptor& sp, const std::string& where) {
    const std::string type = text(need(v, "type", where), where + ".type");
    if (type == "affine") {
        only_keys(v, where, {"type", "matrix", "offset"});
        const Matrix m = matrix_of(need(v, "matrix", where), sp.dim(), where + ".matrix");
        const Vector c = v.contains("offset") ? vector_of(v.at("offset"), sp.dim(), where + ".offset")
                                              : Vector::Zero(sp.dim());
        return affine_operator(sp, m, c);
    }
    if (type == "scaled_duality") {
        only_keys(v, where, {"type", "scale"});
        return scaled_duality_operator(sp, number_or(v, "scale", 1.0, where));
    }
    fail(where + ".type", "unknown operator type '" + type + "' (expected affine or scaled_duality)");
}

Bifunction bifunction_of(const json& v, const SpaceDescriptor& sp, const std::string& where) {
    const std::string type = text(need(v, "type", where), where + ".type");
    if (type == "inverse_duality") {
        only_keys(v, where, {"type", "scale", "orientation"});
        return inverse_duality_bifunction(sp, number_or(v, "scale", 1.0, where),
                                          number_or(v, "orientation", 1.0, where));
    }
    if (type == "affine_operator_form") {
        only_keys(v, where, {"type", "matrix", "offset"});
        const Matrix m = matrix_of(need(v, "matrix", where), sp.dim(), where + ".matrix");
        const Vector c = v.contains("offset") ? vector_of(v.at("offset"), sp.dim(), where + ".offset")
                                              : Vector::Zero(sp.dim());
        return affine_operator_bifunction(sp, m, c);
    }
    fail(where + ".type", "unknown bifunction type '" + type + "' (expected inverse_duality or affine_operator_form)");
}

MapFamily maps_of(const json& v, const SpaceDescriptor& sp, const std::string& where) {
    const std::string type = text(need(v, "type", where), where + ".type");
    if (type == "identity") {
        only_keys(v, where, {"type"});
        return identity_family(sp);
    }
    if (type == "truncated_shift") {
        only_keys(v, where, {"type", "alpha_rule"});
        AlphaRule rule = v.contains("alpha_rule") ? alpha_rule_of(v.at("alpha_rule"), where + ".alpha_rule")
                                                  : default_alpha_rule();
        return truncated_shift_family(sp, rule);
    }
    fail(where + ".type", "unknown map family '" + type + "' (expected identity or truncated_shift)");
}

ProblemInstance inline_problem(const json& v, const std::string& where) {
    only_keys(v, where, {"name", "space", "feasible_set", "operators", "bifunctions", "maps", "known_solutions"});
    const SpaceDescriptor sp = space_of(need(v, "space", where), where + ".space");
    FeasibleSet set = feasible_set_of(need(v, "feasible_set", where), sp, where + ".feasible_set");
    std::vector<MonotoneOperator> ops;
    if (auto it = v.find("operators"); it != v.end()) {
        if (!it->is_array()) fail(where + ".operators", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i)
            ops.push_back(operator_of((*it)[i], sp, where + ".operators[" + std::to_string(i) + "]"));
    }
    std::vector<Bifunction> bfs;
    if (auto it = v.find("bifunctions"); it != v.end()) {
        if (!it->is_array()) fail(where + ".bifunctions", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i)
            bfs.push_back(bifunction_of((*it)[i], sp, where + ".bifunctions[" + std::to_string(i) + "]"));
    }
    MapFamily maps = v.contains("maps") ? maps_of(v.at("maps"), sp, where + ".maps") : identity_family(sp);
    std::vector<Point> known;
    if (auto it = v.find("known_solutions"); it != v.end()) {
        if (!it->is_array()) fail(where + ".known_solutions", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i)
            known.emplace_back(sp, vector_of((*it)[i], sp.dim(), where + ".known_solutions[" + std::to_string(i) + "]"));
    }
    const std::string name = v.contains("name") ? text(v.at("name"), where + ".name") : "inline";
    return ProblemInstance{name, sp, std::move(set), std::move(ops), std::move(bfs), std::move(maps), std::move(known)};
}

ProblemInstance builtin_problem(const json& v, const std::string& where) {
    const std::string name = text(need(v, "builtin", where), where + ".builtin");
    if (name == "paper-example") {
        only_keys(v, where, {"builtin", "p", "d", "alpha_rule"});
        const double p = number_or(v, "p", 2.0, where);
        const long d = integer_or(v, "d", 8, where);
        if (!(p > 1.0)) fail(where + ".p", "must be > 1");
        if (d < 2) fail(where + ".d", "must be >= 2");
        AlphaRule rule = v.contains("alpha_rule") ? alpha_rule_of(v.at("alpha_rule"), where + ".alpha_rule")
                                                  : default_alpha_rule();
        return example_problem(p, static_cast<int>(d), rule);
    }
    if (name == "hilbert-affine-vi") {
        only_keys(v, where, {"builtin", "d", "seed", "space"});
        const long d = integer_or(v, "d", 4, where);
        const long seed = integer_or(v, "seed", 0, where);
        if (d < 1) fail(where + ".d", "must be >= 1");
        if (seed < 0) fail(where + ".seed", "must be >= 0");
        bool lp2 = false;
        if (v.contains("space")) {
            const std::string s = text(v.at("space"), where + ".space");
            if (s == "lp2") lp2 = true;
            else if (s != "hilbert") fail(where + ".space", "expected hilbert or lp2");
        }
        return hilbert_affine_vi_problem(static_cast<int>(d), static_cast<std::uint64_t>(seed), lp2);
    }
    fail(where + ".builtin", "unknown built-in problem '" + name + "' (expected paper-example or hilbert-affine-vi)");
}

RRule r_rule_of(const json& v, double& lower, const std::string& where) {
    const std::string type = text(need(v, "type", where), where + ".type");
    if (type == "constant") {
        only_keys(v, where, {"type", "value"});
        const double r = number(need(v, "value", where), where + ".value");
        lower = r;
        return [r](int) { return r; };
    }
    if (type == "linear") {
        only_keys(v, where, {"type", "base", "slope"});
        const double base = number(need(v, "base", where), where + ".base");
        const double slope = number_or(v, "slope", 0.0, where);
        if (slope < 0.0) fail(where + ".slope", "must be >= 0");
        lower = base;
        return [base, slope](int n) { return base + slope * (n - 1); };
    }
    if (type == "cyclic") {
        only_keys(v, where, {"type", "values"});
        const json& vals = need(v, "values", where);
        if (!vals.is_array() || vals.empty()) fail(where + ".values", "expected a nonempty array");
        std::vector<double> rs;
        for (std::size_t i = 0; i < vals.size(); ++i) rs.push_back(number(vals[i], where + ".values"));
        lower = *std::min_element(rs.begin(), rs.end());
        return [rs](int n) { return rs[static_cast<std::size_t>(n - 1) % rs.size()]; };
    }
    fail(where + ".type", "unknown r rule '" + type + "' (expected constant, linear or cyclic)");
}

Point default_anchor(const ProblemInstance& inst) {
    Vector a = Vector::Zero(inst.space.dim());
    if (inst.name == "paper-example") a[0] = 0.5;
    else if (inst.name == "hilbert-affine-vi") a[0] = 2.0;
    return Point(inst.space, a);
}

std::filesystem::path resolve(const json& v, const std::filesystem::path& base, const std::string& where) {
    std::filesystem::path p = text(v, where);
    if (p.empty()) fail(where, "empty path");
    return p.is_relative() && !base.empty() ? base / p : p;
}

}  // namespace

RunConfig parse_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    try {
        only_keys(doc, "config", {"$schema", "name", "problem", "params", "settings", "outputs"});
        const json& prob = need(doc, "problem", "config");
        if (!prob.is_object()) fail("problem", "expected an object");
        ProblemInstance inst = prob.contains("builtin") ? builtin_problem(prob, "problem") : inline_problem(prob, "problem");

        const json params_j = doc.value("params", json::object());
        only_keys(params_j, "params", {"alpha", "r", "a", "max_iters", "stop_tol", "anchor"});
        Point anchor = params_j.contains("anchor") ? Point(inst.space, vector_of(params_j.at("anchor"), inst.space.dim(), "params.anchor"))
                                                   : default_anchor(inst);
        AlgorithmParams params(anchor);
        if (params_j.contains("alpha")) {
            const json& a = params_j.at("alpha");
            if (!a.is_array() || a.size() != 3) fail("params.alpha", "expected three numbers");
            for (int i = 0; i < 3; ++i) params.alpha[i] = number(a[i], "params.alpha");
        }
        double lower = 1.0;
        if (params_j.contains("r")) params.r_rule = r_rule_of(params_j.at("r"), lower, "params.r");
        params.a = params_j.contains("a") ? number(params_j.at("a"), "params.a") : lower;
        params.max_iters = static_cast<int>(integer_or(params_j, "max_iters", 1000, "params"));
        params.stop_tol = number_or(params_j, "stop_tol", 1e-8, "params");
        try {
            params.validate(inst);
        } catch (const std::invalid_argument& e) {
            fail("params", e.what());
        }

        const json set_j = doc.value("settings", json::object());
        only_keys(set_j, "settings", {"inner_tol", "max_inner_iters", "certificate_samples", "certificate_tol",
                                      "rng_seed", "max_ledger", "enforce_certificates"});
        SolverSettings settings;
        settings.inner_tol = number_or(set_j, "inner_tol", settings.inner_tol, "settings");
        settings.max_inner_iters = static_cast<int>(integer_or(set_j, "max_inner_iters", settings.max_inner_iters, "settings"));
        settings.certificate_samples =
            static_cast<int>(integer_or(set_j, "certificate_samples", settings.certificate_samples, "settings"));
        settings.certificate_tol = number_or(set_j, "certificate_tol", settings.certificate_tol, "settings");
        const long seed = integer_or(set_j, "rng_seed", 0, "settings");
        const long cap = integer_or(set_j, "max_ledger", 0, "settings");
        if (seed < 0) fail("settings.rng_seed", "must be >= 0");
        if (cap < 0) fail("settings.max_ledger", "must be >= 0");
        settings.rng_seed = static_cast<std::uint64_t>(seed);
        settings.max_ledger = static_cast<std::size_t>(cap);
        if (set_j.contains("enforce_certificates")) {
            if (!set_j.at("enforce_certificates").is_boolean()) fail("settings.enforce_certificates", "expected a boolean");
            settings.enforce_certificates = set_j.at("enforce_certificates").get<bool>();
        }
        try {
            settings.validate();
        } catch (const std::invalid_argument& e) {
            fail("settings", e.what());
        }

        OutputPaths outputs;
        const json out_j = doc.value("outputs", json::object());
        only_keys(out_j, "outputs", {"trace", "summary", "plot"});
        if (out_j.contains("trace")) outputs.trace = resolve(out_j.at("trace"), base_dir, "outputs.trace");
        if (out_j.contains("summary")) outputs.summary = resolve(out_j.at("summary"), base_dir, "outputs.summary");
        if (out_j.contains("plot")) outputs.plot = resolve(out_j.at("plot"), base_dir, "outputs.plot");

        const std::string name = doc.contains("name") ? text(doc.at("name"), "name") : inst.name;
        return RunConfig{name, std::move(inst), std::move(params), settings, std::move(outputs)};
    } catch (const ConfigError&) {
        throw;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("problem: ") + e.what());
    }
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot read config " + path.string());
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_config(ss.str(), path.parent_path());
}

}  // namespace hybridfp
