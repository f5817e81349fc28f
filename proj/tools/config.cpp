#include "config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "fermsig/desitter.hpp"

namespace fermsig::cli {

using nlohmann::json;

std::vector<double> TimeSamples::values() const {
    std::vector<double> out(count);
    for (int i = 0; i < count; ++i) out[i] = count == 1 ? start : start + (stop - start) * i / (count - 1);
    return out;
}

MassProfile RunConfig::make_profile() const {
    const MassInterval I = interval();
    if (profile.kind == "bump") {
        if (profile.width > 0.0) return MassProfile::bump(I, profile.center, profile.width);
        return MassProfile::bump(I);
    }
    return MassProfile::polynomial_bump(I, profile.order, profile.coefficients);
}

std::vector<double> RunConfig::masses() const {
    std::vector<double> out = mass_grid;
    if (out.empty()) {
        for (int k = 1; k <= 9; ++k) out.push_back(m_lower + (m_upper - m_lower) * k / 10.0);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<double> RunConfig::sorted_lambdas() const {
    std::vector<double> out = lambda_list;
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

std::vector<std::string> split_path(const std::string& key) {
    std::vector<std::string> parts;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (part.empty()) throw ConfigError("--set: empty component in key '" + key + "'");
        parts.push_back(part);
    }
    if (parts.empty()) throw ConfigError("--set: empty key");
    return parts;
}

double number(const json& j, const std::string& key) {
    if (!j.is_number()) throw ConfigError("'" + key + "' must be a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) throw ConfigError("'" + key + "' must be finite");
    return v;
}

int integer(const json& j, const std::string& key) {
    if (!j.is_number_integer()) throw ConfigError("'" + key + "' must be an integer");
    return j.get<int>();
}

std::string string(const json& j, const std::string& key) {
    if (!j.is_string()) throw ConfigError("'" + key + "' must be a string");
    return j.get<std::string>();
}

std::vector<double> numbers(const json& j, const std::string& key) {
    if (!j.is_array()) throw ConfigError("'" + key + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : j) out.push_back(number(v, key));
    return out;
}

cplx complex_entry(const json& j, const std::string& key) {
    if (j.is_number()) return number(j, key);
    if (j.is_array() && j.size() == 2) return {number(j[0], key), number(j[1], key)};
    throw ConfigError("'" + key + "' entries must be numbers or [re, im] pairs");
}

void check_keys(const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [k, v] : j.items()) {
        if (!ok.count(k)) throw ConfigError("unknown config key '" + (where.empty() ? k : where + "." + k) + "'");
    }
}

void positive(double v, const char* key) {
    if (!(v > 0.0)) throw ConfigError(std::string("'") + key + "' must be > 0");
}

}  // namespace

void apply_override(json& doc, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
    const auto parts = split_path(assignment.substr(0, eq));
    const std::string text = assignment.substr(eq + 1);
    json value;
    try {
        value = json::parse(text);
    } catch (const json::parse_error&) {
        value = text;
    }
    json* node = &doc;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        if (!node->is_object()) throw ConfigError("--set: '" + parts[i] + "' is not an object");
        node = &(*node)[parts[i]];
        if (node->is_null()) *node = json::object();
    }
    if (!node->is_object()) throw ConfigError("--set: parent of '" + parts.back() + "' is not an object");
    (*node)[parts.back()] = value;
}

RunConfig parse_config(const json& doc) {
    check_keys(doc, "",
               {"spacetime", "mass_interval", "lambda_list", "profile", "quadrature_nodes", "rtol", "eps", "zero_tol",
                "conservation_rtol", "t_max", "t_check", "format", "out", "mass_grid", "times", "u0"});
    RunConfig c;
    if (doc.contains("spacetime")) c.spacetime = string(doc["spacetime"], "spacetime");
    if (c.spacetime != "desitter" && c.spacetime != "ultrastatic") {
        throw ConfigError("'spacetime' must be \"desitter\" or \"ultrastatic\"");
    }
    if (doc.contains("mass_interval")) {
        const auto v = numbers(doc["mass_interval"], "mass_interval");
        if (v.size() != 2) throw ConfigError("'mass_interval' must be [m_lower, m_upper]");
        c.m_lower = v[0];
        c.m_upper = v[1];
    }
    if (!(c.m_lower > 0.0 && c.m_lower < c.m_upper)) {
        throw ConfigError("'mass_interval' requires 0 < m_lower < m_upper");
    }
    if (doc.contains("lambda_list")) c.lambda_list = numbers(doc["lambda_list"], "lambda_list");
    if (c.lambda_list.empty()) throw ConfigError("'lambda_list' must not be empty");
    std::set<double> seen;
    for (double l : c.lambda_list) {
        if (!seen.insert(l).second) throw ConfigError("'lambda_list' has a repeated value");
        if (c.desitter()) {
            const double two = 2.0 * l;
            if (std::abs(two - std::round(two)) > 1e-12) {
                throw ConfigError("de Sitter eigenvalues must be integers or half-integers");
            }
            if (std::abs(l) > kLambdaBudget) throw ConfigError("|lambda| exceeds the de Sitter budget 19/2");
        }
    }
    if (doc.contains("profile")) {
        const json& p = doc["profile"];
        check_keys(p, "profile", {"kind", "center", "width", "order", "coefficients"});
        if (p.contains("kind")) c.profile.kind = string(p["kind"], "profile.kind");
        if (p.contains("center")) c.profile.center = number(p["center"], "profile.center");
        if (p.contains("width")) c.profile.width = number(p["width"], "profile.width");
        if (p.contains("order")) c.profile.order = integer(p["order"], "profile.order");
        if (p.contains("coefficients")) c.profile.coefficients = numbers(p["coefficients"], "profile.coefficients");
        if (c.profile.kind != "bump" && c.profile.kind != "polynomial_bump") {
            throw ConfigError("'profile.kind' must be \"bump\" or \"polynomial_bump\"");
        }
        if (p.contains("width") && !(c.profile.width > 0.0)) throw ConfigError("'profile.width' must be > 0");
        if (p.contains("width") && !p.contains("center")) {
            throw ConfigError("'profile.width' needs 'profile.center'");
        }
    }
    if (doc.contains("quadrature_nodes")) c.quadrature_nodes = integer(doc["quadrature_nodes"], "quadrature_nodes");
    if (c.quadrature_nodes < 1 || c.quadrature_nodes > 100000) {
        throw ConfigError("'quadrature_nodes' must be in [1, 100000]");
    }
    if (doc.contains("rtol")) c.rtol = number(doc["rtol"], "rtol");
    if (doc.contains("eps")) c.eps = number(doc["eps"], "eps");
    if (doc.contains("zero_tol")) c.zero_tol = number(doc["zero_tol"], "zero_tol");
    if (doc.contains("conservation_rtol")) c.conservation_rtol = number(doc["conservation_rtol"], "conservation_rtol");
    positive(c.rtol, "rtol");
    positive(c.eps, "eps");
    positive(c.zero_tol, "zero_tol");
    positive(c.conservation_rtol, "conservation_rtol");
    if (c.eps < desitter::kMinEps) throw ConfigError("'eps' below 1e-15 is not resolvable in double precision");
    if (doc.contains("t_max")) c.t_max = number(doc["t_max"], "t_max");
    positive(c.t_max, "t_max");
    if (doc.contains("t_check")) c.t_check = number(doc["t_check"], "t_check");
    if (doc.contains("format")) c.format = string(doc["format"], "format");
    if (!c.format.empty() && c.format != "csv" && c.format != "json") {
        throw ConfigError("'format' must be \"csv\" or \"json\"");
    }
    if (doc.contains("out")) c.out = string(doc["out"], "out");
    if (doc.contains("mass_grid")) c.mass_grid = numbers(doc["mass_grid"], "mass_grid");
    for (double m : c.mass_grid) {
        if (!(m > 0.0)) throw ConfigError("'mass_grid' entries must be > 0");
    }
    if (doc.contains("times")) {
        const json& t = doc["times"];
        check_keys(t, "times", {"start", "stop", "count"});
        if (t.contains("start")) c.times.start = number(t["start"], "times.start");
        if (t.contains("stop")) c.times.stop = number(t["stop"], "times.stop");
        if (t.contains("count")) c.times.count = integer(t["count"], "times.count");
    }
    if (c.times.count < 1 || c.times.count > 10'000'000) throw ConfigError("'times.count' must be in [1, 1e7]");
    if (c.times.count > 1 && !(c.times.stop > c.times.start)) throw ConfigError("'times' requires stop > start");
    if (doc.contains("u0")) {
        const json& u = doc["u0"];
        if (!u.is_array() || u.size() != 2) throw ConfigError("'u0' must be [u1, u2]");
        c.u0 = SpinorPair(complex_entry(u[0], "u0"), complex_entry(u[1], "u0"));
        if (!(c.u0.norm() > 0.0)) throw ConfigError("'u0' must be nonzero");
    }
    try {
        (void)c.make_profile();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("'profile': ") + e.what());
    }
    return c;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides) {
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file '" + path + "'");
        try {
            doc = json::parse(in);
        } catch (const json::parse_error& e) {
            throw ConfigError("config file '" + path + "' is not valid JSON: " + e.what());
        }
        if (!doc.is_object()) throw ConfigError("config file must hold a JSON object");
    }
    for (const auto& o : overrides) apply_override(doc, o);
    try {
        return parse_config(doc);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
}

nlohmann::ordered_json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["spacetime"] = c.spacetime;
    j["mass_interval"] = {c.m_lower, c.m_upper};
    j["lambda_list"] = c.sorted_lambdas();
    nlohmann::ordered_json p;
    p["kind"] = c.profile.kind;
    if (c.profile.kind == "bump") {
        if (c.profile.width > 0.0) {
            p["center"] = c.profile.center;
            p["width"] = c.profile.width;
        }
    } else {
        p["order"] = c.profile.order;
        p["coefficients"] = c.profile.coefficients;
    }
    j["profile"] = p;
    j["quadrature_nodes"] = c.quadrature_nodes;
    j["rtol"] = c.rtol;
    j["eps"] = c.eps;
    j["zero_tol"] = c.zero_tol;
    j["conservation_rtol"] = c.conservation_rtol;
    j["t_max"] = c.t_max;
    j["t_check"] = c.t_check;
    j["mass_grid"] = c.masses();
    j["times"] = {{"start", c.times.start}, {"stop", c.times.stop}, {"count", c.times.count}};
    j["u0"] = {{c.u0.u1.real(), c.u0.u1.imag()}, {c.u0.u2.real(), c.u0.u2.imag()}};
    return j;
}

}  // namespace fermsig::cli
