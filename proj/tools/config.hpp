#pragma once

// Run configuration for the fermsig command line: a JSON document with the
// defaults below, overridden by --set key=value flags.

#include <stdexcept>
#include <string>
#include <vector>

#include "fermsig/core.hpp"
#include "json.hpp"

namespace fermsig::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProfileSpec {
    std::string kind = "bump";  // bump | polynomial_bump
    // bump: optional support center and width (default: the whole interval)
    double center = 0.0;
    double width = 0.0;
    // polynomial_bump
    int order = 2;
    std::vector<double> coefficients{1.0};
};

struct TimeSamples {
    double start = 0.0;
    double stop = 10.0;
    int count = 101;

    std::vector<double> values() const;
};

struct RunConfig {
    std::string spacetime = "desitter";  // desitter | ultrastatic
    double m_lower = 1.0;
    double m_upper = 2.0;
    std::vector<double> lambda_list{1.5, 2.5, 3.5, 4.5};
    ProfileSpec profile;
    int quadrature_nodes = 64;
    double rtol = 1e-10;
    double eps = 1e-12;
    double zero_tol = 1e-10;
    double conservation_rtol = 1e-12;
    double t_max = 200.0;
    double t_check = 3.0;
    std::string format;  // csv | json; empty picks json for verify, csv otherwise
    std::string out;
    std::vector<double> mass_grid;  // empty: 9 evenly spaced interior points
    TimeSamples times;
    SpinorPair u0{1.0, 0.0};

    bool desitter() const { return spacetime == "desitter"; }
    MassInterval interval() const { return {m_lower, m_upper}; }
    MassProfile make_profile() const;
    std::vector<double> masses() const;
    std::vector<double> sorted_lambdas() const;
};

/// Largest |lambda| accepted for de Sitter runs.
inline constexpr double kLambdaBudget = 9.5;

/// Parses "a.b.c=value" and stores value (JSON if it parses, else a string)
/// at the dotted path of `doc`.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Builds and validates a config from a JSON document. Unknown keys, wrong
/// types and out-of-range values raise ConfigError.
RunConfig parse_config(const nlohmann::json& doc);

/// Reads `path` (if nonempty), applies overrides, parses and validates.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides);

/// The resolved configuration, echoed into reports.
nlohmann::ordered_json to_json(const RunConfig& cfg);

}  // namespace fermsig::cli
