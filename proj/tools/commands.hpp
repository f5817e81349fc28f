#pragma once

#include <stdexcept>
#include <string>

#include "config.hpp"

namespace fermsig::cli {

/// A computation produced non-finite values or the integrator failed.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct CommandResult {
    std::string content;  // file contents
    int exit_code = 0;    // 0, or 1 when verify found a FAIL
};

/// Runs evolve | signature | sweep | verify. Throws ConfigError for unusable
/// configurations and NumericError for numeric failures.
CommandResult run_command(const std::string& command, const RunConfig& cfg);

}  // namespace fermsig::cli
