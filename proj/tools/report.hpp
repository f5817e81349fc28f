#pragma once

// Deterministic CSV and JSON writers. Floating-point values are printed with
// 17 significant digits ("%.17g"), non-finite values as "nan"/"inf" in CSV
// and null in JSON. Line endings are LF.

#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

namespace fermsig::cli {

inline constexpr const char* kSchemaVersion = "1";

using Cell = std::variant<double, long long, std::string>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

std::string format_double(double v);

std::string to_csv(const Table& table);

/// {"schema_version": "1", "command": ..., "config": ..., "columns": [...], "rows": [[...], ...]}
nlohmann::ordered_json table_json(const Table& table, const std::string& command,
                                  const nlohmann::ordered_json& config);

/// Serializes with 2-space indentation; arrays of scalars stay on one line.
std::string dump(const nlohmann::ordered_json& j);

void write_file(const std::string& path, const std::string& content);

}  // namespace fermsig::cli
