// report.hpp: Tabular results and their CSV / JSON renderings.

#pragma once

#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace qhe {

/// Empty cells render as "" in CSV and null in JSON.
using Cell = std::variant<std::monostate, double, long long, bool, std::string>;

Cell cell(std::optional<double> v);

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row);
};

/// 17 significant digits; non-finite values as nan / inf / -inf.
std::string format_double(double x);

struct Report {
    std::string command;
    nlohmann::json config;                                     // fully resolved
    std::vector<std::pair<std::string, std::string>> metadata;  // ordered
    Table table;
    nlohmann::json extra;  // JSON-only top-level fields, e.g. density matrices
};

/// '#'-prefixed metadata header, then the header row and data rows.
std::string to_csv(const Report& r);

nlohmann::json to_json(const Report& r);

}  // namespace qhe
