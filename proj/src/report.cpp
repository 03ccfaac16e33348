// report.cpp: CSV and JSON emission.

#include "qhe/report.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

namespace qhe {

using nlohmann::json;

Cell cell(std::optional<double> v) {
    if (!v) {
        return std::monostate{};
    }
    return *v;
}

void Table::add(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
        throw std::logic_error(fmt::format("table row has {} cells for {} columns", row.size(),
                                           columns.size()));
    }
    rows.push_back(std::move(row));
}

std::string format_double(double x) {
    if (std::isnan(x)) {
        return "nan";
    }
    if (std::isinf(x)) {
        return x > 0 ? "inf" : "-inf";
    }
    return fmt::format("{:.17g}", x);
}

namespace {

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        out += c == '"' ? std::string("\"\"") : std::string(1, c);
    }
    return out + "\"";
}

std::string render(const Cell& c) {
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return "";
            } else if constexpr (std::is_same_v<T, double>) {
                return format_double(v);
            } else if constexpr (std::is_same_v<T, long long>) {
                return std::to_string(v);
            } else if constexpr (std::is_same_v<T, bool>) {
                return v ? "1" : "0";
            } else {
                return csv_escape(v);
            }
        },
        c);
}

json to_json_cell(const Cell& c) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, std::monostate>) {
                return nullptr;
            } else if constexpr (std::is_same_v<T, double>) {
                // JSON has no non-finite numbers
                return std::isfinite(v) ? json(v) : json(format_double(v));
            } else {
                return v;
            }
        },
        c);
}

}  // namespace

std::string to_csv(const Report& r) {
    std::string out = fmt::format("# command: {}\n", r.command);
    out += fmt::format("# config: {}\n", r.config.dump());
    for (const auto& [k, v] : r.metadata) {
        out += fmt::format("# {}: {}\n", k, v);
    }
    for (std::size_t i = 0; i < r.table.columns.size(); ++i) {
        out += (i ? "," : "") + r.table.columns[i];
    }
    out += '\n';
    for (const auto& row : r.table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += (i ? "," : "") + render(row[i]);
        }
        out += '\n';
    }
    return out;
}

json to_json(const Report& r) {
    json meta = json::array();
    for (const auto& [k, v] : r.metadata) {
        meta.push_back({{"key", k}, {"value", v}});
    }
    json rows = json::array();
    for (const auto& row : r.table.rows) {
        json o = json::object();
        for (std::size_t i = 0; i < row.size(); ++i) {
            o[r.table.columns[i]] = to_json_cell(row[i]);
        }
        rows.push_back(std::move(o));
    }
    json j = {{"command", r.command},
              {"config", r.config},
              {"metadata", meta},
              {"columns", r.table.columns},
              {"rows", rows}};
    if (r.extra.is_object()) {
        for (const auto& [k, v] : r.extra.items()) {
            j[k] = v;
        }
    }
    return j;
}

}  // namespace qhe
