#include "report.hpp"

#include <cmath>
#include <cstdio>

namespace xbarsim::cli {

std::string format_number(double v) {
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') {
            out += '"';
        }
        out += ch;
    }
    return out + "\"";
}

std::string cell_text(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        return format_number(*d);
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) {
        return std::to_string(*i);
    }
    return csv_field(std::get<std::string>(c));
}

nlohmann::ordered_json cell_json(const Cell& c) {
    if (const auto* d = std::get_if<double>(&c)) {
        // JSON has no inf/nan; keep them readable as strings.
        if (!std::isfinite(*d)) {
            return format_number(*d);
        }
        return *d;
    }
    if (const auto* i = std::get_if<std::int64_t>(&c)) {
        return *i;
    }
    return std::get<std::string>(c);
}

}  // namespace

void write_csv(const Report& r, std::ostream& out) {
    out << "# xbarsim " << r.command << "\n";
    out << "# config: " << r.config.dump() << "\n";
    const bool table = !r.columns.empty();
    if (table) {
        for (const auto& [name, value] : r.scalars) {
            out << "# " << name << " = " << cell_text(value) << "\n";
        }
    }
    for (const auto& w : r.warnings) {
        out << "# warning: " << w << "\n";
    }
    if (table) {
        for (std::size_t k = 0; k < r.columns.size(); ++k) {
            out << (k ? "," : "") << csv_field(r.columns[k]);
        }
        out << "\n";
        for (const auto& row : r.rows) {
            for (std::size_t k = 0; k < row.size(); ++k) {
                out << (k ? "," : "") << cell_text(row[k]);
            }
            out << "\n";
        }
    } else {
        out << "quantity,value\n";
        for (const auto& [name, value] : r.scalars) {
            out << csv_field(name) << "," << cell_text(value) << "\n";
        }
    }
}

void write_json(const Report& r, std::ostream& out) {
    nlohmann::ordered_json j;
    j["command"] = r.command;
    j["config"] = r.config;
    nlohmann::ordered_json scalars = nlohmann::ordered_json::object();
    for (const auto& [name, value] : r.scalars) {
        scalars[name] = cell_json(value);
    }
    j["scalars"] = scalars;
    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& row : r.rows) {
        nlohmann::ordered_json jr = nlohmann::ordered_json::array();
        for (const auto& c : row) {
            jr.push_back(cell_json(c));
        }
        rows.push_back(jr);
    }
    j["table"] = {{"columns", r.columns}, {"rows", rows}};
    j["warnings"] = r.warnings;
    out << j.dump(2) << "\n";
}

}  // namespace xbarsim::cli
