#pragma once

#include "json.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace xbarsim::cli {

using Cell = std::variant<double, std::int64_t, std::string>;

struct Report {
    std::string command;
    nlohmann::ordered_json config;
    std::vector<std::pair<std::string, Cell>> scalars;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> warnings;

    void scalar(std::string name, Cell value) { scalars.emplace_back(std::move(name), std::move(value)); }
};

// 17 significant digits, so every value parses back to the same double.
std::string format_number(double v);

// CSV: comment preamble (command, compact config, scalars, warnings), then a
// header and data rows. A report without a table prints its scalars as a
// quantity,value table instead.
void write_csv(const Report& r, std::ostream& out);
void write_json(const Report& r, std::ostream& out);

}  // namespace xbarsim::cli
