#pragma once

#include <string>

#include "dpart/data.hpp"

namespace dpart {

// UTF-8, comma separated, mandatory header matching the schema names in
// order. Missing values are a hard error; parse errors name the data row
// (1-based) and column.
Table load_csv(const std::string& path, const Schema& schema);
Table parse_csv(const std::string& content, const Schema& schema);

// Numerics unquoted; categoricals quoted per RFC 4180 when they contain a
// separator, quote, or newline. Written atomically.
void write_csv(const Table& table, const std::string& path);
std::string format_csv(const Table& table);

// Shortest representation that round-trips the double exactly.
std::string format_double(double v);

}  // namespace dpart
