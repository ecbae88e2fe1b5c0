#include "dpart/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>

#include "dpart/io.hpp"

namespace dpart {

namespace {

// One record per call; handles RFC 4180 quoting including embedded newlines.
// Returns false at end of input.
bool next_record(const std::string& s, std::size_t& pos, std::vector<std::string>& fields) {
  fields.clear();
  if (pos >= s.size()) return false;
  std::string field;
  bool in_quotes = false;
  bool saw_any = false;
  while (pos < s.size()) {
    char c = s[pos];
    if (in_quotes) {
      if (c == '"') {
        if (pos + 1 < s.size() && s[pos + 1] == '"') {
          field.push_back('"');
          pos += 2;
        } else {
          in_quotes = false;
          ++pos;
        }
      } else {
        field.push_back(c);
        ++pos;
      }
      saw_any = true;
      continue;
    }
    if (c == '"') {
      in_quotes = true;
      saw_any = true;
      ++pos;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
      saw_any = true;
      ++pos;
    } else if (c == '\r') {
      ++pos;
    } else if (c == '\n') {
      ++pos;
      break;
    } else {
      field.push_back(c);
      saw_any = true;
      ++pos;
    }
  }
  if (in_quotes) throw_parse("unterminated quoted field in CSV");
  if (!saw_any && fields.empty()) return false;  // trailing newline
  fields.push_back(std::move(field));
  return true;
}

double parse_numeric(const std::string& raw, ColumnType type, std::size_t row,
                     const std::string& col) {
  auto fail = [&]() -> double {
    throw_parse("cannot parse value '" + raw + "' in row " + std::to_string(row) +
                ", column '" + col + "' as " + to_string(type));
  };
  switch (type) {
    case ColumnType::Float: {
      double v = 0.0;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || p != raw.data() + raw.size()) return fail();
      return v;
    }
    case ColumnType::Integer:
    case ColumnType::Timedelta: {
      std::int64_t v = 0;
      auto [p, ec] = std::from_chars(raw.data(), raw.data() + raw.size(), v);
      if (ec != std::errc() || p != raw.data() + raw.size()) return fail();
      return static_cast<double>(v);
    }
    case ColumnType::Datetime: {
      try {
        return static_cast<double>(parse_datetime(raw));
      } catch (const Error&) {
        return fail();
      }
    }
    default:
      return fail();
  }
}

std::string parse_boolean(const std::string& raw, std::size_t row, const std::string& col) {
  if (raw == "true" || raw == "True" || raw == "TRUE" || raw == "1") return "true";
  if (raw == "false" || raw == "False" || raw == "FALSE" || raw == "0") return "false";
  throw_parse("cannot parse value '" + raw + "' in row " + std::to_string(row) +
              ", column '" + col + "' as boolean");
}

std::string quote_rfc4180(const std::string& s) {
  bool needs = s.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out.push_back('"');
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

Table parse_csv(const std::string& content, const Schema& schema) {
  schema.validate();
  std::size_t pos = 0;
  std::vector<std::string> fields;
  if (!next_record(content, pos, fields)) throw_parse("CSV is empty (no header)");
  if (fields.size() != schema.size()) {
    throw_parse("CSV header has " + std::to_string(fields.size()) +
                " columns, schema expects " + std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (fields[i] != schema.columns[i].name) {
      throw_parse("CSV header column " + std::to_string(i + 1) + " is '" + fields[i] +
                  "', schema expects '" + schema.columns[i].name + "'");
    }
  }

  Table table;
  table.schema = schema;
  table.columns.reserve(schema.size());
  for (const auto& c : schema.columns) {
    if (is_numerical(c.type)) table.columns.emplace_back(NumericalColumn{});
    else table.columns.emplace_back(CategoricalColumn{});
  }

  std::size_t row = 0;
  while (next_record(content, pos, fields)) {
    ++row;
    if (fields.size() != schema.size()) {
      throw_parse("row " + std::to_string(row) + " has " + std::to_string(fields.size()) +
                  " fields, expected " + std::to_string(schema.size()));
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
      const auto& col = schema.columns[i];
      const std::string& raw = fields[i];
      if (raw.empty()) {
        throw_parse("missing value in row " + std::to_string(row) + ", column '" +
                    col.name + "'");
      }
      switch (col.type) {
        case ColumnType::Category:
          std::get<CategoricalColumn>(table.columns[i]).push_back(raw);
          break;
        case ColumnType::Boolean:
          std::get<CategoricalColumn>(table.columns[i])
              .push_back(parse_boolean(raw, row, col.name));
          break;
        default:
          std::get<NumericalColumn>(table.columns[i])
              .push_back(parse_numeric(raw, col.type, row, col.name));
      }
    }
  }
  if (row == 0) throw_parse("empty table: CSV has a header but no data rows");
  return table;
}

Table load_csv(const std::string& path, const Schema& schema) {
  return parse_csv(read_text_file(path), schema);
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.schema.size(); ++i) {
    if (i) out.push_back(',');
    out += quote_rfc4180(table.schema.columns[i].name);
  }
  out.push_back('\n');

  std::size_t rows = table.row_count();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t i = 0; i < table.schema.size(); ++i) {
      if (i) out.push_back(',');
      const auto& col = table.schema.columns[i];
      switch (col.type) {
        case ColumnType::Float:
          out += format_double(table.numerical(i)[r]);
          break;
        case ColumnType::Integer:
        case ColumnType::Timedelta: {
          char buf[32];
          std::snprintf(buf, sizeof(buf), "%lld",
                        static_cast<long long>(std::llround(table.numerical(i)[r])));
          out += buf;
          break;
        }
        case ColumnType::Datetime:
          out += format_datetime(
              static_cast<std::int64_t>(std::llround(table.numerical(i)[r])));
          break;
        default:
          out += quote_rfc4180(table.categorical(i)[r]);
      }
    }
    out.push_back('\n');
  }
  return out;
}

void write_csv(const Table& table, const std::string& path) {
  atomic_write_text_file(path, format_csv(table));
}

}  // namespace dpart
