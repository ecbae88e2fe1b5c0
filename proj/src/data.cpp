#include "dpart/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <set>

namespace dpart {

bool is_numerical(ColumnType t) {
  switch (t) {
    case ColumnType::Float:
    case ColumnType::Integer:
    case ColumnType::Datetime:
    case ColumnType::Timedelta:
      return true;
    case ColumnType::Category:
    case ColumnType::Boolean:
      return false;
  }
  return false;
}

bool is_integral(ColumnType t) {
  return t == ColumnType::Integer || t == ColumnType::Datetime ||
         t == ColumnType::Timedelta;
}

const char* to_string(ColumnType t) {
  switch (t) {
    case ColumnType::Float: return "float";
    case ColumnType::Integer: return "integer";
    case ColumnType::Datetime: return "datetime";
    case ColumnType::Timedelta: return "timedelta";
    case ColumnType::Category: return "category";
    case ColumnType::Boolean: return "boolean";
  }
  return "?";
}

ColumnType column_type_from_string(const std::string& s) {
  if (s == "float") return ColumnType::Float;
  if (s == "integer" || s == "int") return ColumnType::Integer;
  if (s == "datetime") return ColumnType::Datetime;
  if (s == "timedelta") return ColumnType::Timedelta;
  if (s == "category") return ColumnType::Category;
  if (s == "boolean" || s == "bool") return ColumnType::Boolean;
  throw_invalid("unknown column type '" + s + "'");
}

int Schema::index_of(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

int Schema::require(const std::string& name) const {
  int i = index_of(name);
  if (i < 0) throw_invalid("unknown column '" + name + "'");
  return i;
}

void Schema::validate() const {
  if (columns.empty()) throw_invalid("schema has no columns");
  std::set<std::string> seen;
  for (const auto& c : columns) {
    if (c.name.empty()) throw_invalid("schema contains an empty column name");
    if (!seen.insert(c.name).second) {
      throw_invalid("duplicate column name '" + c.name + "'");
    }
  }
}

bool Schema::operator==(const Schema& other) const {
  if (columns.size() != other.columns.size()) return false;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i].name != other.columns[i].name ||
        columns[i].type != other.columns[i].type) {
      return false;
    }
  }
  return true;
}

int CategoricalBounds::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < categories.size(); ++i) {
    if (categories[i] == label) return static_cast<int>(i);
  }
  return -1;
}

const NumericalBounds& Bounds::numerical(std::size_t i) const {
  const auto* b = std::get_if<NumericalBounds>(&columns.at(i));
  if (!b) throw Error(ErrorCode::Internal, "bounds/type mismatch (numerical)");
  return *b;
}

const CategoricalBounds& Bounds::categorical(std::size_t i) const {
  const auto* b = std::get_if<CategoricalBounds>(&columns.at(i));
  if (!b) throw Error(ErrorCode::Internal, "bounds/type mismatch (categorical)");
  return *b;
}

std::size_t Table::row_count() const {
  if (columns.empty()) return 0;
  return std::visit([](const auto& col) { return col.size(); }, columns.front());
}

const NumericalColumn& Table::numerical(std::size_t i) const {
  const auto* c = std::get_if<NumericalColumn>(&columns.at(i));
  if (!c) throw Error(ErrorCode::Internal, "column/type mismatch (numerical)");
  return *c;
}

const CategoricalColumn& Table::categorical(std::size_t i) const {
  const auto* c = std::get_if<CategoricalColumn>(&columns.at(i));
  if (!c) throw Error(ErrorCode::Internal, "column/type mismatch (categorical)");
  return *c;
}

Bounds infer_bounds(const Table& table) {
  if (table.row_count() == 0) throw_invalid("cannot infer bounds of an empty table");
  Bounds bounds;
  bounds.columns.reserve(table.schema.size());
  for (std::size_t i = 0; i < table.schema.size(); ++i) {
    if (is_numerical(table.schema.columns[i].type)) {
      const auto& col = table.numerical(i);
      auto [lo, hi] = std::minmax_element(col.begin(), col.end());
      NumericalBounds nb{*lo, *hi, false};
      if (nb.min == nb.max) {
        nb = NumericalBounds{nb.min - 0.5, nb.max + 0.5, true};
      }
      bounds.columns.emplace_back(nb);
    } else {
      const auto& col = table.categorical(i);
      std::set<std::string> distinct(col.begin(), col.end());
      CategoricalBounds cb;
      cb.categories.assign(distinct.begin(), distinct.end());
      bounds.columns.emplace_back(std::move(cb));
    }
  }
  return bounds;
}

void validate_bounds(const Schema& schema, const Bounds& bounds) {
  if (bounds.columns.size() != schema.size()) {
    throw_invalid("bounds cover " + std::to_string(bounds.columns.size()) +
                  " columns, schema has " + std::to_string(schema.size()));
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    const auto& name = schema.columns[i].name;
    if (is_numerical(schema.columns[i].type)) {
      const auto* nb = std::get_if<NumericalBounds>(&bounds.columns[i]);
      if (!nb) throw_invalid("column '" + name + "' needs numerical bounds");
      if (!(nb->min < nb->max) || !std::isfinite(nb->min) || !std::isfinite(nb->max)) {
        throw_invalid("column '" + name + "' bounds must satisfy min < max");
      }
    } else {
      const auto* cb = std::get_if<CategoricalBounds>(&bounds.columns[i]);
      if (!cb) throw_invalid("column '" + name + "' needs a category list");
      if (cb->categories.empty()) {
        throw_invalid("column '" + name + "' has an empty category list");
      }
      std::set<std::string> seen(cb->categories.begin(), cb->categories.end());
      if (seen.size() != cb->categories.size()) {
        throw_invalid("column '" + name + "' has duplicate categories");
      }
    }
  }
}

void validate_table_within_bounds(const Table& table, const Bounds& bounds) {
  for (std::size_t i = 0; i < table.schema.size(); ++i) {
    const auto& name = table.schema.columns[i].name;
    if (is_numerical(table.schema.columns[i].type)) {
      const auto& nb = bounds.numerical(i);
      for (double v : table.numerical(i)) {
        if (v < nb.min || v > nb.max) {
          throw_invalid("value in column '" + name + "' is outside bounds");
        }
      }
    } else {
      const auto& cb = bounds.categorical(i);
      for (const auto& v : table.categorical(i)) {
        if (cb.index_of(v) < 0) {
          throw_invalid("value '" + v + "' in column '" + name +
                        "' is not in the category list");
        }
      }
    }
  }
}

std::vector<double> uniform_edges(const NumericalBounds& b, int n_bins) {
  std::vector<double> edges(static_cast<std::size_t>(n_bins) + 1);
  double width = (b.max - b.min) / n_bins;
  for (int i = 0; i <= n_bins; ++i) edges[static_cast<std::size_t>(i)] = b.min + width * i;
  edges.front() = b.min;
  edges.back() = b.max;
  return edges;
}

DiscretizedColumn discretize(const ColumnData& column, ColumnType type,
                             const ColumnBounds& bounds, int n_bins,
                             const std::string& column_name) {
  DiscretizedColumn out;
  if (is_categorical(type)) {
    const auto& col = std::get<CategoricalColumn>(column);
    const auto& cb = std::get<CategoricalBounds>(bounds);
    out.categorical = true;
    out.n_bins = static_cast<std::int32_t>(cb.categories.size());
    out.categories = cb.categories;
    out.bin_ids.reserve(col.size());
    for (const auto& v : col) {
      int idx = cb.index_of(v);
      if (idx < 0) {
        throw_invalid("value '" + v + "' in column '" + column_name +
                      "' is not in the category list");
      }
      out.bin_ids.push_back(idx);
    }
    return out;
  }

  if (n_bins < 1) throw_invalid("n_bins must be positive");
  const auto& col = std::get<NumericalColumn>(column);
  const auto& nb = std::get<NumericalBounds>(bounds);
  out.n_bins = n_bins;
  out.edges = uniform_edges(nb, n_bins);
  double width = (nb.max - nb.min) / n_bins;
  out.bin_ids.reserve(col.size());
  for (double v : col) {
    if (v < nb.min || v > nb.max) {
      throw_invalid("value in column '" + column_name + "' is outside bounds");
    }
    auto bin = static_cast<std::int32_t>(std::floor((v - nb.min) / width));
    bin = std::clamp(bin, 0, n_bins - 1);
    out.bin_ids.push_back(bin);
  }
  return out;
}

double to_declared_numeric(double v, ColumnType type, const NumericalBounds& b) {
  v = std::clamp(v, b.min, b.max);
  if (!is_integral(type)) return v;
  double lo = std::ceil(b.min);
  double hi = std::floor(b.max);
  if (lo > hi) return std::round(v);  // bounds contain no integer; degenerate input
  return std::clamp(std::floor(v), lo, hi);
}

double undiscretize_numerical(std::int32_t bin, const std::vector<double>& edges,
                              ColumnType type, Rng& rng) {
  if (bin < 0 || static_cast<std::size_t>(bin) + 1 >= edges.size()) {
    throw_invalid("bin id out of range");
  }
  double v = rng.uniform(edges[static_cast<std::size_t>(bin)],
                         edges[static_cast<std::size_t>(bin) + 1]);
  NumericalBounds b{edges.front(), edges.back(), false};
  return to_declared_numeric(v, type, b);
}

// --- datetime ------------------------------------------------------------

namespace {

bool parse_fixed_int(const std::string& s, std::size_t off, std::size_t len, int& out) {
  if (off + len > s.size()) return false;
  int value = 0;
  for (std::size_t i = 0; i < len; ++i) {
    char ch = s[off + i];
    if (ch < '0' || ch > '9') return false;
    value = value * 10 + (ch - '0');
  }
  out = value;
  return true;
}

// Days since 1970-01-01 for a civil date (proleptic Gregorian).
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const int era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                       static_cast<unsigned>(d) - 1u;
  const unsigned doe = yoe * 365u + yoe / 4u - yoe / 100u + doy;
  return static_cast<std::int64_t>(era) * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp < 10 ? mp + 3 : mp - 9);
  y = static_cast<int>(yy + (m <= 2));
}

}  // namespace

std::int64_t parse_datetime(const std::string& text) {
  std::string s = text;
  if (!s.empty() && s.back() == 'Z') s.pop_back();
  int year = 0, month = 0, day = 0, hour = 0, minute = 0, second = 0;
  bool ok = s.size() >= 10 && s[4] == '-' && s[7] == '-' &&
            parse_fixed_int(s, 0, 4, year) && parse_fixed_int(s, 5, 2, month) &&
            parse_fixed_int(s, 8, 2, day);
  if (ok && s.size() > 10) {
    ok = s.size() == 19 && (s[10] == 'T' || s[10] == ' ') && s[13] == ':' &&
         s[16] == ':' && parse_fixed_int(s, 11, 2, hour) &&
         parse_fixed_int(s, 14, 2, minute) && parse_fixed_int(s, 17, 2, second);
  }
  if (!ok || month < 1 || month > 12 || day < 1 || day > 31 || hour > 23 ||
      minute > 59 || second > 59) {
    throw_parse("invalid datetime '" + text + "' (expected ISO-8601)");
  }
  return days_from_civil(year, month, day) * 86400 + hour * 3600 + minute * 60 + second;
}

std::string format_datetime(std::int64_t epoch_seconds) {
  std::int64_t days = epoch_seconds / 86400;
  std::int64_t rem = epoch_seconds % 86400;
  if (rem < 0) {
    rem += 86400;
    days -= 1;
  }
  int y, m, d;
  civil_from_days(days, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld:%02lld", y, m, d,
                static_cast<long long>(rem / 3600),
                static_cast<long long>(rem / 60 % 60),
                static_cast<long long>(rem % 60));
  return buf;
}

// --- schema / bounds JSON -------------------------------------------------

namespace {

double bound_value_from_json(const nlohmann::json& v, ColumnType type,
                             const std::string& name) {
  if (type == ColumnType::Datetime) {
    if (!v.is_string()) {
      throw_parse("column '" + name + "': datetime bounds must be ISO-8601 strings");
    }
    return static_cast<double>(parse_datetime(v.get<std::string>()));
  }
  if (!v.is_number()) throw_parse("column '" + name + "': bound must be a number");
  return v.get<double>();
}

nlohmann::json bound_value_to_json(double v, ColumnType type) {
  if (type == ColumnType::Datetime) {
    return format_datetime(static_cast<std::int64_t>(std::llround(v)));
  }
  return v;
}

}  // namespace

Schema schema_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array()) {
    throw_parse("schema document must be {\"columns\": [...]}");
  }
  Schema schema;
  for (const auto& c : doc["columns"]) {
    if (!c.contains("name") || !c.contains("type")) {
      throw_parse("schema column entries need \"name\" and \"type\"");
    }
    schema.columns.push_back(
        {c["name"].get<std::string>(),
         column_type_from_string(c["type"].get<std::string>())});
  }
  schema.validate();
  return schema;
}

Bounds bounds_from_json(const nlohmann::json& doc, const Schema& schema) {
  if (!doc.is_object() || !doc.contains("columns") || !doc["columns"].is_array()) {
    throw_parse("bounds document must be {\"columns\": [...]}");
  }
  Bounds bounds;
  bounds.columns.resize(schema.size());
  std::vector<bool> seen(schema.size(), false);
  for (const auto& c : doc["columns"]) {
    std::string name = c.at("name").get<std::string>();
    int idx = schema.index_of(name);
    if (idx < 0) throw_invalid("bounds name unknown column '" + name + "'");
    ColumnType type = schema.columns[static_cast<std::size_t>(idx)].type;
    if (is_numerical(type)) {
      if (!c.contains("min") || !c.contains("max")) {
        throw_invalid("column '" + name + "' is missing min/max bounds");
      }
      NumericalBounds nb;
      nb.min = bound_value_from_json(c["min"], type, name);
      nb.max = bound_value_from_json(c["max"], type, name);
      bounds.columns[static_cast<std::size_t>(idx)] = nb;
    } else {
      if (!c.contains("categories") || !c["categories"].is_array()) {
        throw_invalid("column '" + name + "' is missing its category list");
      }
      CategoricalBounds cb;
      for (const auto& v : c["categories"]) cb.categories.push_back(v.get<std::string>());
      bounds.columns[static_cast<std::size_t>(idx)] = std::move(cb);
    }
    seen[static_cast<std::size_t>(idx)] = true;
  }
  for (std::size_t i = 0; i < schema.size(); ++i) {
    if (!seen[i]) {
      throw_invalid("bounds are missing column '" + schema.columns[i].name + "'");
    }
  }
  validate_bounds(schema, bounds);
  return bounds;
}

nlohmann::json schema_to_json(const Schema& schema) {
  nlohmann::json cols = nlohmann::json::array();
  for (const auto& c : schema.columns) {
    cols.push_back({{"name", c.name}, {"type", to_string(c.type)}});
  }
  return {{"columns", cols}};
}

nlohmann::json schema_bounds_to_json(const Schema& schema, const Bounds& bounds) {
  nlohmann::json cols = nlohmann::json::array();
  for (std::size_t i = 0; i < schema.size(); ++i) {
    nlohmann::json c = {{"name", schema.columns[i].name},
                        {"type", to_string(schema.columns[i].type)}};
    if (is_numerical(schema.columns[i].type)) {
      const auto& nb = bounds.numerical(i);
      c["min"] = bound_value_to_json(nb.min, schema.columns[i].type);
      c["max"] = bound_value_to_json(nb.max, schema.columns[i].type);
    } else {
      c["categories"] = bounds.categorical(i).categories;
    }
    cols.push_back(std::move(c));
  }
  return {{"columns", cols}};
}

}  // namespace dpart
