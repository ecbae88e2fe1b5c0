#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dpart/error.hpp"
#include "dpart/rng.hpp"
#include "json.hpp"

namespace dpart {

inline constexpr int kDefaultBins = 20;

enum class ColumnType { Float, Integer, Datetime, Timedelta, Category, Boolean };

// float/integer/datetime/timedelta are numerical; category/boolean categorical.
bool is_numerical(ColumnType t);
inline bool is_categorical(ColumnType t) { return !is_numerical(t); }
// integer/datetime/timedelta hold integral values internally.
bool is_integral(ColumnType t);

const char* to_string(ColumnType t);
ColumnType column_type_from_string(const std::string& s);

struct Schema {
  struct Col {
    std::string name;
    ColumnType type;
  };

  std::vector<Col> columns;

  std::size_t size() const { return columns.size(); }
  // Index of a column, -1 when absent.
  int index_of(const std::string& name) const;
  int require(const std::string& name) const;  // throws on unknown column
  void validate() const;                       // unique, non-empty names

  bool operator==(const Schema& other) const;
};

struct NumericalBounds {
  double min = 0.0;
  double max = 0.0;
  // Set when a constant column was widened to (v - 0.5, v + 0.5).
  bool degenerate = false;
};

struct CategoricalBounds {
  std::vector<std::string> categories;  // order defines the category index

  int index_of(const std::string& label) const;
};

using ColumnBounds = std::variant<NumericalBounds, CategoricalBounds>;

struct Bounds {
  std::vector<ColumnBounds> columns;  // aligned with the schema

  const NumericalBounds& numerical(std::size_t i) const;
  const CategoricalBounds& categorical(std::size_t i) const;
};

using NumericalColumn = std::vector<double>;
using CategoricalColumn = std::vector<std::string>;
using ColumnData = std::variant<NumericalColumn, CategoricalColumn>;

// Immutable after construction; no missing values by contract of load_csv.
struct Table {
  Schema schema;
  std::vector<ColumnData> columns;

  std::size_t row_count() const;
  const NumericalColumn& numerical(std::size_t i) const;
  const CategoricalColumn& categorical(std::size_t i) const;
};

// Observed min/max per numerical column (constant columns widened by +-0.5
// and flagged), sorted distinct labels per categorical column. The caller is
// responsible for the privacy-leak warning when epsilon is in play.
Bounds infer_bounds(const Table& table);

void validate_bounds(const Schema& schema, const Bounds& bounds);
// Every value within bounds / member of its category list; errors name the column.
void validate_table_within_bounds(const Table& table, const Bounds& bounds);

struct DiscretizedColumn {
  std::vector<std::int32_t> bin_ids;     // each in [0, n_bins)
  std::int32_t n_bins = 0;
  std::vector<double> edges;             // numerical: n_bins + 1 ascending
  std::vector<std::string> categories;   // categorical passthrough
  bool categorical = false;
};

// Uniform binning over the declared bounds. Values equal to max land in the
// top bin; anything outside bounds is an error naming the column.
DiscretizedColumn discretize(const ColumnData& column, ColumnType type,
                             const ColumnBounds& bounds, int n_bins,
                             const std::string& column_name);

// Equally spaced edges for a numerical bound, reused by samplers.
std::vector<double> uniform_edges(const NumericalBounds& b, int n_bins);

// Uniform draw inside the bin, converted to the declared type (integral
// types round down).
double undiscretize_numerical(std::int32_t bin, const std::vector<double>& edges,
                              ColumnType type, Rng& rng);

// Round/clip a raw numerical value into the declared type and bounds.
double to_declared_numeric(double v, ColumnType type, const NumericalBounds& b);

// Datetime helpers: internal representation is seconds since the Unix epoch.
std::int64_t parse_datetime(const std::string& text);
std::string format_datetime(std::int64_t epoch_seconds);

// Schema/bounds JSON document: {"columns":[{"name","type","min","max","categories"}]}.
Schema schema_from_json(const nlohmann::json& doc);
Bounds bounds_from_json(const nlohmann::json& doc, const Schema& schema);
nlohmann::json schema_to_json(const Schema& schema);
nlohmann::json schema_bounds_to_json(const Schema& schema, const Bounds& bounds);

Schema read_schema_file(const std::string& path);
Bounds read_bounds_file(const std::string& path, const Schema& schema);

}  // namespace dpart
