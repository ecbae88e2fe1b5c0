#pragma once

#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "dpart/data.hpp"
#include "dpart/rng.hpp"

namespace testutil {

// Random mixed-type schema with deterministic names c0, c1, ...
inline dpart::Schema random_schema(dpart::Rng& rng, std::size_t n_cols) {
  using dpart::ColumnType;
  static const ColumnType kTypes[] = {ColumnType::Float,    ColumnType::Integer,
                                      ColumnType::Category, ColumnType::Boolean};
  dpart::Schema schema;
  for (std::size_t i = 0; i < n_cols; ++i) {
    schema.columns.push_back(
        {"c" + std::to_string(i), kTypes[rng.uniform_index(4)]});
  }
  return schema;
}

inline dpart::Table random_table(const dpart::Schema& schema, std::size_t rows,
                                 dpart::Rng& rng) {
  dpart::Table table;
  table.schema = schema;
  for (const auto& col : schema.columns) {
    switch (col.type) {
      case dpart::ColumnType::Float: {
        dpart::NumericalColumn c;
        for (std::size_t r = 0; r < rows; ++r) c.push_back(rng.uniform(-10.0, 10.0));
        table.columns.emplace_back(std::move(c));
        break;
      }
      case dpart::ColumnType::Integer:
      case dpart::ColumnType::Datetime:
      case dpart::ColumnType::Timedelta: {
        dpart::NumericalColumn c;
        for (std::size_t r = 0; r < rows; ++r) {
          c.push_back(static_cast<double>(rng.uniform_index(100)) - 20.0);
        }
        table.columns.emplace_back(std::move(c));
        break;
      }
      case dpart::ColumnType::Category: {
        dpart::CategoricalColumn c;
        static const char* kLabels[] = {"red", "green", "blue", "gold"};
        std::size_t alphabet = 2 + rng.uniform_index(3);
        for (std::size_t r = 0; r < rows; ++r) {
          c.push_back(kLabels[rng.uniform_index(alphabet)]);
        }
        table.columns.emplace_back(std::move(c));
        break;
      }
      case dpart::ColumnType::Boolean: {
        dpart::CategoricalColumn c;
        for (std::size_t r = 0; r < rows; ++r) {
          c.push_back(rng.uniform01() < 0.5 ? "false" : "true");
        }
        table.columns.emplace_back(std::move(c));
        break;
      }
    }
  }
  return table;
}

inline bool tables_equal(const dpart::Table& a, const dpart::Table& b) {
  if (!(a.schema == b.schema) || a.row_count() != b.row_count()) return false;
  for (std::size_t i = 0; i < a.schema.size(); ++i) {
    if (dpart::is_numerical(a.schema.columns[i].type)) {
      const auto& ca = a.numerical(i);
      const auto& cb = b.numerical(i);
      for (std::size_t r = 0; r < ca.size(); ++r) {
        if (ca[r] != cb[r]) return false;
      }
    } else {
      if (a.categorical(i) != b.categorical(i)) return false;
    }
  }
  return true;
}

// Independent plugin mutual information oracle (bits): direct sum over the
// empirical joint built with ordinary maps, no shared code with the library.
inline double oracle_mi(const std::vector<std::int32_t>& target,
                        const std::vector<std::vector<std::int32_t>>& parents) {
  if (parents.empty()) return 0.0;
  const std::size_t n = target.size();
  std::map<std::vector<std::int32_t>, double> joint, parent_marginal;
  std::map<std::int32_t, double> target_marginal;
  for (std::size_t r = 0; r < n; ++r) {
    std::vector<std::int32_t> key;
    for (const auto& p : parents) key.push_back(p[r]);
    parent_marginal[key] += 1.0;
    key.push_back(target[r]);
    joint[key] += 1.0;
    target_marginal[target[r]] += 1.0;
  }
  double mi = 0.0;
  for (const auto& [key, count] : joint) {
    std::vector<std::int32_t> pkey(key.begin(), key.end() - 1);
    double pxy = count / static_cast<double>(n);
    double px = target_marginal[key.back()] / static_cast<double>(n);
    double ppi = parent_marginal[pkey] / static_cast<double>(n);
    mi += pxy * std::log2(pxy / (px * ppi));
  }
  return mi;
}

// Entropy oracle in bits over one discretized column's ids.
inline double oracle_entropy(const std::vector<std::int32_t>& ids) {
  std::map<std::int32_t, double> counts;
  for (auto v : ids) counts[v] += 1.0;
  double h = 0.0;
  for (const auto& [_, c] : counts) {
    double p = c / static_cast<double>(ids.size());
    h -= p * std::log2(p);
  }
  return h;
}

}  // namespace testutil
