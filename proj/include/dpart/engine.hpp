#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "dpart/data.hpp"
#include "dpart/dependency.hpp"
#include "dpart/mechanisms.hpp"
#include "dpart/methods.hpp"

namespace dpart {

inline constexpr int kModelFormatVersion = 1;

// Everything fit() needs besides the data. Exactly one dependency input must
// be set; visit_order and prediction_matrix are mutually exclusive.
struct ModelSpec {
  std::optional<double> epsilon;
  std::optional<BudgetSplit> budget_split;
  std::optional<Bounds> bounds;

  std::optional<VisitOrder> visit_order;
  std::optional<PredictionMatrix> prediction_matrix;
  enum class InferMode { None, Network, Chain };
  InferMode infer = InferMode::None;
  bool independent = false;
  int n_parents = 2;

  std::map<std::string, MethodKind> methods;  // partial; default applies otherwise
  // Preset-pinned default for columns without an explicit entry. When unset,
  // unspecified columns fall back to the conditional distribution and emit a
  // UserWarning.
  std::optional<MethodKind> default_method;
  // Applied to the first visited column once the order is known (used by the
  // dp-synthpop preset, where a parentless regression would be ill-posed).
  std::optional<MethodKind> first_column_method;

  MethodConfig method_config;

  bool dependency_consumes_budget() const { return infer != InferMode::None; }
};

enum class WarningKind { PrivacyLeak, DefaultMethod };

struct Warning {
  WarningKind kind;
  std::string message;
  std::optional<std::string> column;
};

struct FittedModel {
  Schema schema;
  Bounds bounds;
  Dependency dependency;
  std::vector<std::unique_ptr<FittedMethod>> methods;  // in visit order
  BudgetLedger ledger;
  int n_bins = kDefaultBins;
  int format_version = kModelFormatVersion;

  const FittedMethod& method_for(const std::string& column) const;
};

struct FitResult {
  FittedModel model;
  std::vector<Warning> warnings;
};

// Resolve bounds (warning when inferred under a budget), allocate epsilon,
// resolve the dependency structure, then fit one sampler per column in visit
// order. Warnings are returned, never thrown.
FitResult fit(const Table& table, const ModelSpec& spec, Rng& rng);

// Materializes columns in visit order, each row conditioned on the
// already-generated parent columns; output is in schema order.
Table generate(const FittedModel& model, std::int64_t rows, Rng& rng);

// Versioned JSON with an embedded content checksum.
std::string save_model(const FittedModel& model);
FittedModel load_model(const std::string& bytes);
void save_model_file(const FittedModel& model, const std::string& path);
FittedModel load_model_file(const std::string& path);

}  // namespace dpart
