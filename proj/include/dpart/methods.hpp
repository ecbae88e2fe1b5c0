#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "dpart/data.hpp"
#include "dpart/mechanisms.hpp"
#include "dpart/rng.hpp"
#include "json.hpp"

namespace dpart {

enum class MethodKind {
  HistogramSampler,
  ConditionalDistribution,
  LinearRegression,
  LogisticRegression,
};

const char* to_string(MethodKind kind);
MethodKind method_kind_from_string(const std::string& s);

// Tab-of-methods support rule: regressions are family-specific, the
// distribution samplers accept both families.
bool method_supports(MethodKind kind, ColumnType target_type);

// Values in generation space: numerical columns carry doubles, categorical
// columns carry category indices.
using GenValue = std::variant<double, std::int32_t>;

struct MethodConfig {
  int n_bins = kDefaultBins;
  std::size_t max_joint_cells = 10'000'000;
  double ridge_lambda = 1e-12;     // escalated when the Gram matrix is singular
  double logistic_lambda = 0.01;
  int logistic_max_iters = 2000;
  double logistic_tol = 1e-7;
  std::optional<double> max_residual_std;  // optional upper clip, raw units off
};

// A trained per-column conditional sampler; immutable after fit.
class FittedMethod {
 public:
  virtual ~FittedMethod() = default;

  virtual MethodKind kind() const = 0;
  virtual const std::vector<std::string>& parent_names() const = 0;
  virtual const std::string& target_name() const = 0;

  // One draw conditioned on the parent values (in parent_names order).
  virtual GenValue sample(std::span<const GenValue> parents, Rng& rng) const = 0;

  virtual nlohmann::json to_json() const = 0;
};

std::unique_ptr<FittedMethod> fit_method(MethodKind kind, const Table& table,
                                         const Bounds& bounds,
                                         const std::vector<std::string>& parent_names,
                                         const std::string& target,
                                         std::optional<double> epsilon,
                                         const MethodConfig& config, Rng& rng);

std::unique_ptr<FittedMethod> method_from_json(const nlohmann::json& doc,
                                               const Schema& schema,
                                               const Bounds& bounds,
                                               const MethodConfig& config);

// Fit-time view of a column in generation space (labels become indices).
std::vector<GenValue> column_to_gen_values(const Table& table, const Bounds& bounds,
                                           std::size_t column);

}  // namespace dpart
