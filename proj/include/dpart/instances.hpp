#pragma once

#include <optional>
#include <string>

#include "dpart/engine.hpp"

namespace dpart {

// The three preset engines. Presets are plain ModelSpec values: the engine
// stays single-pathed and anything a preset sets can be overridden.

// Every column modelled independently with a DP histogram sampler; the
// dependency step consumes no budget.
ModelSpec independent_spec(std::optional<double> epsilon, std::optional<Bounds> bounds);

// Greedy network inference with capped parent sets and conditional
// distributions for every column.
ModelSpec privbayes_spec(std::optional<double> epsilon, std::optional<Bounds> bounds,
                         int n_parents = 2);

// Chain inference with DP linear regression for numerical columns and DP
// logistic regression for categorical ones; the first visited column falls
// back to a histogram sampler.
ModelSpec dpsynthpop_spec(std::optional<double> epsilon, std::optional<Bounds> bounds,
                          const Schema& schema);

// CLI-facing engine names: independent | privbayes | dp-synthpop.
ModelSpec spec_for_engine(const std::string& engine, std::optional<double> epsilon,
                          std::optional<Bounds> bounds, const Schema& schema,
                          int n_parents = 2);

// Builds a ModelSpec from a JSON config, optionally starting from an
// "engine" preset and applying overrides (epsilon, bounds, budget_split,
// dependency, methods, n_bins, n_parents).
ModelSpec model_spec_from_json(const nlohmann::json& config, const Schema& schema);

}  // namespace dpart
