#include "dpart/instances.hpp"

#include "dpart/error.hpp"

namespace dpart {

ModelSpec independent_spec(std::optional<double> epsilon, std::optional<Bounds> bounds) {
  ModelSpec spec;
  spec.epsilon = epsilon;
  spec.bounds = std::move(bounds);
  spec.independent = true;
  spec.default_method = MethodKind::HistogramSampler;
  return spec;
}

ModelSpec privbayes_spec(std::optional<double> epsilon, std::optional<Bounds> bounds,
                         int n_parents) {
  ModelSpec spec;
  spec.epsilon = epsilon;
  spec.bounds = std::move(bounds);
  spec.infer = ModelSpec::InferMode::Network;
  spec.n_parents = n_parents;
  spec.default_method = MethodKind::ConditionalDistribution;
  return spec;
}

ModelSpec dpsynthpop_spec(std::optional<double> epsilon, std::optional<Bounds> bounds,
                          const Schema& schema) {
  ModelSpec spec;
  spec.epsilon = epsilon;
  spec.bounds = std::move(bounds);
  spec.infer = ModelSpec::InferMode::Chain;
  for (const auto& col : schema.columns) {
    spec.methods[col.name] = is_numerical(col.type) ? MethodKind::LinearRegression
                                                    : MethodKind::LogisticRegression;
  }
  spec.first_column_method = MethodKind::HistogramSampler;
  return spec;
}

ModelSpec spec_for_engine(const std::string& engine, std::optional<double> epsilon,
                          std::optional<Bounds> bounds, const Schema& schema,
                          int n_parents) {
  if (engine == "independent") return independent_spec(epsilon, std::move(bounds));
  if (engine == "privbayes") return privbayes_spec(epsilon, std::move(bounds), n_parents);
  if (engine == "dp-synthpop") return dpsynthpop_spec(epsilon, std::move(bounds), schema);
  throw_invalid("unknown engine '" + engine +
                "' (valid engines: independent, privbayes, dp-synthpop)");
}

namespace {

void apply_methods(ModelSpec& spec, const nlohmann::json& methods) {
  if (!methods.is_object()) throw_parse("\"methods\" must map columns to method names");
  for (const auto& [col, kind] : methods.items()) {
    spec.methods[col] = method_kind_from_string(kind.get<std::string>());
  }
}

void apply_dependency(ModelSpec& spec, const nlohmann::json& dep) {
  if (!dep.is_object()) {
    throw_parse("\"dependency\" must be an object naming one dependency input");
  }
  spec.visit_order.reset();
  spec.prediction_matrix.reset();
  spec.infer = ModelSpec::InferMode::None;
  spec.independent = false;
  for (const auto& [key, value] : dep.items()) {
    if (key == "visit_order") {
      spec.visit_order = value.get<std::vector<std::string>>();
    } else if (key == "prediction_matrix") {
      PredictionMatrix matrix;
      for (const auto& [col, pars] : value.items()) {
        matrix[col] = pars.get<std::vector<std::string>>();
      }
      spec.prediction_matrix = std::move(matrix);
    } else if (key == "infer") {
      spec.infer = ModelSpec::InferMode::Network;
      if (value.is_object() && value.contains("n_parents")) {
        spec.n_parents = value["n_parents"].get<int>();
      }
    } else if (key == "infer_chain") {
      spec.infer = ModelSpec::InferMode::Chain;
    } else if (key == "independent") {
      spec.independent = value.is_boolean() ? value.get<bool>() : true;
    } else {
      throw_parse("unknown dependency input '" + key + "'");
    }
  }
}

}  // namespace

ModelSpec model_spec_from_json(const nlohmann::json& config, const Schema& schema) {
  if (!config.is_object()) throw_parse("model spec config must be a JSON object");

  std::optional<double> epsilon;
  if (config.contains("epsilon") && !config["epsilon"].is_null()) {
    epsilon = config["epsilon"].get<double>();
  }
  std::optional<Bounds> bounds;
  if (config.contains("bounds") && !config["bounds"].is_null()) {
    bounds = bounds_from_json(config["bounds"], schema);
  }
  int n_parents = 2;
  if (config.contains("n_parents")) n_parents = config["n_parents"].get<int>();

  ModelSpec spec;
  if (config.contains("engine")) {
    spec = spec_for_engine(config["engine"].get<std::string>(), epsilon, bounds,
                           schema, n_parents);
  } else {
    spec.epsilon = epsilon;
    spec.bounds = std::move(bounds);
    spec.n_parents = n_parents;
  }

  if (config.contains("budget_split") && !config["budget_split"].is_null()) {
    spec.budget_split = budget_split_from_json(config["budget_split"]);
  }
  if (config.contains("dependency")) apply_dependency(spec, config["dependency"]);
  if (config.contains("methods")) apply_methods(spec, config["methods"]);
  if (config.contains("n_bins")) spec.method_config.n_bins = config["n_bins"].get<int>();
  if (config.contains("max_residual_std")) {
    spec.method_config.max_residual_std = config["max_residual_std"].get<double>();
  }
  return spec;
}

}  // namespace dpart
