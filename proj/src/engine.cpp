#include "dpart/engine.hpp"

#include <algorithm>
#include <cstdio>

#include "dpart/error.hpp"
#include "dpart/io.hpp"

namespace dpart {

const FittedMethod& FittedModel::method_for(const std::string& column) const {
  for (const auto& m : methods) {
    if (m->target_name() == column) return *m;
  }
  throw Error(ErrorCode::Internal, "no fitted method for column '" + column + "'");
}

namespace {

bool method_uses_parents(MethodKind kind) {
  return kind != MethodKind::HistogramSampler;
}

void validate_spec(const Table& table, const ModelSpec& spec) {
  table.schema.validate();
  if (table.row_count() == 0) throw_invalid("cannot fit on an empty table");

  if (spec.visit_order.has_value() && spec.prediction_matrix.has_value()) {
    throw_invalid("visit_order and prediction_matrix are mutually exclusive");
  }
  int inputs = 0;
  if (spec.visit_order.has_value()) ++inputs;
  if (spec.prediction_matrix.has_value()) ++inputs;
  if (spec.infer != ModelSpec::InferMode::None) ++inputs;
  if (spec.independent) ++inputs;
  if (inputs == 0) {
    throw_invalid("model spec needs a dependency input (visit_order, "
                  "prediction_matrix, infer, infer_chain, or independent)");
  }
  if (inputs > 1) throw_invalid("model spec has conflicting dependency inputs");
  if (spec.infer == ModelSpec::InferMode::Network && spec.n_parents < 1) {
    throw_invalid("n_parents must be at least 1");
  }

  for (const auto& [name, kind] : spec.methods) {
    int idx = table.schema.index_of(name);
    if (idx < 0) throw_invalid("methods map names unknown column '" + name + "'");
    ColumnType type = table.schema.columns[static_cast<std::size_t>(idx)].type;
    if (!method_supports(kind, type)) {
      throw_invalid(std::string("method ") + to_string(kind) + " does not support " +
                    to_string(type) + " column '" + name + "'");
    }
  }
}

// Explicit methods win; everything else falls back to the conditional
// distribution (it supports both type families) with a UserWarning.
std::map<std::string, MethodKind> resolve_methods(const Table& table,
                                                  const ModelSpec& spec,
                                                  const VisitOrder& order,
                                                  std::vector<Warning>& warnings) {
  std::map<std::string, MethodKind> resolved;
  for (const auto& col : table.schema.columns) {
    auto it = spec.methods.find(col.name);
    if (it != spec.methods.end()) {
      resolved[col.name] = it->second;
    } else if (spec.first_column_method.has_value() && col.name == order.front()) {
      resolved[col.name] = *spec.first_column_method;
    } else if (spec.default_method.has_value()) {
      resolved[col.name] = *spec.default_method;
    } else {
      resolved[col.name] = MethodKind::ConditionalDistribution;
      warnings.push_back(
          {WarningKind::DefaultMethod,
           "UserWarning: no method specified for column '" + col.name +
               "'; using default conditional_distribution",
           col.name});
    }
  }
  if (spec.first_column_method.has_value()) {
    resolved[order.front()] = *spec.first_column_method;
  }
  return resolved;
}

}  // namespace

FitResult fit(const Table& table, const ModelSpec& spec, Rng& rng) {
  validate_spec(table, spec);
  std::vector<Warning> warnings;

  // 1. Bounds: given, or inferred with a privacy-leak warning under a budget.
  Bounds bounds;
  if (spec.bounds.has_value()) {
    bounds = *spec.bounds;
    validate_bounds(table.schema, bounds);
    validate_table_within_bounds(table, bounds);
  } else {
    bounds = infer_bounds(table);
    if (spec.epsilon.has_value()) {
      warnings.push_back({WarningKind::PrivacyLeak,
                          "PrivacyLeakWarning: bounds were not provided and had to "
                          "be inferred from the data; this leaks privacy on top of "
                          "the configured epsilon",
                          std::nullopt});
    }
  }

  // 2. Budget allocation (sequential composition).
  std::vector<std::string> column_names;
  for (const auto& c : table.schema.columns) column_names.push_back(c.name);
  BudgetAllocation allocation =
      allocate_budget(PrivacyBudget{spec.epsilon}, spec.budget_split, column_names,
                      spec.dependency_consumes_budget());
  BudgetLedger ledger = std::move(allocation.ledger);

  // 3. Dependency structure.
  Dependency dependency;
  bool parents_pending = false;  // explicit visit order: parents depend on methods
  if (spec.independent) {
    dependency.visit_order = column_names;
    for (const auto& name : column_names) dependency.parents[name] = {};
  } else if (spec.visit_order.has_value()) {
    dependency.visit_order = *spec.visit_order;
    parents_pending = true;
  } else if (spec.prediction_matrix.has_value()) {
    dependency.visit_order = kahn_sort(*spec.prediction_matrix, table.schema);
    for (const auto& name : column_names) dependency.parents[name] = {};
    for (const auto& [col, pars] : *spec.prediction_matrix) {
      dependency.parents[col] = pars;
    }
  } else {
    InferOptions options;
    options.epsilon = allocation.dependency;
    options.n_parents = spec.n_parents;
    options.n_bins = spec.method_config.n_bins;
    InferResult inferred = spec.infer == ModelSpec::InferMode::Network
                               ? infer_network(table, bounds, options, rng)
                               : infer_chain(table, bounds, options, rng);
    dependency = std::move(inferred.dependency);
    for (auto& charge : inferred.charges) {
      ledger.entries.push_back(std::move(charge));
    }
  }

  auto methods = resolve_methods(table, spec, dependency.visit_order, warnings);

  if (parents_pending) {
    // Full prefix of visited columns for parent-using methods, none for the
    // histogram sampler.
    std::vector<std::string> prefix;
    for (const auto& name : dependency.visit_order) {
      if (table.schema.index_of(name) < 0) {
        throw_invalid("visit order names unknown column '" + name + "'");
      }
      dependency.parents[name] =
          method_uses_parents(methods.at(name)) ? prefix : std::vector<std::string>{};
      prefix.push_back(name);
    }
  } else {
    for (const auto& [name, kind] : methods) {
      if (!method_uses_parents(kind) && !dependency.parents_of(name).empty()) {
        throw_invalid("method histogram_sampler cannot take parents (column '" +
                      name + "')");
      }
    }
  }
  dependency.validate(table.schema);

  // 4. Fit one sampler per column, in visit order.
  FittedModel model;
  model.schema = table.schema;
  model.bounds = bounds;
  model.dependency = dependency;
  model.n_bins = spec.method_config.n_bins;
  for (const auto& name : dependency.visit_order) {
    auto idx = static_cast<std::size_t>(table.schema.index_of(name));
    std::optional<double> eps_col = allocation.per_column[idx];
    model.methods.push_back(fit_method(methods.at(name), table, bounds,
                                       dependency.parents_of(name), name, eps_col,
                                       spec.method_config, rng));
    if (eps_col.has_value()) ledger.charge("method:" + name, *eps_col);
  }
  model.ledger = std::move(ledger);
  return {std::move(model), std::move(warnings)};
}

Table generate(const FittedModel& model, std::int64_t rows, Rng& rng) {
  if (rows < 1) throw_invalid("row count must be at least 1");
  const auto n = static_cast<std::size_t>(rows);
  const std::size_t k = model.schema.size();

  std::vector<std::vector<GenValue>> generated(k);
  for (std::size_t m = 0; m < model.methods.size(); ++m) {
    const FittedMethod& method = *model.methods[m];
    auto col = static_cast<std::size_t>(model.schema.require(method.target_name()));
    std::vector<std::size_t> parent_cols;
    for (const auto& pname : method.parent_names()) {
      parent_cols.push_back(static_cast<std::size_t>(model.schema.require(pname)));
    }
    std::vector<GenValue> values(parent_cols.size());
    std::vector<GenValue> out;
    out.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t p = 0; p < parent_cols.size(); ++p) {
        values[p] = generated[parent_cols[p]][r];
      }
      out.push_back(method.sample(values, rng));
    }
    generated[col] = std::move(out);
  }

  Table table;
  table.schema = model.schema;
  table.columns.resize(k);
  for (std::size_t i = 0; i < k; ++i) {
    if (is_numerical(model.schema.columns[i].type)) {
      NumericalColumn col;
      col.reserve(n);
      for (const auto& v : generated[i]) col.push_back(std::get<double>(v));
      table.columns[i] = std::move(col);
    } else {
      const auto& cats = model.bounds.categorical(i).categories;
      CategoricalColumn col;
      col.reserve(n);
      for (const auto& v : generated[i]) {
        col.push_back(cats[static_cast<std::size_t>(std::get<std::int32_t>(v))]);
      }
      table.columns[i] = std::move(col);
    }
  }
  return table;
}

// --- serialization -----------------------------------------------------------

namespace {

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

std::string save_model(const FittedModel& model) {
  nlohmann::json payload;
  payload["format_version"] = model.format_version;
  payload["n_bins"] = model.n_bins;
  payload["schema"] = schema_to_json(model.schema)["columns"];
  payload["bounds"] = schema_bounds_to_json(model.schema, model.bounds)["columns"];
  payload["dependency"] = model.dependency.to_json();
  nlohmann::json methods = nlohmann::json::array();
  for (const auto& m : model.methods) methods.push_back(m->to_json());
  payload["methods"] = std::move(methods);
  nlohmann::json ledger;
  if (model.ledger.total.has_value()) ledger["total"] = *model.ledger.total;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : model.ledger.entries) {
    entries.push_back({{"label", e.label}, {"epsilon", e.epsilon}});
  }
  ledger["entries"] = std::move(entries);
  payload["ledger"] = std::move(ledger);

  nlohmann::json doc;
  doc["checksum"] = fnv1a_hex(payload.dump());
  doc["model"] = std::move(payload);
  return doc.dump(2) + "\n";
}

FittedModel load_model(const std::string& bytes) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(bytes);
  } catch (const nlohmann::json::exception& e) {
    throw_format(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("model") || !doc.contains("checksum")) {
    throw_format("model file is missing its payload or checksum");
  }
  const nlohmann::json& payload = doc["model"];
  if (!payload.contains("format_version") || !payload["format_version"].is_number_integer()) {
    throw_format("model file has no format version");
  }
  int version = payload["format_version"].get<int>();
  if (version != kModelFormatVersion) {
    throw_format("unsupported model format version " + std::to_string(version) +
                 " (expected " + std::to_string(kModelFormatVersion) + ")");
  }
  if (doc["checksum"].get<std::string>() != fnv1a_hex(payload.dump())) {
    throw_format("model file checksum mismatch (corrupt or edited file)");
  }

  try {
    FittedModel model;
    model.format_version = version;
    model.n_bins = payload.at("n_bins").get<int>();
    model.schema = schema_from_json({{"columns", payload.at("schema")}});
    model.bounds = bounds_from_json({{"columns", payload.at("bounds")}}, model.schema);
    model.dependency = Dependency::from_json(payload.at("dependency"), model.schema);

    MethodConfig config;
    config.n_bins = model.n_bins;
    for (const auto& mj : payload.at("methods")) {
      model.methods.push_back(method_from_json(mj, model.schema, model.bounds, config));
    }
    if (model.methods.size() != model.schema.size()) {
      throw_format("model file has the wrong number of fitted methods");
    }
    for (std::size_t i = 0; i < model.methods.size(); ++i) {
      const auto& m = *model.methods[i];
      if (m.target_name() != model.dependency.visit_order[i]) {
        throw_format("model methods are not aligned with the visit order");
      }
      if (m.parent_names() != model.dependency.parents_of(m.target_name())) {
        throw_format("fitted parents of column '" + m.target_name() +
                     "' do not match the dependency");
      }
    }

    const auto& lj = payload.at("ledger");
    if (lj.contains("total")) model.ledger.total = lj["total"].get<double>();
    for (const auto& e : lj.at("entries")) {
      model.ledger.entries.push_back(
          {e.at("label").get<std::string>(), e.at("epsilon").get<double>()});
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw_format(std::string("model file is malformed: ") + e.what());
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Format || e.code() == ErrorCode::Io) throw;
    throw_format(std::string("model file is malformed: ") + e.what());
  }
}

void save_model_file(const FittedModel& model, const std::string& path) {
  atomic_write_text_file(path, save_model(model));
}

FittedModel load_model_file(const std::string& path) {
  return load_model(read_text_file(path));
}

}  // namespace dpart
