#include "dpart.h"

#include <algorithm>
#include <cstring>
#include <memory>
#include <string>

#include "dpart/csv.hpp"
#include "dpart/engine.hpp"
#include "dpart/error.hpp"
#include "dpart/eval.hpp"
#include "dpart/instances.hpp"
#include "dpart/io.hpp"

namespace {

thread_local std::string g_last_error;

dpart_status to_status(dpart::ErrorCode code) {
  switch (code) {
    case dpart::ErrorCode::InvalidArgument: return DPART_ERR_INVALID_ARGUMENT;
    case dpart::ErrorCode::Io: return DPART_ERR_IO;
    case dpart::ErrorCode::Parse: return DPART_ERR_PARSE;
    case dpart::ErrorCode::Format: return DPART_ERR_FORMAT;
    case dpart::ErrorCode::Internal: return DPART_ERR_INTERNAL;
  }
  return DPART_ERR_INTERNAL;
}

template <typename Fn>
dpart_status guarded(Fn&& fn) {
  try {
    fn();
    g_last_error.clear();
    return DPART_OK;
  } catch (const dpart::Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DPART_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return DPART_ERR_INTERNAL;
  }
}

dpart_status require(bool ok, const char* message) {
  if (ok) return DPART_OK;
  g_last_error = message;
  return DPART_ERR_INVALID_ARGUMENT;
}

dpart::Rng make_rng(uint64_t seed, int has_seed) {
  return has_seed ? dpart::Rng(seed) : dpart::Rng::from_entropy();
}

}  // namespace

struct dpart_table {
  dpart::Table table;
};

struct dpart_model {
  dpart::FittedModel model;
  std::vector<std::string> warnings;
};

extern "C" {

const char* dpart_version(void) { return "1.0.0"; }

const char* dpart_last_error(void) { return g_last_error.c_str(); }

dpart_status dpart_table_read_csv(const char* csv_path, const char* schema_json_path,
                                  dpart_table** out) {
  if (auto st = require(csv_path && schema_json_path && out, "null argument")) return st;
  return guarded([&]() {
    dpart::Schema schema = dpart::read_schema_file(schema_json_path);
    auto handle = std::make_unique<dpart_table>();
    handle->table = dpart::load_csv(csv_path, schema);
    *out = handle.release();
  });
}

dpart_status dpart_table_write_csv(const dpart_table* table, const char* csv_path) {
  if (auto st = require(table && csv_path, "null argument")) return st;
  return guarded([&]() { dpart::write_csv(table->table, csv_path); });
}

int64_t dpart_table_rows(const dpart_table* table) {
  return table ? static_cast<int64_t>(table->table.row_count()) : -1;
}

int64_t dpart_table_cols(const dpart_table* table) {
  return table ? static_cast<int64_t>(table->table.schema.size()) : -1;
}

void dpart_table_free(dpart_table* table) { delete table; }

dpart_status dpart_fit(const dpart_table* table, const char* spec_json, uint64_t seed,
                       int has_seed, dpart_model** out) {
  if (auto st = require(table && spec_json && out, "null argument")) return st;
  return guarded([&]() {
    nlohmann::json config;
    try {
      config = nlohmann::json::parse(spec_json);
    } catch (const nlohmann::json::exception& e) {
      dpart::throw_parse(std::string("model spec is not valid JSON: ") + e.what());
    }
    dpart::ModelSpec spec = dpart::model_spec_from_json(config, table->table.schema);
    dpart::Rng rng = make_rng(seed, has_seed);
    dpart::FitResult result = dpart::fit(table->table, spec, rng);
    auto handle = std::make_unique<dpart_model>();
    handle->model = std::move(result.model);
    for (const auto& w : result.warnings) handle->warnings.push_back(w.message);
    *out = handle.release();
  });
}

size_t dpart_model_warning_count(const dpart_model* model) {
  return model ? model->warnings.size() : 0;
}

const char* dpart_model_warning(const dpart_model* model, size_t i) {
  if (!model || i >= model->warnings.size()) return nullptr;
  return model->warnings[i].c_str();
}

dpart_status dpart_model_save(const dpart_model* model, const char* path) {
  if (auto st = require(model && path, "null argument")) return st;
  return guarded([&]() { dpart::save_model_file(model->model, path); });
}

dpart_status dpart_model_load(const char* path, dpart_model** out) {
  if (auto st = require(path && out, "null argument")) return st;
  return guarded([&]() {
    auto handle = std::make_unique<dpart_model>();
    handle->model = dpart::load_model_file(path);
    *out = handle.release();
  });
}

dpart_status dpart_generate(const dpart_model* model, int64_t rows, uint64_t seed,
                            int has_seed, dpart_table** out) {
  if (auto st = require(model && out, "null argument")) return st;
  return guarded([&]() {
    dpart::Rng rng = make_rng(seed, has_seed);
    auto handle = std::make_unique<dpart_table>();
    handle->table = dpart::generate(model->model, rows, rng);
    *out = handle.release();
  });
}

void dpart_model_free(dpart_model* model) { delete model; }

dpart_status dpart_evaluate(const dpart_table* real, const dpart_table* synth,
                            const char* target_column, char** metrics_json_out) {
  if (auto st = require(real && synth && target_column && metrics_json_out,
                        "null argument")) {
    return st;
  }
  return guarded([&]() {
    if (!(real->table.schema == synth->table.schema)) {
      dpart::throw_invalid("real and synthetic tables have different schemas");
    }
    // Bounds for the shared discretization: union of both tables, so every
    // value falls inside. Evaluation is non-private tooling.
    dpart::Bounds real_bounds = dpart::infer_bounds(real->table);
    dpart::Bounds synth_bounds = dpart::infer_bounds(synth->table);
    dpart::Bounds bounds = real_bounds;
    for (std::size_t i = 0; i < bounds.columns.size(); ++i) {
      if (auto* nb = std::get_if<dpart::NumericalBounds>(&bounds.columns[i])) {
        const auto& sb = synth_bounds.numerical(i);
        nb->min = std::min(nb->min, sb.min);
        nb->max = std::max(nb->max, sb.max);
      } else {
        auto& cb = std::get<dpart::CategoricalBounds>(bounds.columns[i]);
        for (const auto& cat : synth_bounds.categorical(i).categories) {
          if (cb.index_of(cat) < 0) cb.categories.push_back(cat);
        }
        std::sort(cb.categories.begin(), cb.categories.end());
      }
    }
    double similarity = dpart::marginal_similarity(real->table, synth->table, bounds,
                                                   dpart::kDefaultBins);
    double accuracy = dpart::downstream_accuracy(synth->table, real->table,
                                                 target_column, dpart::CartConfig{});
    nlohmann::json metrics = {{"similarity", similarity}, {"accuracy", accuracy}};
    std::string text = metrics.dump();
    char* buf = new char[text.size() + 1];
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *metrics_json_out = buf;
  });
}

dpart_status dpart_experiment_run(const char* config_json_path, const char* out_dir) {
  if (auto st = require(config_json_path && out_dir, "null argument")) return st;
  return guarded([&]() {
    dpart::ExperimentConfig config = dpart::read_experiment_config(config_json_path);
    dpart::MetricReport report = dpart::run_experiment(config);
    dpart::write_experiment_outputs(report, out_dir);
  });
}

void dpart_string_free(char* s) { delete[] s; }

}  // extern "C"
