// Command line front end; all synthesis work goes through the C API in
// include/dpart.h.

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dpart.h"
#include "json.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int exit_code_for(dpart_status status) {
  return status == DPART_ERR_INVALID_ARGUMENT ? kExitUsage : kExitRuntime;
}

int fail(dpart_status status) {
  std::cerr << "error: " << dpart_last_error() << "\n";
  return exit_code_for(status);
}

int fail_usage(const std::string& message) {
  std::cerr << "error: " << message << "\n";
  return kExitUsage;
}

nlohmann::json parse_json_file(const std::string& path, const char* what) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(std::string("cannot open ") + what + " '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return nlohmann::json::parse(ss.str());
}

struct SeedFlag {
  std::uint64_t value = 0;
  bool set = false;
};

struct FitArgs {
  std::string data, schema, engine, out;
  std::optional<double> epsilon;
  std::string bounds, config;
  SeedFlag seed;
};

int run_fit(const FitArgs& args) {
  nlohmann::json spec = nlohmann::json::object();
  if (!args.config.empty()) {
    try {
      spec = parse_json_file(args.config, "--config file");
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
  }
  spec["engine"] = args.engine;
  if (args.epsilon.has_value()) spec["epsilon"] = *args.epsilon;
  if (!args.bounds.empty()) {
    try {
      spec["bounds"] = parse_json_file(args.bounds, "--bounds file");
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitRuntime;
    }
  }

  dpart_table* table = nullptr;
  if (auto st = dpart_table_read_csv(args.data.c_str(), args.schema.c_str(), &table)) {
    return fail(st);
  }
  dpart_model* model = nullptr;
  dpart_status st =
      dpart_fit(table, spec.dump().c_str(), args.seed.value, args.seed.set ? 1 : 0, &model);
  dpart_table_free(table);
  if (st != DPART_OK) return fail(st);

  for (size_t i = 0; i < dpart_model_warning_count(model); ++i) {
    std::cerr << "WARNING: " << dpart_model_warning(model, i) << "\n";
  }
  st = dpart_model_save(model, args.out.c_str());
  dpart_model_free(model);
  if (st != DPART_OK) return fail(st);
  return 0;
}

struct GenerateArgs {
  std::string model, out;
  std::int64_t rows = 0;
  SeedFlag seed;
};

int run_generate(const GenerateArgs& args) {
  if (args.rows < 1) return fail_usage("--rows must be at least 1");
  dpart_model* model = nullptr;
  if (auto st = dpart_model_load(args.model.c_str(), &model)) return fail(st);
  dpart_table* table = nullptr;
  dpart_status st =
      dpart_generate(model, args.rows, args.seed.value, args.seed.set ? 1 : 0, &table);
  dpart_model_free(model);
  if (st != DPART_OK) return fail(st);
  st = dpart_table_write_csv(table, args.out.c_str());
  dpart_table_free(table);
  if (st != DPART_OK) return fail(st);
  return 0;
}

struct EvaluateArgs {
  std::string real, synth, schema, target;
};

int run_evaluate(const EvaluateArgs& args) {
  dpart_table* real = nullptr;
  if (auto st = dpart_table_read_csv(args.real.c_str(), args.schema.c_str(), &real)) {
    return fail(st);
  }
  dpart_table* synth = nullptr;
  if (auto st = dpart_table_read_csv(args.synth.c_str(), args.schema.c_str(), &synth)) {
    dpart_table_free(real);
    return fail(st);
  }
  char* metrics = nullptr;
  dpart_status st = dpart_evaluate(real, synth, args.target.c_str(), &metrics);
  dpart_table_free(real);
  dpart_table_free(synth);
  if (st != DPART_OK) return fail(st);
  std::cout << metrics << "\n";
  dpart_string_free(metrics);
  return 0;
}

struct ExperimentArgs {
  std::string config, out_dir;
};

int run_experiment(const ExperimentArgs& args) {
  if (auto st = dpart_experiment_run(args.config.c_str(), args.out_dir.c_str())) {
    return fail(st);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dpart: differentially private autoregressive tabular synthesis"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit = app.add_subcommand("fit", "Fit a model on a CSV dataset");
  fit->add_option("--data", fit_args.data, "Input CSV")->required();
  fit->add_option("--schema", fit_args.schema, "Schema JSON file")->required();
  fit->add_option("--engine", fit_args.engine,
                  "Engine: independent | privbayes | dp-synthpop")
      ->required();
  fit->add_option("--epsilon", fit_args.epsilon,
                  "Total privacy budget (omit for non-private mode)");
  fit->add_option("--bounds", fit_args.bounds, "Bounds JSON file");
  fit->add_option("--config", fit_args.config, "Extra model spec JSON file");
  fit->add_option("--out", fit_args.out, "Output model file (.dpart.json)")->required();
  fit->add_option("--seed", fit_args.seed.value,
                  "RNG seed (tests/demos only; voids the DP guarantee)")
      ->trigger_on_parse()
      ->each([&fit_args](const std::string&) { fit_args.seed.set = true; });

  GenerateArgs gen_args;
  auto* gen = app.add_subcommand("generate", "Generate synthetic rows from a model");
  gen->add_option("--model", gen_args.model, "Model file")->required();
  gen->add_option("--rows", gen_args.rows, "Number of rows to generate")->required();
  gen->add_option("--out", gen_args.out, "Output CSV")->required();
  gen->add_option("--seed", gen_args.seed.value,
                  "RNG seed (tests/demos only; voids the DP guarantee)")
      ->trigger_on_parse()
      ->each([&gen_args](const std::string&) { gen_args.seed.set = true; });

  EvaluateArgs eval_args;
  auto* eval = app.add_subcommand("evaluate",
                                  "Similarity and downstream accuracy of a synthetic CSV");
  eval->add_option("--real", eval_args.real, "Real CSV")->required();
  eval->add_option("--synth", eval_args.synth, "Synthetic CSV")->required();
  eval->add_option("--schema", eval_args.schema, "Schema JSON file")->required();
  eval->add_option("--target", eval_args.target, "Target column for accuracy")->required();

  ExperimentArgs exp_args;
  auto* exp = app.add_subcommand("experiment", "Run a full evaluation sweep");
  exp->add_option("--config", exp_args.config, "Experiment config JSON")->required();
  exp->add_option("--out-dir", exp_args.out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  if (fit->parsed()) return run_fit(fit_args);
  if (gen->parsed()) return run_generate(gen_args);
  if (eval->parsed()) return run_evaluate(eval_args);
  if (exp->parsed()) return run_experiment(exp_args);
  return kExitUsage;
}
