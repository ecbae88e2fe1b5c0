#include "dpart/eval.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "dpart/csv.hpp"
#include "dpart/engine.hpp"
#include "dpart/error.hpp"
#include "dpart/instances.hpp"
#include "dpart/io.hpp"

namespace dpart {

double marginal_similarity(const Table& real, const Table& synth, const Bounds& bounds,
                           int n_bins) {
  if (!(real.schema == synth.schema)) {
    throw_invalid("marginal similarity requires identical schemas");
  }
  const std::size_t k = real.schema.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    auto dr = discretize(real.columns[i], real.schema.columns[i].type, bounds.columns[i],
                         n_bins, real.schema.columns[i].name);
    auto ds = discretize(synth.columns[i], synth.schema.columns[i].type,
                         bounds.columns[i], n_bins, synth.schema.columns[i].name);
    std::vector<double> pr(static_cast<std::size_t>(dr.n_bins), 0.0);
    std::vector<double> ps(static_cast<std::size_t>(dr.n_bins), 0.0);
    for (auto b : dr.bin_ids) pr[static_cast<std::size_t>(b)] += 1.0;
    for (auto b : ds.bin_ids) ps[static_cast<std::size_t>(b)] += 1.0;
    double tv = 0.0;
    for (std::size_t b = 0; b < pr.size(); ++b) {
      tv += std::fabs(pr[b] / static_cast<double>(dr.bin_ids.size()) -
                      ps[b] / static_cast<double>(ds.bin_ids.size()));
    }
    acc += 1.0 - 0.5 * tv;
  }
  return acc / static_cast<double>(k);
}

namespace {

// Feature encoding for the evaluation classifier: raw numericals, category
// indices over the union of labels seen in either table (the classifier is
// not private, so peeking at both tables is fine).
struct EvalEncoding {
  std::vector<std::vector<std::string>> categories;  // per feature column; empty = numerical
  std::vector<std::size_t> feature_cols;
  std::size_t target_col = 0;
  std::vector<std::string> classes;
};

EvalEncoding build_encoding(const Table& train, const Table& test,
                            const std::string& target) {
  if (train.schema.index_of(target) < 0 || test.schema.index_of(target) < 0) {
    throw_invalid("target column '" + target + "' is missing");
  }
  if (!(train.schema == test.schema)) {
    throw_invalid("downstream accuracy requires identical schemas");
  }
  EvalEncoding enc;
  enc.target_col = static_cast<std::size_t>(train.schema.index_of(target));
  if (!is_categorical(train.schema.columns[enc.target_col].type)) {
    throw_invalid("target column '" + target + "' must be categorical");
  }
  for (std::size_t i = 0; i < train.schema.size(); ++i) {
    if (i == enc.target_col) continue;
    enc.feature_cols.push_back(i);
    if (is_categorical(train.schema.columns[i].type)) {
      std::set<std::string> labels;
      for (const auto& v : train.categorical(i)) labels.insert(v);
      for (const auto& v : test.categorical(i)) labels.insert(v);
      enc.categories.emplace_back(labels.begin(), labels.end());
    } else {
      enc.categories.emplace_back();
    }
  }
  std::set<std::string> classes;
  for (const auto& v : train.categorical(enc.target_col)) classes.insert(v);
  for (const auto& v : test.categorical(enc.target_col)) classes.insert(v);
  enc.classes.assign(classes.begin(), classes.end());
  return enc;
}

void encode_rows(const Table& table, const EvalEncoding& enc,
                 std::vector<std::vector<double>>& rows,
                 std::vector<std::int32_t>& labels) {
  const std::size_t n = table.row_count();
  rows.assign(n, std::vector<double>(enc.feature_cols.size(), 0.0));
  for (std::size_t f = 0; f < enc.feature_cols.size(); ++f) {
    std::size_t col = enc.feature_cols[f];
    if (enc.categories[f].empty()) {
      const auto& data = table.numerical(col);
      for (std::size_t r = 0; r < n; ++r) rows[r][f] = data[r];
    } else {
      const auto& cats = enc.categories[f];
      const auto& data = table.categorical(col);
      for (std::size_t r = 0; r < n; ++r) {
        auto it = std::lower_bound(cats.begin(), cats.end(), data[r]);
        rows[r][f] = static_cast<double>(it - cats.begin());
      }
    }
  }
  labels.resize(n);
  const auto& data = table.categorical(enc.target_col);
  for (std::size_t r = 0; r < n; ++r) {
    auto it = std::lower_bound(enc.classes.begin(), enc.classes.end(), data[r]);
    labels[r] = static_cast<std::int32_t>(it - enc.classes.begin());
  }
}

}  // namespace

double downstream_accuracy(const Table& train, const Table& test,
                           const std::string& target, const CartConfig& config) {
  EvalEncoding enc = build_encoding(train, test, target);
  std::vector<std::vector<double>> rows;
  std::vector<std::int32_t> labels;
  encode_rows(train, enc, rows, labels);
  DecisionTree tree =
      DecisionTree::fit(rows, labels, static_cast<int>(enc.classes.size()), config);

  encode_rows(test, enc, rows, labels);
  std::size_t correct = 0;
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (tree.predict(rows[r]) == labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(rows.size());
}

Table take_rows(const Table& table, const std::vector<std::size_t>& indices) {
  Table out;
  out.schema = table.schema;
  out.columns.resize(table.columns.size());
  for (std::size_t i = 0; i < table.columns.size(); ++i) {
    if (is_numerical(table.schema.columns[i].type)) {
      NumericalColumn col;
      col.reserve(indices.size());
      const auto& src = table.numerical(i);
      for (std::size_t r : indices) col.push_back(src[r]);
      out.columns[i] = std::move(col);
    } else {
      CategoricalColumn col;
      col.reserve(indices.size());
      const auto& src = table.categorical(i);
      for (std::size_t r : indices) col.push_back(src[r]);
      out.columns[i] = std::move(col);
    }
  }
  return out;
}

std::pair<Table, Table> train_test_split(const Table& table, double train_fraction,
                                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw_invalid("train fraction must lie strictly between 0 and 1");
  }
  const std::size_t n = table.row_count();
  std::vector<std::size_t> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  Rng rng(seed);
  rng.shuffle(perm);
  auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(n)));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  std::vector<std::size_t> train_idx(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(perm.begin() + static_cast<std::ptrdiff_t>(n_train), perm.end());
  return {take_rows(table, train_idx), take_rows(table, test_idx)};
}

// --- experiment --------------------------------------------------------------

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw_parse("experiment config must be a JSON object");
  ExperimentConfig cfg;
  if (!doc.contains("data")) throw_invalid("experiment config is missing \"data\"");
  if (!doc.contains("schema")) throw_invalid("experiment config is missing \"schema\"");
  if (!doc.contains("target")) throw_invalid("experiment config is missing \"target\"");
  cfg.data_path = doc["data"].get<std::string>();
  cfg.schema_path = doc["schema"].get<std::string>();
  cfg.target = doc["target"].get<std::string>();
  if (doc.contains("engines")) cfg.engines = doc["engines"].get<std::vector<std::string>>();
  if (doc.contains("epsilons")) cfg.epsilons = doc["epsilons"].get<std::vector<double>>();
  if (doc.contains("fits")) cfg.fits = doc["fits"].get<int>();
  if (doc.contains("generations")) cfg.generations = doc["generations"].get<int>();
  if (doc.contains("master_seed")) cfg.master_seed = doc["master_seed"].get<std::uint64_t>();
  if (doc.contains("train_fraction")) cfg.train_fraction = doc["train_fraction"].get<double>();
  if (doc.contains("n_parents")) cfg.n_parents = doc["n_parents"].get<int>();
  if (doc.contains("n_bins")) cfg.n_bins = doc["n_bins"].get<int>();
  if (doc.contains("threads")) cfg.threads = doc["threads"].get<int>();
  if (cfg.fits < 1 || cfg.generations < 1) {
    throw_invalid("experiment config needs fits >= 1 and generations >= 1");
  }
  if (cfg.engines.empty() || cfg.epsilons.empty()) {
    throw_invalid("experiment config needs at least one engine and one epsilon");
  }
  return cfg;
}

ExperimentConfig read_experiment_config(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_text_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw_parse("experiment config '" + path + "': " + e.what());
  }
  return experiment_config_from_json(doc);
}

MetricReport run_experiment(const ExperimentConfig& config) {
  Schema schema = read_schema_file(config.schema_path);
  Table table = load_csv(config.data_path, schema);
  schema.require(config.target);

  // One shared bounds document, inferred once; the harness is evaluation
  // tooling, so no budget is spent on it.
  Bounds bounds = infer_bounds(table);
  auto [train, test] = train_test_split(table, config.train_fraction,
                                        mix_seed(config.master_seed, 0x5B17));
  const auto n_train = static_cast<std::int64_t>(train.row_count());

  CartConfig cart;
  MetricReport report;
  report.baseline_accuracy = downstream_accuracy(train, test, config.target, cart);

  const std::size_t n_engines = config.engines.size();
  const std::size_t n_eps = config.epsilons.size();
  const auto fits = static_cast<std::size_t>(config.fits);
  const auto gens = static_cast<std::size_t>(config.generations);
  report.rows.resize(n_engines * n_eps * fits * gens);

  struct Cell {
    std::size_t engine, eps, fit;
  };
  std::vector<Cell> cells;
  for (std::size_t e = 0; e < n_engines; ++e) {
    for (std::size_t x = 0; x < n_eps; ++x) {
      for (std::size_t f = 0; f < fits; ++f) cells.push_back({e, x, f});
    }
  }

  auto run_cell = [&](const Cell& cell) {
    const std::string& engine = config.engines[cell.engine];
    double epsilon = config.epsilons[cell.eps];
    std::uint64_t cell_seed = mix_seed(
        mix_seed(mix_seed(config.master_seed, cell.engine), cell.eps), cell.fit);

    ModelSpec spec = spec_for_engine(engine, epsilon, bounds, schema, config.n_parents);
    spec.method_config.n_bins = config.n_bins;
    Rng fit_rng(cell_seed);
    FitResult fitted = fit(train, spec, fit_rng);

    for (std::size_t g = 0; g < gens; ++g) {
      Rng gen_rng(mix_seed(cell_seed, 0x6E6 + g));
      Table synth = generate(fitted.model, n_train, gen_rng);
      MetricRow row;
      row.engine = engine;
      row.epsilon = epsilon;
      row.fit = static_cast<int>(cell.fit);
      row.gen = static_cast<int>(g);
      row.similarity = marginal_similarity(train, synth, bounds, config.n_bins);
      row.accuracy = downstream_accuracy(synth, test, config.target, cart);
      std::size_t slot =
          ((cell.engine * n_eps + cell.eps) * fits + cell.fit) * gens + g;
      report.rows[slot] = std::move(row);
    }
  };

  unsigned n_threads = config.threads > 0
                           ? static_cast<unsigned>(config.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, static_cast<unsigned>(cells.size()));
  if (n_threads <= 1) {
    for (const auto& cell : cells) run_cell(cell);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (unsigned t = 0; t < n_threads; ++t) {
      workers.emplace_back([&]() {
        for (;;) {
          std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          try {
            run_cell(cells[i]);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
            return;
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }
  return report;
}

std::string MetricReport::to_csv() const {
  std::string out = "engine,epsilon,fit,gen,similarity,accuracy\n";
  for (const auto& row : rows) {
    out += row.engine;
    out += ',';
    out += format_double(row.epsilon);
    out += ',';
    out += std::to_string(row.fit);
    out += ',';
    out += std::to_string(row.gen);
    out += ',';
    out += format_double(row.similarity);
    out += ',';
    out += format_double(row.accuracy);
    out += '\n';
  }
  out += "real_baseline,,,,," + format_double(baseline_accuracy) + "\n";
  return out;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double var = 0.0;
  for (double x : xs) var += (x - mean) * (x - mean);
  var /= static_cast<double>(xs.size() - 1);
  return {mean, std::sqrt(var)};
}

}  // namespace

nlohmann::json MetricReport::summary_json() const {
  // Preserve first-seen order of (engine, epsilon) cells.
  std::vector<std::pair<std::string, double>> keys;
  for (const auto& row : rows) {
    std::pair<std::string, double> key{row.engine, row.epsilon};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) keys.push_back(key);
  }
  nlohmann::json cells = nlohmann::json::array();
  for (const auto& [engine, epsilon] : keys) {
    std::vector<double> sims, accs;
    for (const auto& row : rows) {
      if (row.engine == engine && row.epsilon == epsilon) {
        sims.push_back(row.similarity);
        accs.push_back(row.accuracy);
      }
    }
    auto [sim_mean, sim_std] = mean_std(sims);
    auto [acc_mean, acc_std] = mean_std(accs);
    cells.push_back({{"engine", engine},
                     {"epsilon", epsilon},
                     {"similarity_mean", sim_mean},
                     {"similarity_std", sim_std},
                     {"accuracy_mean", acc_mean},
                     {"accuracy_std", acc_std},
                     {"samples", sims.size()}});
  }
  return {{"baseline_accuracy", baseline_accuracy}, {"cells", cells}};
}

double MetricReport::mean_similarity(const std::string& engine, double epsilon) const {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& row : rows) {
    if (row.engine == engine && row.epsilon == epsilon) {
      acc += row.similarity;
      ++n;
    }
  }
  if (n == 0) throw_invalid("no rows for the requested report cell");
  return acc / static_cast<double>(n);
}

double MetricReport::mean_accuracy(const std::string& engine, double epsilon) const {
  double acc = 0.0;
  std::size_t n = 0;
  for (const auto& row : rows) {
    if (row.engine == engine && row.epsilon == epsilon) {
      acc += row.accuracy;
      ++n;
    }
  }
  if (n == 0) throw_invalid("no rows for the requested report cell");
  return acc / static_cast<double>(n);
}

void write_experiment_outputs(const MetricReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  atomic_write_text_file((std::filesystem::path(out_dir) / "report.csv").string(),
                         report.to_csv());
  atomic_write_text_file((std::filesystem::path(out_dir) / "summary.json").string(),
                         report.summary_json().dump(2) + "\n");
}

}  // namespace dpart
