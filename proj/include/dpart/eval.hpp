#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "dpart/data.hpp"
#include "json.hpp"

namespace dpart {

// Non-private CART used for the downstream-accuracy metric. Deterministic:
// ties break on lower feature index, then lower threshold, leaf majorities
// on lower class index.
struct CartConfig {
  int max_depth = 5;
  int min_leaf = 10;
};

class DecisionTree {
 public:
  // Rows are encoded feature vectors (categoricals as category indices),
  // labels are class indices.
  static DecisionTree fit(const std::vector<std::vector<double>>& rows,
                          const std::vector<std::int32_t>& labels, int n_classes,
                          const CartConfig& config);

  std::int32_t predict(const std::vector<double>& row) const;

 private:
  struct Node {
    int feature = -1;          // -1 marks a leaf
    double threshold = 0.0;    // go left when value <= threshold
    int left = -1;
    int right = -1;
    std::int32_t label = 0;
  };
  std::vector<Node> nodes_;
};

// Mean over columns of 1 - total variation distance between identically
// discretized marginals; in [0, 1], symmetric.
double marginal_similarity(const Table& real, const Table& synth, const Bounds& bounds,
                           int n_bins);

// CART trained on `train`, accuracy on `test`. Categorical features are
// index-encoded against the union of categories seen in either table.
double downstream_accuracy(const Table& train, const Table& test,
                           const std::string& target, const CartConfig& config);

struct ExperimentConfig {
  std::string data_path;
  std::string schema_path;
  std::vector<std::string> engines{"independent", "privbayes", "dp-synthpop"};
  std::vector<double> epsilons{0.01, 0.1, 1.0, 10.0, 100.0, 1000.0};
  int fits = 5;
  int generations = 5;
  std::uint64_t master_seed = 0;
  std::string target;
  double train_fraction = 0.8;
  int n_parents = 2;
  int n_bins = kDefaultBins;
  int threads = 0;  // 0 = hardware concurrency
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& doc);
ExperimentConfig read_experiment_config(const std::string& path);

struct MetricRow {
  std::string engine;
  double epsilon = 0.0;
  int fit = 0;
  int gen = 0;
  double similarity = 0.0;
  double accuracy = 0.0;
};

struct MetricReport {
  std::vector<MetricRow> rows;   // engines x epsilons x fits x generations
  double baseline_accuracy = 0.0;

  std::string to_csv() const;
  nlohmann::json summary_json() const;

  double mean_similarity(const std::string& engine, double epsilon) const;
  double mean_accuracy(const std::string& engine, double epsilon) const;
};

// Full sweep: per engine and epsilon, `fits` models are fitted on the train
// split and each generates `generations` synthetic tables of train size;
// both metrics are computed per generation. Cells run in parallel, each with
// an rng derived from (master seed, cell coordinates).
MetricReport run_experiment(const ExperimentConfig& config);

// Writes report.csv and summary.json under out_dir.
void write_experiment_outputs(const MetricReport& report, const std::string& out_dir);

Table take_rows(const Table& table, const std::vector<std::size_t>& indices);

// Shuffled split with a seed-derived permutation; first element holds the
// train fraction.
std::pair<Table, Table> train_test_split(const Table& table, double train_fraction,
                                         std::uint64_t seed);

}  // namespace dpart
