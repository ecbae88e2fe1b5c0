#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "dpart/data.hpp"
#include "dpart/mechanisms.hpp"
#include "dpart/rng.hpp"

namespace dpart {

// Permutation of the schema's column names.
using VisitOrder = std::vector<std::string>;

// column -> parent (predictor) columns; induces a DAG. Columns missing from
// the map are parentless.
using PredictionMatrix = std::map<std::string, std::vector<std::string>>;

struct Dependency {
  VisitOrder visit_order;
  PredictionMatrix parents;  // one entry per column, possibly empty

  const std::vector<std::string>& parents_of(const std::string& column) const;
  void validate(const Schema& schema) const;

  nlohmann::json to_json() const;
  static Dependency from_json(const nlohmann::json& doc, const Schema& schema);
};

// Topological order via repeated removal of parentless columns; schema order
// breaks ties, so the output is deterministic. Cycles raise an error listing
// the columns of one cycle.
VisitOrder kahn_sort(const PredictionMatrix& matrix, const Schema& schema);

// Plugin estimator on discretized columns, in bits. Empty parent set gives 0.
double mutual_information(const DiscretizedColumn& target,
                          const std::vector<const DiscretizedColumn*>& parents);

// Entropy of joint column subsets, computed once per subset and memoized.
// Reads may be concurrent; insertion is guarded.
class HistogramCache {
 public:
  HistogramCache(std::vector<const DiscretizedColumn*> columns, std::size_t rows);

  // Entropy in bits of the joint distribution over the subset (indices into
  // the column vector, sorted ascending).
  double entropy_bits(const std::vector<int>& subset);

  double mi_bits(int target, const std::vector<int>& parents);

  std::size_t hits() const { return hits_; }
  std::size_t misses() const { return misses_; }

 private:
  double compute_entropy(const std::vector<int>& subset) const;

  std::vector<const DiscretizedColumn*> columns_;
  std::size_t rows_;
  std::map<std::vector<int>, double> cache_;
  mutable std::shared_mutex mutex_;
  std::size_t hits_ = 0;
  std::size_t misses_ = 0;
};

// Sensitivity of the plugin MI score (bits) for the Exponential mechanism.
double mi_score_sensitivity(std::size_t n_rows);

struct InferOptions {
  std::optional<double> epsilon;      // dependency budget, absent = argmax
  int n_parents = 2;                  // network inference only
  std::size_t max_candidates = 10000; // uniform subsample cap per iteration
  int n_bins = kDefaultBins;
};

struct InferResult {
  Dependency dependency;
  std::vector<LedgerEntry> charges;  // k - 1 selection events
  std::size_t cache_hits = 0;
  std::size_t cache_misses = 0;
};

// Greedy network construction: a uniformly random first column (no budget),
// then k-1 Exponential-mechanism selections over (column, parent set)
// candidates scored by mutual information. Parent sets have size exactly
// min(n_parents, |visited|).
InferResult infer_network(const Table& table, const Bounds& bounds,
                          const InferOptions& options, Rng& rng);

// Chain construction: each step selects the next column by mutual
// information with all visited columns, which become its parents.
InferResult infer_chain(const Table& table, const Bounds& bounds,
                        const InferOptions& options, Rng& rng);

}  // namespace dpart
