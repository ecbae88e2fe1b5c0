#include "dpart/dependency.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>

#include "dpart/error.hpp"

namespace dpart {

const std::vector<std::string>& Dependency::parents_of(const std::string& column) const {
  static const std::vector<std::string> kEmpty;
  auto it = parents.find(column);
  return it == parents.end() ? kEmpty : it->second;
}

void Dependency::validate(const Schema& schema) const {
  if (visit_order.size() != schema.size()) {
    throw_invalid("visit order must cover every schema column exactly once");
  }
  std::map<std::string, std::size_t> position;
  for (std::size_t i = 0; i < visit_order.size(); ++i) {
    if (schema.index_of(visit_order[i]) < 0) {
      throw_invalid("visit order names unknown column '" + visit_order[i] + "'");
    }
    if (!position.emplace(visit_order[i], i).second) {
      throw_invalid("visit order repeats column '" + visit_order[i] + "'");
    }
  }
  for (const auto& [col, pars] : parents) {
    auto it = position.find(col);
    if (it == position.end()) {
      throw_invalid("parents map names unknown column '" + col + "'");
    }
    for (const auto& p : pars) {
      auto pit = position.find(p);
      if (pit == position.end()) {
        throw_invalid("parent '" + p + "' of column '" + col + "' is unknown");
      }
      if (pit->second >= it->second) {
        throw_invalid("parent '" + p + "' does not precede column '" + col +
                      "' in the visit order");
      }
    }
  }
}

nlohmann::json Dependency::to_json() const {
  nlohmann::json pj = nlohmann::json::object();
  for (const auto& [col, pars] : parents) pj[col] = pars;
  return {{"visit_order", visit_order}, {"parents", pj}};
}

Dependency Dependency::from_json(const nlohmann::json& doc, const Schema& schema) {
  Dependency dep;
  dep.visit_order = doc.at("visit_order").get<std::vector<std::string>>();
  for (const auto& [col, pars] : doc.at("parents").items()) {
    dep.parents[col] = pars.get<std::vector<std::string>>();
  }
  dep.validate(schema);
  return dep;
}

VisitOrder kahn_sort(const PredictionMatrix& matrix, const Schema& schema) {
  const std::size_t k = schema.size();
  for (const auto& [col, pars] : matrix) {
    schema.require(col);
    for (const auto& p : pars) schema.require(p);
  }

  // children[i] = columns that list i as a parent; missing columns are roots.
  std::vector<std::vector<int>> children(k);
  std::vector<int> pending(k, 0);
  for (const auto& [col, pars] : matrix) {
    int c = schema.index_of(col);
    for (const auto& p : pars) {
      children[static_cast<std::size_t>(schema.index_of(p))].push_back(c);
      ++pending[static_cast<std::size_t>(c)];
    }
  }

  VisitOrder order;
  order.reserve(k);
  std::vector<bool> emitted(k, false);
  for (;;) {
    int next = -1;
    for (std::size_t i = 0; i < k; ++i) {
      if (!emitted[i] && pending[i] == 0) {
        next = static_cast<int>(i);
        break;  // schema order breaks ties
      }
    }
    if (next < 0) break;
    emitted[static_cast<std::size_t>(next)] = true;
    order.push_back(schema.columns[static_cast<std::size_t>(next)].name);
    for (int c : children[static_cast<std::size_t>(next)]) {
      --pending[static_cast<std::size_t>(c)];
    }
  }

  if (order.size() != k) {
    // Walk unresolved parents from any remaining node until one repeats.
    int start = 0;
    while (emitted[static_cast<std::size_t>(start)]) ++start;
    std::vector<int> trail;
    std::vector<int> seen_at(k, -1);
    int cur = start;
    while (seen_at[static_cast<std::size_t>(cur)] < 0) {
      seen_at[static_cast<std::size_t>(cur)] = static_cast<int>(trail.size());
      trail.push_back(cur);
      const auto& pars = matrix.at(schema.columns[static_cast<std::size_t>(cur)].name);
      for (const auto& p : pars) {
        int pi = schema.index_of(p);
        if (!emitted[static_cast<std::size_t>(pi)]) {
          cur = pi;
          break;
        }
      }
    }
    std::string names;
    for (std::size_t i = static_cast<std::size_t>(seen_at[static_cast<std::size_t>(cur)]);
         i < trail.size(); ++i) {
      if (!names.empty()) names += ", ";
      names += schema.columns[static_cast<std::size_t>(trail[i])].name;
    }
    throw_invalid("prediction matrix contains a cycle through {" + names + "}");
  }
  return order;
}

// --- joint histograms ------------------------------------------------------

namespace {

// Entropy in bits from joint cell keys; keys are sorted and run-counted so
// only occupied cells cost memory.
double entropy_from_keys(std::vector<unsigned __int128>& keys) {
  std::sort(keys.begin(), keys.end());
  const double n = static_cast<double>(keys.size());
  double h = 0.0;
  std::size_t run = 1;
  for (std::size_t i = 1; i <= keys.size(); ++i) {
    if (i < keys.size() && keys[i] == keys[i - 1]) {
      ++run;
      continue;
    }
    double p = static_cast<double>(run) / n;
    h -= p * std::log2(p);
    run = 1;
  }
  return h;
}

}  // namespace

HistogramCache::HistogramCache(std::vector<const DiscretizedColumn*> columns,
                               std::size_t rows)
    : columns_(std::move(columns)), rows_(rows) {}

double HistogramCache::compute_entropy(const std::vector<int>& subset) const {
  std::vector<unsigned __int128> keys(rows_, 0);
  unsigned __int128 radix = 1;
  for (int ci : subset) {
    const auto& col = *columns_[static_cast<std::size_t>(ci)];
    for (std::size_t r = 0; r < rows_; ++r) {
      keys[r] += radix * static_cast<unsigned __int128>(col.bin_ids[r]);
    }
    radix *= static_cast<unsigned __int128>(col.n_bins);
  }
  return entropy_from_keys(keys);
}

double HistogramCache::entropy_bits(const std::vector<int>& subset) {
  {
    std::shared_lock lock(mutex_);
    auto it = cache_.find(subset);
    if (it != cache_.end()) {
      ++hits_;
      return it->second;
    }
  }
  double h = compute_entropy(subset);
  std::unique_lock lock(mutex_);
  ++misses_;
  cache_.emplace(subset, h);
  return h;
}

double HistogramCache::mi_bits(int target, const std::vector<int>& parents) {
  if (parents.empty()) return 0.0;
  std::vector<int> t{target};
  std::vector<int> joint(parents);
  joint.push_back(target);
  std::sort(joint.begin(), joint.end());
  double mi = entropy_bits(t) + entropy_bits(parents) - entropy_bits(joint);
  return mi < 0.0 ? 0.0 : mi;  // guard the subtraction against roundoff
}

double mutual_information(const DiscretizedColumn& target,
                          const std::vector<const DiscretizedColumn*>& parents) {
  if (parents.empty()) return 0.0;
  std::vector<const DiscretizedColumn*> cols;
  cols.push_back(&target);
  for (const auto* p : parents) {
    if (p->bin_ids.size() != target.bin_ids.size()) {
      throw_invalid("mutual_information requires equal-length columns");
    }
    cols.push_back(p);
  }
  HistogramCache cache(cols, target.bin_ids.size());
  std::vector<int> parent_idx;
  for (int i = 1; i <= static_cast<int>(parents.size()); ++i) parent_idx.push_back(i);
  return cache.mi_bits(0, parent_idx);
}

double mi_score_sensitivity(std::size_t n_rows) {
  if (n_rows < 2) {
    throw_invalid("private dependency inference needs at least 2 rows");
  }
  double n = static_cast<double>(n_rows);
  return (2.0 / n) * std::log2((n + 1.0) / 2.0) +
         ((n - 1.0) / n) * std::log2((n + 1.0) / (n - 1.0));
}

// --- greedy inference ------------------------------------------------------

namespace {

struct GreedyState {
  std::vector<DiscretizedColumn> discretized;
  std::unique_ptr<HistogramCache> cache;
  std::vector<int> visited;    // schema indices in visit order
  std::vector<bool> is_visited;
  std::vector<double> step_epsilons;  // per selection event, compensated
};

GreedyState prepare(const Table& table, const Bounds& bounds,
                    const InferOptions& options) {
  const std::size_t k = table.schema.size();
  if (k < 2) throw_invalid("dependency inference needs at least 2 columns");
  if (options.epsilon.has_value() && !(*options.epsilon > 0.0)) {
    throw_invalid("epsilon must be positive");
  }

  GreedyState st;
  st.discretized.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    st.discretized.push_back(discretize(table.columns[i], table.schema.columns[i].type,
                                        bounds.columns[i], options.n_bins,
                                        table.schema.columns[i].name));
  }
  std::vector<const DiscretizedColumn*> ptrs;
  for (const auto& d : st.discretized) ptrs.push_back(&d);
  st.cache = std::make_unique<HistogramCache>(std::move(ptrs), table.row_count());
  st.is_visited.assign(k, false);

  if (options.epsilon.has_value()) {
    mi_score_sensitivity(table.row_count());  // validates n >= 2
    const std::size_t steps = k - 1;
    double base = *options.epsilon / static_cast<double>(steps);
    double assigned = 0.0;
    st.step_epsilons.resize(steps);
    for (std::size_t i = 0; i + 1 < steps; ++i) {
      st.step_epsilons[i] = base;
      assigned += base;
    }
    st.step_epsilons[steps - 1] = *options.epsilon - assigned;
  }
  return st;
}

void mark_visited(GreedyState& st, int column) {
  st.visited.push_back(column);
  st.is_visited[static_cast<std::size_t>(column)] = true;
}

std::optional<double> step_epsilon(const GreedyState& st, std::size_t step) {
  if (st.step_epsilons.empty()) return std::nullopt;
  return st.step_epsilons[step];
}

// Lexicographic m-combinations of `pool` (already sorted ascending).
void for_each_combination(const std::vector<int>& pool, int m,
                          const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> combo(static_cast<std::size_t>(m));
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) idx[static_cast<std::size_t>(i)] = i;
  const int n = static_cast<int>(pool.size());
  for (;;) {
    for (int i = 0; i < m; ++i) {
      combo[static_cast<std::size_t>(i)] = pool[static_cast<std::size_t>(idx[static_cast<std::size_t>(i)])];
    }
    fn(combo);
    int i = m - 1;
    while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - m + i) --i;
    if (i < 0) break;
    ++idx[static_cast<std::size_t>(i)];
    for (int j = i + 1; j < m; ++j) {
      idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

}  // namespace

InferResult infer_network(const Table& table, const Bounds& bounds,
                          const InferOptions& options, Rng& rng) {
  if (options.n_parents < 1) throw_invalid("n_parents must be at least 1");
  const std::size_t k = table.schema.size();
  GreedyState st = prepare(table, bounds, options);
  const double sensitivity =
      options.epsilon.has_value() ? mi_score_sensitivity(table.row_count()) : 1.0;

  InferResult result;
  // The first column is a uniform pick: 0-DP, no budget spent.
  mark_visited(st, static_cast<int>(rng.uniform_index(k)));
  result.dependency.parents[table.schema.columns[static_cast<std::size_t>(st.visited[0])].name] = {};

  struct Candidate {
    int column;
    std::vector<int> parents;  // schema indices, ascending
  };

  for (std::size_t step = 0; st.visited.size() < k; ++step) {
    std::vector<int> pool(st.visited);
    std::sort(pool.begin(), pool.end());
    const int m = std::min<int>(options.n_parents, static_cast<int>(pool.size()));

    std::vector<Candidate> candidates;
    for (std::size_t x = 0; x < k; ++x) {
      if (st.is_visited[x]) continue;
      for_each_combination(pool, m, [&](const std::vector<int>& combo) {
        candidates.push_back({static_cast<int>(x), combo});
      });
    }
    if (candidates.size() > options.max_candidates) {
      // Uniform subsample; partial Fisher-Yates keeps it one pass.
      for (std::size_t i = 0; i < options.max_candidates; ++i) {
        std::size_t j = i + rng.uniform_index(candidates.size() - i);
        std::swap(candidates[i], candidates[j]);
      }
      candidates.resize(options.max_candidates);
    }

    std::vector<double> scores(candidates.size());
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      scores[i] = st.cache->mi_bits(candidates[i].column, candidates[i].parents);
    }
    std::size_t chosen = exponential_select(scores, sensitivity,
                                            step_epsilon(st, step), rng);

    const Candidate& sel = candidates[chosen];
    const auto& name = table.schema.columns[static_cast<std::size_t>(sel.column)].name;
    std::vector<std::string> parent_names;
    for (int p : sel.parents) {
      parent_names.push_back(table.schema.columns[static_cast<std::size_t>(p)].name);
    }
    result.dependency.parents[name] = std::move(parent_names);
    mark_visited(st, sel.column);
    if (auto eps = step_epsilon(st, step)) {
      result.charges.push_back({"dependency:" + name, *eps});
    }
  }

  for (int v : st.visited) {
    result.dependency.visit_order.push_back(
        table.schema.columns[static_cast<std::size_t>(v)].name);
  }
  result.cache_hits = st.cache->hits();
  result.cache_misses = st.cache->misses();
  result.dependency.validate(table.schema);
  return result;
}

InferResult infer_chain(const Table& table, const Bounds& bounds,
                        const InferOptions& options, Rng& rng) {
  const std::size_t k = table.schema.size();
  GreedyState st = prepare(table, bounds, options);
  const double sensitivity =
      options.epsilon.has_value() ? mi_score_sensitivity(table.row_count()) : 1.0;

  InferResult result;
  mark_visited(st, static_cast<int>(rng.uniform_index(k)));
  result.dependency.parents[table.schema.columns[static_cast<std::size_t>(st.visited[0])].name] = {};

  for (std::size_t step = 0; st.visited.size() < k; ++step) {
    std::vector<int> pool(st.visited);
    std::sort(pool.begin(), pool.end());

    std::vector<int> unvisited;
    for (std::size_t x = 0; x < k; ++x) {
      if (!st.is_visited[x]) unvisited.push_back(static_cast<int>(x));
    }
    std::vector<double> scores(unvisited.size());
    for (std::size_t i = 0; i < unvisited.size(); ++i) {
      scores[i] = st.cache->mi_bits(unvisited[i], pool);
    }
    std::size_t chosen = exponential_select(scores, sensitivity,
                                            step_epsilon(st, step), rng);

    int col = unvisited[chosen];
    const auto& name = table.schema.columns[static_cast<std::size_t>(col)].name;
    std::vector<std::string> parent_names;
    for (int p : st.visited) {
      parent_names.push_back(table.schema.columns[static_cast<std::size_t>(p)].name);
    }
    result.dependency.parents[name] = std::move(parent_names);
    mark_visited(st, col);
    if (auto eps = step_epsilon(st, step)) {
      result.charges.push_back({"dependency:" + name, *eps});
    }
  }

  for (int v : st.visited) {
    result.dependency.visit_order.push_back(
        table.schema.columns[static_cast<std::size_t>(v)].name);
  }
  result.cache_hits = st.cache->hits();
  result.cache_misses = st.cache->misses();
  result.dependency.validate(table.schema);
  return result;
}

}  // namespace dpart
