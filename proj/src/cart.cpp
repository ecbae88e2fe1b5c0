#include <algorithm>
#include <numeric>

#include "dpart/error.hpp"
#include "dpart/eval.hpp"

namespace dpart {

namespace {

double gini(const std::vector<std::size_t>& counts, std::size_t total) {
  if (total == 0) return 0.0;
  double acc = 0.0;
  for (std::size_t c : counts) {
    double p = static_cast<double>(c) / static_cast<double>(total);
    acc += p * p;
  }
  return 1.0 - acc;
}

std::int32_t majority(const std::vector<std::size_t>& counts) {
  std::size_t best = 0;
  for (std::size_t c = 1; c < counts.size(); ++c) {
    if (counts[c] > counts[best]) best = c;  // ties keep the lower class
  }
  return static_cast<std::int32_t>(best);
}

}  // namespace

DecisionTree DecisionTree::fit(const std::vector<std::vector<double>>& rows,
                               const std::vector<std::int32_t>& labels, int n_classes,
                               const CartConfig& config) {
  if (rows.size() != labels.size() || rows.empty()) {
    throw_invalid("decision tree needs matching non-empty rows and labels");
  }
  const std::size_t d = rows.front().size();

  DecisionTree tree;
  struct Work {
    std::vector<std::size_t> indices;
    int depth;
    int node;
  };

  auto class_counts = [&](const std::vector<std::size_t>& idx) {
    std::vector<std::size_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t i : idx) ++counts[static_cast<std::size_t>(labels[i])];
    return counts;
  };

  std::vector<Work> stack;
  {
    std::vector<std::size_t> all(rows.size());
    std::iota(all.begin(), all.end(), 0);
    tree.nodes_.push_back({});
    stack.push_back({std::move(all), 0, 0});
  }

  while (!stack.empty()) {
    Work work = std::move(stack.back());
    stack.pop_back();
    Node& node = tree.nodes_[static_cast<std::size_t>(work.node)];

    auto counts = class_counts(work.indices);
    const std::size_t n = work.indices.size();
    double node_impurity = gini(counts, n);
    node.label = majority(counts);

    if (work.depth >= config.max_depth || node_impurity == 0.0 ||
        n < 2 * static_cast<std::size_t>(config.min_leaf)) {
      continue;
    }

    // Best (feature, threshold) by weighted gini; scanning features then
    // thresholds in ascending order makes the tie-break deterministic.
    int best_feature = -1;
    double best_threshold = 0.0;
    double best_impurity = node_impurity;
    std::vector<std::size_t> sorted(work.indices);
    for (std::size_t f = 0; f < d; ++f) {
      std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
        return rows[a][f] < rows[b][f];
      });
      std::vector<std::size_t> left_counts(static_cast<std::size_t>(n_classes), 0);
      std::vector<std::size_t> right_counts = counts;
      for (std::size_t i = 0; i + 1 < n; ++i) {
        auto cls = static_cast<std::size_t>(labels[sorted[i]]);
        ++left_counts[cls];
        --right_counts[cls];
        std::size_t nl = i + 1;
        std::size_t nr = n - nl;
        if (rows[sorted[i]][f] == rows[sorted[i + 1]][f]) continue;
        if (nl < static_cast<std::size_t>(config.min_leaf) ||
            nr < static_cast<std::size_t>(config.min_leaf)) {
          continue;
        }
        double weighted = (static_cast<double>(nl) * gini(left_counts, nl) +
                           static_cast<double>(nr) * gini(right_counts, nr)) /
                          static_cast<double>(n);
        if (weighted < best_impurity) {
          best_impurity = weighted;
          best_feature = static_cast<int>(f);
          best_threshold = rows[sorted[i]][f] +
                           0.5 * (rows[sorted[i + 1]][f] - rows[sorted[i]][f]);
        }
      }
    }
    if (best_feature < 0) continue;

    std::vector<std::size_t> left, right;
    for (std::size_t i : work.indices) {
      (rows[i][static_cast<std::size_t>(best_feature)] <= best_threshold ? left : right)
          .push_back(i);
    }
    int left_node = static_cast<int>(tree.nodes_.size());
    int right_node = left_node + 1;
    tree.nodes_.push_back({});
    tree.nodes_.push_back({});
    // Reference may have been invalidated by the push_backs; re-index.
    Node& parent = tree.nodes_[static_cast<std::size_t>(work.node)];
    parent.feature = best_feature;
    parent.threshold = best_threshold;
    parent.left = left_node;
    parent.right = right_node;
    stack.push_back({std::move(right), work.depth + 1, right_node});
    stack.push_back({std::move(left), work.depth + 1, left_node});
  }
  return tree;
}

std::int32_t DecisionTree::predict(const std::vector<double>& row) const {
  int cur = 0;
  for (;;) {
    const Node& node = nodes_[static_cast<std::size_t>(cur)];
    if (node.feature < 0) return node.label;
    cur = row[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                        : node.right;
  }
}

}  // namespace dpart
