#include "dpart/mechanisms.hpp"

#include <algorithm>
#include <cmath>

#include "dpart/error.hpp"

namespace dpart {

double BudgetLedger::spent() const {
  double acc = 0.0;
  for (const auto& e : entries) acc += e.epsilon;
  return acc;
}

void BudgetLedger::charge(std::string label, double epsilon) {
  entries.push_back({std::move(label), epsilon});
}

double laplace_scale(double sensitivity, double epsilon) {
  if (!(epsilon > 0.0)) throw_invalid("epsilon must be positive");
  if (sensitivity < 0.0 || !std::isfinite(sensitivity)) {
    throw_invalid("sensitivity must be finite and nonnegative");
  }
  return sensitivity / epsilon;
}

double laplace_noise(double value, double sensitivity, std::optional<double> epsilon,
                     Rng& rng) {
  if (!epsilon.has_value() || sensitivity == 0.0) {
    if (sensitivity < 0.0 || !std::isfinite(sensitivity)) {
      throw_invalid("sensitivity must be finite and nonnegative");
    }
    return value;
  }
  return value + rng.laplace(laplace_scale(sensitivity, *epsilon));
}

std::size_t exponential_select(std::span<const double> scores, double sensitivity,
                               std::optional<double> epsilon, Rng& rng) {
  if (scores.empty()) throw_invalid("exponential_select needs at least one candidate");
  for (double s : scores) {
    if (!std::isfinite(s)) throw_invalid("exponential_select scores must be finite");
  }
  if (!epsilon.has_value()) {
    return static_cast<std::size_t>(
        std::max_element(scores.begin(), scores.end()) - scores.begin());
  }
  if (!(*epsilon > 0.0)) throw_invalid("epsilon must be positive");
  if (!(sensitivity > 0.0)) throw_invalid("sensitivity must be positive");

  // Shift by the max score so the exponentials cannot all underflow.
  double max_score = *std::max_element(scores.begin(), scores.end());
  double rate = *epsilon / (2.0 * sensitivity);
  std::vector<double> cdf(scores.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    acc += std::exp(rate * (scores[i] - max_score));
    cdf[i] = acc;
  }
  double u = rng.uniform01() * acc;
  return static_cast<std::size_t>(
      std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
}

BudgetSplit budget_split_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw_parse("budget split must be a JSON object");
  BudgetSplit split;
  for (const auto& [key, value] : doc.items()) {
    if (key == "dependency") {
      split.dependency_share = value.get<double>();
    } else if (key == "methods") {
      if (!value.is_object()) throw_parse("budget split \"methods\" must be an object");
      for (const auto& [col, w] : value.items()) {
        split.method_weights[col] = w.get<double>();
      }
    } else {
      throw_parse("unknown budget split key '" + key + "'");
    }
  }
  return split;
}

BudgetAllocation allocate_budget(const PrivacyBudget& total,
                                 const std::optional<BudgetSplit>& split,
                                 std::span<const std::string> columns,
                                 bool dependency_consumes) {
  BudgetAllocation out;
  out.per_column.resize(columns.size());

  if (split.has_value()) {
    if (split->dependency_share.has_value()) {
      double s = *split->dependency_share;
      if (!(s >= 0.0 && s <= 1.0)) {
        throw_invalid("dependency budget share must lie in [0, 1]");
      }
      if (s > 0.0 && !dependency_consumes) {
        throw_invalid(
            "budget split assigns epsilon to the dependency step, but the "
            "chosen dependency input does not consume any");
      }
    }
    for (const auto& [name, w] : split->method_weights) {
      if (std::find(columns.begin(), columns.end(), name) == columns.end()) {
        throw_invalid("budget split names unknown column '" + name + "'");
      }
      if (!(w > 0.0) || !std::isfinite(w)) {
        throw_invalid("budget weight for column '" + name + "' must be positive");
      }
    }
  }

  if (!total.epsilon.has_value()) {
    return out;  // non-private: every allocation stays absent
  }
  double eps = *total.epsilon;
  if (!(eps > 0.0) || !std::isfinite(eps)) throw_invalid("epsilon must be positive");
  out.ledger.total = eps;

  double dep_share = dependency_consumes ? 0.5 : 0.0;
  if (split.has_value() && split->dependency_share.has_value()) {
    dep_share = *split->dependency_share;
  }
  double dep_eps = dep_share * eps;
  double remaining = eps - dep_eps;
  if (dependency_consumes) out.dependency = dep_eps;

  if (columns.empty()) return out;

  std::vector<double> weights(columns.size(), 1.0);
  if (split.has_value()) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      auto it = split->method_weights.find(columns[i]);
      if (it != split->method_weights.end()) weights[i] = it->second;
    }
  }
  double weight_sum = 0.0;
  for (double w : weights) weight_sum += w;

  // The last column absorbs rounding so the shares sum to the total exactly.
  double assigned = 0.0;
  for (std::size_t i = 0; i + 1 < columns.size(); ++i) {
    double share = remaining * (weights[i] / weight_sum);
    out.per_column[i] = share;
    assigned += share;
  }
  out.per_column.back() = remaining - assigned;
  return out;
}

}  // namespace dpart
