#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpart/rng.hpp"
#include "json.hpp"

namespace dpart {

// Total epsilon for the fitting step; absent means non-private mode, in
// which every mechanism degrades to its exact counterpart.
struct PrivacyBudget {
  std::optional<double> epsilon;
};

// Optional user split: a fraction of the total for the dependency step plus
// positive per-column weights for the methods step. Unlisted columns weigh 1.
struct BudgetSplit {
  std::optional<double> dependency_share;        // in [0, 1]
  std::map<std::string, double> method_weights;  // column -> positive weight
};

BudgetSplit budget_split_from_json(const nlohmann::json& doc);

struct LedgerEntry {
  std::string label;
  double epsilon = 0.0;
};

// Sequential-composition ledger: one entry per budget-consuming event.
struct BudgetLedger {
  std::optional<double> total;
  std::vector<LedgerEntry> entries;

  double spent() const;
  void charge(std::string label, double epsilon);
};

double laplace_scale(double sensitivity, double epsilon);

// value + Laplace(sensitivity/epsilon); unchanged when epsilon is absent or
// sensitivity is zero.
double laplace_noise(double value, double sensitivity, std::optional<double> epsilon,
                     Rng& rng);

// Index selected with probability proportional to exp(eps * score / (2 * sens));
// argmax with first-index tie-break when epsilon is absent.
std::size_t exponential_select(std::span<const double> scores, double sensitivity,
                               std::optional<double> epsilon, Rng& rng);

struct BudgetAllocation {
  std::optional<double> dependency;
  std::vector<std::optional<double>> per_column;  // aligned with the input names
  BudgetLedger ledger;                            // empty, total recorded
};

// Defaults: the dependency step gets half the budget when it consumes any,
// the rest is divided equally across columns. An explicit split overrides
// both. Allocations sum to the total exactly (the last share absorbs
// rounding).
BudgetAllocation allocate_budget(const PrivacyBudget& total,
                                 const std::optional<BudgetSplit>& split,
                                 std::span<const std::string> columns,
                                 bool dependency_consumes);

}  // namespace dpart
