#include <cmath>

#include "doctest.h"
#include "dpart/engine.hpp"
#include "dpart/instances.hpp"
#include "testutil.hpp"

using namespace dpart;

namespace {

Table mixed_table() {
  Table t;
  t.schema = Schema{{{"age", ColumnType::Integer},
                     {"wage", ColumnType::Float},
                     {"sex", ColumnType::Category},
                     {"job", ColumnType::Category}}};
  NumericalColumn age, wage;
  CategoricalColumn sex, job;
  Rng rng(443);
  for (int i = 0; i < 150; ++i) {
    age.push_back(static_cast<double>(18 + rng.uniform_index(50)));
    wage.push_back(rng.uniform(1.0, 9.0));
    sex.push_back(rng.uniform01() < 0.5 ? "F" : "M");
    job.push_back(rng.uniform01() < 0.3 ? "tech" : (rng.uniform01() < 0.5 ? "sales" : "care"));
  }
  t.columns = {age, wage, sex, job};
  return t;
}

}  // namespace

TEST_CASE("independent preset: parentless histogram samplers with equal budget") {
  Table t = mixed_table();
  ModelSpec spec = independent_spec(1.0, infer_bounds(t));
  Rng rng(449);
  auto result = fit(t, spec, rng);

  CHECK(result.warnings.empty());
  for (const auto& m : result.model.methods) {
    CHECK(m->kind() == MethodKind::HistogramSampler);
    CHECK(m->parent_names().empty());
  }
  // The whole parents map is empty lists.
  for (const auto& [col, pars] : result.model.dependency.parents) {
    CHECK(pars.empty());
  }
  // No dependency budget; every column gets epsilon / k.
  for (const auto& e : result.model.ledger.entries) {
    CHECK(e.label.rfind("method:", 0) == 0);
    CHECK(e.epsilon == doctest::Approx(0.25).epsilon(1e-12));
  }
  CHECK(result.model.ledger.entries.size() == 4);
}

TEST_CASE("independent preset without epsilon keeps exact marginals") {
  Table t = mixed_table();
  ModelSpec spec = independent_spec(std::nullopt, infer_bounds(t));
  Rng rng(457);
  auto result = fit(t, spec, rng);
  // Exact empirical marginal for the sex column.
  double f_share = 0.0;
  for (const auto& v : t.categorical(2)) {
    if (v == "F") f_share += 1.0;
  }
  f_share /= static_cast<double>(t.row_count());
  auto probs = result.model.method_for("sex").to_json().at("probs").get<std::vector<double>>();
  CHECK(probs[0] == doctest::Approx(f_share).epsilon(1e-12));
}

TEST_CASE("privbayes preset: capped parents, conditional distributions, half budget") {
  Table t = mixed_table();
  ModelSpec spec = privbayes_spec(1.0, infer_bounds(t));
  CHECK(spec.n_parents == 2);
  Rng rng(461);
  auto result = fit(t, spec, rng);

  CHECK(result.warnings.empty());
  for (const auto& m : result.model.methods) {
    CHECK(m->kind() == MethodKind::ConditionalDistribution);
    CHECK(m->parent_names().size() <= 2);
  }
  // Dependency gets half; the four columns split the remaining half equally.
  double dep_total = 0.0, method_total = 0.0;
  for (const auto& e : result.model.ledger.entries) {
    if (e.label.rfind("dependency:", 0) == 0) {
      dep_total += e.epsilon;
    } else {
      CHECK(e.epsilon == doctest::Approx(0.5 / 4.0).epsilon(1e-9));
      method_total += e.epsilon;
    }
  }
  CHECK(dep_total == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(method_total == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("dp-synthpop preset: chain, typed regressions, histogram first column") {
  Table t = mixed_table();
  ModelSpec spec = dpsynthpop_spec(0.8, infer_bounds(t), t.schema);
  CHECK(spec.methods.at("age") == MethodKind::LinearRegression);
  CHECK(spec.methods.at("wage") == MethodKind::LinearRegression);
  CHECK(spec.methods.at("sex") == MethodKind::LogisticRegression);
  CHECK(spec.methods.at("job") == MethodKind::LogisticRegression);

  Rng rng(463);
  auto result = fit(t, spec, rng);
  CHECK(result.warnings.empty());

  const auto& order = result.model.dependency.visit_order;
  // Chain: the i-th visited column has exactly i - 1 parents (0-based: i).
  for (std::size_t i = 0; i < order.size(); ++i) {
    CHECK(result.model.dependency.parents_of(order[i]).size() == i);
  }
  // First visited column falls back to a parentless histogram sampler.
  const auto& first = result.model.method_for(order.front());
  CHECK(first.kind() == MethodKind::HistogramSampler);
  CHECK(first.parent_names().empty());
  // Later columns keep their type-mapped regressions.
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& m = result.model.method_for(order[i]);
    int idx = t.schema.index_of(order[i]);
    if (is_numerical(t.schema.columns[static_cast<std::size_t>(idx)].type)) {
      CHECK(m.kind() == MethodKind::LinearRegression);
    } else {
      CHECK(m.kind() == MethodKind::LogisticRegression);
    }
  }
}

TEST_CASE("presets fit random tables without further configuration") {
  Rng rng(467);
  for (int trial = 0; trial < 8; ++trial) {
    Schema schema = testutil::random_schema(rng, 2 + rng.uniform_index(4));
    Table t = testutil::random_table(schema, 80, rng);
    Bounds b = infer_bounds(t);
    std::optional<double> eps =
        trial % 2 == 0 ? std::optional<double>(1.0) : std::nullopt;

    for (int preset = 0; preset < 3; ++preset) {
      ModelSpec spec = preset == 0   ? independent_spec(eps, b)
                       : preset == 1 ? privbayes_spec(eps, b)
                                     : dpsynthpop_spec(eps, b, schema);
      Rng fit_rng(500 + static_cast<std::uint64_t>(trial * 3 + preset));
      auto result = fit(t, spec, fit_rng);
      Rng gen_rng(900 + static_cast<std::uint64_t>(trial));
      Table synth = generate(result.model, 50, gen_rng);
      CHECK(synth.row_count() == 50);
      validate_table_within_bounds(synth, result.model.bounds);
      if (eps.has_value()) {
        CHECK(std::fabs(result.model.ledger.spent() - *eps) <= 1e-12);
      }
    }
  }
}

TEST_CASE("independent generation never reads other columns") {
  Table t = mixed_table();
  ModelSpec spec = independent_spec(std::nullopt, infer_bounds(t));
  Rng rng(479);
  auto result = fit(t, spec, rng);
  // Structural guarantee: no fitted sampler declares parents, so generation
  // cannot consult other columns.
  for (const auto& m : result.model.methods) CHECK(m->parent_names().empty());
}

TEST_CASE("engine names map onto presets") {
  Schema schema{{{"a", ColumnType::Float}, {"b", ColumnType::Category}}};
  CHECK(spec_for_engine("independent", 1.0, std::nullopt, schema).independent);
  CHECK(spec_for_engine("privbayes", 1.0, std::nullopt, schema).infer ==
        ModelSpec::InferMode::Network);
  CHECK(spec_for_engine("dp-synthpop", 1.0, std::nullopt, schema).infer ==
        ModelSpec::InferMode::Chain);
  CHECK_THROWS_WITH_AS(spec_for_engine("magic", 1.0, std::nullopt, schema),
                       doctest::Contains("independent, privbayes, dp-synthpop"), Error);
}

TEST_CASE("model spec JSON: presets with overrides") {
  Schema schema{{{"a", ColumnType::Float}, {"b", ColumnType::Category}}};
  auto config = nlohmann::json::parse(R"({
    "engine": "privbayes",
    "epsilon": 2.5,
    "n_parents": 3,
    "methods": {"b": "histogram_sampler"},
    "budget_split": {"dependency": 0.25},
    "n_bins": 10
  })");
  ModelSpec spec = model_spec_from_json(config, schema);
  CHECK(spec.infer == ModelSpec::InferMode::Network);
  CHECK(spec.n_parents == 3);
  CHECK(*spec.epsilon == doctest::Approx(2.5));
  CHECK(spec.methods.at("b") == MethodKind::HistogramSampler);
  CHECK(*spec.budget_split->dependency_share == doctest::Approx(0.25));
  CHECK(spec.method_config.n_bins == 10);

  auto both = nlohmann::json::parse(R"({
    "dependency": {"visit_order": ["a","b"], "prediction_matrix": {"b": ["a"]}}
  })");
  ModelSpec conflicted = model_spec_from_json(both, schema);
  CHECK(conflicted.visit_order.has_value());
  CHECK(conflicted.prediction_matrix.has_value());
}
