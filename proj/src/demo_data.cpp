#include "dpart/demo_data.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "dpart/rng.hpp"

namespace dpart::demo {

namespace {

struct EducationLevel {
  const char* label;
  int years;
  double weight;
};

constexpr std::array<EducationLevel, 16> kEducation{{
    {"Preschool", 1, 0.004},   {"1st-4th", 2, 0.006},      {"5th-6th", 3, 0.011},
    {"7th-8th", 4, 0.021},     {"9th", 5, 0.017},          {"10th", 6, 0.028},
    {"11th", 7, 0.037},        {"12th", 8, 0.014},         {"HS-grad", 9, 0.318},
    {"Some-college", 10, 0.223}, {"Assoc-voc", 11, 0.042}, {"Assoc-acdm", 12, 0.032},
    {"Bachelors", 13, 0.164},  {"Masters", 14, 0.054},     {"Prof-school", 15, 0.017},
    {"Doctorate", 16, 0.012},
}};

constexpr std::array<const char*, 7> kMarital{{
    "Divorced", "Married-AF-spouse", "Married-civ-spouse", "Married-spouse-absent",
    "Never-married", "Separated", "Widowed",
}};

// Marital mixes per age band: young, middle, senior.
constexpr std::array<std::array<double, 7>, 3> kMaritalByBand{{
    {0.03, 0.005, 0.14, 0.02, 0.77, 0.025, 0.01},
    {0.14, 0.01, 0.55, 0.03, 0.21, 0.04, 0.02},
    {0.17, 0.005, 0.56, 0.02, 0.06, 0.025, 0.16},
}};

std::size_t draw_weighted(Rng& rng, const double* weights, std::size_t n) {
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += weights[i];
  double u = rng.uniform01() * total;
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    acc += weights[i];
    if (u <= acc) return i;
  }
  return n - 1;
}

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

Schema adult_like_schema() {
  return Schema{{
      {"age", ColumnType::Integer},
      {"education", ColumnType::Category},
      {"marital-status", ColumnType::Category},
      {"sex", ColumnType::Category},
      {"hours-per-week", ColumnType::Integer},
      {"income", ColumnType::Category},
  }};
}

Table adult_like(std::size_t rows, std::uint64_t seed) {
  Rng rng(seed);

  NumericalColumn age;
  CategoricalColumn education, marital, sex;
  NumericalColumn hours;
  CategoricalColumn income;
  age.reserve(rows);
  education.reserve(rows);
  marital.reserve(rows);
  sex.reserve(rows);
  hours.reserve(rows);
  income.reserve(rows);

  std::array<double, 16> edu_weights{};
  for (std::size_t i = 0; i < kEducation.size(); ++i) edu_weights[i] = kEducation[i].weight;

  for (std::size_t r = 0; r < rows; ++r) {
    double a = std::clamp(std::round(38.0 + 13.0 * rng.gaussian()), 17.0, 90.0);
    age.push_back(a);

    std::size_t edu = draw_weighted(rng, edu_weights.data(), edu_weights.size());
    education.push_back(kEducation[edu].label);
    int edu_years = kEducation[edu].years;

    std::size_t band = a < 26.0 ? 0 : (a < 55.0 ? 1 : 2);
    std::size_t mar = draw_weighted(rng, kMaritalByBand[band].data(), 7);
    marital.push_back(kMarital[mar]);
    bool married = mar == 1 || mar == 2;

    bool male = rng.uniform01() < 0.67;
    sex.push_back(male ? "Male" : "Female");

    double h = std::clamp(
        std::round(38.0 + 0.35 * edu_years + 11.5 * rng.gaussian()), 1.0, 99.0);
    hours.push_back(h);

    double z = -9.2 + 0.45 * edu_years + 0.05 * h + 0.018 * a +
               (male ? 0.5 : 0.0) + (married ? 1.0 : 0.0);
    income.push_back(rng.uniform01() < sigmoid(z) ? ">50K" : "<=50K");
  }

  Table table;
  table.schema = adult_like_schema();
  table.columns = {std::move(age),  std::move(education), std::move(marital),
                   std::move(sex),  std::move(hours),     std::move(income)};
  return table;
}

}  // namespace dpart::demo
