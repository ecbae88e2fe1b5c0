#pragma once

#include <cstdint>

#include "dpart/data.hpp"

namespace dpart::demo {

// Simplified-Adult-style demo dataset: age, education, marital-status, sex,
// hours-per-week and a binary income target with education- and hours-driven
// class probabilities. Fully deterministic given the seed; used by the demo
// tooling and the evaluation suites in place of the original survey data,
// which is not bundled.
Schema adult_like_schema();
Table adult_like(std::size_t rows, std::uint64_t seed);

}  // namespace dpart::demo
