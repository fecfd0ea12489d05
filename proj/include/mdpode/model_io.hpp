#pragma once

#include <filesystem>
#include <string>

#include "mdpode/model.hpp"

namespace mdpode {

// Row sums in model files may deviate from one by at most this much.
inline constexpr double kFileRowSumTolerance = 1e-9;

// Parses the JSON model format:
//   {"xu_labels": [...], "xn_labels": [...], "Q0": [[...]], "R0": [[...]],
//    "utility": [...], "reference_state": "xu,xn" | <flat index>}
// Throws ParseError naming the offending field (or line for syntax errors),
// ValidationError when the assembled chain is not irreducible and aperiodic.
KLModel parse_model_json(const std::string& text);

// Throws IoError when the file cannot be read.
KLModel load_model_json(const std::filesystem::path& path);

// Inverse of parse_model_json. Numbers use shortest round-trip formatting.
std::string model_to_json(const KLModel& model);

// Two control states, trivial nature, R0 rows (1/2, 1/2), U = (1, 0) and the
// reference at the second state. Its optimal value function is h = (zeta, 0)
// with eta = log((e^zeta + 1) / 2).
KLModel symmetric_two_state_model();

}  // namespace mdpode
