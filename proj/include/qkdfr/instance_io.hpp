#pragma once

#include <string>

#include "qkdfr/facial_reduction.hpp"

namespace qkdfr {

/// JSON document: {label, n, k, constraints: [{matrix, value}], kraus: [...],
/// pinching: [...], reduced_density?: {rho_A, n_B}}. Matrices are arrays of rows,
/// each entry a [re, im] pair. Doubles are written in shortest round-trip form.
std::string dump_instance(const ProblemInstance& inst);

/// Parses and validates; errors carry the offending field path (or line for syntax errors).
ProblemInstance parse_instance(const std::string& text, const std::string& source = "<input>");

ProblemInstance load_instance(const std::string& path);
void save_instance(const ProblemInstance& inst, const std::string& path);

}  // namespace qkdfr
