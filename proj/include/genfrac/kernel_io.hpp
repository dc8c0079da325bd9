#pragma once

#include <cstdint>
#include <string>

#include "json.hpp"

#include "genfrac/kernel_symbols.hpp"

namespace genfrac {

/// Kernel specs on disk:
///   {"family": "caputo", "alpha": 0.5}
///   {"family": "distributed_order", "weight": {"kind": "constant", "value": 1}}
///   {"family": "distributed_order", "weight": {"kind": "poly", "coefficients": [1, 0.5]}}
///   {"family": "tabulated", "log_p": [...], "log_K": [...]}
/// "label" is optional everywhere. Malformed input throws std::invalid_argument.
KernelSpec kernel_from_json(const nlohmann::json& j);

/// Custom weights have no serialized form and are rejected.
nlohmann::json kernel_to_json(const KernelSpec& kernel);

/// Reads a spec file, or parses the argument itself when it starts with '{'.
KernelSpec load_kernel(const std::string& path_or_json);

/// FNV-1a of the canonical dump (sorted keys, shortest round-trip doubles),
/// as 16 hex digits.
std::string kernel_hash(const KernelSpec& kernel);
std::uint64_t fnv1a64(const std::string& bytes);

} // namespace genfrac
