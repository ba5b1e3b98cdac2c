#pragma once

#include "memchain/core.hpp"

#include <json.hpp>

#include <string>
#include <string_view>

namespace memchain {

// Canonical documents:
//   {"loop":{"a":[...],"b":[...]}}
//   {"kernel":{"terms":[[c,alpha,k],...]}}
//   {"generator":{"n":n,"entries":[[row...],...]}}   (row-major A*)
// Readers also accept the inner object without its wrapper key.
// Malformed documents throw ParseError; well-formed documents that break a
// type invariant throw InvariantViolation.

nlohmann::json to_json(const LoopGenerator& gen);
nlohmann::json to_json(const ExpPolyKernel& K);
nlohmann::json to_json(const GeneratorMatrix& A);

LoopGenerator loop_from_json(const nlohmann::json& doc);
ExpPolyKernel kernel_from_json(const nlohmann::json& doc);
GeneratorMatrix generator_from_json(const nlohmann::json& doc);

std::string serialize(const LoopGenerator& gen);
std::string serialize(const ExpPolyKernel& K);
std::string serialize(const GeneratorMatrix& A);

/// Parses text, reporting syntax errors with line and column.
nlohmann::json parse_json(std::string_view text);

LoopGenerator deserialize_loop(std::string_view text);
ExpPolyKernel deserialize_kernel(std::string_view text);
GeneratorMatrix deserialize_generator(std::string_view text);

}  // namespace memchain
