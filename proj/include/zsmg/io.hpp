#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include "json.hpp"
#include "zsmg/function_class.hpp"
#include "zsmg/game.hpp"
#include "zsmg/instances.hpp"
#include "zsmg/oracle.hpp"

namespace zsmg {

using Json = nlohmann::json;

// {"H","num_states","num_a","num_b","initial_state","reward":[h][x][a][b],
//  "transition":[h][x][a][b][x']}
Json game_to_json(const TabularMG& mg);
// Throws ValidationError on missing keys, ragged arrays or invariant failures.
TabularMG game_from_json(const Json& j);

// {"beta","layers":[h][k][x][a][b],"prior":[h][k]}
Json class_to_json(const FunctionClass& fc);
// Shapes are taken from the arrays; throws ValidationError.
FunctionClass class_from_json(const Json& j);

Json linear_spec_to_json(const LinearMGSpec& spec);
Json nash_to_json(const NashSolution& nash);
Json layer_to_json(const LayerTable& t);

// Sorted keys, two-space indent, shortest round-trip floats, trailing newline.
std::string canonical_dump(const Json& j);

// 64-bit FNV-1a as 16 lowercase hex digits.
std::string fnv1a_hex(std::string_view bytes);

// Throws std::runtime_error on I/O failure and ValidationError on bad JSON.
Json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace zsmg
