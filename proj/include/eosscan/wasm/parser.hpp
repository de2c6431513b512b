#pragma once

#include <vector>

#include "eosscan/wasm/module.hpp"

namespace eosscan::wasm {

/// Decode a version-1 Wasm binary. Throws MalformedBinary / UnsupportedVersion.
WasmModule parse_module(bytes_view input);

/// Decode a function body's expression into instructions, with block openers
/// linked to their `else`/`end`. Throws MalformedBinary on unknown opcodes,
/// unbalanced nesting, or a missing terminal `end`.
std::vector<Instruction> decode_function_body(const FunctionBody& body);

/// Decode a constant initializer expression (single instruction + `end`).
Instruction decode_init_expr(Reader& in);

}  // namespace eosscan::wasm
