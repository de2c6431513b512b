#pragma once

#include "eosscan/wasm/module.hpp"

namespace eosscan::wasm {

/// Encode a module back to the binary format. Sections are emitted in
/// `section_order` when it is populated, otherwise in canonical order; all
/// integers use the shortest LEB128 form.
bytes write_module(const WasmModule& module);

/// Encode one instruction (opcode + immediates).
void write_instruction(bytes& out, const Instruction& instr);

}  // namespace eosscan::wasm
