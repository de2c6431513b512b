#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace eosscan::wasm {
struct WasmModule;
}

namespace eosscan::eosio {

/// Packs an account/action name into its 64-bit form (the `N()` macro).
/// Throws InvalidName for characters outside `.1-5a-z`, more than 13 characters,
/// or a 13th character beyond `j`.
uint64_t name_encode(std::string_view text);
/// Inverse of name_encode; trailing dots are trimmed.
std::string name_decode(uint64_t value);
bool is_valid_name(std::string_view text) noexcept;

/// Index of the exported `apply(i64, i64, i64)`; NoDispatcher otherwise.
uint32_t find_apply(const wasm::WasmModule& module);

namespace names {
inline const uint64_t transfer = 0xCDCD3C2D57000000ull;
}

}  // namespace eosscan::eosio
