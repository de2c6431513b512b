#include "eosscan/eosio/name.hpp"

#include "eosscan/error.hpp"
#include "eosscan/wasm/module.hpp"

namespace eosscan::eosio {

namespace {

constexpr std::string_view charmap = ".12345abcdefghijklmnopqrstuvwxyz";

int symbol_of(char c) noexcept
{
    if (c >= 'a' && c <= 'z')
        return c - 'a' + 6;
    if (c >= '1' && c <= '5')
        return c - '1' + 1;
    if (c == '.')
        return 0;
    return -1;
}

}  // namespace

bool is_valid_name(std::string_view text) noexcept
{
    if (text.size() > 13)
        return false;
    for (size_t i = 0; i < text.size(); ++i)
    {
        const int s = symbol_of(text[i]);
        if (s < 0 || (i == 12 && s > 15))
            return false;
    }
    return true;
}

uint64_t name_encode(std::string_view text)
{
    if (!is_valid_name(text))
        throw InvalidName("invalid EOSIO name '" + std::string(text) + "'");
    uint64_t value = 0;
    for (size_t i = 0; i < 12; ++i)
    {
        const uint64_t s = i < text.size() ? static_cast<uint64_t>(symbol_of(text[i])) : 0;
        value |= s << (64 - 5 * (i + 1));
    }
    if (text.size() == 13)
        value |= static_cast<uint64_t>(symbol_of(text[12]));
    return value;
}

std::string name_decode(uint64_t value)
{
    std::string out(13, '.');
    out[12] = charmap[value & 0x0F];
    uint64_t rest = value >> 4;
    for (int i = 11; i >= 0; --i)
    {
        out[static_cast<size_t>(i)] = charmap[rest & 0x1F];
        rest >>= 5;
    }
    const auto last = out.find_last_not_of('.');
    out.erase(last == std::string::npos ? 0 : last + 1);
    return out;
}

uint32_t find_apply(const wasm::WasmModule& module)
{
    const auto* e = module.find_export("apply");
    if (!e || e->kind != wasm::ExternalKind::function)
        throw NoDispatcher("no exported apply function");
    if (e->index >= module.function_count() || module.is_imported_function(e->index))
        throw NoDispatcher("apply export does not name a local function");
    const auto& sig = module.function_signature(e->index);
    const wasm::FuncSignature expected{{wasm::ValType::i64, wasm::ValType::i64, wasm::ValType::i64}, {}};
    if (sig != expected)
        throw NoDispatcher("apply has the wrong signature");
    return e->index;
}

}  // namespace eosscan::eosio
