#include "eosscan/wasm/opcode.hpp"

#include <array>

namespace eosscan::wasm {
namespace {

struct Tables
{
    std::array<std::optional<OpcodeInfo>, 256> single{};
    std::array<std::optional<OpcodeInfo>, 32> prefixed{};

    Tables()
    {
#define EOSSCAN_X(id, code, text, kind)                                              \
    if constexpr ((code) >= 0xFC00)                                                  \
        prefixed[(code) & 0xFF] = OpcodeInfo{Opcode::id, text, ImmKind::kind};       \
    else                                                                             \
        single[(code)] = OpcodeInfo{Opcode::id, text, ImmKind::kind};
        EOSSCAN_WASM_OPCODES(EOSSCAN_X)
#undef EOSSCAN_X
    }
};

const Tables& tables()
{
    static const Tables t;
    return t;
}

}  // namespace

std::optional<OpcodeInfo> lookup_opcode(uint16_t encoding) noexcept
{
    if (encoding >= 0xFC00)
    {
        const unsigned sub = encoding & 0xFF;
        if ((encoding & 0xFF00) != 0xFC00 || sub >= tables().prefixed.size())
            return std::nullopt;
        return tables().prefixed[sub];
    }
    if (encoding > 0xFF)
        return std::nullopt;
    return tables().single[encoding];
}

std::string_view mnemonic(Opcode op) noexcept
{
    if (auto info = lookup_opcode(static_cast<uint16_t>(op)))
        return info->mnemonic;
    return "<invalid>";
}

}  // namespace eosscan::wasm
