#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "eosscan/error.hpp"

namespace eosscan::wasm {

using bytes = std::vector<uint8_t>;
using bytes_view = std::span<const uint8_t>;

/// Bounds-checked cursor over a byte buffer. Every read past the end raises
/// MalformedBinary.
class Reader
{
public:
    explicit Reader(bytes_view data, size_t base_offset = 0) : data_(data), base_(base_offset) {}

    [[nodiscard]] bool empty() const noexcept { return pos_ >= data_.size(); }
    [[nodiscard]] size_t remaining() const noexcept { return data_.size() - pos_; }
    [[nodiscard]] size_t position() const noexcept { return pos_; }
    /// Position relative to the start of the enclosing file.
    [[nodiscard]] size_t absolute() const noexcept { return base_ + pos_; }

    uint8_t u8()
    {
        if (pos_ >= data_.size())
            throw MalformedBinary("unexpected end at offset " + std::to_string(absolute()));
        return data_[pos_++];
    }

    bytes_view take(size_t n)
    {
        if (n > remaining())
            throw MalformedBinary("length " + std::to_string(n) + " out of bounds at offset " +
                                  std::to_string(absolute()));
        auto out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    uint32_t u32_fixed()
    {
        auto b = take(4);
        return uint32_t{b[0]} | uint32_t{b[1]} << 8 | uint32_t{b[2]} << 16 | uint32_t{b[3]} << 24;
    }

    uint64_t u64_fixed()
    {
        auto b = take(8);
        uint64_t v = 0;
        for (int i = 7; i >= 0; --i)
            v = v << 8 | b[static_cast<size_t>(i)];
        return v;
    }

    template <typename T>
    T leb_unsigned()
    {
        constexpr unsigned bits = sizeof(T) * 8;
        T result = 0;
        for (unsigned shift = 0;; shift += 7)
        {
            const uint8_t byte = u8();
            if (shift >= bits)
                throw MalformedBinary("LEB128 overflow at offset " + std::to_string(absolute() - 1));
            const T chunk = byte & 0x7F;
            if (shift + 7 > bits && (chunk >> (bits - shift)) != 0)
                throw MalformedBinary("LEB128 overflow at offset " + std::to_string(absolute() - 1));
            result |= chunk << shift;
            if ((byte & 0x80) == 0)
                return result;
        }
    }

    template <typename T>
    T leb_signed()
    {
        using U = std::make_unsigned_t<T>;
        constexpr unsigned bits = sizeof(T) * 8;
        U result = 0;
        unsigned shift = 0;
        uint8_t byte = 0;
        do
        {
            byte = u8();
            if (shift >= bits)
                throw MalformedBinary("LEB128 overflow at offset " + std::to_string(absolute() - 1));
            const U chunk = byte & 0x7F;
            if (shift + 7 > bits)
            {
                // Unused high bits of the final byte must replicate the sign bit.
                const unsigned used = bits - shift;
                const uint8_t high = static_cast<uint8_t>((byte & 0x7F) >> (used - 1));
                const uint8_t expect = (high & 1) ? static_cast<uint8_t>(0x7F >> (used - 1)) : 0;
                if (high != expect)
                    throw MalformedBinary("LEB128 overflow at offset " + std::to_string(absolute() - 1));
            }
            result |= chunk << shift;
            shift += 7;
        } while (byte & 0x80);
        if (shift < bits && (byte & 0x40))
            result |= ~U{0} << shift;
        return static_cast<T>(result);
    }

    uint32_t u32() { return leb_unsigned<uint32_t>(); }
    int32_t s32() { return leb_signed<int32_t>(); }
    int64_t s64() { return leb_signed<int64_t>(); }
    int64_t s33() { return leb_signed<int64_t>(); }

    std::string name()
    {
        const auto len = u32();
        auto b = take(len);
        return {b.begin(), b.end()};
    }

private:
    bytes_view data_;
    size_t base_ = 0;
    size_t pos_ = 0;
};

inline void write_u32(bytes& out, uint64_t v)
{
    do
    {
        uint8_t byte = v & 0x7F;
        v >>= 7;
        if (v != 0)
            byte |= 0x80;
        out.push_back(byte);
    } while (v != 0);
}

inline void write_s64(bytes& out, int64_t v)
{
    bool more = true;
    while (more)
    {
        uint8_t byte = v & 0x7F;
        v >>= 7;
        if ((v == 0 && !(byte & 0x40)) || (v == -1 && (byte & 0x40)))
            more = false;
        else
            byte |= 0x80;
        out.push_back(byte);
    }
}

inline void write_name(bytes& out, std::string_view s)
{
    write_u32(out, s.size());
    out.insert(out.end(), s.begin(), s.end());
}

}  // namespace eosscan::wasm
