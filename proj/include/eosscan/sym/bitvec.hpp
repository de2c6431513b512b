#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace eosscan::sym {

/// Concrete bitvector of arbitrary width, stored as little-endian 64-bit limbs
/// with the bits above `width` kept clear.
class BitVec
{
public:
    BitVec() = default;
    BitVec(uint32_t width, uint64_t value);

    static BitVec from_words(uint32_t width, std::vector<uint64_t> words);
    /// Byte i of the input becomes bits [8i, 8i+8).
    static BitVec from_bytes_le(std::span<const uint8_t> bytes);
    static BitVec ones(uint32_t width);
    static BitVec concat(const BitVec& high, const BitVec& low);

    [[nodiscard]] uint32_t width() const noexcept { return width_; }
    [[nodiscard]] const std::vector<uint64_t>& words() const noexcept { return words_; }
    /// Low 64 bits.
    [[nodiscard]] uint64_t to_u64() const noexcept { return words_.empty() ? 0 : words_[0]; }
    /// Value sign-extended from `width` (widths up to 64).
    [[nodiscard]] int64_t to_i64() const noexcept;
    [[nodiscard]] bool bit(uint32_t i) const noexcept;
    [[nodiscard]] uint8_t byte(uint32_t i) const noexcept;
    [[nodiscard]] bool is_zero() const noexcept;
    /// Bits [lo, hi] inclusive.
    [[nodiscard]] BitVec extract(uint32_t hi, uint32_t lo) const;
    [[nodiscard]] std::string to_hex() const;
    [[nodiscard]] size_t hash() const noexcept;

    bool operator==(const BitVec&) const = default;

private:
    void normalize();

    uint32_t width_ = 0;
    std::vector<uint64_t> words_;
};

}  // namespace eosscan::sym
