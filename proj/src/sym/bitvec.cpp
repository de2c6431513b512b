#include "eosscan/sym/bitvec.hpp"

#include <stdexcept>

namespace eosscan::sym {
namespace {

size_t word_count(uint32_t width)
{
    return (width + 63) / 64;
}

}  // namespace

BitVec::BitVec(uint32_t width, uint64_t value) : width_(width), words_(word_count(width), 0)
{
    if (!words_.empty())
        words_[0] = value;
    normalize();
}

BitVec BitVec::from_words(uint32_t width, std::vector<uint64_t> words)
{
    BitVec b;
    b.width_ = width;
    b.words_ = std::move(words);
    b.words_.resize(word_count(width), 0);
    b.normalize();
    return b;
}

BitVec BitVec::from_bytes_le(std::span<const uint8_t> bytes)
{
    BitVec b;
    b.width_ = static_cast<uint32_t>(bytes.size() * 8);
    b.words_.assign(word_count(b.width_), 0);
    for (size_t i = 0; i < bytes.size(); ++i)
        b.words_[i / 8] |= uint64_t{bytes[i]} << (8 * (i % 8));
    return b;
}

BitVec BitVec::ones(uint32_t width)
{
    return from_words(width, std::vector<uint64_t>(word_count(width), ~uint64_t{0}));
}

BitVec BitVec::concat(const BitVec& high, const BitVec& low)
{
    BitVec out;
    out.width_ = high.width_ + low.width_;
    out.words_ = low.words_;
    out.words_.resize(word_count(out.width_), 0);
    const uint32_t shift = low.width_;
    const uint32_t word = shift / 64;
    const uint32_t bit = shift % 64;
    for (size_t i = 0; i < high.words_.size(); ++i)
    {
        const uint64_t w = high.words_[i];
        if (word + i < out.words_.size())
            out.words_[word + i] |= w << bit;
        if (bit != 0 && word + i + 1 < out.words_.size())
            out.words_[word + i + 1] |= w >> (64 - bit);
    }
    out.normalize();
    return out;
}

int64_t BitVec::to_i64() const noexcept
{
    const uint64_t v = to_u64();
    if (width_ == 0 || width_ >= 64)
        return static_cast<int64_t>(v);
    const uint64_t sign = uint64_t{1} << (width_ - 1);
    return static_cast<int64_t>((v ^ sign) - sign);
}

bool BitVec::bit(uint32_t i) const noexcept
{
    if (i >= width_)
        return false;
    return (words_[i / 64] >> (i % 64)) & 1;
}

uint8_t BitVec::byte(uint32_t i) const noexcept
{
    const uint32_t bitpos = i * 8;
    if (bitpos >= width_)
        return 0;
    return static_cast<uint8_t>(words_[bitpos / 64] >> (bitpos % 64));
}

bool BitVec::is_zero() const noexcept
{
    for (auto w : words_)
        if (w != 0)
            return false;
    return true;
}

BitVec BitVec::extract(uint32_t hi, uint32_t lo) const
{
    if (hi < lo || hi >= width_)
        throw std::out_of_range("bitvector extract out of range");
    const uint32_t width = hi - lo + 1;
    std::vector<uint64_t> out(word_count(width), 0);
    const uint32_t word = lo / 64;
    const uint32_t bit = lo % 64;
    for (size_t i = 0; i < out.size(); ++i)
    {
        uint64_t w = 0;
        if (word + i < words_.size())
            w = words_[word + i] >> bit;
        if (bit != 0 && word + i + 1 < words_.size())
            w |= words_[word + i + 1] << (64 - bit);
        out[i] = w;
    }
    return from_words(width, std::move(out));
}

std::string BitVec::to_hex() const
{
    static constexpr char digits[] = "0123456789abcdef";
    std::string s;
    const uint32_t nibbles = (width_ + 3) / 4;
    for (uint32_t n = nibbles; n-- > 0;)
    {
        const uint32_t pos = n * 4;
        const unsigned v = static_cast<unsigned>(words_[pos / 64] >> (pos % 64)) & 0xF;
        s += digits[v];
    }
    return "0x" + (s.empty() ? std::string("0") : s);
}

size_t BitVec::hash() const noexcept
{
    size_t h = width_ * 0x9E3779B97F4A7C15ull;
    for (auto w : words_)
        h = (h ^ w) * 0x100000001B3ull + (h >> 29);
    return h;
}

void BitVec::normalize()
{
    if (width_ % 64 != 0 && !words_.empty())
        words_.back() &= (uint64_t{1} << (width_ % 64)) - 1;
}

}  // namespace eosscan::sym
