#include <gtest/gtest.h>

#include <random>

#include "eosscan/eosio/name.hpp"
#include "eosscan/error.hpp"
#include "fixtures.hpp"

using namespace eosscan;
using namespace eosscan::wasm;

namespace {

// Reference encoder written from the documented packing: each character is a
// 5-bit symbol ('.'=0, '1'-'5'=1..5, 'a'-'z'=6..31), first char in the top bits,
// 12 symbols of 5 bits then a final 4-bit symbol. Built as a bit string.
uint64_t reference_encode(const std::string& s)
{
    const std::string alphabet = ".12345abcdefghijklmnopqrstuvwxyz";
    std::string bits;
    for (size_t i = 0; i < 13; ++i)
    {
        const size_t sym = i < s.size() ? alphabet.find(s[i]) : 0;
        const int n = i == 12 ? 4 : 5;
        for (int b = n - 1; b >= 0; --b)
            bits.push_back(((sym >> b) & 1) ? '1' : '0');
    }
    return std::stoull(bits, nullptr, 2);
}

std::string random_name(std::mt19937_64& rng)
{
    const std::string alphabet = ".12345abcdefghijklmnopqrstuvwxyz";
    const size_t len = 1 + rng() % 13;
    std::string s;
    for (size_t i = 0; i < len; ++i)
        s.push_back(i == 12 ? alphabet[rng() % 16] : alphabet[rng() % 32]);
    while (!s.empty() && s.back() == '.')
        s.pop_back();
    return s;
}

}  // namespace

TEST(reference_encode, known_values)
{
    EXPECT_EQ(reference_encode("transfer"), 0xCDCD3C2D57000000ull);
    EXPECT_EQ(reference_encode(""), 0u);
}

TEST(name_encode, examples)
{
    EXPECT_EQ(eosio::name_encode(""), 0u);
    EXPECT_EQ(eosio::name_encode("transfer"), 0xCDCD3C2D57000000ull);
    EXPECT_EQ(eosio::name_encode("transfer"), eosio::names::transfer);
    EXPECT_EQ(eosio::name_encode("eosio.token"), reference_encode("eosio.token"));
    EXPECT_EQ(eosio::name_decode(eosio::name_encode("eosio.token")), "eosio.token");
    EXPECT_EQ(eosio::name_decode(0), "");
}

TEST(name_encode, invalid)
{
    EXPECT_THROW(eosio::name_encode("Transfer"), InvalidName);
    EXPECT_THROW(eosio::name_encode("abcdefghijklmn"), InvalidName);
    EXPECT_THROW(eosio::name_encode("aaaaaaaaaaaaz"), InvalidName);
    EXPECT_THROW(eosio::name_encode("a6"), InvalidName);
    EXPECT_FALSE(eosio::is_valid_name("hello world"));
    EXPECT_TRUE(eosio::is_valid_name("eosio.token"));
}

TEST(name_encode, round_trip_matches_reference)
{
    std::mt19937_64 rng(42);
    for (int i = 0; i < 10000; ++i)
    {
        const auto s = random_name(rng);
        const auto v = eosio::name_encode(s);
        ASSERT_EQ(v, reference_encode(s)) << s;
        ASSERT_EQ(eosio::name_decode(v), s);
        for (char ch : eosio::name_decode(rng()))
            ASSERT_NE(std::string(".12345abcdefghijklmnopqrstuvwxyz").find(ch), std::string::npos);
    }
}

TEST(find_apply, export_at_index_5)
{
    ModuleBuilder b;
    for (int i = 0; i < 5; ++i)
        b.add_function(fixtures::sig({}), {}, CodeBuilder().finish());
    const auto f = b.add_function(fixtures::apply_sig, {}, CodeBuilder().finish());
    b.export_function("apply", f);
    EXPECT_EQ(eosio::find_apply(fixtures::reparse(b)), 5u);
}

TEST(find_apply, missing_or_wrong_signature)
{
    ModuleBuilder empty;
    EXPECT_THROW(eosio::find_apply(empty.module()), NoDispatcher);
    ModuleBuilder b;
    const auto f = b.add_function(fixtures::sig({ValType::i64, ValType::i64}), {}, CodeBuilder().finish());
    b.export_function("apply", f);
    EXPECT_THROW(eosio::find_apply(fixtures::reparse(b)), NoDispatcher);
}
