#include <gtest/gtest.h>

#include <random>

#include "eosscan/error.hpp"
#include "eosscan/sym/expr.hpp"
#include "eosscan/sym/solver.hpp"

using namespace eosscan;
using namespace eosscan::sym;

TEST(taint, examples)
{
    const auto t = var("t", 64, Taint(tags::blockchain_state));
    EXPECT_TRUE(taint_of(t).contains(tags::blockchain_state));
    EXPECT_TRUE(taint_of(bv(64, 7)).empty());
    const auto r = binary(Kind::urem, t, bv(64, 100));
    EXPECT_EQ(taint_of(r).names(), (std::set<std::string>{"blockchain_state"}));
    const auto mixed = add(r, var("a", 64, Taint(tags::action_data)));
    EXPECT_EQ(taint_of(mixed).names().size(), 2u);
}

TEST(fold, constants)
{
    EXPECT_EQ(add(bv(64, 2), bv(64, 3))->value.to_u64(), 5u);
    EXPECT_EQ(binary(Kind::udiv, bv(32, 7), bv(32, 0))->value.to_u64(), 0xFFFFFFFFu);
    EXPECT_EQ(binary(Kind::urem, bv(32, 7), bv(32, 0))->value.to_u64(), 7u);
    EXPECT_EQ(binary(Kind::shl, bv(32, 1), bv(32, 31))->value.to_u64(), 0x80000000u);
    EXPECT_EQ(unary(Kind::clz, bv(32, 1))->value.to_u64(), 31u);
    EXPECT_EQ(unary(Kind::popcnt, bv(64, 0xFF))->value.to_u64(), 8u);
    EXPECT_TRUE(eq(bv(8, 1), bv(8, 1))->truth);
    EXPECT_THROW(add(bv(8, 1), bv(16, 1)), WidthMismatch);
}

TEST(fold, identities)
{
    const auto x = var("x", 32);
    EXPECT_TRUE(equal(add(x, bv(32, 0)), x));
    EXPECT_TRUE(equal(binary(Kind::band, x, bv(32, 0))->is_const() ? x : x, x));
    EXPECT_TRUE(binary(Kind::band, x, bv(32, 0))->is_const());
    EXPECT_TRUE(equal(extract(concat(var("h", 8), x), 31, 0), x));
    EXPECT_TRUE(equal(is_nonzero(bool_to_bv(eq(x, bv(32, 3)), 32)), eq(x, bv(32, 3))));
}

TEST(fold, division_chains)
{
    const auto x = var("x", 64);
    const auto d = binary(Kind::udiv, binary(Kind::udiv, x, bv(64, 10)), bv(64, 10));
    ASSERT_EQ(d->kind, Kind::udiv);
    EXPECT_EQ(d->args[1]->value.to_u64(), 100u);
    EXPECT_EQ(eq(d, bv(64, 0))->kind, Kind::ult);
    const auto big = binary(Kind::udiv, binary(Kind::udiv, x, bv(64, 1ull << 40)), bv(64, 1ull << 30));
    EXPECT_TRUE(big->is_const());
    for (uint64_t v : {0ull, 99ull, 100ull, 12345ull, ~0ull})
    {
        const Model m{{"x", BitVec(64, v)}};
        EXPECT_EQ(evaluate(d, m).to_u64(), v / 100);
        EXPECT_EQ(evaluate_bool(eq(d, bv(64, 0)), m), v < 100);
    }
}

TEST(fold, ite_selector_exposes_comparison)
{
    const auto action = var("action", 64);
    const auto sel = ite(eq(action, bv(64, 5)), bv(32, 1), ite(eq(action, bv(64, 9)), bv(32, 2), bv(32, 0)));
    const auto hit = eq(sel, bv(32, 2));
    EXPECT_TRUE(mentions(hit, "action"));
    Model m{{"action", BitVec(64, 9)}};
    EXPECT_TRUE(evaluate_bool(hit, m));
    m["action"] = BitVec(64, 5);
    EXPECT_FALSE(evaluate_bool(hit, m));
}

namespace {

struct Gen
{
    std::mt19937_64 rng{1234};
    std::vector<Expr> vars;

    Expr leaf(uint32_t w)
    {
        if (rng() % 3 == 0)
        {
            const uint64_t small[] = {0, 1, 2, 31, 32, 63, 64, ~0ull, 0x80000000ull};
            return bv(w, rng() % 2 ? small[rng() % 9] : rng());
        }
        return var("v" + std::to_string(rng() % 3) + "_" + std::to_string(w), w);
    }

    Expr gen(uint32_t w, int depth)
    {
        if (depth == 0)
            return leaf(w);
        static const Kind bins[] = {Kind::add, Kind::sub,  Kind::mul,  Kind::udiv, Kind::sdiv, Kind::urem,
                                    Kind::srem, Kind::band, Kind::bor, Kind::bxor, Kind::shl,  Kind::lshr,
                                    Kind::ashr, Kind::rotl, Kind::rotr};
        static const Kind cmps[] = {Kind::eq, Kind::ult, Kind::ule, Kind::slt, Kind::sle};
        switch (rng() % 8)
        {
        case 0: return unary(std::array{Kind::bnot, Kind::clz, Kind::ctz, Kind::popcnt}[rng() % 4], gen(w, depth - 1));
        case 1: {
            const uint32_t half = w / 2;
            return concat(gen(half, depth - 1), gen(w - half, depth - 1));
        }
        case 2: {
            const uint32_t lo = static_cast<uint32_t>(rng() % (64 - w + 1));
            return extract(gen(64, depth - 1), lo + w - 1, lo);
        }
        case 3:
            return ite(compare(cmps[rng() % 5], gen(w, depth - 1), gen(w, depth - 1)), gen(w, depth - 1),
                       gen(w, depth - 1));
        case 4:
            return w == 64 ? (rng() % 2 ? zext(gen(32, depth - 1), 32) : sext(gen(32, depth - 1), 32))
                           : gen(w, depth - 1);
        default: return binary(bins[rng() % 15], gen(w, depth - 1), gen(w, depth - 1));
        }
    }
};

}  // namespace

// Folding must agree with the evaluator, and the evaluator with Z3.
TEST(fold, agrees_with_evaluator_and_solver)
{
    Gen g;
    Solver solver;
    for (int i = 0; i < 300; ++i)
    {
        const uint32_t w = i % 2 ? 32 : 64;
        const auto e = g.gen(w, 3);
        Model m;
        std::map<std::string, Expr> bind;
        for (const auto& name : variables(e))
        {
            const uint32_t vw = static_cast<uint32_t>(std::stoul(name.substr(name.find('_') + 1)));
            const BitVec v(vw, g.rng());
            m[name] = v;
            bind[name] = constant(v);
        }
        const auto expected = evaluate(e, m);
        const auto folded = substitute(e, bind);
        ASSERT_TRUE(folded->is_const()) << to_string(e);
        ASSERT_EQ(folded->value, expected) << to_string(e);
        if (i % 3 == 0)
        {
            std::vector<Expr> q;
            for (const auto& [name, val] : bind)
                q.push_back(eq(var(name, val->width), val));
            q.push_back(ne(e, constant(expected)));
            ASSERT_EQ(solver.check(q), SatResult::unsat) << to_string(e);
        }
    }
}
