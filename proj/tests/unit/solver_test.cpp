#include <gtest/gtest.h>

#include "eosscan/eosio/name.hpp"
#include "eosscan/sym/solver.hpp"

using namespace eosscan;
using namespace eosscan::sym;

TEST(solve, trivial)
{
    const auto x = var("x", 32);
    EXPECT_EQ(solve({Constraint{eq(x, bv(32, 1)), {}}, Constraint{eq(x, bv(32, 2)), {}}}), SatResult::unsat);
    EXPECT_EQ(solve({}), SatResult::sat);
}

TEST(solve, apply_path_requiring_token_code)
{
    const auto code = var("code", 64, Taint(tags::apply_arg_code));
    const auto receiver = var("receiver", 64, Taint(tags::apply_arg_receiver));
    const uint64_t token = eosio::name_encode("eosio.token");
    // if (code == receiver || code == token) then dispatch, plus a guard code != receiver
    const std::vector<Expr> path = {
        lor(eq(code, receiver), eq(code, bv(64, token))),
        ne(code, receiver),
        ne(receiver, bv(64, token)),
    };
    Solver s;
    const auto out = s.solve(path);
    ASSERT_EQ(out.result, SatResult::sat);
    EXPECT_EQ(out.model.at("code").to_u64(), token);
    for (const auto& c : path)
        EXPECT_TRUE(evaluate_bool(c, out.model));
}

TEST(solver, enumerate_and_wide_values)
{
    Solver s;
    const auto x = var("x", 32);
    const auto vals = s.enumerate({ult(x, bv(32, 3))}, x, 10);
    EXPECT_EQ(vals.size(), 3u);
    const auto wide = var("w", 256);
    const auto out = s.solve({eq(extract(wide, 191, 128), bv(64, 0x1122334455667788ull))});
    ASSERT_EQ(out.result, SatResult::sat);
    EXPECT_EQ(out.model.at("w").extract(191, 128).to_u64(), 0x1122334455667788ull);
}

TEST(solver, clz_ctz_popcnt_lowering)
{
    Solver s;
    const auto x = var("x", 32);
    EXPECT_EQ(s.check({eq(x, bv(32, 0x00F0)), ne(unary(Kind::clz, x), bv(32, 24))}), SatResult::unsat);
    EXPECT_EQ(s.check({eq(x, bv(32, 0x00F0)), ne(unary(Kind::ctz, x), bv(32, 4))}), SatResult::unsat);
    EXPECT_EQ(s.check({eq(x, bv(32, 0x00F0)), ne(unary(Kind::popcnt, x), bv(32, 4))}), SatResult::unsat);
    EXPECT_EQ(s.check({eq(unary(Kind::clz, x), bv(32, 32)), ne(x, bv(32, 0))}), SatResult::unsat);
}
