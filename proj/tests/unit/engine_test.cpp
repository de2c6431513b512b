#include <gtest/gtest.h>

#include "eosscan/engine/engine.hpp"
#include "eosscan/error.hpp"
#include "fixtures.hpp"

using namespace eosscan;
using namespace eosscan::wasm;
using namespace eosscan::engine;
using fixtures::sig;

namespace {

std::vector<Expr> conds(const PathRecord& p)
{
    return sym::exprs_of(p.constraints);
}

std::vector<std::string> import_names(const PathRecord& p)
{
    std::vector<std::string> out;
    for (const auto& c : p.import_calls)
        out.push_back(c.name);
    return out;
}

ExplorationOptions quick()
{
    ExplorationOptions o;
    o.timeout = std::chrono::seconds(20);
    return o;
}

}  // namespace

TEST(explore, constant_function)
{
    ModuleBuilder b;
    b.add_function(sig({}, {ValType::i64}), {}, CodeBuilder().i64_const(7).finish());
    const auto m = fixtures::reparse(b);
    const auto tree = explore(m, 0, {}, quick());
    ASSERT_EQ(tree.paths.size(), 1u);
    EXPECT_TRUE(tree.paths[0].constraints.empty());
    EXPECT_EQ(tree.paths[0].terminal, Terminal::returned);
    ASSERT_EQ(tree.paths[0].return_values.size(), 1u);
    EXPECT_EQ(tree.paths[0].return_values[0]->value.to_u64(), 7u);
}

TEST(explore, br_if_gives_complementary_paths)
{
    ModuleBuilder b;
    b.add_function(sig({ValType::i32}), {}, CodeBuilder().block().local_get(0).br_if(0).op(Opcode::nop).end().finish());
    const auto m = fixtures::reparse(b);
    const auto tree = explore(m, 0, entry_arguments(m, 0), quick());
    ASSERT_EQ(tree.paths.size(), 2u);
    sym::Solver s;
    auto both = conds(tree.paths[0]);
    const auto second = conds(tree.paths[1]);
    both.insert(both.end(), second.begin(), second.end());
    EXPECT_EQ(s.check(both), sym::SatResult::unsat);
    const auto neither = sym::land(sym::lnot(conds(tree.paths[0]).at(0)), sym::lnot(conds(tree.paths[1]).at(0)));
    EXPECT_EQ(s.check({neither}), sym::SatResult::unsat);
}

TEST(explore, apply_three_case_dispatch)
{
    ModuleBuilder b;
    const auto code = CodeBuilder()
                          .block()
                          .block()
                          .block()
                          .local_get(2)
                          .op(Opcode::i32_wrap_i64)
                          .br_table({0, 1}, 2)
                          .end()
                          .op(Opcode::nop)
                          .end()
                          .op(Opcode::nop)
                          .end()
                          .finish();
    b.add_function(fixtures::apply_sig, {}, code);
    const auto m = fixtures::reparse(b);
    const std::vector<Expr> args = {sym::var("receiver", 64), sym::var("code", 64), sym::var("action", 64)};
    const auto tree = explore(m, 0, args, quick());
    ASSERT_EQ(tree.paths.size(), 3u);
    for (const auto& p : tree.paths)
    {
        EXPECT_EQ(p.terminal, Terminal::returned);
        ASSERT_EQ(p.constraints.size(), 1u);
        EXPECT_TRUE(sym::mentions(p.constraints[0].expr, "action"));
    }
}

class BrTableForkLaw : public ::testing::TestWithParam<uint32_t>
{
};

TEST_P(BrTableForkLaw, children_partition_cases)
{
    const uint32_t n = GetParam();
    const auto m = fixtures::br_table_fixture(n);
    const auto tree = explore(m, 0, entry_arguments(m, 0), quick());
    ASSERT_EQ(tree.paths.size(), n);
    sym::Solver s;
    std::vector<Expr> any;
    for (size_t i = 0; i < tree.paths.size(); ++i)
    {
        const auto ci = conds(tree.paths[i]);
        ASSERT_EQ(ci.size(), 1u);
        any.push_back(ci[0]);
        for (size_t j = i + 1; j < tree.paths.size(); ++j)
            EXPECT_EQ(s.check({ci[0], conds(tree.paths[j])[0]}), sym::SatResult::unsat);
    }
    EXPECT_EQ(s.check({sym::lnot(sym::lor_all(any))}), sym::SatResult::unsat);
}

INSTANTIATE_TEST_SUITE_P(sizes, BrTableForkLaw, ::testing::Values(2u, 4u, 16u));

TEST(step, i64_add_constants)
{
    ModuleBuilder b;
    b.add_function(sig({}, {ValType::i64}), {}, CodeBuilder().i64_const(2).i64_const(3).op(Opcode::i64_add).finish());
    const auto m = fixtures::reparse(b);
    FunctionCache fc(m);
    sym::Solver solver;
    const auto opts = quick();
    StepContext ctx(fc, opts, solver);
    auto s = initial_state(ctx, 0, {});
    std::vector<MachineState> out = {s};
    for (int i = 0; i < 3; ++i)
    {
        out = step(ctx, out.front());
        ASSERT_EQ(out.size(), 1u);
    }
    ASSERT_FALSE(out[0].value_stack.empty());
    EXPECT_EQ(out[0].value_stack.back()->value.to_u64(), 5u);
}

TEST(explore, div_by_symbolic_forks_trap)
{
    ModuleBuilder b;
    b.add_function(sig({ValType::i32, ValType::i32}, {ValType::i32}), {},
                   CodeBuilder().local_get(0).local_get(1).op(Opcode::i32_div_u).finish());
    const auto m = fixtures::reparse(b);
    const auto tree = explore(m, 0, entry_arguments(m, 0), quick());
    ASSERT_EQ(tree.paths.size(), 2u);
    int traps = 0, returns = 0;
    for (const auto& p : tree.paths)
    {
        ASSERT_EQ(p.constraints.size(), 1u);
        sym::Model zero{{"arg1", sym::BitVec(32, 0)}};
        const bool holds_at_zero = sym::evaluate_bool(p.constraints[0].expr, zero);
        if (p.terminal == Terminal::exited)
        {
            ++traps;
            EXPECT_TRUE(holds_at_zero);
        }
        else
        {
            ++returns;
            EXPECT_FALSE(holds_at_zero);
        }
    }
    EXPECT_EQ(traps, 1);
    EXPECT_EQ(returns, 1);
}

namespace {

WasmModule time_rem_module(bool with_send)
{
    ModuleBuilder b;
    const auto now = b.import_function("env", "current_time", sig({}, {ValType::i64}));
    const auto send = b.import_function("env", "send_inline", sig({ValType::i32, ValType::i32}));
    CodeBuilder c;
    c.call(now).i64_const(100).op(Opcode::i64_rem_u).i64_const(50).op(Opcode::i64_lt_u).if_();
    if (with_send)
        c.i32_const(0).i32_const(8).call(send);
    c.end();
    b.memory(1);
    b.add_function(sig({}), {}, c.finish());
    return fixtures::reparse(b);
}

}  // namespace

TEST(explore, rem_records_blockchain_taint)
{
    const auto m = time_rem_module(false);
    const auto tree = explore(m, 2, {}, quick());
    ASSERT_FALSE(tree.paths.empty());
    const auto& p = tree.paths[0];
    ASSERT_EQ(p.rems.size(), 1u);
    EXPECT_TRUE(sym::taint_of(p.rems[0].dividend).contains(sym::tags::blockchain_state));
    EXPECT_TRUE(sym::taint_of(p.rems[0].divisor).empty());
    ASSERT_EQ(p.import_calls.size(), 1u);
    EXPECT_TRUE(sym::taint_of(*p.import_calls[0].return_value).contains(sym::tags::blockchain_state));
}

TEST(explore, replay_follows_model)
{
    const auto m = time_rem_module(true);
    auto opts = quick();
    opts.replay_model = sym::Model{{"current_time#0", sym::BitVec(64, 1234)}};
    const auto hit = explore(m, 2, {}, opts);
    ASSERT_EQ(hit.paths.size(), 1u);
    EXPECT_EQ(import_names(hit.paths[0]), (std::vector<std::string>{"current_time", "send_inline"}));
    opts.replay_model = sym::Model{{"current_time#0", sym::BitVec(64, 1299)}};
    const auto miss = explore(m, 2, {}, opts);
    ASSERT_EQ(miss.paths.size(), 1u);
    EXPECT_EQ(import_names(miss.paths[0]), (std::vector<std::string>{"current_time"}));
}

TEST(explore, call_depth_bound)
{
    ModuleBuilder b;
    const auto f0 = b.declare_function(sig({}));
    const auto f1 = b.declare_function(sig({}));
    const auto f2 = b.declare_function(sig({}));
    const auto f3 = b.declare_function(sig({}));
    b.define(f0, {}, CodeBuilder().call(f1).finish());
    b.define(f1, {}, CodeBuilder().call(f2).finish());
    b.define(f2, {}, CodeBuilder().call(f3).finish());
    b.define(f3, {}, CodeBuilder().finish());
    const auto m = fixtures::reparse(b);
    const auto tree = explore(m, f0, {}, quick());
    ASSERT_EQ(tree.paths.size(), 1u);
    EXPECT_EQ(tree.paths[0].terminal, Terminal::depth_pruned);
    EXPECT_LE(tree.paths[0].max_depth, 2u);
    for (const auto& c : tree.paths[0].calls)
        EXPECT_LE(c.depth, 2u);
}

TEST(explore, loop_bound_and_timeout)
{
    ModuleBuilder b;
    b.add_function(sig({}), {}, CodeBuilder().loop().br(0).end().finish());
    // every iteration forks on a fresh argument-dependent test
    b.add_function(sig({ValType::i32}), {{1, ValType::i32}},
                   CodeBuilder()
                       .loop()
                       .local_get(0)
                       .local_get(1)
                       .op(Opcode::i32_mul)
                       .i32_const(7)
                       .op(Opcode::i32_rem_u)
                       .if_()
                       .op(Opcode::nop)
                       .end()
                       .local_get(1)
                       .i32_const(1)
                       .op(Opcode::i32_add)
                       .local_tee(1)
                       .i32_const(100)
                       .op(Opcode::i32_lt_u)
                       .br_if(0)
                       .end()
                       .finish());
    const auto m = fixtures::reparse(b);
    const auto spin = explore(m, 0, {}, quick());
    ASSERT_EQ(spin.paths.size(), 1u);
    EXPECT_EQ(spin.paths[0].terminal, Terminal::loop_pruned);

    auto opts = quick();
    opts.timeout = std::chrono::milliseconds(300);
    opts.loop_bound = 1000;
    const auto start = std::chrono::steady_clock::now();
    const auto tree = explore(m, 1, entry_arguments(m, 1), opts);
    const auto took = std::chrono::steady_clock::now() - start;
    EXPECT_TRUE(tree.timed_out);
    EXPECT_LT(took, std::chrono::milliseconds(300) + opts.solver_budget);
}

TEST(emulate, current_time_is_fresh_blockchain_state)
{
    const auto m = time_rem_module(false);
    const auto tree = explore(m, 2, {}, quick());
    const auto& call = tree.paths.at(0).import_calls.at(0);
    EXPECT_EQ(call.name, "current_time");
    ASSERT_TRUE(call.return_value.has_value());
    EXPECT_EQ((*call.return_value)->kind, sym::Kind::variable);
    EXPECT_EQ((*call.return_value)->width, 64u);
    EXPECT_EQ(call.stack, (std::vector<uint32_t>{2}));
}

TEST(emulate, memcpy_moves_bytes)
{
    ModuleBuilder b;
    const auto memcpy = b.import_function("env", "memcpy", sig({ValType::i32, ValType::i32, ValType::i32}, {ValType::i32}));
    b.memory(1);
    b.add_function(sig({}, {ValType::i32}), {},
                   CodeBuilder()
                       .i32_const(16)
                       .i32_const(0x0A0B0C0D)
                       .mem(Opcode::i32_store)
                       .i32_const(0)
                       .i32_const(16)
                       .i32_const(4)
                       .call(memcpy)
                       .drop()
                       .i32_const(0)
                       .mem(Opcode::i32_load)
                       .finish());
    const auto m = fixtures::reparse(b);
    const auto tree = explore(m, 1, {}, quick());
    ASSERT_EQ(tree.paths.size(), 1u);
    ASSERT_EQ(tree.paths[0].terminal, Terminal::returned);
    ASSERT_TRUE(tree.paths[0].return_values[0]->is_const());
    EXPECT_EQ(tree.paths[0].return_values[0]->value.to_u64(), 0x0A0B0C0Du);
}

TEST(emulate, eosio_assert_forks)
{
    ModuleBuilder b;
    const auto check = b.import_function("env", "eosio_assert", sig({ValType::i32, ValType::i32}));
    b.memory(1);
    b.add_function(sig({ValType::i32}), {}, CodeBuilder().local_get(0).i32_const(0).call(check).finish());
    const auto m = fixtures::reparse(b);
    const auto tree = explore(m, 1, entry_arguments(m, 1), quick());
    ASSERT_EQ(tree.paths.size(), 2u);
    const sym::Model zero{{"arg0", sym::BitVec(32, 0)}};
    for (const auto& p : tree.paths)
    {
        ASSERT_EQ(p.constraints.size(), 1u);
        const bool holds_at_zero = sym::evaluate_bool(p.constraints[0].expr, zero);
        EXPECT_EQ(p.terminal == Terminal::asserted_false, holds_at_zero);
        EXPECT_EQ(p.import_calls.size(), 1u);
    }
}

TEST(emulate, unmodeled_import_gets_default_model)
{
    ModuleBuilder b;
    const auto odd = b.import_function("env", "get_active_producers", sig({ValType::i32, ValType::i32}, {ValType::i32}));
    b.memory(1);
    b.add_function(sig({}, {ValType::i32}), {}, CodeBuilder().i32_const(0).i32_const(0).call(odd).finish());
    const auto m = fixtures::reparse(b);
    const auto tree = explore(m, 1, {}, quick());
    ASSERT_EQ(tree.paths.size(), 1u);
    EXPECT_TRUE(tree.paths[0].default_modeled);
    EXPECT_TRUE(tree.paths[0].import_calls[0].default_modeled);
    EXPECT_TRUE(sym::taint_of(tree.paths[0].return_values[0]).contains(sym::tags::import_return("get_active_producers")));
}

TEST(explore, corpus_apply_runs)
{
    for (const auto& entry : std::filesystem::directory_iterator(fixtures::corpus_dir()))
    {
        if (entry.path().extension() != ".wasm")
            continue;
        SCOPED_TRACE(entry.path().filename().string());
        const auto m = parse_module(fixtures::read_file(entry.path()));
        const auto apply = m.find_export("apply")->index;
        const auto tree = explore(m, apply, entry_arguments(m, apply), quick());
        EXPECT_FALSE(tree.timed_out);
        for (const auto& p : tree.paths)
            EXPECT_NE(p.terminal, Terminal::unsupported) << p.detail;
    }
}
