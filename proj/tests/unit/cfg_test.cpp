#include <gtest/gtest.h>

#include <random>

#include "eosscan/cfg/cfg.hpp"
#include "eosscan/error.hpp"
#include "fixtures.hpp"

using namespace eosscan;
using namespace eosscan::wasm;
using eosscan::cfg::EdgeKind;

namespace {

WasmModule single(bytes code, FuncSignature s = fixtures::sig({ValType::i32}))
{
    ModuleBuilder b;
    b.add_function(std::move(s), {}, std::move(code));
    return fixtures::reparse(b);
}

void check_partition(const cfg::ControlFlowGraph& g)
{
    uint32_t next = 0;
    for (const auto& b : g.blocks())
    {
        EXPECT_EQ(b.first, next);
        EXPECT_LE(b.first, b.last);
        next = b.last + 1;
    }
    EXPECT_EQ(next, g.instructions().size());
}

void check_table_law(const cfg::ControlFlowGraph& g)
{
    for (const auto& b : g.blocks())
    {
        const auto& last = g.instructions()[b.last];
        if (last.op != Opcode::br_table)
            continue;
        const auto n = last.br_table().size();
        const auto& out = g.out_edges(b.id);
        EXPECT_LE(out.size(), n);
        std::vector<uint32_t> all;
        for (auto e : out)
            for (auto c : g.edges()[e].cases)
                all.push_back(c);
        std::sort(all.begin(), all.end());
        ASSERT_EQ(all.size(), n);
        for (uint32_t i = 0; i < n; ++i)
            EXPECT_EQ(all[i], i);
    }
}

}  // namespace

TEST(build_cfg, straight_line)
{
    const auto m = single(CodeBuilder().i64_const(1).drop().i64_const(2).drop().finish());
    const auto g = cfg::build_cfg(m, 0);
    EXPECT_EQ(g.blocks().size(), 1u);
    EXPECT_TRUE(g.edges().empty());
    check_partition(g);
}

TEST(build_cfg, block_br_if_end)
{
    const auto m = single(CodeBuilder().block().local_get(0).br_if(0).op(Opcode::nop).end().finish());
    const auto g = cfg::build_cfg(m, 0);
    // [block, local.get, br_if] [nop, end] [end]
    ASSERT_EQ(g.blocks().size(), 3u);
    const auto succ = cfg::successors_of(g, 0);
    ASSERT_EQ(succ.size(), 2u);
    EXPECT_EQ(succ[0].kind, EdgeKind::branch_taken);
    EXPECT_EQ(succ[0].block, 2u);
    EXPECT_EQ(succ[1].kind, EdgeKind::branch_not_taken);
    EXPECT_EQ(succ[1].block, 1u);
    check_partition(g);
}

TEST(build_cfg, four_way_br_table)
{
    const auto m = single(CodeBuilder()
                              .block()
                              .block()
                              .block()
                              .block()
                              .local_get(0)
                              .br_table({0, 1, 2}, 3)
                              .end()
                              .op(Opcode::nop)
                              .end()
                              .op(Opcode::nop)
                              .end()
                              .op(Opcode::nop)
                              .end()
                              .finish());
    const auto g = cfg::build_cfg(m, 0);
    const auto branch = g.block_of(5);
    const auto& out = g.out_edges(branch);
    EXPECT_EQ(out.size(), 4u);
    for (auto e : out)
        EXPECT_EQ(g.edges()[e].kind, EdgeKind::table_case);
    const auto succ = cfg::successors_of(g, branch);
    for (size_t i = 1; i < succ.size(); ++i)
        EXPECT_LT(succ[i - 1].cases.front(), succ[i].cases.front());
    check_table_law(g);
    check_partition(g);
}

TEST(build_cfg, duplicate_table_targets_collapse)
{
    const auto m = single(CodeBuilder().block().block().local_get(0).br_table({0, 1, 0}, 1).end().end().finish());
    const auto g = cfg::build_cfg(m, 0);
    const auto branch = g.block_of(3);
    EXPECT_EQ(g.out_edges(branch).size(), 2u);
    check_table_law(g);
}

TEST(build_cfg, unresolvable_branch)
{
    const auto m = single(CodeBuilder().br(3).finish());
    EXPECT_THROW(cfg::build_cfg(m, 0), UnresolvableBranch);
}

TEST(build_cfg, loop_header_and_back_edge)
{
    const auto m = single(CodeBuilder().loop().local_get(0).br_if(0).end().finish());
    const auto g = cfg::build_cfg(m, 0);
    bool any = false;
    for (const auto& b : g.blocks())
        any = any || g.is_loop_header(b.id);
    EXPECT_TRUE(any);
}

TEST(successors_of, terminal_and_unknown)
{
    const auto m = single(CodeBuilder().local_get(0).if_().op(Opcode::nop).end().finish());
    const auto g = cfg::build_cfg(m, 0);
    EXPECT_TRUE(cfg::successors_of(g, g.exit()).empty());
    EXPECT_EQ(cfg::successors_of(g, 0).size(), 2u);
    EXPECT_THROW((void)cfg::successors_of(g, 999), UnknownBlock);
}

TEST(build_cfg, corpus_laws)
{
    for (const auto& entry : std::filesystem::directory_iterator(fixtures::corpus_dir()))
    {
        if (entry.path().extension() != ".wasm")
            continue;
        SCOPED_TRACE(entry.path().filename().string());
        const auto m = parse_module(fixtures::read_file(entry.path()));
        for (uint32_t f = m.imported_function_count(); f < m.function_count(); ++f)
        {
            const auto g = cfg::build_cfg(m, f);
            check_partition(g);
            check_table_law(g);
            for (const auto& b : g.blocks())
            {
                const auto op = g.instructions()[b.last].op;
                if (op == Opcode::br_if || op == Opcode::if_)
                    EXPECT_EQ(cfg::successors_of(g, b.id).size(), 2u);
            }
            EXPECT_FALSE(g.to_dot(&m).empty());
        }
    }
}

// Random nests of blocks with br_table at the bottom; the laws must hold for any shape.
TEST(build_cfg, random_br_table_laws)
{
    std::mt19937 rng(7);
    for (int round = 0; round < 200; ++round)
    {
        const uint32_t depth = 1 + rng() % 6;
        CodeBuilder c;
        for (uint32_t i = 0; i < depth; ++i)
            (rng() % 3 == 0) ? c.loop() : c.block();
        std::vector<uint32_t> targets(rng() % 17);
        for (auto& t : targets)
            t = rng() % (depth + 1);
        c.local_get(0).br_table(targets, rng() % (depth + 1));
        for (uint32_t i = 0; i < depth; ++i)
            c.end();
        const auto m = single(c.finish());
        const auto g = cfg::build_cfg(m, 0);
        check_partition(g);
        check_table_law(g);
    }
}
