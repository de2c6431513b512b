#include <gtest/gtest.h>

#include "eosscan/engine/engine.hpp"
#include "eosscan/eosio/name.hpp"
#include "eosscan/scanner/scanner.hpp"
#include "fixtures.hpp"

using namespace eosscan;
using namespace eosscan::wasm;
using namespace eosscan::scanner;
using fixtures::sig;

namespace {

ScanConfig corpus_config(const std::string& id)
{
    static const auto labels = load_labels(fixtures::corpus_dir() / "labels.tsv");
    ScanConfig c;
    c.timeout = std::chrono::seconds(60);
    auto it = labels.find(id);
    c.gambling = it != labels.end() && is_gambling_category(it->second);
    return c;
}

}  // namespace

TEST(scan, empty_module_is_inconclusive)
{
    ModuleBuilder b;
    const auto findings = scan(b.module(), ScanConfig{}, "empty");
    ASSERT_EQ(findings.size(), 4u);
    for (const auto& f : findings)
    {
        EXPECT_EQ(f.verdict, Verdict::inconclusive);
        EXPECT_TRUE(f.diagnostics.any_flag());
    }
}

TEST(scan, detector_order_and_gating)
{
    ModuleBuilder b;
    const auto findings = scan(b.module(), ScanConfig{}, "x");
    ASSERT_EQ(findings.size(), 4u);
    for (size_t i = 0; i < 4; ++i)
        EXPECT_EQ(findings[i].detector, all_detectors[i]);
    ScanConfig only;
    only.detectors = {Detector::rollback};
    const auto one = scan(b.module(), only, "x");
    ASSERT_EQ(one.size(), 1u);
    EXPECT_EQ(one[0].detector, Detector::rollback);
}

TEST(locate_valuable_functions, criteria)
{
    ModuleBuilder b;
    const auto send = b.import_function("env", "send_inline", sig({ValType::i32, ValType::i32}));
    const auto store = b.import_function("env", "db_store_i64", sig({ValType::i64, ValType::i64, ValType::i64,
                                                                         ValType::i64, ValType::i32, ValType::i32},
                                                                        {ValType::i32}));
    b.memory(1);
    const auto pure = b.add_function(sig({ValType::i32}, {ValType::i32}), {},
                                     CodeBuilder().local_get(0).i32_const(3).op(Opcode::i32_mul).finish());
    const auto sender = b.add_function(sig({ValType::i32}), {},
                                       CodeBuilder().local_get(0).if_().i32_const(0).i32_const(4).call(send).end().finish());
    const auto storer = b.add_function(sig({}), {},
                                       CodeBuilder()
                                           .i64_const(1)
                                           .i64_const(2)
                                           .i64_const(3)
                                           .i64_const(4)
                                           .i32_const(0)
                                           .i32_const(8)
                                           .call(store)
                                           .drop()
                                           .finish());
    const auto m = fixtures::reparse(b);
    std::vector<engine::PathTree> trees;
    for (auto f : {pure, sender, storer})
        trees.push_back(engine::explore(m, f, engine::entry_arguments(m, f), {}));
    std::vector<const engine::PathTree*> ptrs;
    for (const auto& t : trees)
        ptrs.push_back(&t);
    const auto v = locate_valuable_functions(m, ptrs);
    EXPECT_FALSE(v.contains(pure));
    EXPECT_TRUE(v.valuable_by(sender, Criterion::send_inline));
    EXPECT_TRUE(v.valuable_by(storer, Criterion::db_store_i64));
    EXPECT_FALSE(v.valuable_by(storer, Criterion::send_inline));
}

TEST(library_signatures, itoa_helper_recognized)
{
    const auto m = fixtures::load_corpus("c1_rollback_time_patched");
    bool any = false;
    for (uint32_t f = m.imported_function_count(); f < m.function_count(); ++f)
        any = any || is_library_function(m, f);
    EXPECT_TRUE(any);
    const auto c1 = fixtures::load_corpus("c1_rollback_time");
    for (uint32_t f = c1.imported_function_count(); f < c1.function_count(); ++f)
        EXPECT_FALSE(is_library_function(c1, f));
}

TEST(detect_rollback, gate_when_not_gambling)
{
    const auto m = fixtures::load_corpus("c1_rollback_time");
    ScanConfig c;
    c.detectors = {Detector::rollback};
    c.gambling = false;
    const auto f = scan(m, c, "c1");
    ASSERT_EQ(f.size(), 1u);
    EXPECT_EQ(f[0].verdict, Verdict::safe);
    ASSERT_FALSE(f[0].diagnostics.notes.empty());
    EXPECT_EQ(f[0].diagnostics.notes[0], "gated");
}

class CorpusScan : public ::testing::TestWithParam<std::string>
{
};

TEST_P(CorpusScan, verdicts_match_labels_and_witnesses_replay)
{
    const auto id = GetParam();
    const auto expected = fixtures::expected_verdicts().at(id);
    const auto m = fixtures::load_corpus(id);
    const auto config = corpus_config(id);
    const auto findings = scan(m, config, id);
    ASSERT_EQ(findings.size(), 4u);
    for (const auto& f : findings)
    {
        const auto name = std::string(to_string(f.detector));
        std::string notes;
        for (const auto& n : f.diagnostics.notes)
            notes += n + "; ";
        EXPECT_EQ(f.verdict == Verdict::vulnerable, expected.count(name) == 1)
            << name << " -> " << to_string(f.verdict) << " " << notes;
        EXPECT_NE(f.verdict, Verdict::inconclusive) << name << " " << notes;
        if (f.verdict != Verdict::vulnerable)
            continue;
        ASSERT_TRUE(f.witness.has_value());
        EXPECT_FALSE(f.witness->import_trace.empty());
        const auto replay = replay_witness(m, *f.witness, config);
        EXPECT_TRUE(replay.reproduced) << name << ": " << replay.detail;
    }
}

INSTANTIATE_TEST_SUITE_P(corpus,
                         CorpusScan,
                         ::testing::Values("a1_fake_eos_nocheck",
                                           "a1_fake_eos_nocheck_patched",
                                           "a2_fake_eos_self_or_token",
                                           "a2_fake_eos_self_or_token_patched",
                                           "b1_fake_receipt_deposit",
                                           "b1_fake_receipt_deposit_patched",
                                           "b2_fake_receipt_sale",
                                           "b2_fake_receipt_sale_patched",
                                           "c1_rollback_time",
                                           "c1_rollback_time_patched",
                                           "c2_rollback_tapos",
                                           "c2_rollback_tapos_patched",
                                           "d1_missing_auth_clear",
                                           "d1_missing_auth_clear_patched",
                                           "d2_missing_auth_withdraw",
                                           "d2_missing_auth_withdraw_patched"));

TEST(detect_missing_permission, witness_lists_action_names)
{
    const auto m = fixtures::load_corpus("d1_missing_auth_clear");
    ScanConfig c;
    c.detectors = {Detector::missing_permission};
    const auto f = scan(m, c, "d1");
    ASSERT_EQ(f.size(), 1u);
    ASSERT_TRUE(f[0].witness.has_value());
    EXPECT_EQ(f[0].witness->actions, (std::vector<std::string>{"clear"}));
    const auto d2 = scan(fixtures::load_corpus("d2_missing_auth_withdraw"), c, "d2");
    ASSERT_TRUE(d2[0].witness.has_value());
    EXPECT_EQ(d2[0].witness->actions, (std::vector<std::string>{"withdraw"}));
}
