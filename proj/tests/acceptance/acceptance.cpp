// One PASS/FAIL line per acceptance criterion. Exit status is the number of failures.
#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "eosscan/eosio/name.hpp"
#include "eosscan/engine/engine.hpp"
#include "eosscan/report/report.hpp"
#include "eosscan/sym/memory.hpp"
#include "eosscan/sym/solver.hpp"
#include "fixtures.hpp"
#include "synthetic_log.hpp"

using namespace eosscan;
using namespace eosscan::wasm;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t)
{
    return std::chrono::duration<double>(Clock::now() - t).count();
}

std::string fmt(const char* f, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

scanner::ScanConfig corpus_config(const std::string& id)
{
    static const auto labels = scanner::load_labels(fixtures::corpus_dir() / "labels.tsv");
    scanner::ScanConfig c;
    auto it = labels.find(id);
    c.gambling = it != labels.end() && scanner::is_gambling_category(it->second);
    return c;
}

struct CorpusRun
{
    std::string id;
    WasmModule module;
    std::vector<scanner::Finding> findings;
    double seconds = 0;
};

const std::vector<CorpusRun>& corpus_runs()
{
    static const auto runs = [] {
        std::vector<CorpusRun> out;
        for (const auto& [id, _] : fixtures::expected_verdicts())
        {
            CorpusRun r;
            r.id = id;
            r.module = fixtures::load_corpus(id);
            const auto t = Clock::now();
            r.findings = scanner::scan(r.module, corpus_config(id), id);
            r.seconds = seconds_since(t);
            out.push_back(std::move(r));
        }
        return out;
    }();
    return runs;
}

Outcome corpus_discrimination()
{
    const auto expected = fixtures::expected_verdicts();
    size_t tp = 0, fp = 0, fn = 0, inconclusive = 0;
    double slowest = 0;
    std::string slowest_id;
    std::set<std::string> detectors_covered;
    for (const auto& r : corpus_runs())
    {
        const auto& want = expected.at(r.id);
        for (const auto& f : r.findings)
        {
            const auto name = std::string(scanner::to_string(f.detector));
            const bool flagged = f.verdict == scanner::Verdict::vulnerable;
            const bool truth = want.count(name) != 0;
            tp += flagged && truth;
            fp += flagged && !truth;
            fn += !flagged && truth;
            inconclusive += f.verdict == scanner::Verdict::inconclusive;
            if (truth)
                detectors_covered.insert(name);
        }
        if (r.seconds > slowest)
        {
            slowest = r.seconds;
            slowest_id = r.id;
        }
    }
    const double precision = tp + fp ? 100.0 * tp / (tp + fp) : 0;
    const double recall = tp + fn ? 100.0 * tp / (tp + fn) : 0;
    Outcome o;
    o.pass = fp == 0 && fn == 0 && tp >= 8 && corpus_runs().size() >= 16 && detectors_covered.size() == 4 &&
             slowest < 60;
    o.detail = std::to_string(corpus_runs().size()) + " contracts, precision " + fmt("%.0f%%", precision) +
               ", recall " + fmt("%.0f%%", recall) + ", " + std::to_string(inconclusive) +
               " inconclusive, slowest " + slowest_id + " " + fmt("%.1f s", slowest);
    return o;
}

Outcome memory_oracle()
{
    const auto t = Clock::now();
    Outcome o{true, {}};

    // worked example: {[0,2): a0a1, [3,4): a3} then 2 bytes at 2 -> one key [0,4)
    using namespace sym;
    const auto a0 = var("a0", 8), a1 = var("a1", 8), a2 = var("a2", 8), a3 = var("a3", 8), a3p = var("a3'", 8);
    SymbolicMemory ex;
    ex.store(0, 2, concat(a1, a0));
    ex.store(3, 1, a3);
    ex = memory_store(ex, 2, 2, concat(a3p, a2));
    const auto entries = ex.entries();
    const Expr want[] = {a0, a1, a2, a3p};
    bool example = entries.size() == 1 && entries[0].first == MemoryKey{0, 4};
    for (uint32_t i = 0; example && i < 4; ++i)
        example = equal(extract(entries[0].second, 8 * i + 7, 8 * i), want[i]);
    if (!example)
        return {false, "worked example did not reproduce"};

    constexpr uint64_t size = 65536;
    std::vector<int> oracle(size, -1);  // -1: never written
    SymbolicMemory sm(size);
    std::mt19937_64 rng(2024);
    size_t loads = 0;
    for (int op = 0; op < 100000; ++op)
    {
        const uint64_t len = 1 + rng() % 8;
        const uint64_t addr = rng() % 16 ? rng() % 512 : rng() % (size - len);
        if (rng() % 2)
        {
            const uint64_t v = rng();
            sm.store(addr, len, bv(static_cast<uint32_t>(8 * len), len == 8 ? v : v & ((1ull << (8 * len)) - 1)));
            for (uint64_t i = 0; i < len; ++i)
                oracle[addr + i] = static_cast<uint8_t>(v >> (8 * i));
        }
        else
        {
            ++loads;
            const auto got = sm.load(addr, len);
            for (uint64_t i = 0; i < len; ++i)
            {
                const auto byte = extract(got, static_cast<uint32_t>(8 * i + 7), static_cast<uint32_t>(8 * i));
                const bool same = oracle[addr + i] < 0
                                      ? equal(byte, unwritten_byte(addr + i))
                                      : byte->is_const() && byte->value.to_u64() == static_cast<uint64_t>(oracle[addr + i]);
                if (!same)
                    return {false, "load mismatch at op " + std::to_string(op)};
            }
        }
        if (auto audit = sm.audit())
            return {false, "audit failed at op " + std::to_string(op) + ": " + *audit};
    }
    const double s = seconds_since(t);
    o.pass = s < 30;
    o.detail = "worked example ok, 100000 ops (" + std::to_string(loads) + " loads) bit-exact, audit clean, " +
               fmt("%.1f s", s);
    return o;
}

Outcome fork_laws()
{
    engine::ExplorationOptions opts;
    opts.timeout = std::chrono::seconds(30);
    sym::Solver s;
    std::string detail;

    ModuleBuilder b;
    b.add_function(fixtures::sig({ValType::i32}), {},
                   CodeBuilder().block().local_get(0).br_if(0).op(Opcode::nop).end().finish());
    const auto m = fixtures::reparse(b);
    const auto brif = engine::explore(m, 0, engine::entry_arguments(m, 0), opts);
    if (brif.paths.size() != 2)
        return {false, "br_if gave " + std::to_string(brif.paths.size()) + " children"};
    detail = "br_if 2";

    for (uint32_t n : {2u, 4u, 16u})
    {
        const auto mt = fixtures::br_table_fixture(n);
        const auto tree = engine::explore(mt, 0, engine::entry_arguments(mt, 0), opts);
        if (tree.paths.size() > n)
            return {false, "br_table n=" + std::to_string(n) + " gave " + std::to_string(tree.paths.size())};
        std::vector<sym::Expr> sel;
        for (const auto& p : tree.paths)
        {
            auto c = sym::boolean(true);
            for (const auto& e : sym::exprs_of(p.constraints))
                c = sym::land(c, e);
            sel.push_back(c);
        }
        for (size_t i = 0; i < sel.size(); ++i)
            for (size_t j = i + 1; j < sel.size(); ++j)
                if (s.check({sel[i], sel[j]}) != sym::SatResult::unsat)
                    return {false, "br_table n=" + std::to_string(n) + " children overlap"};
        if (s.check({sym::lnot(sym::lor_all(sel))}) != sym::SatResult::unsat)
            return {false, "br_table n=" + std::to_string(n) + " children miss a case"};
        detail += ", br_table n=" + std::to_string(n) + " -> " + std::to_string(tree.paths.size()) + " disjoint+covering";
    }
    return {true, detail};
}

// Nested forking loops with a three-deep call chain inside.
WasmModule loop_heavy()
{
    ModuleBuilder b;
    const auto f0 = b.declare_function(fixtures::sig({ValType::i32}));
    const auto f1 = b.declare_function(fixtures::sig({ValType::i32}));
    const auto f2 = b.declare_function(fixtures::sig({ValType::i32}));
    const auto f3 = b.declare_function(fixtures::sig({ValType::i32}));
    auto body = [&](std::optional<uint32_t> callee) {
        CodeBuilder c;
        c.loop().local_get(0).local_get(1).op(Opcode::i32_mul).i32_const(7).op(Opcode::i32_rem_u).if_();
        if (callee)
            c.local_get(0).local_get(1).op(Opcode::i32_add).call(*callee);
        c.end()
            .local_get(1)
            .i32_const(1)
            .op(Opcode::i32_add)
            .local_tee(1)
            .i32_const(1000)
            .op(Opcode::i32_lt_u)
            .br_if(0)
            .end();
        return c.finish();
    };
    b.define(f0, {{1, ValType::i32}}, body(f1));
    b.define(f1, {{1, ValType::i32}}, body(f2));
    b.define(f2, {{1, ValType::i32}}, body(f3));
    b.define(f3, {{1, ValType::i32}}, body(std::nullopt));
    return fixtures::reparse(b);
}

Outcome budget_compliance()
{
    const auto m = loop_heavy();
    engine::ExplorationOptions opts;
    opts.timeout = std::chrono::seconds(2);
    opts.solver_budget = std::chrono::seconds(1);
    opts.call_depth = 2;
    const auto t = Clock::now();
    const auto tree = engine::explore(m, 0, engine::entry_arguments(m, 0), opts);
    const double took = seconds_since(t);
    const double limit = 2.0 + std::chrono::duration<double>(opts.solver_budget).count() + 0.05;
    uint32_t deepest = 0;
    size_t depth_pruned = 0;
    for (const auto& p : tree.paths)
    {
        deepest = std::max(deepest, p.max_depth);
        for (const auto& c : p.calls)
            deepest = std::max(deepest, c.depth);
        depth_pruned += p.terminal == engine::Terminal::depth_pruned;
    }
    Outcome o;
    o.pass = tree.timed_out && took <= limit && deepest <= 2 && depth_pruned > 0;
    o.detail = "timeout 2 s returned after " + fmt("%.3f s", took) + " (limit " + fmt("%.2f s", limit) + "), " +
               std::to_string(tree.paths.size()) + " paths, deepest call chain " + std::to_string(deepest) + ", " +
               std::to_string(depth_pruned) + " depth_pruned";
    return o;
}

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

Outcome name_codec()
{
    using eosio::name_decode;
    using eosio::name_encode;
    if (name_encode("transfer") != reference_encode("transfer") || name_encode("transfer") != 0xCDCD3C2D57000000ull)
        return {false, "transfer encoding disagrees"};
    if (name_encode("eosio.token") != reference_encode("eosio.token") ||
        name_encode("eosio.token") != 0x5530EA033482A600ull)
        return {false, "eosio.token encoding disagrees"};
    const std::string alphabet = ".12345abcdefghijklmnopqrstuvwxyz";
    std::mt19937_64 rng(7);
    for (int i = 0; i < 10000; ++i)
    {
        std::string s;
        const size_t len = 1 + rng() % 13;
        for (size_t k = 0; k < len; ++k)
            s.push_back(k == 12 ? alphabet[rng() % 16] : alphabet[rng() % 32]);
        while (!s.empty() && s.back() == '.')
            s.pop_back();
        if (s.empty())
            continue;
        const auto v = name_encode(s);
        if (v != reference_encode(s) || name_decode(v) != s)
            return {false, "round trip failed on '" + s + "'"};
    }
    return {true, "transfer/eosio.token match reference, 10000 random names round-trip"};
}

Outcome witness_replay()
{
    size_t total = 0, ok = 0;
    std::string failures;
    for (const auto& r : corpus_runs())
        for (const auto& f : r.findings)
        {
            if (f.verdict != scanner::Verdict::vulnerable)
                continue;
            ++total;
            if (!f.witness)
            {
                failures += " " + r.id + "/no-witness";
                continue;
            }
            const auto res = scanner::replay_witness(r.module, *f.witness, corpus_config(r.id));
            if (res.reproduced)
                ++ok;
            else
                failures += " " + r.id + "/" + std::string(scanner::to_string(f.detector));
        }
    return {total > 0 && ok == total,
            std::to_string(ok) + "/" + std::to_string(total) + " vulnerable findings reproduced" + failures};
}

Outcome attack_heuristics()
{
    using namespace attacks;
    const synth::World world;
    const auto targets = world.targets();

    synth::Log clean;
    synth::benign(clean, world, 12000, 1);
    synth::Log log;
    synth::benign(log, world, 4000, 2);
    for (int k = 0; k < 3; ++k)
    {
        const auto s = std::to_string(k);
        log.fake_eos("fe" + s, k % 2 ? "dice.a" : "shop.a");
        synth::benign(log, world, 700, 10 + k);
        log.fake_receipt("fr" + s, "acc" + s, k % 2 ? "vault.a" : "dice.b");
        synth::benign(log, world, 700, 20 + k);
        log.rollback("rb" + s, k % 2 ? "dice.a" : "dice.b");
        log.misuse("pm" + s, k % 2 ? "vault.a" : "shop.a", "clear");
        synth::benign(log, world, 700, 30 + k);
    }
    const auto clean_text = clean.text();
    const auto text = log.text();

    // each heuristic streams the raw log on its own
    auto run = [&](const std::string& input, auto&& heuristic, double& secs) {
        const auto t = Clock::now();
        std::istringstream in(input);
        for_each_transaction(in, [&](const TransactionRecord& tx) { heuristic.feed(tx); });
        auto flags = heuristic.finish();
        secs = std::max(secs, seconds_since(t));
        return flags;
    };
    struct Row
    {
        AttackKind kind;
        std::function<std::vector<AttackFlag>(const std::string&, double&)> go;
    };
    const std::vector<Row> rows{
        {AttackKind::fake_eos,
         [&](const std::string& in, double& s) { return run(in, FakeEosHeuristic(targets.fake_eos, {}), s); }},
        {AttackKind::fake_receipt,
         [&](const std::string& in, double& s) { return run(in, FakeReceiptHeuristic(targets.fake_receipt, {}), s); }},
        {AttackKind::rollback,
         [&](const std::string& in, double& s) { return run(in, RollbackHeuristic(targets.rollback, targets.labels), s); }},
        {AttackKind::missing_permission_misuse,
         [&](const std::string& in, double& s) { return run(in, PermissionMisuseHeuristic(targets.actions), s); }},
    };
    Outcome o{true, {}};
    double slowest = 0;
    for (const auto& row : rows)
    {
        if (!row.go(clean_text, slowest).empty())
            return {false, std::string(to_string(row.kind)) + " flagged the benign-only log"};
        const auto flags = row.go(text, slowest);
        size_t injected = 0, found = 0;
        for (const auto& inj : log.injected)
            if (inj.kind == row.kind)
            {
                ++injected;
                found += synth::flagged(flags, inj);
            }
        if (injected < 3 || found != injected)
            return {false, std::string(to_string(row.kind)) + " recall " + std::to_string(found) + "/" +
                               std::to_string(injected)};
    }

    synth::Log reversed;
    reversed.add(synth::transfer_with_receipts("dice.a", "eve", 50));
    reversed.add(synth::transfer_with_receipts("eve", "dice.a", 10, "fakeeos.tkn"), 60);
    synth::Log forward;
    forward.fake_eos("eve", "dice.a");
    if (!flag_fake_eos_attacks(reversed.txs, targets.fake_eos).empty() ||
        flag_fake_eos_attacks(forward.txs, targets.fake_eos).size() != 1)
        return {false, "order-reversal test failed"};

    o.pass = slowest < 10;
    o.detail = "benign " + std::to_string(clean.txs.size()) + " tx -> 0 flags; " + std::to_string(log.txs.size()) +
               " tx with 3 injected per heuristic -> recall 100% x4; reversal unflagged; slowest pass " +
               fmt("%.2f s", slowest);
    return o;
}

Outcome determinism()
{
    report::RunOptions opt;
    opt.config.deterministic = true;
    opt.labels_path = fixtures::corpus_dir() / "labels.tsv";
    opt.jobs = 1;
    const auto a = report::render_json(report::run_scan({fixtures::corpus_dir()}, opt));
    const auto b = report::render_json(report::run_scan({fixtures::corpus_dir()}, opt));
    return {a == b && !a.empty(), a == b ? "two single-worker corpus reports identical (" + std::to_string(a.size()) +
                                               " bytes)"
                                         : "reports differ"};
}

}  // namespace

int main(int argc, char** argv)
{
    // optional arguments select criteria by name
    const std::set<std::string> only(argv + 1, argv + argc);
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"corpus-discrimination", corpus_discrimination},
        {"memory-merge-oracle", memory_oracle},
        {"fork-laws", fork_laws},
        {"budget-compliance", budget_compliance},
        {"name-codec", name_codec},
        {"witness-replay", witness_replay},
        {"attack-heuristics", attack_heuristics},
        {"determinism", determinism},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria)
    {
        if (!only.empty() && !only.count(name))
            continue;
        Outcome o;
        try
        {
            o = check();
        }
        catch (const std::exception& e)
        {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    return failures;
}
