#include "eosscan/scanner/scanner.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <unordered_set>

#include "eosscan/emu/emulator.hpp"
#include "eosscan/engine/engine.hpp"
#include "eosscan/eosio/name.hpp"
#include "eosscan/error.hpp"

namespace eosscan::scanner {

using engine::ImportCallRecord;
using engine::PathRecord;
using engine::PathTree;
using engine::Terminal;
using sym::Expr;
using sym::SatResult;
using Clock = std::chrono::steady_clock;

std::string_view to_string(Detector d) noexcept
{
    switch (d)
    {
    case Detector::fake_eos: return "fake_eos";
    case Detector::fake_receipt: return "fake_receipt";
    case Detector::rollback: return "rollback";
    case Detector::missing_permission: return "missing_permission";
    }
    return "?";
}

std::string_view to_string(Verdict v) noexcept
{
    switch (v)
    {
    case Verdict::vulnerable: return "vulnerable";
    case Verdict::safe: return "safe";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

std::string_view to_string(Criterion c) noexcept
{
    switch (c)
    {
    case Criterion::send_inline: return "send_inline";
    case Criterion::db_update_i64: return "db_update_i64";
    case Criterion::db_store_i64: return "db_store_i64";
    }
    return "?";
}

std::optional<Detector> detector_from_string(std::string_view s) noexcept
{
    for (auto d : all_detectors)
        if (to_string(d) == s)
            return d;
    return std::nullopt;
}

std::optional<Criterion> criterion_of(std::string_view import_name) noexcept
{
    if (import_name == "send_inline")
        return Criterion::send_inline;
    if (import_name == "db_update_i64")
        return Criterion::db_update_i64;
    if (import_name == "db_store_i64")
        return Criterion::db_store_i64;
    return std::nullopt;
}

bool ValuableFunctionSet::valuable_by(uint32_t f, Criterion c) const
{
    auto it = evidence.find(f);
    if (it == evidence.end())
        return false;
    return std::ranges::any_of(it->second, [&](const ValuableEvidence& e) { return e.criterion == c; });
}

ValuableFunctionSet locate_valuable_functions(const wasm::WasmModule& module,
                                              const std::vector<const PathTree*>& trees)
{
    ValuableFunctionSet out;
    for (const auto* tree : trees)
    {
        for (size_t pi = 0; pi < tree->paths.size(); ++pi)
        {
            const auto& calls = tree->paths[pi].import_calls;
            for (size_t ci = 0; ci < calls.size(); ++ci)
            {
                const auto crit = criterion_of(calls[ci].name);
                if (!crit)
                    continue;
                for (auto f : calls[ci].stack)
                {
                    if (module.is_imported_function(f))
                        continue;
                    out.members.insert(f);
                    auto& ev = out.evidence[f];
                    // one piece of evidence per criterion is enough
                    if (std::ranges::none_of(ev, [&](const ValuableEvidence& e) { return e.criterion == *crit; }))
                        ev.push_back({*crit, tree->entry, pi, ci});
                }
            }
        }
    }
    return out;
}

void Diagnostics::absorb(const PathTree& tree)
{
    timeout = timeout || tree.timed_out;
    for (const auto& p : tree.paths)
    {
        switch (p.terminal)
        {
        case Terminal::depth_pruned: depth_pruned = true; break;
        case Terminal::loop_pruned: loop_pruned = true; break;
        case Terminal::timeout_pruned: timeout = true; break;
        case Terminal::unsupported: unsupported = true; break;
        case Terminal::emulation_error: emulation_error = true; break;
        default: break;
        }
        default_modeled = default_modeled || p.default_modeled;
        solver_unknown = solver_unknown || p.feasibility_unknown;
    }
}

const std::vector<std::vector<uint8_t>>& library_rem_signatures()
{
    // i64 itoa digit step: i64.const 10; i64.rem_u; i32.wrap_i64; i32.const 48; i32.add
    // i32 itoa digit step: i32.const 10; i32.rem_u; i32.const 48; i32.add
    static const std::vector<std::vector<uint8_t>> sigs = {
        {0x42, 0x0A, 0x82, 0xA7, 0x41, 0x30, 0x6A},
        {0x41, 0x0A, 0x70, 0x41, 0x30, 0x6A},
    };
    return sigs;
}

bool is_library_function(const wasm::WasmModule& module, uint32_t func_index)
{
    if (module.is_imported_function(func_index) || func_index >= module.function_count())
        return false;
    const auto& code = module.body(func_index).code;
    return std::ranges::any_of(library_rem_signatures(), [&](const std::vector<uint8_t>& sig) {
        return std::search(code.begin(), code.end(), sig.begin(), sig.end()) != code.end();
    });
}

bool is_gambling_category(std::string_view category) noexcept
{
    std::string c(category);
    std::ranges::transform(c, c.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return c == "gambling" || c == "game";
}

std::map<std::string, std::string> load_labels(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error("cannot read labels file " + path.string());
    std::map<std::string, std::string> out;
    std::string line;
    while (std::getline(in, line))
    {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty() || line.front() == '#')
            continue;
        const auto tab = line.find('\t');
        if (tab == std::string::npos)
            continue;
        out[line.substr(0, tab)] = line.substr(tab + 1);
    }
    return out;
}

namespace {

std::vector<Expr> prefix(const PathRecord& p, size_t n)
{
    std::vector<Expr> out;
    n = std::min(n, p.constraints.size());
    out.reserve(n + 4);
    for (size_t i = 0; i < n; ++i)
        out.push_back(p.constraints[i].expr);
    return out;
}

std::vector<std::string> trace(const PathRecord& p, size_t through)
{
    std::vector<std::string> out;
    for (size_t i = 0; i <= through && i < p.import_calls.size(); ++i)
        out.push_back(p.import_calls[i].name);
    return out;
}

std::vector<Expr> with(std::vector<Expr> v, std::initializer_list<Expr> more)
{
    v.insert(v.end(), more.begin(), more.end());
    return v;
}

bool is_authority(std::string_view name)
{
    const auto* m = emu::find_model(name);
    return m && m->category == emu::Category::authority;
}

std::optional<size_t> first_call(const PathRecord& p, std::string_view name)
{
    for (size_t i = 0; i < p.import_calls.size(); ++i)
        if (p.import_calls[i].name == name)
            return i;
    return std::nullopt;
}

bool last_call_is(const PathRecord& p, const std::function<bool(const ImportCallRecord&)>& pred)
{
    return !p.import_calls.empty() && pred(p.import_calls.back());
}

/// Constants `k` appearing in `var == k` terms for a 64-bit variable.
std::set<uint64_t> compared_constants(const std::vector<Expr>& exprs, std::string_view var_name)
{
    std::set<uint64_t> out;
    std::unordered_set<const sym::Node*> seen;
    std::function<void(const Expr&)> walk = [&](const Expr& e) {
        if (!seen.insert(e.get()).second)
            return;
        if (e->kind == sym::Kind::eq)
        {
            const auto& a = e->args[0];
            const auto& b = e->args[1];
            if (a->kind == sym::Kind::variable && a->name == var_name && b->is_const())
                out.insert(b->value.to_u64());
            if (b->kind == sym::Kind::variable && b->name == var_name && a->is_const())
                out.insert(a->value.to_u64());
        }
        for (const auto& arg : e->args)
            walk(arg);
    };
    for (const auto& e : exprs)
        walk(e);
    return out;
}

class Session
{
public:
    Session(const wasm::WasmModule& module, const ScanConfig& config, sym::Solver& solver)
      : module_(module),
        config_(config),
        solver_(solver),
        functions_(module),
        apply_(eosio::find_apply(module)),
        receiver(sym::var("receiver", 64, sym::Taint(sym::tags::apply_arg_receiver))),
        code(sym::var("code", 64, sym::Taint(sym::tags::apply_arg_code))),
        action(sym::var("action", 64, sym::Taint(sym::tags::apply_arg_action))),
        token(sym::bv(64, eosio::name_encode("eosio.token"))),
        transfer(sym::bv(64, eosio::names::transfer)),
        to_field(sym::extract(sym::var("action_data", 8 * 4096, sym::Taint(sym::tags::action_data)), 127, 64))
    {
    }

    [[nodiscard]] const wasm::WasmModule& module() const noexcept { return module_; }
    [[nodiscard]] uint32_t apply() const noexcept { return apply_; }
    [[nodiscard]] std::vector<Expr> apply_args() const { return {receiver, code, action}; }

    /// The unfiltered apply tree, shared by every detector.
    const PathTree& apply_tree(Clock::time_point deadline)
    {
        if (!apply_tree_)
            apply_tree_ = explore(apply_, apply_args(), {sym::ne(receiver, token)}, deadline, {});
        return *apply_tree_;
    }

    PathTree explore(uint32_t entry,
                     const std::vector<Expr>& args,
                     std::vector<Expr> assumptions,
                     Clock::time_point deadline,
                     std::function<bool(const PathRecord&, sym::Solver&)> early_stop)
    {
        engine::ExplorationOptions o;
        o.call_depth = config_.call_depth;
        o.solver_budget = config_.solver_budget;
        o.timeout = std::max(std::chrono::milliseconds(1),
                             std::chrono::duration_cast<std::chrono::milliseconds>(deadline - Clock::now()));
        o.assumptions = std::move(assumptions);
        o.early_stop = std::move(early_stop);
        return engine::explore(functions_, entry, args, o, solver_);
    }

    SatResult check(const std::vector<Expr>& q)
    {
        solver_.set_budget(config_.solver_budget);
        const auto r = solver_.check(q);
        if (r == SatResult::unknown)
            unknown_seen = true;
        return r;
    }

    bool sat(const std::vector<Expr>& q) { return check(q) == SatResult::sat; }
    bool unsat(const std::vector<Expr>& q) { return check(q) == SatResult::unsat; }

    /// True when the constraints pin the 64-bit variable to `value`.
    bool forces(const std::vector<Expr>& con, const Expr& var, const Expr& value)
    {
        if (std::ranges::none_of(con, [&](const Expr& e) { return sym::mentions(e, var->name); }))
            return false;
        return unsat(with(con, {sym::ne(var, value)}));
    }

    /// Standalone reachability of a valuable operation from `f`, cached.
    bool reaches(uint32_t f, std::optional<Criterion> only, Clock::time_point deadline, Diagnostics& diag)
    {
        const auto key = std::make_pair(f, only ? static_cast<int>(*only) : -1);
        if (auto it = reach_cache_.find(key); it != reach_cache_.end())
            return it->second;
        auto hit = [only](const ImportCallRecord& c) {
            const auto crit = criterion_of(c.name);
            return crit && (!only || *crit == *only);
        };
        const auto tree = explore(f, engine::entry_arguments(module_, f), {}, deadline,
                                  [&](const PathRecord& p, sym::Solver&) { return last_call_is(p, hit); });
        diag.absorb(tree);
        bool found = false;
        for (const auto& p : tree.paths)
            found = found || std::ranges::any_of(p.import_calls, hit);
        reach_cache_[key] = found;
        return found;
    }

    bool unknown_seen = false;

private:
    const wasm::WasmModule& module_;
    const ScanConfig& config_;
    sym::Solver& solver_;
    engine::FunctionCache functions_;
    uint32_t apply_;
    std::optional<PathTree> apply_tree_;
    std::map<std::pair<uint32_t, int>, bool> reach_cache_;

public:
    const Expr receiver;
    const Expr code;
    const Expr action;
    const Expr token;
    const Expr transfer;
    const Expr to_field;
};

bool timed_out(Clock::time_point deadline)
{
    return Clock::now() >= deadline;
}

Finding detect_fake_eos(Session& s, Clock::time_point deadline)
{
    Finding f;
    const auto& tree = s.apply_tree(deadline);
    f.diagnostics.absorb(tree);
    for (const auto& p : tree.paths)
    {
        const auto hit = first_call(p, "send_inline");
        size_t n = 0;
        if (hit)
            n = p.import_calls[*hit].constraint_index;
        else if (p.terminal == Terminal::depth_pruned)
        {
            const bool into_valuable = std::ranges::any_of(p.calls, [&](const engine::CallEvent& c) {
                return c.depth == 1 && s.reaches(c.callee, Criterion::send_inline, deadline, f.diagnostics);
            });
            if (!into_valuable)
                continue;
            n = p.constraints.size();
        }
        else
            continue;
        const auto con = prefix(p, n);
        // paths that do not pin action to transfer are irrelevant here
        if (!s.forces(con, s.action, s.transfer))
            continue;
        const bool mentions_code =
            std::ranges::any_of(con, [&](const Expr& e) { return sym::mentions(e, s.code->name); });
        const auto direct = with(con, {sym::eq(s.code, s.receiver)});
        const bool accepts_self = s.sat(direct);
        if (!accepts_self && mentions_code)
            continue;
        f.verdict = Verdict::vulnerable;
        Witness w;
        w.entry = s.apply();
        w.args = s.apply_args();
        w.conditions = accepts_self ? direct : con;
        w.import_trace = hit ? trace(p, *hit) : trace(p, p.import_calls.size());
        f.witness = std::move(w);
        f.diagnostics.notes.push_back(mentions_code ? "transfer dispatch accepts code == receiver"
                                                    : "transfer dispatch never checks code");
        return f;
    }
    f.verdict = tree.timed_out ? Verdict::inconclusive : Verdict::safe;
    return f;
}

Finding detect_fake_receipt(Session& s, Clock::time_point deadline)
{
    Finding f;
    const auto& tree = s.apply_tree(deadline);
    f.diagnostics.absorb(tree);
    const std::vector<Expr> notification = {sym::eq(s.action, s.transfer), sym::eq(s.code, s.token)};
    std::set<uint32_t> handlers;

    auto examine = [&](const PathRecord& p, uint32_t entry, const std::vector<Expr>& args, size_t handler_slot) {
        for (size_t i = 0; i < p.import_calls.size(); ++i)
        {
            const auto& c = p.import_calls[i];
            if (!criterion_of(c.name))
                continue;
            auto con = prefix(p, c.constraint_index);
            con.insert(con.end(), notification.begin(), notification.end());
            if (s.unsat(con))
                continue;
            handlers.insert(c.stack.size() > handler_slot ? c.stack[handler_slot] : c.stack.back());
            if (f.witness)
                continue;
            auto unprotected = with(con, {sym::ne(s.to_field, s.receiver)});
            if (s.sat(unprotected))
                f.witness = Witness{entry, args, std::move(unprotected), trace(p, i), {}};
        }
    };

    struct Resume
    {
        uint32_t callee;
        std::vector<Expr> args;
        std::vector<Expr> con;
    };
    std::vector<Resume> resumes;
    for (const auto& p : tree.paths)
    {
        examine(p, s.apply(), s.apply_args(), 1);
        if (p.terminal != Terminal::depth_pruned)
            continue;
        for (const auto& c : p.calls)
        {
            if (c.depth != 1 || std::ranges::any_of(resumes, [&](const Resume& r) { return r.callee == c.callee; }))
                continue;
            auto con = with(prefix(p, c.constraint_index), {notification[0], notification[1]});
            if (!s.sat(con) || !s.reaches(c.callee, std::nullopt, deadline, f.diagnostics))
                continue;
            resumes.push_back({c.callee, c.args, std::move(con)});
        }
    }
    // Handlers whose valuable operations lie past the depth bound: run them
    // on their own from the call site, stopping at the first unprotected one.
    for (const auto& r : resumes)
    {
        if (handlers.count(r.callee))
            continue;
        auto unprotected_now = [&](const PathRecord& p, sym::Solver& solver) {
            if (!last_call_is(p, [](const ImportCallRecord& c) { return criterion_of(c.name).has_value(); }))
                return false;
            auto q = prefix(p, p.import_calls.back().constraint_index);
            q.insert(q.end(), notification.begin(), notification.end());
            q.push_back(sym::ne(s.to_field, s.receiver));
            return solver.check(q) == SatResult::sat;
        };
        const auto sub = s.explore(r.callee, r.args, r.con, deadline, unprotected_now);
        f.diagnostics.absorb(sub);
        for (const auto& p : sub.paths)
            examine(p, r.callee, r.args, 0);
    }

    if (handlers.size() > 1)
    {
        f.verdict = Verdict::inconclusive;
        f.witness.reset();
        f.diagnostics.analysis_error = true;
        f.diagnostics.notes.push_back("more than one valuable transfer handler (" + std::to_string(handlers.size()) +
                                      ")");
        return f;
    }
    if (f.witness)
    {
        f.verdict = Verdict::vulnerable;
        f.diagnostics.notes.push_back("valuable operation reachable on a transfer notification with to != receiver");
        return f;
    }
    f.verdict = f.diagnostics.timeout ? Verdict::inconclusive : Verdict::safe;
    return f;
}

bool tainted_rem(const engine::RemEvent& r)
{
    return sym::taint_of(r.dividend).contains(sym::tags::blockchain_state) &&
           !sym::taint_of(r.divisor).contains(sym::tags::blockchain_state);
}

Finding detect_rollback(Session& s, const ScanConfig& config, Clock::time_point deadline)
{
    Finding f;
    if (!config.gambling)
    {
        f.verdict = Verdict::safe;
        f.diagnostics.notes.push_back("gated");
        return f;
    }
    const auto& m = s.module();
    auto counts = [&](const engine::RemEvent& r) { return tainted_rem(r) && !is_library_function(m, r.function); };
    auto settled = [&](const PathRecord& p, sym::Solver&) {
        return first_call(p, "send_inline") && std::ranges::any_of(p.rems, counts);
    };
    for (uint32_t fn = m.imported_function_count(); fn < m.function_count(); ++fn)
    {
        if (timed_out(deadline))
        {
            f.diagnostics.timeout = true;
            break;
        }
        const auto args = engine::entry_arguments(m, fn);
        const auto tree = s.explore(fn, args, {}, deadline, settled);
        f.diagnostics.absorb(tree);

        std::vector<const PathRecord*> reaching;
        for (const auto& p : tree.paths)
            if (first_call(p, "send_inline"))
                reaching.push_back(&p);
        if (reaching.empty())
            continue;
        // drop paths whose blocks are all covered by another retained path
        std::vector<const PathRecord*> kept;
        for (size_t i = 0; i < reaching.size(); ++i)
        {
            bool redundant = false;
            for (size_t j = 0; j < reaching.size() && !redundant; ++j)
            {
                if (i == j)
                    continue;
                const auto& a = reaching[i]->blocks;
                const auto& b = reaching[j]->blocks;
                if (a.size() > b.size() || (a.size() == b.size() && i < j))
                    continue;
                redundant = std::ranges::includes(b, a);
            }
            if (!redundant)
                kept.push_back(reaching[i]);
        }
        for (const auto* p : kept)
        {
            const auto rem = std::ranges::find_if(p->rems, counts);
            if (rem == p->rems.end())
                continue;
            f.verdict = Verdict::vulnerable;
            f.witness = Witness{fn, args, prefix(*p, p->constraints.size()), trace(*p, *first_call(*p, "send_inline")), {}};
            f.diagnostics.notes.push_back("rem on blockchain state at offset " + std::to_string(rem->offset) + " in " +
                                          m.function_label(rem->function));
            return f;
        }
    }
    f.verdict = f.diagnostics.timeout ? Verdict::inconclusive : Verdict::safe;
    return f;
}

Finding detect_missing_permission(Session& s, Clock::time_point deadline)
{
    Finding f;
    const auto& tree = s.apply_tree(deadline);
    f.diagnostics.absorb(tree);
    std::set<std::string> names;

    auto examine = [&](const PathRecord& p, uint32_t entry, const std::vector<Expr>& args, bool authorized) {
        for (size_t i = 0; i < p.import_calls.size(); ++i)
        {
            const auto& c = p.import_calls[i];
            if (is_authority(c.name))
            {
                authorized = true;
                continue;
            }
            if (authorized || !criterion_of(c.name))
                continue;
            auto con = with(prefix(p, c.constraint_index), {sym::eq(s.code, s.receiver)});
            if (!s.sat(con))
                continue;
            std::vector<std::string> acts;
            for (auto k : compared_constants(con, s.action->name))
                if (s.unsat(with(con, {sym::ne(s.action, sym::bv(64, k))})))
                    acts.push_back(eosio::name_decode(k));
            if (acts.empty())
                acts.push_back("*");
            names.insert(acts.begin(), acts.end());
            if (!f.witness)
                f.witness = Witness{entry, args, std::move(con), trace(p, i), {}};
        }
    };

    std::set<uint32_t> resumed;
    for (const auto& p : tree.paths)
    {
        examine(p, s.apply(), s.apply_args(), false);
        if (p.terminal != Terminal::depth_pruned)
            continue;
        for (const auto& c : p.calls)
        {
            if (c.depth != 1 || resumed.count(c.callee))
                continue;
            const bool authorized = std::any_of(p.import_calls.begin(),
                                                p.import_calls.begin() + static_cast<std::ptrdiff_t>(c.import_index),
                                                [](const ImportCallRecord& r) { return is_authority(r.name); });
            if (authorized)
                continue;
            auto con = with(prefix(p, c.constraint_index), {sym::eq(s.code, s.receiver)});
            if (!s.sat(con) || !s.reaches(c.callee, std::nullopt, deadline, f.diagnostics))
                continue;
            resumed.insert(c.callee);
            const auto sub = s.explore(c.callee, c.args, con, deadline, {});
            f.diagnostics.absorb(sub);
            for (const auto& q : sub.paths)
                examine(q, c.callee, c.args, false);
        }
    }
    if (f.witness)
    {
        f.verdict = Verdict::vulnerable;
        f.witness->actions.assign(names.begin(), names.end());
        return f;
    }
    f.verdict = f.diagnostics.timeout ? Verdict::inconclusive : Verdict::safe;
    return f;
}

}  // namespace

std::vector<Finding> scan(const wasm::WasmModule& module,
                          const ScanConfig& config,
                          const std::string& contract_id,
                          ScanTiming* timing)
{
    const auto start = Clock::now();
    sym::Solver solver(config.solver_budget);
    std::optional<Session> session;
    std::string setup_error;
    try
    {
        session.emplace(module, config, solver);
    }
    catch (const Error& e)
    {
        setup_error = e.what();
    }

    std::vector<Finding> out;
    for (auto d : all_detectors)
    {
        if (!config.detectors.count(d))
            continue;
        const auto t0 = Clock::now();
        const auto deadline = t0 + config.timeout;
        Finding f;
        if (!session)
        {
            f.verdict = Verdict::inconclusive;
            f.diagnostics.analysis_error = true;
            f.diagnostics.notes.push_back(setup_error);
        }
        else
        {
            try
            {
                switch (d)
                {
                case Detector::fake_eos: f = detect_fake_eos(*session, deadline); break;
                case Detector::fake_receipt: f = detect_fake_receipt(*session, deadline); break;
                case Detector::rollback: f = detect_rollback(*session, config, deadline); break;
                case Detector::missing_permission: f = detect_missing_permission(*session, deadline); break;
                }
                if (session->unknown_seen)
                    f.diagnostics.solver_unknown = true;
            }
            catch (const std::exception& e)
            {
                f = Finding{};
                f.verdict = Verdict::inconclusive;
                f.diagnostics.analysis_error = true;
                f.diagnostics.notes.push_back(e.what());
            }
        }
        f.contract_id = contract_id;
        f.detector = d;
        if (timing)
            timing->detectors[d] = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0);
        out.push_back(std::move(f));
    }
    if (timing)
        timing->total = std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
    return out;
}

ReplayResult replay_witness(const wasm::WasmModule& module, const Witness& witness, const ScanConfig& config)
{
    ReplayResult out;
    sym::Solver solver(config.solver_budget);
    const auto solved = solver.solve(witness.conditions, true);
    if (solved.result != SatResult::sat)
    {
        out.detail = std::string("witness conditions are ") + sym::to_string(solved.result);
        return out;
    }
    std::vector<Expr> args;
    for (const auto& a : witness.args)
        args.push_back(sym::constant(sym::evaluate(a, solved.model)));

    engine::ExplorationOptions o;
    o.call_depth = config.call_depth;
    o.timeout = config.timeout;
    o.solver_budget = config.solver_budget;
    o.replay_model = solved.model;
    const auto tree = engine::explore(module, witness.entry, args, o);
    for (const auto& p : tree.paths)
    {
        std::vector<std::string> names;
        for (const auto& c : p.import_calls)
            names.push_back(c.name);
        const bool prefix_ok = names.size() >= witness.import_trace.size() &&
                               std::equal(witness.import_trace.begin(), witness.import_trace.end(), names.begin());
        if (prefix_ok || out.replayed_trace.empty())
            out.replayed_trace = names;
        if (prefix_ok)
        {
            out.reproduced = true;
            break;
        }
    }
    if (!out.reproduced)
        out.detail = "replay took " + std::to_string(tree.paths.size()) + " path(s), none matching the witness trace";
    return out;
}

}  // namespace eosscan::scanner
