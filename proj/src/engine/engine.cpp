#include "eosscan/engine/engine.hpp"

#include <algorithm>

#include "eosscan/emu/emulator.hpp"
#include "eosscan/error.hpp"

namespace eosscan::engine {

using wasm::Opcode;
using wasm::ValType;

std::string_view to_string(Terminal t) noexcept
{
    switch (t)
    {
    case Terminal::running: return "running";
    case Terminal::returned: return "returned";
    case Terminal::asserted_false: return "asserted_false";
    case Terminal::exited: return "exited";
    case Terminal::depth_pruned: return "depth_pruned";
    case Terminal::timeout_pruned: return "timeout_pruned";
    case Terminal::unsupported: return "unsupported";
    case Terminal::loop_pruned: return "loop_pruned";
    case Terminal::filtered: return "filtered";
    case Terminal::emulation_error: return "emulation_error";
    }
    return "?";
}

std::shared_ptr<const cfg::ControlFlowGraph> FunctionCache::graph(uint32_t func_index)
{
    auto it = graphs_.find(func_index);
    if (it != graphs_.end())
        return it->second;
    auto g = std::make_shared<const cfg::ControlFlowGraph>(cfg::build_cfg(module_, func_index));
    graphs_.emplace(func_index, g);
    return g;
}

StepContext::StepContext(FunctionCache& functions, const ExplorationOptions& options, sym::Solver& solver)
  : functions_(functions),
    options_(options),
    solver_(solver),
    deadline_(std::chrono::steady_clock::now() + options.timeout)
{
}

bool StepContext::expired() const
{
    return std::chrono::steady_clock::now() >= deadline_;
}

void StepContext::arm_solver()
{
    using namespace std::chrono;
    const auto left = duration_cast<milliseconds>(deadline_ - steady_clock::now());
    solver_.set_budget(std::clamp(left, milliseconds(1), options_.solver_budget));
}

namespace {

Expr model_value(const sym::Model& model, const std::string& name, uint32_t width)
{
    auto it = model.find(name);
    if (it == model.end() || it->second.width() != width)
        return sym::constant(sym::BitVec(width, 0));
    return sym::constant(it->second);
}

}  // namespace

Expr StepContext::fresh(MachineState& s, std::string_view base, uint32_t width, const sym::Taint& taint)
{
    auto name = std::string(base) + "#" + std::to_string(s.fresh_counter++);
    if (replaying())
        return model_value(*options_.replay_model, name, width);
    return sym::var(std::move(name), width, taint);
}

Expr StepContext::named(std::string name, uint32_t width, const sym::Taint& taint) const
{
    if (replaying())
        return model_value(*options_.replay_model, name, width);
    return sym::var(std::move(name), width, taint);
}

Expr StepContext::load(const MachineState& s, uint64_t addr, uint64_t len) const
{
    Expr v = s.memory.load(addr, len);
    if (!replaying() || v->is_const())
        return v;
    std::map<std::string, Expr> bindings;
    for (const auto& name : sym::variables(v))
        bindings.emplace(name, model_value(*options_.replay_model, name, 8));
    return sym::substitute(v, bindings);
}

sym::SatResult StepContext::feasible(const MachineState& s, const Expr& extra)
{
    if (extra->kind == sym::Kind::bool_const)
        return extra->truth ? sym::SatResult::sat : sym::SatResult::unsat;
    auto query = sym::exprs_of(s.record.constraints);
    query.push_back(extra);
    arm_solver();
    return solver_.check(query);
}

void StepContext::assume(MachineState& s, const Expr& cond)
{
    if (cond->kind == sym::Kind::bool_const && cond->truth)
        return;
    const uint32_t func = s.call_stack.empty() ? 0 : s.frame().func;
    s.record.constraints.push_back({cond, {func, site_offset, {}}});
    if (options_.target_filter && !s.finished())
    {
        arm_solver();
        if (!options_.target_filter(s.record, solver_))
            finish(s, Terminal::filtered, "target filter");
    }
}

std::optional<bool> StepContext::split(MachineState& s, std::vector<MachineState>& forks, const Expr& cond)
{
    if (cond->kind == sym::Kind::bool_const)
        return cond->truth;
    const auto on_true = feasible(s, cond);
    const Expr negated = sym::lnot(cond);
    if (on_true == sym::SatResult::unsat)
    {
        assume(s, negated);
        return false;
    }
    const auto on_false = feasible(s, negated);
    if (on_false == sym::SatResult::unsat)
    {
        if (on_true == sym::SatResult::unknown)
            s.record.feasibility_unknown = true;
        assume(s, cond);
        return true;
    }
    MachineState other = s;
    if (on_false == sym::SatResult::unknown)
        other.record.feasibility_unknown = true;
    if (on_true == sym::SatResult::unknown)
        s.record.feasibility_unknown = true;
    assume(other, negated);
    assume(s, cond);
    forks.push_back(std::move(other));
    return true;
}

void StepContext::concretize(MachineState& s, std::vector<MachineState>& forks, size_t stack_index)
{
    const Expr value = s.value_stack.at(stack_index);
    arm_solver();
    const auto limit = options_.concretize_limit;
    const auto values = solver_.enumerate(sym::exprs_of(s.record.constraints), value, limit + 1);
    if (values.empty())
    {
        finish(s, Terminal::unsupported, "no model for symbolic operand " + sym::to_string(value, 120));
        return;
    }
    if (values.size() > limit)
    {
        finish(s,
               Terminal::unsupported,
               "symbolic operand has more than " + std::to_string(limit) + " values: " + sym::to_string(value, 120));
        return;
    }
    for (size_t i = values.size(); i-- > 1;)
    {
        MachineState copy = s;
        copy.value_stack[stack_index] = sym::constant(values[i]);
        assume(copy, sym::eq(value, sym::constant(values[i])));
        forks.push_back(std::move(copy));
    }
    std::reverse(forks.end() - static_cast<std::ptrdiff_t>(values.size() - 1), forks.end());
    s.value_stack[stack_index] = sym::constant(values[0]);
    assume(s, sym::eq(value, sym::constant(values[0])));
}

void StepContext::finish(MachineState& s, Terminal t, std::string detail)
{
    s.record.terminal = t;
    s.record.detail = std::move(detail);
}

namespace {

uint32_t width_of(ValType t)
{
    switch (t)
    {
    case ValType::i64:
    case ValType::f64: return 64;
    default: return 32;
    }
}

Expr zero_of(ValType t)
{
    return sym::bv(width_of(t), 0);
}

std::pair<uint32_t, uint32_t> block_arity(const wasm::WasmModule& m, const wasm::BlockType& bt)
{
    switch (bt.kind)
    {
    case wasm::BlockType::Kind::empty: return {0, 0};
    case wasm::BlockType::Kind::value: return {0, 1};
    case wasm::BlockType::Kind::type_index: {
        const auto& sig = m.types.at(bt.type_index);
        return {static_cast<uint32_t>(sig.params.size()), static_cast<uint32_t>(sig.results.size())};
    }
    }
    return {0, 0};
}

class Executor
{
public:
    Executor(StepContext& ctx, MachineState& s, std::vector<MachineState>& forks)
      : ctx_(ctx), s_(s), forks_(forks), module_(ctx.module())
    {
    }

    void run()
    {
        Frame& f = s_.frame();
        const auto& instrs = f.graph->instructions();
        if (f.pc >= instrs.size())
            throw UnsupportedInstruction("program counter ran past the function body");
        pc_ = f.pc;
        graph_ = f.graph;
        const auto& in = instrs[pc_];
        ctx_.site_offset = in.byte_offset;
        const uint32_t block = graph_->block_of(pc_);
        if (graph_->block(block).first == pc_)
            s_.record.blocks.emplace(f.func, block);
        execute(in);
    }

private:
    std::vector<Expr>& stack() { return s_.value_stack; }

    Expr pop(MachineState& t)
    {
        if (t.value_stack.size() <= t.frame().stack_base)
            throw UnsupportedInstruction("operand stack underflow");
        Expr v = std::move(t.value_stack.back());
        t.value_stack.pop_back();
        return v;
    }
    Expr pop() { return pop(s_); }
    void push(Expr v) { s_.value_stack.push_back(std::move(v)); }
    const Expr& peek(size_t depth)
    {
        if (stack().size() <= s_.frame().stack_base + depth)
            throw UnsupportedInstruction("operand stack underflow");
        return stack()[stack().size() - 1 - depth];
    }

    void advance() { s_.frame().pc = pc_ + 1; }

    /// Concretizes the operands at the given depths; false means the instruction
    /// will re-run later on concrete values.
    bool need_concrete(std::initializer_list<size_t> depths) { return need_concrete(std::vector<size_t>(depths)); }
    bool need_concrete(const std::vector<size_t>& depths)
    {
        for (auto d : depths)
        {
            if (!peek(d)->is_const())
            {
                ctx_.concretize(s_, forks_, stack().size() - 1 - d);
                return false;
            }
        }
        return true;
    }

    /// States produced by a split: `s_` on `side`, the fork (if any) on `!side`.
    template <typename F>
    void on_split(const Expr& cond, F&& apply)
    {
        const size_t before = forks_.size();
        const auto side = ctx_.split(s_, forks_, cond);
        if (!side)
            return;
        if (!s_.finished())
            apply(s_, *side);
        if (forks_.size() > before && !forks_.back().finished())
            apply(forks_.back(), !*side);
    }

    void binary(sym::Kind kind)
    {
        Expr b = pop();
        Expr a = pop();
        push(sym::binary(kind, std::move(a), std::move(b)));
    }

    void compare(Expr cond) { push(sym::bool_to_bv(cond, 32)); }

    void compare_op(sym::Kind kind, bool swap, bool negate = false)
    {
        Expr b = pop();
        Expr a = pop();
        if (swap)
            std::swap(a, b);
        Expr c = sym::compare(kind, std::move(a), std::move(b));
        compare(negate ? sym::lnot(c) : c);
    }

    void division(sym::Kind kind)
    {
        const Expr divisor = peek(0);
        const Expr dividend = peek(1);
        const bool is_rem = kind == sym::Kind::urem || kind == sym::Kind::srem;
        auto apply = [&](MachineState& t, bool nonzero) {
            if (!nonzero)
            {
                StepContext::finish(t, Terminal::exited, "trap: integer divide by zero");
                return;
            }
            t.frame().pc = pc_ + 1;
            pop(t);
            pop(t);
            if (is_rem)
                t.record.rems.push_back(
                    {t.frame().func, ctx_.site_offset, dividend, divisor, kind == sym::Kind::srem});
            t.value_stack.push_back(sym::binary(kind, dividend, divisor));
        };
        on_split(sym::is_nonzero(divisor), apply);
    }

    void load(const wasm::Instruction& in, uint32_t bytes, uint32_t width, bool sign)
    {
        if (!need_concrete({0}))
            return;
        advance();
        const uint64_t addr = pop()->value.to_u64() + in.mem_arg().offset;
        Expr v = ctx_.load(s_, addr, bytes);
        if (8 * bytes < width)
            v = sign ? sym::sext(v, width - 8 * bytes) : sym::zext(v, width - 8 * bytes);
        push(std::move(v));
    }

    void store(const wasm::Instruction& in, uint32_t bytes)
    {
        if (!need_concrete({1}))
            return;
        advance();
        Expr v = pop();
        const uint64_t addr = pop()->value.to_u64() + in.mem_arg().offset;
        if (8 * bytes < v->width)
            v = sym::extract(v, 8 * bytes - 1, 0);
        s_.memory.store(addr, bytes, v);
    }

    void branch(MachineState& t, uint32_t depth)
    {
        Frame& f = t.frame();
        const auto n = static_cast<uint32_t>(f.labels.size());
        if (depth == n)
        {
            do_return(t);
            return;
        }
        if (depth > n)
            throw UnresolvableBranch("branch depth " + std::to_string(depth) + " exceeds nesting");
        const Label label = f.labels[n - 1 - depth];
        auto& st = t.value_stack;
        std::vector<Expr> carried(st.end() - label.arity, st.end());
        st.resize(label.height);
        st.insert(st.end(), carried.begin(), carried.end());
        if (label.is_loop)
        {
            if (++f.loop_counts[label.opener] > ctx_.options().loop_bound)
            {
                StepContext::finish(t, Terminal::loop_pruned, "loop bound at instruction " + std::to_string(label.opener));
                return;
            }
            f.labels.resize(n - depth);
            f.pc = label.opener + 1;
        }
        else
        {
            f.labels.resize(n - 1 - depth);
            f.pc = f.graph->instructions()[label.opener].end_index + 1;
        }
    }

    static void do_return(MachineState& t)
    {
        Frame& f = t.frame();
        auto& st = t.value_stack;
        if (st.size() < f.stack_base + f.result_arity)
            throw UnsupportedInstruction("operand stack underflow at return");
        std::vector<Expr> results(st.end() - f.result_arity, st.end());
        st.resize(f.stack_base);
        t.call_stack.pop_back();
        if (t.call_stack.empty())
        {
            t.record.return_values = std::move(results);
            StepContext::finish(t, Terminal::returned);
            return;
        }
        st.insert(st.end(), results.begin(), results.end());
    }

    /// Concreteness requirement for calling `callee` with `extra` operands above its arguments.
    bool ready_to_call(uint32_t callee, size_t extra)
    {
        if (!module_.is_imported_function(callee))
            return true;
        const auto* model = emu::find_model(module_.imported_function(callee).field);
        if (!model || model->concrete_args.empty())
            return true;
        const auto n = module_.function_signature(callee).params.size();
        std::vector<size_t> depths;
        for (auto i : model->concrete_args)
            if (i < n)
                depths.push_back(extra + n - 1 - i);
        return need_concrete(depths);
    }

    void call(uint32_t callee, bool indirect)
    {
        const auto& sig = module_.function_signature(callee);
        const auto n = sig.params.size();
        std::vector<Expr> args(n);
        for (size_t i = n; i-- > 0;)
            args[i] = pop();
        if (module_.is_imported_function(callee))
        {
            emu::emulate(ctx_, s_, forks_, callee, std::move(args));
            return;
        }
        const uint32_t depth = s_.depth() + 1;
        if (depth > ctx_.options().call_depth)
        {
            StepContext::finish(s_, Terminal::depth_pruned, "call to " + module_.function_label(callee));
            return;
        }
        s_.record.calls.push_back({s_.frame().func,
                                   callee,
                                   args,
                                   depth,
                                   ctx_.site_offset,
                                   s_.record.constraints.size(),
                                   s_.record.import_calls.size(),
                                   indirect});
        s_.record.max_depth = std::max(s_.record.max_depth, depth);
        Frame frame;
        frame.func = callee;
        frame.graph = ctx_.functions().graph(callee);
        frame.locals = std::move(args);
        for (const auto& decl : module_.body(callee).locals)
            for (uint32_t i = 0; i < decl.count; ++i)
                frame.locals.push_back(zero_of(decl.type));
        frame.stack_base = static_cast<uint32_t>(stack().size());
        frame.result_arity = static_cast<uint32_t>(sig.results.size());
        s_.call_stack.push_back(std::move(frame));
    }

    std::map<uint32_t, uint32_t> table_slots() const
    {
        std::map<uint32_t, uint32_t> slots;
        for (const auto& seg : module_.elements)
        {
            if (seg.table_index != 0)
                continue;
            for (size_t i = 0; i < seg.functions.size(); ++i)
                slots[static_cast<uint32_t>(seg.offset) + static_cast<uint32_t>(i)] = seg.functions[i];
        }
        return slots;
    }

    void call_indirect(const wasm::Instruction& in)
    {
        const auto& expected = module_.types.at(in.call_indirect().type_index);
        const auto slots = table_slots();
        const Expr index = peek(0);
        if (!index->is_const())
        {
            std::vector<std::pair<uint32_t, Expr>> feasible;
            for (const auto& [slot, func] : slots)
            {
                if (module_.function_signature(func) != expected)
                    continue;
                Expr cond = sym::eq(index, sym::bv(32, slot));
                if (ctx_.feasible(s_, cond) != sym::SatResult::unsat)
                    feasible.emplace_back(slot, cond);
            }
            if (feasible.empty())
            {
                StepContext::finish(s_, Terminal::exited, "trap: no matching indirect callee");
                return;
            }
            const size_t idx = stack().size() - 1;
            for (size_t i = 1; i < feasible.size(); ++i)
            {
                MachineState copy = s_;
                copy.value_stack[idx] = sym::bv(32, feasible[i].first);
                ctx_.assume(copy, feasible[i].second);
                forks_.push_back(std::move(copy));
            }
            stack()[idx] = sym::bv(32, feasible[0].first);
            ctx_.assume(s_, feasible[0].second);
            return;
        }
        const auto slot = static_cast<uint32_t>(index->value.to_u64());
        auto it = slots.find(slot);
        if (it == slots.end() || module_.function_signature(it->second) != expected)
        {
            advance();
            StepContext::finish(s_, Terminal::exited, "trap: bad indirect call slot " + std::to_string(slot));
            return;
        }
        if (!ready_to_call(it->second, 1))
            return;
        advance();
        pop();
        call(it->second, true);
    }

    void br_table(const wasm::Instruction& in)
    {
        const auto& table = in.br_table();
        const auto n = static_cast<uint32_t>(table.size());
        auto depth_of = [&](uint32_t i) { return i + 1 < n ? table.targets[i] : table.default_target; };
        advance();
        const Expr selector = pop();
        if (selector->is_const())
        {
            const uint64_t v = selector->value.to_u64();
            branch(s_, depth_of(static_cast<uint32_t>(std::min<uint64_t>(v, n - 1))));
            return;
        }
        // One successor per distinct target, ordered by first case index.
        std::vector<std::pair<uint32_t, std::vector<uint32_t>>> groups;
        for (uint32_t i = 0; i < n; ++i)
        {
            const uint32_t d = depth_of(i);
            auto g = std::find_if(groups.begin(), groups.end(), [&](const auto& p) { return p.first == d; });
            if (g == groups.end())
                groups.push_back({d, {i}});
            else
                g->second.push_back(i);
        }
        std::vector<std::pair<uint32_t, Expr>> live;
        for (const auto& [depth, cases] : groups)
        {
            std::vector<Expr> terms;
            for (auto c : cases)
                terms.push_back(c + 1 < n ? sym::eq(selector, sym::bv(32, c)) : sym::uge(selector, sym::bv(32, n - 1)));
            Expr cond = sym::lor_all(terms);
            const auto r = ctx_.feasible(s_, cond);
            if (r != sym::SatResult::unsat)
                live.emplace_back(depth, cond);
        }
        if (live.empty())
        {
            StepContext::finish(s_, Terminal::filtered, "no feasible br_table case");
            return;
        }
        for (size_t i = 1; i < live.size(); ++i)
        {
            MachineState copy = s_;
            ctx_.assume(copy, live[i].second);
            if (!copy.finished())
                branch(copy, live[i].first);
            forks_.push_back(std::move(copy));
        }
        ctx_.assume(s_, live[0].second);
        if (!s_.finished())
            branch(s_, live[0].first);
    }

    void memory_copy()
    {
        if (!need_concrete({0, 1, 2}))
            return;
        advance();
        const uint64_t len = pop()->value.to_u64();
        const uint64_t src = pop()->value.to_u64();
        const uint64_t dst = pop()->value.to_u64();
        if (len > 0)
            s_.memory.store(dst, len, ctx_.load(s_, src, len));
    }

    void memory_fill()
    {
        if (!need_concrete({0, 2}))
            return;
        advance();
        const uint64_t len = pop()->value.to_u64();
        const Expr byte = sym::extract(pop(), 7, 0);
        const uint64_t dst = pop()->value.to_u64();
        if (len == 0)
            return;
        if (len > s_.memory.limit())
            throw AddressOverflow("memory.fill beyond memory");
        s_.memory.store(dst, len, sym::concat_all(std::vector<Expr>(len, byte)));
    }

    void execute(const wasm::Instruction& in)
    {
        auto& f = s_.frame();
        switch (in.op)
        {
        case Opcode::unreachable:
            advance();
            StepContext::finish(s_, Terminal::exited, "unreachable");
            return;
        case Opcode::nop: advance(); return;
        case Opcode::block:
        case Opcode::loop: {
            advance();
            const auto [params, results] = block_arity(module_, in.block_type());
            const bool loop = in.op == Opcode::loop;
            f.labels.push_back({pc_, loop ? params : results, static_cast<uint32_t>(stack().size()) - params, loop});
            if (loop)
                f.loop_counts[pc_] = 0;
            return;
        }
        case Opcode::if_: {
            advance();
            const Expr cond = pop();
            const auto [params, results] = block_arity(module_, in.block_type());
            const Label label{pc_, results, static_cast<uint32_t>(stack().size()) - params, false};
            on_split(sym::is_nonzero(cond), [&](MachineState& t, bool taken) {
                Frame& tf = t.frame();
                if (taken)
                    tf.labels.push_back(label);
                else if (in.else_index)
                {
                    tf.labels.push_back(label);
                    tf.pc = *in.else_index + 1;
                }
                else
                    tf.pc = in.end_index + 1;
            });
            return;
        }
        case Opcode::else_:
            if (f.labels.empty())
                throw UnsupportedInstruction("else outside if");
            f.pc = f.graph->instructions()[f.labels.back().opener].end_index;
            return;
        case Opcode::end:
            advance();
            if (f.labels.empty())
                do_return(s_);
            else
                f.labels.pop_back();
            return;
        case Opcode::br: advance(); branch(s_, in.index_imm()); return;
        case Opcode::br_if: {
            advance();
            const Expr cond = pop();
            const uint32_t depth = in.index_imm();
            on_split(sym::is_nonzero(cond), [&](MachineState& t, bool taken) {
                if (taken)
                    branch(t, depth);
            });
            return;
        }
        case Opcode::br_table: br_table(in); return;
        case Opcode::return_: advance(); do_return(s_); return;
        case Opcode::call: {
            const uint32_t callee = in.index_imm();
            if (!ready_to_call(callee, 0))
                return;
            advance();
            call(callee, false);
            return;
        }
        case Opcode::call_indirect: call_indirect(in); return;
        case Opcode::drop: advance(); pop(); return;
        case Opcode::select:
        case Opcode::select_t: {
            advance();
            Expr c = pop();
            Expr b = pop();
            Expr a = pop();
            push(sym::ite(sym::is_nonzero(c), std::move(a), std::move(b)));
            return;
        }
        case Opcode::local_get: advance(); push(f.locals.at(in.index_imm())); return;
        case Opcode::local_set: advance(); f.locals.at(in.index_imm()) = pop(); return;
        case Opcode::local_tee: advance(); f.locals.at(in.index_imm()) = peek(0); return;
        case Opcode::global_get: advance(); push(s_.globals.at(in.index_imm())); return;
        case Opcode::global_set: advance(); s_.globals.at(in.index_imm()) = pop(); return;

        case Opcode::i32_load: load(in, 4, 32, false); return;
        case Opcode::i64_load: load(in, 8, 64, false); return;
        case Opcode::i32_load8_s: load(in, 1, 32, true); return;
        case Opcode::i32_load8_u: load(in, 1, 32, false); return;
        case Opcode::i32_load16_s: load(in, 2, 32, true); return;
        case Opcode::i32_load16_u: load(in, 2, 32, false); return;
        case Opcode::i64_load8_s: load(in, 1, 64, true); return;
        case Opcode::i64_load8_u: load(in, 1, 64, false); return;
        case Opcode::i64_load16_s: load(in, 2, 64, true); return;
        case Opcode::i64_load16_u: load(in, 2, 64, false); return;
        case Opcode::i64_load32_s: load(in, 4, 64, true); return;
        case Opcode::i64_load32_u: load(in, 4, 64, false); return;
        case Opcode::i32_store: store(in, 4); return;
        case Opcode::i64_store: store(in, 8); return;
        case Opcode::i32_store8:
        case Opcode::i64_store8: store(in, 1); return;
        case Opcode::i32_store16:
        case Opcode::i64_store16: store(in, 2); return;
        case Opcode::i64_store32: store(in, 4); return;
        case Opcode::memory_size: advance(); push(sym::bv(32, s_.memory.limit() / 65536)); return;
        case Opcode::memory_grow:
            advance();
            pop();
            push(sym::bv(32, 0xFFFFFFFFu));
            return;
        case Opcode::memory_copy: memory_copy(); return;
        case Opcode::memory_fill: memory_fill(); return;

        case Opcode::i32_const: advance(); push(sym::bv(32, static_cast<uint32_t>(in.i32()))); return;
        case Opcode::i64_const: advance(); push(sym::bv(64, static_cast<uint64_t>(in.i64()))); return;

        case Opcode::i32_eqz:
        case Opcode::i64_eqz: {
            advance();
            Expr a = pop();
            const auto w = a->width;
            compare(sym::eq(std::move(a), sym::bv(w, 0)));
            return;
        }
        default: break;
        }
        advance();
        arithmetic(in);
    }

    void arithmetic(const wasm::Instruction& in)
    {
        using K = sym::Kind;
        switch (in.op)
        {
        case Opcode::i32_eq:
        case Opcode::i64_eq: compare_op(K::eq, false); return;
        case Opcode::i32_ne:
        case Opcode::i64_ne: compare_op(K::eq, false, true); return;
        case Opcode::i32_lt_s:
        case Opcode::i64_lt_s: compare_op(K::slt, false); return;
        case Opcode::i32_lt_u:
        case Opcode::i64_lt_u: compare_op(K::ult, false); return;
        case Opcode::i32_gt_s:
        case Opcode::i64_gt_s: compare_op(K::slt, true); return;
        case Opcode::i32_gt_u:
        case Opcode::i64_gt_u: compare_op(K::ult, true); return;
        case Opcode::i32_le_s:
        case Opcode::i64_le_s: compare_op(K::sle, false); return;
        case Opcode::i32_le_u:
        case Opcode::i64_le_u: compare_op(K::ule, false); return;
        case Opcode::i32_ge_s:
        case Opcode::i64_ge_s: compare_op(K::sle, true); return;
        case Opcode::i32_ge_u:
        case Opcode::i64_ge_u: compare_op(K::ule, true); return;

        case Opcode::i32_clz:
        case Opcode::i64_clz: push(sym::unary(K::clz, pop())); return;
        case Opcode::i32_ctz:
        case Opcode::i64_ctz: push(sym::unary(K::ctz, pop())); return;
        case Opcode::i32_popcnt:
        case Opcode::i64_popcnt: push(sym::unary(K::popcnt, pop())); return;
        case Opcode::i32_add:
        case Opcode::i64_add: binary(K::add); return;
        case Opcode::i32_sub:
        case Opcode::i64_sub: binary(K::sub); return;
        case Opcode::i32_mul:
        case Opcode::i64_mul: binary(K::mul); return;
        case Opcode::i32_and:
        case Opcode::i64_and: binary(K::band); return;
        case Opcode::i32_or:
        case Opcode::i64_or: binary(K::bor); return;
        case Opcode::i32_xor:
        case Opcode::i64_xor: binary(K::bxor); return;
        case Opcode::i32_shl:
        case Opcode::i64_shl: shift(K::shl); return;
        case Opcode::i32_shr_s:
        case Opcode::i64_shr_s: shift(K::ashr); return;
        case Opcode::i32_shr_u:
        case Opcode::i64_shr_u: shift(K::lshr); return;
        case Opcode::i32_rotl:
        case Opcode::i64_rotl: shift(K::rotl); return;
        case Opcode::i32_rotr:
        case Opcode::i64_rotr: shift(K::rotr); return;
        case Opcode::i32_div_s:
        case Opcode::i64_div_s: undo_advance(); division(K::sdiv); return;
        case Opcode::i32_div_u:
        case Opcode::i64_div_u: undo_advance(); division(K::udiv); return;
        case Opcode::i32_rem_s:
        case Opcode::i64_rem_s: undo_advance(); division(K::srem); return;
        case Opcode::i32_rem_u:
        case Opcode::i64_rem_u: undo_advance(); division(K::urem); return;

        case Opcode::i32_wrap_i64: push(sym::extract(pop(), 31, 0)); return;
        case Opcode::i64_extend_i32_s: push(sym::sext(pop(), 32)); return;
        case Opcode::i64_extend_i32_u: push(sym::zext(pop(), 32)); return;
        case Opcode::i32_extend8_s: push(sym::sext(sym::extract(pop(), 7, 0), 24)); return;
        case Opcode::i32_extend16_s: push(sym::sext(sym::extract(pop(), 15, 0), 16)); return;
        case Opcode::i64_extend8_s: push(sym::sext(sym::extract(pop(), 7, 0), 56)); return;
        case Opcode::i64_extend16_s: push(sym::sext(sym::extract(pop(), 15, 0), 48)); return;
        case Opcode::i64_extend32_s: push(sym::sext(sym::extract(pop(), 31, 0), 32)); return;
        default: break;
        }
        throw UnsupportedInstruction("unsupported instruction " + std::string(wasm::mnemonic(in.op)));
    }

    /// Wasm masks shift counts by the operand width.
    void shift(sym::Kind kind)
    {
        Expr b = pop();
        Expr a = pop();
        const auto w = a->width;
        if (kind != sym::Kind::rotl && kind != sym::Kind::rotr)
            b = sym::binary(sym::Kind::band, std::move(b), sym::bv(w, w - 1));
        push(sym::binary(kind, std::move(a), std::move(b)));
    }

    void undo_advance() { s_.frame().pc = pc_; }

    StepContext& ctx_;
    MachineState& s_;
    std::vector<MachineState>& forks_;
    const wasm::WasmModule& module_;
    std::shared_ptr<const cfg::ControlFlowGraph> graph_;
    uint32_t pc_ = 0;
};

}  // namespace

MachineState initial_state(StepContext& ctx, uint32_t entry, const std::vector<Expr>& args)
{
    const auto& m = ctx.module();
    if (m.is_imported_function(entry) || entry >= m.function_count())
        throw Error("entry must be a locally defined function");
    const auto& sig = m.function_signature(entry);
    if (args.size() != sig.params.size())
        throw WidthMismatch("entry expects " + std::to_string(sig.params.size()) + " arguments");
    for (size_t i = 0; i < args.size(); ++i)
        if (args[i]->width != width_of(sig.params[i]))
            throw WidthMismatch("entry argument " + std::to_string(i) + " has the wrong width");

    MachineState s;
    std::optional<wasm::Limits> limits = m.memory_limits;
    for (const auto& imp : m.imports)
        if (imp.kind == wasm::ExternalKind::memory)
            limits = imp.memory;
    s.memory.set_limit(limits ? static_cast<uint64_t>(limits->min) * 65536 : 0);
    for (const auto& seg : m.data_segments)
        if (seg.mode != wasm::DataSegment::Mode::passive)
            s.memory.store_bytes(static_cast<uint32_t>(seg.offset), seg.data);

    uint32_t imported_globals = 0;
    for (const auto& imp : m.imports)
    {
        if (imp.kind != wasm::ExternalKind::global)
            continue;
        s.globals.push_back(ctx.named("global" + std::to_string(imported_globals++), width_of(imp.global.type), {}));
    }
    for (const auto& g : m.globals)
    {
        switch (g.init.op)
        {
        case Opcode::i32_const: s.globals.push_back(sym::bv(32, static_cast<uint32_t>(g.init.i32()))); break;
        case Opcode::i64_const: s.globals.push_back(sym::bv(64, static_cast<uint64_t>(g.init.i64()))); break;
        case Opcode::global_get: s.globals.push_back(s.globals.at(g.init.index_imm())); break;
        default: s.globals.push_back(zero_of(g.type.type)); break;
        }
    }

    Frame frame;
    frame.func = entry;
    frame.graph = ctx.functions().graph(entry);
    frame.locals = args;
    for (const auto& decl : m.body(entry).locals)
        for (uint32_t i = 0; i < decl.count; ++i)
            frame.locals.push_back(zero_of(decl.type));
    frame.result_arity = static_cast<uint32_t>(sig.results.size());
    s.call_stack.push_back(std::move(frame));

    for (const auto& a : ctx.options().assumptions)
        ctx.assume(s, a);
    return s;
}

void step(StepContext& ctx, MachineState& s, std::vector<MachineState>& forks)
{
    if (s.finished())
        return;
    try
    {
        Executor(ctx, s, forks).run();
    }
    catch (const UnsupportedInstruction& e)
    {
        StepContext::finish(s, Terminal::unsupported, e.what());
    }
    catch (const AddressOverflow& e)
    {
        StepContext::finish(s, Terminal::exited, std::string("trap: ") + e.what());
    }
    catch (const EmulationException& e)
    {
        StepContext::finish(s, Terminal::emulation_error, e.what());
    }
    catch (const WidthMismatch& e)
    {
        StepContext::finish(s, Terminal::unsupported, std::string("ill-typed operands: ") + e.what());
    }
    catch (const UnresolvableBranch& e)
    {
        StepContext::finish(s, Terminal::unsupported, e.what());
    }
    catch (const std::out_of_range& e)
    {
        StepContext::finish(s, Terminal::unsupported, std::string("index out of range: ") + e.what());
    }
}

std::vector<MachineState> step(StepContext& ctx, MachineState s)
{
    std::vector<MachineState> forks;
    step(ctx, s, forks);
    std::vector<MachineState> out;
    out.push_back(std::move(s));
    for (auto& f : forks)
        out.push_back(std::move(f));
    return out;
}

PathTree explore(FunctionCache& functions,
                 uint32_t entry,
                 const std::vector<Expr>& initial_args,
                 const ExplorationOptions& options,
                 sym::Solver& solver)
{
    if (options.call_depth < 1 || options.timeout.count() <= 0)
        throw Error("call_depth must be at least 1 and timeout positive");
    PathTree tree;
    tree.entry = entry;
    tree.args = initial_args;
    const auto queries_before = solver.query_count();
    StepContext ctx(functions, options, solver);

    std::vector<MachineState> work;
    work.push_back(initial_state(ctx, entry, initial_args));
    std::vector<MachineState> forks;
    bool halted = false;

    auto wants_stop = [&](const MachineState& s) {
        return options.early_stop && options.early_stop(s.record, solver);
    };

    while (!work.empty() && !halted)
    {
        MachineState s = std::move(work.back());
        work.pop_back();
        size_t seen_imports = s.record.import_calls.size();
        while (!s.finished())
        {
            if (ctx.expired())
            {
                StepContext::finish(s, Terminal::timeout_pruned, "exploration timeout");
                tree.timed_out = true;
                break;
            }
            forks.clear();
            step(ctx, s, forks);
            ++tree.steps;
            for (auto it = forks.rbegin(); it != forks.rend(); ++it)
                work.push_back(std::move(*it));
            if (s.record.import_calls.size() != seen_imports)
            {
                seen_imports = s.record.import_calls.size();
                if (!s.finished() && wants_stop(s))
                {
                    StepContext::finish(s, Terminal::filtered, "early termination");
                    halted = true;
                }
            }
        }
        if (!halted && s.record.terminal != Terminal::timeout_pruned && wants_stop(s))
            halted = true;
        tree.paths.push_back(std::move(s.record));
        if (tree.timed_out || tree.paths.size() >= options.max_paths)
        {
            if (!tree.timed_out && !work.empty())
                tree.timed_out = true;
            break;
        }
    }
    if (halted)
        tree.stopped_early = true;
    else
    {
        for (auto& rest : work)
        {
            StepContext::finish(rest, Terminal::timeout_pruned, "exploration budget exhausted");
            tree.paths.push_back(std::move(rest.record));
        }
    }
    tree.solver_queries = solver.query_count() - queries_before;
    return tree;
}

PathTree explore(const wasm::WasmModule& module,
                 uint32_t entry,
                 const std::vector<Expr>& initial_args,
                 const ExplorationOptions& options)
{
    FunctionCache functions(module);
    sym::Solver solver(options.solver_budget);
    return explore(functions, entry, initial_args, options, solver);
}

std::vector<Expr> entry_arguments(const wasm::WasmModule& module, uint32_t func_index)
{
    std::vector<Expr> args;
    const auto& sig = module.function_signature(func_index);
    for (size_t i = 0; i < sig.params.size(); ++i)
        args.push_back(sym::var("arg" + std::to_string(i), width_of(sig.params[i]), sym::Taint(sym::tags::entry_arg)));
    return args;
}

}  // namespace eosscan::engine
