#include "eosscan/emu/emulator.hpp"

#include <algorithm>

#include "eosscan/error.hpp"

namespace eosscan::emu {

using engine::MachineState;
using engine::StepContext;
using engine::Terminal;
using sym::Expr;

std::string_view to_string(Category c) noexcept
{
    switch (c)
    {
    case Category::blockchain_state: return "blockchain_state";
    case Category::memory_related: return "memory_related";
    case Category::control_flow: return "control_flow";
    case Category::authority: return "authority";
    case Category::table_related: return "table_related";
    case Category::action: return "action";
    }
    return "?";
}

const std::vector<ImportModel>& registry()
{
    using C = Category;
    using B = Behavior;
    static const std::vector<ImportModel> models = {
        {"current_time", C::blockchain_state, B::fresh_return, {}},
        {"publication_time", C::blockchain_state, B::fresh_return, {}},
        {"tapos_block_num", C::blockchain_state, B::fresh_return, {}},
        {"tapos_block_prefix", C::blockchain_state, B::fresh_return, {}},
        {"now", C::blockchain_state, B::fresh_return, {}},
        {"expiration", C::blockchain_state, B::fresh_return, {}},

        {"memcpy", C::memory_related, B::memcpy, {0, 1, 2}},
        {"memmove", C::memory_related, B::memcpy, {0, 1, 2}},
        {"memset", C::memory_related, B::memset, {0, 2}},

        {"eosio_assert", C::control_flow, B::assert_true, {}},
        {"eosio_assert_message", C::control_flow, B::assert_true, {}},
        {"eosio_assert_code", C::control_flow, B::assert_true, {}},
        {"eosio_exit", C::control_flow, B::exit, {}},
        {"abort", C::control_flow, B::exit, {}},

        {"require_auth", C::authority, B::record_only, {}},
        {"require_auth2", C::authority, B::record_only, {}},
        {"require_auth_2", C::authority, B::record_only, {}},
        {"has_auth", C::authority, B::fresh_return, {}},

        {"db_get_i64", C::table_related, B::db_get, {1, 2}},
        {"db_update_i64", C::table_related, B::record_only, {}},
        {"db_store_i64", C::table_related, B::fresh_return, {}},
        {"db_find_i64", C::table_related, B::fresh_return, {}},
        {"db_remove_i64", C::table_related, B::record_only, {}},
        {"db_lowerbound_i64", C::table_related, B::fresh_return, {}},
        {"db_upperbound_i64", C::table_related, B::fresh_return, {}},
        {"db_end_i64", C::table_related, B::fresh_return, {}},
        {"db_next_i64", C::table_related, B::write_fresh_u64, {1}},
        {"db_previous_i64", C::table_related, B::write_fresh_u64, {1}},

        {"read_action_data", C::action, B::read_action_data, {0, 1}},
        {"action_data_size", C::action, B::action_data_size, {}},
        {"send_inline", C::action, B::record_only, {}},
        {"send_context_free_inline", C::action, B::record_only, {}},
        {"send_deferred", C::action, B::record_only, {}},
        {"cancel_deferred", C::action, B::fresh_return, {}},
        {"require_recipient", C::action, B::record_only, {}},
    };
    return models;
}

const ImportModel* find_model(std::string_view name) noexcept
{
    const auto& r = registry();
    auto it = std::find_if(r.begin(), r.end(), [&](const ImportModel& m) { return m.name == name; });
    return it == r.end() ? nullptr : &*it;
}

namespace {

constexpr uint64_t action_data_capacity = 4096;

uint32_t width_of(wasm::ValType t)
{
    return t == wasm::ValType::i64 || t == wasm::ValType::f64 ? 64 : 32;
}

uint64_t checked_length(const Expr& len, const sym::SymbolicMemory& memory, std::string_view who)
{
    const uint64_t v = len->value.to_u64();
    if (len->width == 32 && static_cast<int32_t>(v) < 0)
        throw EmulationException(std::string(who) + ": negative length");
    if (v > memory.limit())
        throw EmulationException(std::string(who) + ": length " + std::to_string(v) + " beyond memory");
    return v;
}

}  // namespace

void emulate(StepContext& ctx,
             MachineState& s,
             std::vector<MachineState>& forks,
             uint32_t func_index,
             std::vector<Expr> args)
{
    const auto& module = ctx.module();
    const auto& imp = module.imported_function(func_index);
    const auto& sig = module.function_signature(func_index);
    const std::string& name = imp.field;
    const ImportModel* model = find_model(name);

    engine::ImportCallRecord rec;
    rec.name = name;
    rec.func_index = func_index;
    rec.args = args;
    rec.constraint_index = s.record.constraints.size();
    rec.caller = s.frame().func;
    rec.offset = ctx.site_offset;
    rec.depth = s.depth();
    for (const auto& f : s.call_stack)
        rec.stack.push_back(f.func);

    const uint32_t ret_width = sig.results.empty() ? 0 : width_of(sig.results.front());
    auto fresh_return = [&]() -> std::optional<Expr> {
        if (ret_width == 0)
            return std::nullopt;
        sym::Taint taint(sym::tags::import_return(name));
        if (model && model->category == Category::blockchain_state)
            taint = taint.unite(sym::Taint(sym::tags::blockchain_state));
        return ctx.fresh(s, name, ret_width, taint);
    };
    auto finish_call = [&](std::optional<Expr> ret) {
        if (ret_width != 0 && !ret)
            ret = fresh_return();
        rec.return_value = ret;
        s.record.import_calls.push_back(std::move(rec));
        if (ret)
            s.value_stack.push_back(*ret);
    };

    if (!model)
    {
        rec.default_modeled = true;
        s.record.default_modeled = true;
        finish_call(std::nullopt);
        return;
    }

    switch (model->behavior)
    {
    case Behavior::fresh_return:
    case Behavior::record_only: finish_call(std::nullopt); return;

    case Behavior::memcpy: {
        const uint64_t dst = args.at(0)->value.to_u64();
        const uint64_t src = args.at(1)->value.to_u64();
        const uint64_t len = checked_length(args.at(2), s.memory, name);
        if (len > 0)
            s.memory.store(dst, len, ctx.load(s, src, len));
        finish_call(args[0]);
        return;
    }
    case Behavior::memset: {
        const uint64_t dst = args.at(0)->value.to_u64();
        const Expr byte = sym::extract(args.at(1), 7, 0);
        const uint64_t len = checked_length(args.at(2), s.memory, name);
        if (len > 0)
        {
            Expr data;
            if (byte->is_const())
                data = sym::constant(
                    sym::BitVec::from_bytes_le(std::vector<uint8_t>(len, static_cast<uint8_t>(byte->value.to_u64()))));
            else
                data = sym::concat_all(std::vector<Expr>(len, byte));
            s.memory.store(dst, len, data);
        }
        finish_call(args[0]);
        return;
    }
    case Behavior::assert_true: {
        const Expr cond = sym::is_nonzero(args.at(0));
        finish_call(std::nullopt);
        const size_t before = forks.size();
        const auto side = ctx.split(s, forks, cond);
        if (side && !*side)
            StepContext::finish(s, Terminal::asserted_false, name);
        if (forks.size() > before && side && *side)
            StepContext::finish(forks.back(), Terminal::asserted_false, name);
        return;
    }
    case Behavior::exit:
        finish_call(std::nullopt);
        StepContext::finish(s, Terminal::exited, name);
        return;

    case Behavior::db_get: {
        const uint64_t data = args.at(1)->value.to_u64();
        const uint64_t len = checked_length(args.at(2), s.memory, name);
        if (len > 0)
        {
            const Expr chunk = ctx.fresh(s, name + ".data", static_cast<uint32_t>(8 * len),
                                         sym::Taint(sym::tags::import_return(name)));
            s.memory.store(data, len, chunk);
        }
        finish_call(std::nullopt);
        return;
    }
    case Behavior::write_fresh_u64: {
        const uint64_t ptr = args.at(1)->value.to_u64();
        s.memory.store(ptr, 8, ctx.fresh(s, name + ".primary", 64, sym::Taint(sym::tags::import_return(name))));
        finish_call(std::nullopt);
        return;
    }
    case Behavior::read_action_data: {
        const uint64_t ptr = args.at(0)->value.to_u64();
        const uint64_t len = std::min(checked_length(args.at(1), s.memory, name), action_data_capacity);
        if (len > 0)
        {
            const Expr all = ctx.named("action_data", 8 * action_data_capacity, sym::Taint(sym::tags::action_data));
            s.memory.store(ptr, len, sym::extract(all, static_cast<uint32_t>(8 * len - 1), 0));
        }
        finish_call(sym::bv(32, len));
        return;
    }
    case Behavior::action_data_size: {
        const Expr size = ctx.named("action_data_size", 32, sym::Taint(sym::tags::action_data));
        finish_call(size);
        ctx.assume(s, sym::compare(sym::Kind::ule, size, sym::bv(32, action_data_capacity)));
        return;
    }
    }
}

std::vector<MachineState> emulate(StepContext& ctx, MachineState s, uint32_t func_index, std::vector<Expr> args)
{
    std::vector<MachineState> forks;
    try
    {
        emulate(ctx, s, forks, func_index, std::move(args));
    }
    catch (const EmulationException& e)
    {
        StepContext::finish(s, Terminal::emulation_error, e.what());
    }
    std::vector<MachineState> out;
    out.push_back(std::move(s));
    for (auto& f : forks)
        out.push_back(std::move(f));
    return out;
}

}  // namespace eosscan::emu
