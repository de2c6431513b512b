#pragma once

#include <string>
#include <utility>
#include <vector>

#include "eosscan/error.hpp"
#include "eosscan/wasm/module.hpp"
#include "eosscan/wasm/writer.hpp"

namespace eosscan::wasm {

/// Fluent emitter for function-body instruction streams.
class CodeBuilder
{
public:
    CodeBuilder& op(Opcode o) { return put(o, std::monostate{}); }

    CodeBuilder& i32_const(int32_t v) { return put(Opcode::i32_const, v); }
    CodeBuilder& i64_const(int64_t v) { return put(Opcode::i64_const, v); }
    CodeBuilder& i64_const_u(uint64_t v) { return put(Opcode::i64_const, static_cast<int64_t>(v)); }
    CodeBuilder& local_get(uint32_t i) { return put(Opcode::local_get, i); }
    CodeBuilder& local_set(uint32_t i) { return put(Opcode::local_set, i); }
    CodeBuilder& local_tee(uint32_t i) { return put(Opcode::local_tee, i); }
    CodeBuilder& global_get(uint32_t i) { return put(Opcode::global_get, i); }
    CodeBuilder& global_set(uint32_t i) { return put(Opcode::global_set, i); }
    CodeBuilder& call(uint32_t f) { return put(Opcode::call, f); }
    CodeBuilder& call_indirect(uint32_t type_index, uint32_t table = 0)
    {
        return put(Opcode::call_indirect, CallIndirect{type_index, table});
    }
    CodeBuilder& br(uint32_t depth) { return put(Opcode::br, depth); }
    CodeBuilder& br_if(uint32_t depth) { return put(Opcode::br_if, depth); }
    CodeBuilder& br_table(std::vector<uint32_t> targets, uint32_t default_target)
    {
        return put(Opcode::br_table, BrTable{std::move(targets), default_target});
    }
    CodeBuilder& block(BlockType bt = {}) { return put(Opcode::block, bt); }
    CodeBuilder& loop(BlockType bt = {}) { return put(Opcode::loop, bt); }
    CodeBuilder& if_(BlockType bt = {}) { return put(Opcode::if_, bt); }
    CodeBuilder& else_() { return op(Opcode::else_); }
    CodeBuilder& end() { return op(Opcode::end); }
    CodeBuilder& drop() { return op(Opcode::drop); }
    CodeBuilder& return_() { return op(Opcode::return_); }
    CodeBuilder& unreachable() { return op(Opcode::unreachable); }
    /// Loads and stores; `o` must be a memory-access opcode.
    CodeBuilder& mem(Opcode o, uint32_t offset = 0, uint32_t align = 0) { return put(o, MemArg{align, offset}); }

    /// Raw bytes, for deliberately malformed fixtures.
    CodeBuilder& raw(std::initializer_list<uint8_t> b)
    {
        code_.insert(code_.end(), b.begin(), b.end());
        return *this;
    }

    [[nodiscard]] const bytes& code() const noexcept { return code_; }

    /// Appends the terminal `end` and returns the finished expression.
    [[nodiscard]] bytes finish() const
    {
        bytes out = code_;
        out.push_back(static_cast<uint8_t>(Opcode::end));
        return out;
    }

private:
    CodeBuilder& put(Opcode o, Immediate imm)
    {
        Instruction ins;
        ins.op = o;
        ins.imm = std::move(imm);
        write_instruction(code_, ins);
        return *this;
    }

    bytes code_;
};

inline BlockType block_result(ValType t)
{
    return BlockType{BlockType::Kind::value, t, 0};
}

/// Incremental module construction. Imports must be declared before local
/// functions so the flat function index space stays stable.
class ModuleBuilder
{
public:
    uint32_t type(FuncSignature sig)
    {
        for (uint32_t i = 0; i < m_.types.size(); ++i)
            if (m_.types[i] == sig)
                return i;
        m_.types.push_back(std::move(sig));
        return static_cast<uint32_t>(m_.types.size() - 1);
    }

    uint32_t import_function(std::string module, std::string field, FuncSignature sig)
    {
        if (!m_.functions.empty())
            throw Error("imports must be declared before local functions");
        ImportEntry e;
        e.module = std::move(module);
        e.field = std::move(field);
        e.kind = ExternalKind::function;
        e.type_index = type(std::move(sig));
        m_.imports.push_back(std::move(e));
        return m_.imported_function_count() - 1;
    }

    /// Reserve a function index whose body is supplied later via `define`.
    uint32_t declare_function(FuncSignature sig)
    {
        m_.functions.push_back(type(std::move(sig)));
        m_.code.emplace_back();
        return m_.function_count() - 1;
    }

    void define(uint32_t func_index, std::vector<LocalDecl> locals, bytes code)
    {
        auto& body = m_.code.at(func_index - m_.imported_function_count());
        body.locals = std::move(locals);
        body.code = std::move(code);
    }

    uint32_t add_function(FuncSignature sig, std::vector<LocalDecl> locals, bytes code)
    {
        const auto idx = declare_function(std::move(sig));
        define(idx, std::move(locals), std::move(code));
        return idx;
    }

    void export_function(std::string name, uint32_t func_index)
    {
        m_.exports.push_back(ExportEntry{std::move(name), ExternalKind::function, func_index});
    }

    void memory(uint32_t min_pages, std::optional<uint32_t> max_pages = std::nullopt)
    {
        m_.memory_limits = Limits{min_pages, max_pages};
    }

    uint32_t global(ValType t, bool mutable_, int64_t init)
    {
        GlobalEntry g;
        g.type = GlobalType{t, mutable_};
        g.init.op = t == ValType::i64 ? Opcode::i64_const : Opcode::i32_const;
        if (t == ValType::i64)
            g.init.imm = init;
        else
            g.init.imm = static_cast<int32_t>(init);
        m_.globals.push_back(std::move(g));
        return m_.imported_global_count() + static_cast<uint32_t>(m_.globals.size() - 1);
    }

    /// Installs a funcref table sized to the element entries, filled from offset 0.
    void table_elements(std::vector<uint32_t> funcs)
    {
        const auto n = static_cast<uint32_t>(funcs.size());
        m_.tables = {TableType{ValType::funcref, Limits{n, n}}};
        m_.elements = {ElementSegment{0, 0, std::move(funcs)}};
    }

    void data(int32_t offset, bytes payload)
    {
        m_.data_segments.push_back(DataSegment{DataSegment::Mode::active, 0, offset, std::move(payload)});
    }

    [[nodiscard]] const WasmModule& module() const noexcept { return m_; }
    [[nodiscard]] bytes encode() const { return write_module(m_); }

private:
    WasmModule m_;
};

}  // namespace eosscan::wasm
