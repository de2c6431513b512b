#include "eosscan/wasm/writer.hpp"

#include <algorithm>

#include "eosscan/error.hpp"

namespace eosscan::wasm {
namespace {

void write_limits(bytes& out, const Limits& l)
{
    out.push_back(l.max ? 1 : 0);
    write_u32(out, l.min);
    if (l.max)
        write_u32(out, *l.max);
}

void write_valtypes(bytes& out, const std::vector<ValType>& ts)
{
    write_u32(out, ts.size());
    for (auto t : ts)
        out.push_back(static_cast<uint8_t>(t));
}

void write_block_type(bytes& out, const BlockType& bt)
{
    switch (bt.kind)
    {
    case BlockType::Kind::empty: out.push_back(0x40); break;
    case BlockType::Kind::value: out.push_back(static_cast<uint8_t>(bt.value)); break;
    case BlockType::Kind::type_index: write_s64(out, bt.type_index); break;
    }
}

void write_const_expr(bytes& out, const Instruction& ins)
{
    write_instruction(out, ins);
    out.push_back(static_cast<uint8_t>(Opcode::end));
}

void write_i32_offset(bytes& out, int32_t offset)
{
    out.push_back(static_cast<uint8_t>(Opcode::i32_const));
    write_s64(out, offset);
    out.push_back(static_cast<uint8_t>(Opcode::end));
}

bytes section_payload(const WasmModule& m, uint8_t id)
{
    bytes p;
    switch (id)
    {
    case 1:
        write_u32(p, m.types.size());
        for (const auto& t : m.types)
        {
            p.push_back(0x60);
            write_valtypes(p, t.params);
            write_valtypes(p, t.results);
        }
        break;
    case 2:
        write_u32(p, m.imports.size());
        for (const auto& e : m.imports)
        {
            write_name(p, e.module);
            write_name(p, e.field);
            p.push_back(static_cast<uint8_t>(e.kind));
            switch (e.kind)
            {
            case ExternalKind::function: write_u32(p, e.type_index); break;
            case ExternalKind::table:
                p.push_back(static_cast<uint8_t>(e.table.element));
                write_limits(p, e.table.limits);
                break;
            case ExternalKind::memory: write_limits(p, e.memory); break;
            case ExternalKind::global:
                p.push_back(static_cast<uint8_t>(e.global.type));
                p.push_back(e.global.mutable_ ? 1 : 0);
                break;
            }
        }
        break;
    case 3:
        write_u32(p, m.functions.size());
        for (auto f : m.functions)
            write_u32(p, f);
        break;
    case 4:
        write_u32(p, m.tables.size());
        for (const auto& t : m.tables)
        {
            p.push_back(static_cast<uint8_t>(t.element));
            write_limits(p, t.limits);
        }
        break;
    case 5:
        write_u32(p, m.memory_limits ? 1 : 0);
        if (m.memory_limits)
            write_limits(p, *m.memory_limits);
        break;
    case 6:
        write_u32(p, m.globals.size());
        for (const auto& g : m.globals)
        {
            p.push_back(static_cast<uint8_t>(g.type.type));
            p.push_back(g.type.mutable_ ? 1 : 0);
            write_const_expr(p, g.init);
        }
        break;
    case 7:
        write_u32(p, m.exports.size());
        for (const auto& e : m.exports)
        {
            write_name(p, e.name);
            p.push_back(static_cast<uint8_t>(e.kind));
            write_u32(p, e.index);
        }
        break;
    case 8: write_u32(p, m.start.value_or(0)); break;
    case 9:
        write_u32(p, m.elements.size());
        for (const auto& seg : m.elements)
        {
            write_u32(p, 0);
            write_i32_offset(p, seg.offset);
            write_u32(p, seg.functions.size());
            for (auto f : seg.functions)
                write_u32(p, f);
        }
        break;
    case 10:
        write_u32(p, m.code.size());
        for (const auto& body : m.code)
        {
            bytes b;
            write_u32(b, body.locals.size());
            for (const auto& d : body.locals)
            {
                write_u32(b, d.count);
                b.push_back(static_cast<uint8_t>(d.type));
            }
            b.insert(b.end(), body.code.begin(), body.code.end());
            write_u32(p, b.size());
            p.insert(p.end(), b.begin(), b.end());
        }
        break;
    case 11:
        write_u32(p, m.data_segments.size());
        for (const auto& seg : m.data_segments)
        {
            switch (seg.mode)
            {
            case DataSegment::Mode::active:
                write_u32(p, 0);
                write_i32_offset(p, seg.offset);
                break;
            case DataSegment::Mode::passive: write_u32(p, 1); break;
            case DataSegment::Mode::active_explicit:
                write_u32(p, 2);
                write_u32(p, seg.memory_index);
                write_i32_offset(p, seg.offset);
                break;
            }
            write_u32(p, seg.data.size());
            p.insert(p.end(), seg.data.begin(), seg.data.end());
        }
        break;
    case 12: write_u32(p, m.data_count.value_or(0)); break;
    default: throw Error("cannot encode section id " + std::to_string(id));
    }
    return p;
}

bool section_present(const WasmModule& m, uint8_t id)
{
    switch (id)
    {
    case 1: return !m.types.empty();
    case 2: return !m.imports.empty();
    case 3: return !m.functions.empty();
    case 4: return !m.tables.empty();
    case 5: return m.memory_limits.has_value();
    case 6: return !m.globals.empty();
    case 7: return !m.exports.empty();
    case 8: return m.start.has_value();
    case 9: return !m.elements.empty();
    case 10: return !m.code.empty();
    case 11: return !m.data_segments.empty();
    case 12: return m.data_count.has_value();
    default: return false;
    }
}

}  // namespace

void write_instruction(bytes& out, const Instruction& ins)
{
    const auto code = static_cast<uint16_t>(ins.op);
    if (code >= 0xFC00)
    {
        out.push_back(0xFC);
        write_u32(out, code & 0xFF);
    }
    else
        out.push_back(static_cast<uint8_t>(code));
    const auto info = lookup_opcode(code);
    if (!info)
        throw Error("cannot encode unknown opcode");
    switch (info->imm)
    {
    case ImmKind::none: break;
    case ImmKind::block_type: write_block_type(out, ins.block_type()); break;
    case ImmKind::label:
    case ImmKind::func_index:
    case ImmKind::local_index:
    case ImmKind::global_index:
    case ImmKind::table_index:
    case ImmKind::data_index:
    case ImmKind::elem_index:
        write_u32(out, ins.index_imm());
        break;
    case ImmKind::mem_index: out.push_back(static_cast<uint8_t>(ins.index_imm())); break;
    case ImmKind::ref_type: out.push_back(static_cast<uint8_t>(ins.index_imm())); break;
    case ImmKind::br_table: {
        const auto& t = ins.br_table();
        write_u32(out, t.targets.size());
        for (auto d : t.targets)
            write_u32(out, d);
        write_u32(out, t.default_target);
        break;
    }
    case ImmKind::call_indirect:
        write_u32(out, ins.call_indirect().type_index);
        write_u32(out, ins.call_indirect().table_index);
        break;
    case ImmKind::mem_arg:
        write_u32(out, ins.mem_arg().align);
        write_u32(out, ins.mem_arg().offset);
        break;
    case ImmKind::i32: write_s64(out, ins.i32()); break;
    case ImmKind::i64: write_s64(out, ins.i64()); break;
    case ImmKind::f32: {
        const auto v = static_cast<uint32_t>(ins.i32());
        for (int i = 0; i < 4; ++i)
            out.push_back(static_cast<uint8_t>(v >> (8 * i)));
        break;
    }
    case ImmKind::f64: {
        const auto v = static_cast<uint64_t>(ins.i64());
        for (int i = 0; i < 8; ++i)
            out.push_back(static_cast<uint8_t>(v >> (8 * i)));
        break;
    }
    case ImmKind::select_types: write_valtypes(out, std::get<std::vector<ValType>>(ins.imm)); break;
    case ImmKind::memory_init: {
        const auto& p = std::get<IndexPair>(ins.imm);
        write_u32(out, p.first);
        out.push_back(static_cast<uint8_t>(p.second));
        break;
    }
    case ImmKind::memory_copy: {
        const auto& p = std::get<IndexPair>(ins.imm);
        out.push_back(static_cast<uint8_t>(p.first));
        out.push_back(static_cast<uint8_t>(p.second));
        break;
    }
    case ImmKind::table_init:
    case ImmKind::table_copy: {
        const auto& p = std::get<IndexPair>(ins.imm);
        write_u32(out, p.first);
        write_u32(out, p.second);
        break;
    }
    }
}

bytes write_module(const WasmModule& m)
{
    bytes out{0x00, 0x61, 0x73, 0x6D};
    for (int i = 0; i < 4; ++i)
        out.push_back(static_cast<uint8_t>(m.version >> (8 * i)));

    auto emit = [&](uint8_t id, const bytes& payload) {
        out.push_back(id);
        write_u32(out, payload.size());
        out.insert(out.end(), payload.begin(), payload.end());
    };

    std::vector<SectionRef> order = m.section_order;
    if (order.empty())
    {
        for (uint8_t id : {1, 2, 3, 4, 5, 6, 7, 8, 9, 12, 10, 11})
            if (section_present(m, id))
                order.push_back({id, 0});
        for (uint32_t i = 0; i < m.customs.size(); ++i)
            order.push_back({0, i});
    }
    for (const auto& ref : order)
    {
        if (ref.id == 0)
        {
            const auto& c = m.customs.at(ref.custom_index);
            bytes p;
            write_name(p, c.name);
            p.insert(p.end(), c.payload.begin(), c.payload.end());
            emit(0, p);
        }
        else
            emit(ref.id, section_payload(m, ref.id));
    }
    return out;
}

}  // namespace eosscan::wasm
