#include "eosscan/wasm/parser.hpp"

#include <algorithm>
#include <array>

namespace eosscan::wasm {
namespace {

constexpr std::array<uint8_t, 4> wasm_magic{0x00, 0x61, 0x73, 0x6D};

enum SectionId : uint8_t
{
    custom_id = 0,
    type_id = 1,
    import_id = 2,
    function_id = 3,
    table_id = 4,
    memory_id = 5,
    global_id = 6,
    export_id = 7,
    start_id = 8,
    element_id = 9,
    code_id = 10,
    data_id = 11,
    data_count_id = 12,
};

// Position of each non-custom section in the mandated order.
int section_rank(uint8_t id)
{
    switch (id)
    {
    case type_id: return 1;
    case import_id: return 2;
    case function_id: return 3;
    case table_id: return 4;
    case memory_id: return 5;
    case global_id: return 6;
    case export_id: return 7;
    case start_id: return 8;
    case element_id: return 9;
    case data_count_id: return 10;
    case code_id: return 11;
    case data_id: return 12;
    default: return -1;
    }
}

ValType parse_valtype(Reader& in)
{
    const auto offset = in.absolute();
    const auto b = in.u8();
    switch (b)
    {
    case 0x7F:
    case 0x7E:
    case 0x7D:
    case 0x7C:
    case 0x7B:
    case 0x70:
    case 0x6F:
        return static_cast<ValType>(b);
    default:
        throw MalformedBinary("invalid value type 0x" + std::to_string(b) + " at offset " +
                              std::to_string(offset));
    }
}

ValType parse_reftype(Reader& in)
{
    const auto t = parse_valtype(in);
    if (t != ValType::funcref && t != ValType::externref)
        throw MalformedBinary("expected reference type at offset " + std::to_string(in.absolute() - 1));
    return t;
}

Limits parse_limits(Reader& in)
{
    Limits l;
    const auto flag = in.u8();
    if (flag > 1)
        throw MalformedBinary("invalid limits flag at offset " + std::to_string(in.absolute() - 1));
    l.min = in.u32();
    if (flag == 1)
        l.max = in.u32();
    return l;
}

template <typename T, typename F>
std::vector<T> parse_vec(Reader& in, F&& item)
{
    const auto n = in.u32();
    // Each item takes at least one byte; reject absurd counts up front.
    if (n > in.remaining())
        throw MalformedBinary("vector length " + std::to_string(n) + " exceeds remaining input");
    std::vector<T> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; ++i)
        out.push_back(item(in));
    return out;
}

BlockType parse_block_type(Reader& in)
{
    const auto b = in.u8();
    if (b == 0x40)
        return {};
    if (b == 0x7F || b == 0x7E || b == 0x7D || b == 0x7C || b == 0x7B || b == 0x70 || b == 0x6F)
        return BlockType{BlockType::Kind::value, static_cast<ValType>(b), 0};
    // Type-index block types are a positive s33; the first byte has already
    // been consumed, so reassemble the LEB from it.
    int64_t result = b & 0x7F;
    unsigned shift = 7;
    uint8_t byte = b;
    while (byte & 0x80)
    {
        if (shift >= 33)
            throw MalformedBinary("block type overflow at offset " + std::to_string(in.absolute()));
        byte = in.u8();
        result |= int64_t{byte & 0x7F} << shift;
        shift += 7;
    }
    if (shift < 64 && (byte & 0x40))
        result |= ~int64_t{0} << shift;
    if (result < 0 || result > UINT32_MAX)
        throw MalformedBinary("invalid block type at offset " + std::to_string(in.absolute()));
    return BlockType{BlockType::Kind::type_index, ValType::i32, static_cast<uint32_t>(result)};
}

Instruction decode_one(Reader& in)
{
    Instruction ins;
    ins.byte_offset = static_cast<uint32_t>(in.absolute());
    uint16_t encoding = in.u8();
    if (encoding == 0xFC)
    {
        const auto sub = in.u32();
        if (sub > 0xFF)
            throw MalformedBinary("unknown opcode 0xFC " + std::to_string(sub) + " at offset " +
                                  std::to_string(ins.byte_offset));
        encoding = static_cast<uint16_t>(0xFC00 | sub);
    }
    const auto info = lookup_opcode(encoding);
    if (!info)
        throw MalformedBinary("unknown opcode 0x" + [&] {
            static constexpr char hex[] = "0123456789abcdef";
            std::string s;
            for (int shift = encoding > 0xFF ? 12 : 4; shift >= 0; shift -= 4)
                s += hex[(encoding >> shift) & 0xF];
            return s;
        }() + " at offset " + std::to_string(ins.byte_offset));
    ins.op = info->op;
    switch (info->imm)
    {
    case ImmKind::none: break;
    case ImmKind::block_type: ins.imm = parse_block_type(in); break;
    case ImmKind::label:
    case ImmKind::func_index:
    case ImmKind::local_index:
    case ImmKind::global_index:
    case ImmKind::table_index:
    case ImmKind::data_index:
    case ImmKind::elem_index:
        ins.imm = in.u32();
        break;
    case ImmKind::mem_index: {
        const auto idx = in.u8();
        if (idx != 0)
            throw MalformedBinary("memory index must be zero at offset " + std::to_string(in.absolute() - 1));
        ins.imm = uint32_t{idx};
        break;
    }
    case ImmKind::br_table: {
        BrTable t;
        t.targets = parse_vec<uint32_t>(in, [](Reader& r) { return r.u32(); });
        t.default_target = in.u32();
        ins.imm = std::move(t);
        break;
    }
    case ImmKind::call_indirect: {
        CallIndirect c;
        c.type_index = in.u32();
        c.table_index = in.u32();
        ins.imm = c;
        break;
    }
    case ImmKind::mem_arg: {
        MemArg m;
        m.align = in.u32();
        m.offset = in.u32();
        ins.imm = m;
        break;
    }
    case ImmKind::i32: ins.imm = in.s32(); break;
    case ImmKind::i64: ins.imm = in.s64(); break;
    case ImmKind::f32: ins.imm = static_cast<int32_t>(in.u32_fixed()); break;
    case ImmKind::f64: ins.imm = static_cast<int64_t>(in.u64_fixed()); break;
    case ImmKind::select_types: ins.imm = parse_vec<ValType>(in, parse_valtype); break;
    case ImmKind::ref_type: ins.imm = uint32_t{static_cast<uint8_t>(parse_reftype(in))}; break;
    case ImmKind::memory_init: {
        IndexPair p;
        p.first = in.u32();
        p.second = in.u8();
        ins.imm = p;
        break;
    }
    case ImmKind::memory_copy: {
        IndexPair p;
        p.first = in.u8();
        p.second = in.u8();
        ins.imm = p;
        break;
    }
    case ImmKind::table_init:
    case ImmKind::table_copy: {
        IndexPair p;
        p.first = in.u32();
        p.second = in.u32();
        ins.imm = p;
        break;
    }
    }
    return ins;
}

int32_t parse_const_offset(Reader& in)
{
    const auto init = decode_init_expr(in);
    if (init.op != Opcode::i32_const)
        throw MalformedBinary("segment offset must be a single i32.const at offset " +
                              std::to_string(init.byte_offset));
    return init.i32();
}

void parse_name_section(WasmModule& m, bytes_view payload)
{
    // Names are informational only; a damaged name section is ignored.
    try
    {
        Reader in(payload);
        while (!in.empty())
        {
            const auto id = in.u8();
            const auto size = in.u32();
            auto sub = in.take(size);
            if (id != 1)
                continue;
            Reader names(sub);
            const auto n = names.u32();
            for (uint32_t i = 0; i < n; ++i)
            {
                const auto idx = names.u32();
                m.function_names[idx] = names.name();
            }
        }
    }
    catch (const MalformedBinary&)
    {
        m.function_names.clear();
    }
}

void parse_section(WasmModule& m, uint8_t id, Reader& in)
{
    switch (id)
    {
    case type_id:
        m.types = parse_vec<FuncSignature>(in, [](Reader& r) {
            if (r.u8() != 0x60)
                throw MalformedBinary("expected function type at offset " + std::to_string(r.absolute() - 1));
            FuncSignature s;
            s.params = parse_vec<ValType>(r, parse_valtype);
            s.results = parse_vec<ValType>(r, parse_valtype);
            return s;
        });
        break;
    case import_id:
        m.imports = parse_vec<ImportEntry>(in, [](Reader& r) {
            ImportEntry e;
            e.module = r.name();
            e.field = r.name();
            const auto kind = r.u8();
            switch (kind)
            {
            case 0: e.kind = ExternalKind::function; e.type_index = r.u32(); break;
            case 1:
                e.kind = ExternalKind::table;
                e.table.element = parse_reftype(r);
                e.table.limits = parse_limits(r);
                break;
            case 2: e.kind = ExternalKind::memory; e.memory = parse_limits(r); break;
            case 3: {
                e.kind = ExternalKind::global;
                e.global.type = parse_valtype(r);
                const auto mut = r.u8();
                if (mut > 1)
                    throw MalformedBinary("invalid mutability at offset " + std::to_string(r.absolute() - 1));
                e.global.mutable_ = mut == 1;
                break;
            }
            default:
                throw MalformedBinary("invalid import kind at offset " + std::to_string(r.absolute() - 1));
            }
            return e;
        });
        break;
    case function_id: m.functions = parse_vec<uint32_t>(in, [](Reader& r) { return r.u32(); }); break;
    case table_id:
        m.tables = parse_vec<TableType>(in, [](Reader& r) {
            TableType t;
            t.element = parse_reftype(r);
            t.limits = parse_limits(r);
            return t;
        });
        break;
    case memory_id: {
        auto mems = parse_vec<Limits>(in, parse_limits);
        if (mems.size() > 1)
            throw MalformedBinary("multiple memories are not supported");
        if (!mems.empty())
            m.memory_limits = mems.front();
        break;
    }
    case global_id:
        m.globals = parse_vec<GlobalEntry>(in, [](Reader& r) {
            GlobalEntry g;
            g.type.type = parse_valtype(r);
            const auto mut = r.u8();
            if (mut > 1)
                throw MalformedBinary("invalid mutability at offset " + std::to_string(r.absolute() - 1));
            g.type.mutable_ = mut == 1;
            g.init = decode_init_expr(r);
            return g;
        });
        break;
    case export_id:
        m.exports = parse_vec<ExportEntry>(in, [](Reader& r) {
            ExportEntry e;
            e.name = r.name();
            const auto kind = r.u8();
            if (kind > 3)
                throw MalformedBinary("invalid export kind at offset " + std::to_string(r.absolute() - 1));
            e.kind = static_cast<ExternalKind>(kind);
            e.index = r.u32();
            return e;
        });
        break;
    case start_id: m.start = in.u32(); break;
    case element_id:
        m.elements = parse_vec<ElementSegment>(in, [](Reader& r) {
            const auto flags = r.u32();
            if (flags != 0)
                throw MalformedBinary("unsupported element segment kind " + std::to_string(flags));
            ElementSegment seg;
            seg.offset = parse_const_offset(r);
            seg.functions = parse_vec<uint32_t>(r, [](Reader& rr) { return rr.u32(); });
            return seg;
        });
        break;
    case data_count_id: m.data_count = in.u32(); break;
    case code_id:
        m.code = parse_vec<FunctionBody>(in, [](Reader& r) {
            const auto size = r.u32();
            const auto start = r.absolute();
            Reader body(r.take(size), start);
            FunctionBody fb;
            fb.locals = parse_vec<LocalDecl>(body, [](Reader& b) {
                LocalDecl d;
                d.count = b.u32();
                d.type = parse_valtype(b);
                return d;
            });
            uint64_t total = 0;
            for (const auto& d : fb.locals)
                total += d.count;
            if (total > 50000)
                throw MalformedBinary("too many locals in function body at offset " + std::to_string(start));
            fb.code_offset = static_cast<uint32_t>(body.absolute());
            auto rest = body.take(body.remaining());
            fb.code.assign(rest.begin(), rest.end());
            return fb;
        });
        break;
    case data_id:
        m.data_segments = parse_vec<DataSegment>(in, [](Reader& r) {
            DataSegment seg;
            const auto flags = r.u32();
            switch (flags)
            {
            case 0: seg.mode = DataSegment::Mode::active; seg.offset = parse_const_offset(r); break;
            case 1: seg.mode = DataSegment::Mode::passive; break;
            case 2:
                seg.mode = DataSegment::Mode::active_explicit;
                seg.memory_index = r.u32();
                seg.offset = parse_const_offset(r);
                break;
            default: throw MalformedBinary("invalid data segment flags " + std::to_string(flags));
            }
            const auto len = r.u32();
            auto b = r.take(len);
            seg.data.assign(b.begin(), b.end());
            return seg;
        });
        break;
    default:
        throw MalformedBinary("unknown section id " + std::to_string(id));
    }
    if (!in.empty())
        throw MalformedBinary("section " + std::to_string(id) + " has " + std::to_string(in.remaining()) +
                              " trailing bytes");
}

void check_invariants(const WasmModule& m)
{
    if (m.code.size() != m.functions.size())
        throw MalformedBinary("function and code section lengths differ (" + std::to_string(m.functions.size()) +
                              " vs " + std::to_string(m.code.size()) + ")");
    for (const auto& e : m.imports)
        if (e.kind == ExternalKind::function && e.type_index >= m.types.size())
            throw MalformedBinary("import " + e.field + " references missing type");
    for (const auto t : m.functions)
        if (t >= m.types.size())
            throw MalformedBinary("function references missing type " + std::to_string(t));
    const auto nfuncs = m.function_count();
    for (const auto& e : m.exports)
        if (e.kind == ExternalKind::function && e.index >= nfuncs)
            throw MalformedBinary("export " + e.name + " references missing function");
    for (const auto& seg : m.elements)
        for (const auto f : seg.functions)
            if (f >= nfuncs)
                throw MalformedBinary("element segment references missing function " + std::to_string(f));
    if (m.start && *m.start >= nfuncs)
        throw MalformedBinary("start function out of range");
}

}  // namespace

Instruction decode_init_expr(Reader& in)
{
    auto ins = decode_one(in);
    switch (ins.op)
    {
    case Opcode::i32_const:
    case Opcode::i64_const:
    case Opcode::f32_const:
    case Opcode::f64_const:
    case Opcode::global_get:
    case Opcode::ref_null:
    case Opcode::ref_func:
        break;
    default:
        throw MalformedBinary("unsupported initializer instruction at offset " + std::to_string(ins.byte_offset));
    }
    if (decode_one(in).op != Opcode::end)
        throw MalformedBinary("initializer expression must be a single instruction at offset " +
                              std::to_string(ins.byte_offset));
    return ins;
}

WasmModule parse_module(bytes_view input)
{
    Reader in(input);
    if (input.size() < 4 || !std::equal(wasm_magic.begin(), wasm_magic.end(), input.begin()))
        throw MalformedBinary("bad magic number");
    in.take(4);
    if (in.remaining() < 4)
        throw MalformedBinary("truncated version word");
    WasmModule m;
    m.version = in.u32_fixed();
    if (m.version != 1)
        throw UnsupportedVersion("unsupported Wasm version " + std::to_string(m.version));

    int last_rank = 0;
    while (!in.empty())
    {
        const auto id = in.u8();
        const auto size = in.u32();
        const auto start = in.absolute();
        Reader section(in.take(size), start);
        if (id == custom_id)
        {
            CustomSection c;
            c.name = section.name();
            auto rest = section.take(section.remaining());
            c.payload.assign(rest.begin(), rest.end());
            if (c.name == "name")
                parse_name_section(m, c.payload);
            m.section_order.push_back({id, static_cast<uint32_t>(m.customs.size())});
            m.customs.push_back(std::move(c));
            continue;
        }
        const auto rank = section_rank(id);
        if (rank < 0)
            throw MalformedBinary("unknown section id " + std::to_string(id));
        if (rank <= last_rank)
            throw MalformedBinary("section " + std::to_string(id) + " out of order");
        last_rank = rank;
        parse_section(m, id, section);
        m.section_order.push_back({id, 0});
    }
    check_invariants(m);
    return m;
}

std::vector<Instruction> decode_function_body(const FunctionBody& body)
{
    Reader in(body.code, body.code_offset);
    std::vector<Instruction> out;
    std::vector<uint32_t> open;  // indices of unmatched block/loop/if
    bool finished = false;
    while (!in.empty())
    {
        if (finished)
            throw MalformedBinary("instructions after terminal end at offset " + std::to_string(in.absolute()));
        auto ins = decode_one(in);
        const auto index = static_cast<uint32_t>(out.size());
        switch (ins.op)
        {
        case Opcode::block:
        case Opcode::loop:
        case Opcode::if_:
            open.push_back(index);
            break;
        case Opcode::else_:
            if (open.empty() || out[open.back()].op != Opcode::if_ || out[open.back()].else_index)
                throw MalformedBinary("else without matching if at offset " + std::to_string(ins.byte_offset));
            out[open.back()].else_index = index;
            ins.end_index = open.back();
            break;
        case Opcode::end:
            if (open.empty())
            {
                finished = true;
                ins.end_index = index;
            }
            else
            {
                out[open.back()].end_index = index;
                if (auto e = out[open.back()].else_index)
                    out[*e].end_index = index;
                ins.end_index = open.back();
                open.pop_back();
            }
            break;
        default:
            break;
        }
        out.push_back(std::move(ins));
    }
    if (!finished)
        throw MalformedBinary("function body at offset " + std::to_string(body.code_offset) +
                              " is missing its terminal end");
    return out;
}

}  // namespace eosscan::wasm
