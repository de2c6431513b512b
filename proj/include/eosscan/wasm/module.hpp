#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "eosscan/wasm/leb128.hpp"
#include "eosscan/wasm/opcode.hpp"

namespace eosscan::wasm {

enum class ValType : uint8_t
{
    i32 = 0x7F,
    i64 = 0x7E,
    f32 = 0x7D,
    f64 = 0x7C,
    v128 = 0x7B,
    funcref = 0x70,
    externref = 0x6F,
};

std::string_view to_string(ValType t) noexcept;
/// Width in bits of the integer types; 0 for everything else.
unsigned bit_width(ValType t) noexcept;

struct FuncSignature
{
    std::vector<ValType> params;
    std::vector<ValType> results;

    bool operator==(const FuncSignature&) const = default;
};

struct Limits
{
    uint32_t min = 0;
    std::optional<uint32_t> max;

    bool operator==(const Limits&) const = default;
};

struct TableType
{
    ValType element = ValType::funcref;
    Limits limits;

    bool operator==(const TableType&) const = default;
};

struct GlobalType
{
    ValType type = ValType::i32;
    bool mutable_ = false;

    bool operator==(const GlobalType&) const = default;
};

enum class ExternalKind : uint8_t
{
    function = 0,
    table = 1,
    memory = 2,
    global = 3,
};

struct ImportEntry
{
    std::string module;
    std::string field;
    ExternalKind kind = ExternalKind::function;
    // Exactly one of these is meaningful, selected by `kind`.
    uint32_t type_index = 0;
    TableType table;
    Limits memory;
    GlobalType global;
};

struct ExportEntry
{
    std::string name;
    ExternalKind kind = ExternalKind::function;
    uint32_t index = 0;
};

struct BlockType
{
    enum class Kind : uint8_t
    {
        empty,
        value,
        type_index,
    };
    Kind kind = Kind::empty;
    ValType value = ValType::i32;
    uint32_t type_index = 0;

    bool operator==(const BlockType&) const = default;
};

struct MemArg
{
    uint32_t align = 0;
    uint32_t offset = 0;

    bool operator==(const MemArg&) const = default;
};

struct BrTable
{
    std::vector<uint32_t> targets;  // excludes the default
    uint32_t default_target = 0;

    bool operator==(const BrTable&) const = default;
    /// Number of entries including the default.
    [[nodiscard]] size_t size() const noexcept { return targets.size() + 1; }
};

struct CallIndirect
{
    uint32_t type_index = 0;
    uint32_t table_index = 0;

    bool operator==(const CallIndirect&) const = default;
};

/// Pair of indices for the two-operand bulk-memory/table immediates.
struct IndexPair
{
    uint32_t first = 0;
    uint32_t second = 0;

    bool operator==(const IndexPair&) const = default;
};

using Immediate = std::variant<std::monostate,
                               BlockType,
                               uint32_t,  // label, function, local, global, table, data, elem, memory index
                               BrTable,
                               CallIndirect,
                               MemArg,
                               int32_t,
                               int64_t,
                               std::vector<ValType>,
                               IndexPair>;

struct Instruction
{
    Opcode op = Opcode::nop;
    Immediate imm;
    /// Absolute position in the input binary (start of the opcode byte).
    uint32_t byte_offset = 0;
    /// For block/loop/if: index of the matching `end`. For if: `else_index`
    /// holds the matching `else` when there is one.
    uint32_t end_index = 0;
    std::optional<uint32_t> else_index;

    [[nodiscard]] uint32_t index_imm() const { return std::get<uint32_t>(imm); }
    [[nodiscard]] const BlockType& block_type() const { return std::get<BlockType>(imm); }
    [[nodiscard]] const BrTable& br_table() const { return std::get<BrTable>(imm); }
    [[nodiscard]] const MemArg& mem_arg() const { return std::get<MemArg>(imm); }
    [[nodiscard]] const CallIndirect& call_indirect() const { return std::get<CallIndirect>(imm); }
    [[nodiscard]] int32_t i32() const { return std::get<int32_t>(imm); }
    [[nodiscard]] int64_t i64() const { return std::get<int64_t>(imm); }
};

struct LocalDecl
{
    uint32_t count = 0;
    ValType type = ValType::i32;

    bool operator==(const LocalDecl&) const = default;
};

struct FunctionBody
{
    std::vector<LocalDecl> locals;
    /// Raw expression bytes, terminal `end` included.
    bytes code;
    /// Absolute offset of `code[0]` in the input binary.
    uint32_t code_offset = 0;
};

struct GlobalEntry
{
    GlobalType type;
    Instruction init;
};

struct ElementSegment
{
    uint32_t table_index = 0;
    int32_t offset = 0;
    std::vector<uint32_t> functions;
};

struct DataSegment
{
    enum class Mode : uint8_t
    {
        active,
        passive,
        active_explicit,
    };
    Mode mode = Mode::active;
    uint32_t memory_index = 0;
    /// Offset of an active segment; the single `i32.const` initializer.
    int32_t offset = 0;
    bytes data;
};

struct CustomSection
{
    std::string name;
    bytes payload;
};

/// Section ids in the order they appeared; custom sections reference an entry
/// of `WasmModule::customs` through `custom_index`.
struct SectionRef
{
    uint8_t id = 0;
    uint32_t custom_index = 0;
};

struct WasmModule
{
    uint32_t version = 1;
    std::vector<FuncSignature> types;
    std::vector<ImportEntry> imports;
    /// Function section: type index per locally defined function.
    std::vector<uint32_t> functions;
    std::vector<TableType> tables;
    std::optional<Limits> memory_limits;
    std::vector<GlobalEntry> globals;
    std::vector<ExportEntry> exports;
    std::optional<uint32_t> start;
    std::vector<ElementSegment> elements;
    std::vector<FunctionBody> code;
    std::vector<DataSegment> data_segments;
    std::optional<uint32_t> data_count;
    std::vector<CustomSection> customs;
    std::vector<SectionRef> section_order;
    /// Decoded "name" custom section (function names), when present.
    std::map<uint32_t, std::string> function_names;

    [[nodiscard]] uint32_t imported_function_count() const noexcept;
    [[nodiscard]] uint32_t imported_global_count() const noexcept;
    /// Size of the flat function index space (imports first).
    [[nodiscard]] uint32_t function_count() const noexcept;
    [[nodiscard]] bool is_imported_function(uint32_t func_index) const noexcept;
    /// Import entry for an imported function index.
    [[nodiscard]] const ImportEntry& imported_function(uint32_t func_index) const;
    [[nodiscard]] const FuncSignature& function_signature(uint32_t func_index) const;
    /// Body of a locally defined function (flat index).
    [[nodiscard]] const FunctionBody& body(uint32_t func_index) const;
    [[nodiscard]] const ExportEntry* find_export(std::string_view name) const noexcept;
    /// Human-readable function label (name section, export, or `func<N>`).
    [[nodiscard]] std::string function_label(uint32_t func_index) const;
    /// Global types in the flat global index space.
    [[nodiscard]] std::vector<GlobalType> global_types() const;
};

}  // namespace eosscan::wasm
