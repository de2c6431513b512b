#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eosscan/wasm/module.hpp"

namespace eosscan::cfg {

enum class EdgeKind : uint8_t
{
    fallthrough,
    branch_taken,
    branch_not_taken,
    table_case,
    call,
    return_,
};

std::string_view to_string(EdgeKind k) noexcept;

/// A maximal run of instructions `[first, last]` of one function body.
struct BasicBlock
{
    uint32_t id = 0;
    uint32_t first = 0;
    uint32_t last = 0;
    uint32_t start_offset = 0;
    uint32_t end_offset = 0;
    /// Not reachable from the entry block.
    bool dead = false;
};

struct CfgEdge
{
    uint32_t source = 0;
    uint32_t target = 0;
    EdgeKind kind = EdgeKind::fallthrough;
    /// br_table entries routed to `target`; the default is the last index.
    std::vector<uint32_t> cases;
    /// For call edges.
    std::optional<uint32_t> callee;
    bool indirect = false;
};

struct Successor
{
    uint32_t block = 0;
    EdgeKind kind = EdgeKind::fallthrough;
    std::vector<uint32_t> cases;

    bool operator==(const Successor&) const = default;
};

class ControlFlowGraph
{
public:
    ControlFlowGraph(uint32_t func_index, std::vector<wasm::Instruction> instructions);

    [[nodiscard]] uint32_t function_index() const noexcept { return func_index_; }
    [[nodiscard]] const std::vector<wasm::Instruction>& instructions() const noexcept { return instructions_; }
    [[nodiscard]] const std::vector<BasicBlock>& blocks() const noexcept { return blocks_; }
    [[nodiscard]] const std::vector<CfgEdge>& edges() const noexcept { return edges_; }
    [[nodiscard]] const BasicBlock& block(uint32_t id) const;
    [[nodiscard]] std::span<const wasm::Instruction> block_instructions(uint32_t id) const;
    /// Block whose range contains instruction `index`.
    [[nodiscard]] uint32_t block_of(uint32_t instruction_index) const;
    /// Outgoing edges of a block (indices into `edges()`), in successor order.
    [[nodiscard]] const std::vector<uint32_t>& out_edges(uint32_t id) const;
    [[nodiscard]] uint32_t entry() const noexcept { return 0; }
    /// Block holding the function's terminal `end`.
    [[nodiscard]] uint32_t exit() const noexcept { return static_cast<uint32_t>(blocks_.size() - 1); }
    /// True when block `target` begins a loop body (backward branch target).
    [[nodiscard]] bool is_loop_header(uint32_t id) const;

    /// Graphviz rendering, one graph per function.
    [[nodiscard]] std::string to_dot(const wasm::WasmModule* module = nullptr) const;

private:
    friend ControlFlowGraph build_cfg(const wasm::WasmModule&, uint32_t);

    uint32_t func_index_;
    std::vector<wasm::Instruction> instructions_;
    std::vector<BasicBlock> blocks_;
    std::vector<CfgEdge> edges_;
    std::vector<std::vector<uint32_t>> out_;
    std::vector<uint32_t> block_of_;
    std::vector<bool> loop_header_;
};

/// Build the CFG of a locally defined function. Throws MalformedBinary
/// (from decoding), UnresolvableBranch, or Error for imported indices.
ControlFlowGraph build_cfg(const wasm::WasmModule& module, uint32_t func_index);

/// Ordered successors of a block. Throws UnknownBlock.
std::vector<Successor> successors_of(const ControlFlowGraph& graph, uint32_t block_id);

}  // namespace eosscan::cfg
