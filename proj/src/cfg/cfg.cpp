#include "eosscan/cfg/cfg.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <sstream>

#include "eosscan/error.hpp"
#include "eosscan/wasm/parser.hpp"

namespace eosscan::cfg {

using wasm::Instruction;
using wasm::Opcode;

std::string_view to_string(EdgeKind k) noexcept
{
    switch (k)
    {
    case EdgeKind::fallthrough: return "fallthrough";
    case EdgeKind::branch_taken: return "branch_taken";
    case EdgeKind::branch_not_taken: return "branch_not_taken";
    case EdgeKind::table_case: return "table_case";
    case EdgeKind::call: return "call";
    case EdgeKind::return_: return "return";
    }
    return "?";
}

namespace {

bool ends_block(Opcode op)
{
    switch (op)
    {
    case Opcode::br:
    case Opcode::br_if:
    case Opcode::br_table:
    case Opcode::return_:
    case Opcode::call:
    case Opcode::call_indirect:
    case Opcode::unreachable:
    case Opcode::end:
    case Opcode::else_:
    case Opcode::if_:
        return true;
    default:
        return false;
    }
}

}  // namespace

ControlFlowGraph::ControlFlowGraph(uint32_t func_index, std::vector<Instruction> instructions)
    : func_index_(func_index), instructions_(std::move(instructions))
{
}

const BasicBlock& ControlFlowGraph::block(uint32_t id) const
{
    if (id >= blocks_.size())
        throw UnknownBlock("unknown block " + std::to_string(id));
    return blocks_[id];
}

std::span<const Instruction> ControlFlowGraph::block_instructions(uint32_t id) const
{
    const auto& b = block(id);
    return std::span<const Instruction>(instructions_).subspan(b.first, b.last - b.first + 1);
}

uint32_t ControlFlowGraph::block_of(uint32_t instruction_index) const
{
    if (instruction_index >= block_of_.size())
        throw UnknownBlock("instruction " + std::to_string(instruction_index) + " out of range");
    return block_of_[instruction_index];
}

const std::vector<uint32_t>& ControlFlowGraph::out_edges(uint32_t id) const
{
    (void)block(id);
    return out_[id];
}

bool ControlFlowGraph::is_loop_header(uint32_t id) const
{
    (void)block(id);
    return loop_header_[id];
}

std::string ControlFlowGraph::to_dot(const wasm::WasmModule* module) const
{
    std::ostringstream os;
    const auto name = module ? module->function_label(func_index_) : "func" + std::to_string(func_index_);
    os << "digraph \"" << name << "\" {\n  node [shape=box fontname=monospace];\n";
    for (const auto& b : blocks_)
    {
        os << "  b" << b.id << " [label=\"b" << b.id << " @" << b.start_offset;
        if (b.dead)
            os << " (dead)";
        os << "\\l";
        for (auto i = b.first; i <= b.last; ++i)
            os << wasm::mnemonic(instructions_[i].op) << "\\l";
        os << "\"];\n";
    }
    for (const auto& e : edges_)
    {
        os << "  b" << e.source << " -> b" << e.target << " [label=\"" << to_string(e.kind);
        if (!e.cases.empty())
        {
            os << " ";
            for (size_t i = 0; i < e.cases.size(); ++i)
                os << (i ? "," : "") << e.cases[i];
        }
        if (e.callee)
            os << " f" << *e.callee;
        if (e.indirect)
            os << " indirect";
        os << "\"];\n";
    }
    os << "}\n";
    return os.str();
}

ControlFlowGraph build_cfg(const wasm::WasmModule& module, uint32_t func_index)
{
    if (module.is_imported_function(func_index))
        throw Error("function " + std::to_string(func_index) + " is imported");
    ControlFlowGraph g(func_index, wasm::decode_function_body(module.body(func_index)));
    const auto& ins = g.instructions_;
    const auto n = static_cast<uint32_t>(ins.size());
    const uint32_t final_end = n - 1;

    // Resolve every branch depth to a target instruction index, with the
    // enclosing structure stack tracked in a single forward pass.
    std::vector<std::vector<uint32_t>> targets(n);
    std::vector<uint32_t> open;
    std::vector<bool> leader(n + 1, false);
    std::vector<bool> loop_target(n + 1, false);
    leader[0] = true;

    auto label_target = [&](uint32_t depth, uint32_t at) -> uint32_t {
        if (depth == open.size())
            return final_end;
        if (depth > open.size())
            throw UnresolvableBranch("branch depth " + std::to_string(depth) + " exceeds nesting at offset " +
                                     std::to_string(ins[at].byte_offset));
        const auto opener = open[open.size() - 1 - depth];
        if (ins[opener].op == Opcode::loop)
        {
            loop_target[opener + 1] = true;
            return opener + 1;
        }
        return ins[opener].end_index + 1;
    };

    for (uint32_t i = 0; i < n; ++i)
    {
        const auto& in = ins[i];
        switch (in.op)
        {
        case Opcode::block:
        case Opcode::loop:
            open.push_back(i);
            break;
        case Opcode::if_:
            targets[i] = {i + 1, in.else_index ? *in.else_index + 1 : in.end_index + 1};
            open.push_back(i);
            break;
        case Opcode::else_:
            targets[i] = {in.end_index + 1};
            break;
        case Opcode::end:
            if (!open.empty())
                open.pop_back();
            if (i != final_end)
                targets[i] = {i + 1};
            break;
        case Opcode::br:
            targets[i] = {label_target(in.index_imm(), i)};
            break;
        case Opcode::br_if:
            targets[i] = {label_target(in.index_imm(), i), i + 1};
            break;
        case Opcode::br_table: {
            const auto& t = in.br_table();
            for (auto d : t.targets)
                targets[i].push_back(label_target(d, i));
            targets[i].push_back(label_target(t.default_target, i));
            break;
        }
        case Opcode::return_:
            targets[i] = {final_end};
            break;
        case Opcode::call:
        case Opcode::call_indirect:
            targets[i] = {i + 1};
            break;
        default:
            break;
        }
        for (auto t : targets[i])
            leader[t] = true;
        if (ends_block(in.op) && i + 1 < n)
            leader[i + 1] = true;
    }

    g.block_of_.assign(n, 0);
    for (uint32_t i = 0; i < n; ++i)
    {
        if (leader[i])
        {
            BasicBlock b;
            b.id = static_cast<uint32_t>(g.blocks_.size());
            b.first = i;
            g.blocks_.push_back(b);
        }
        auto& cur = g.blocks_.back();
        cur.last = i;
        g.block_of_[i] = cur.id;
    }
    for (auto& b : g.blocks_)
    {
        b.start_offset = ins[b.first].byte_offset;
        b.end_offset = b.last + 1 < n ? ins[b.last + 1].byte_offset
                                      : static_cast<uint32_t>(module.body(func_index).code_offset +
                                                              module.body(func_index).code.size());
    }
    g.loop_header_.assign(g.blocks_.size(), false);
    for (uint32_t i = 0; i < n; ++i)
        if (loop_target[i])
            g.loop_header_[g.block_of_[i]] = true;

    g.out_.assign(g.blocks_.size(), {});
    auto add_edge = [&](CfgEdge e) {
        g.out_[e.source].push_back(static_cast<uint32_t>(g.edges_.size()));
        g.edges_.push_back(std::move(e));
    };
    for (const auto& b : g.blocks_)
    {
        const auto& last = ins[b.last];
        const auto& t = targets[b.last];
        switch (last.op)
        {
        case Opcode::br_if:
        case Opcode::if_:
            add_edge({b.id, g.block_of_[t[0]], EdgeKind::branch_taken, {}, {}, false});
            add_edge({b.id, g.block_of_[t[1]], EdgeKind::branch_not_taken, {}, {}, false});
            break;
        case Opcode::br:
            add_edge({b.id, g.block_of_[t[0]], EdgeKind::branch_taken, {}, {}, false});
            break;
        case Opcode::br_table: {
            std::map<uint32_t, std::vector<uint32_t>> by_target;
            for (uint32_t c = 0; c < t.size(); ++c)
                by_target[g.block_of_[t[c]]].push_back(c);
            std::vector<CfgEdge> cases;
            for (auto& [target, idx] : by_target)
                cases.push_back({b.id, target, EdgeKind::table_case, idx, {}, false});
            std::ranges::sort(cases, {}, [](const CfgEdge& e) { return e.cases.front(); });
            for (auto& e : cases)
                add_edge(std::move(e));
            break;
        }
        case Opcode::return_:
            add_edge({b.id, g.exit(), EdgeKind::return_, {}, {}, false});
            break;
        case Opcode::call:
            add_edge({b.id, g.block_of_[t[0]], EdgeKind::call, {}, last.index_imm(), false});
            break;
        case Opcode::call_indirect:
            add_edge({b.id, g.block_of_[t[0]], EdgeKind::call, {}, {}, true});
            break;
        case Opcode::unreachable:
            break;
        default:
            if (b.last != final_end)
                add_edge({b.id, g.block_of_[b.last + 1], EdgeKind::fallthrough, {}, {}, false});
            break;
        }
    }

    std::vector<bool> seen(g.blocks_.size(), false);
    std::deque<uint32_t> work{0};
    seen[0] = true;
    while (!work.empty())
    {
        const auto id = work.front();
        work.pop_front();
        for (auto e : g.out_[id])
        {
            const auto tgt = g.edges_[e].target;
            if (!seen[tgt])
            {
                seen[tgt] = true;
                work.push_back(tgt);
            }
        }
    }
    for (auto& b : g.blocks_)
        b.dead = !seen[b.id];
    return g;
}

std::vector<Successor> successors_of(const ControlFlowGraph& graph, uint32_t block_id)
{
    std::vector<Successor> out;
    for (auto e : graph.out_edges(block_id))
    {
        const auto& edge = graph.edges()[e];
        out.push_back({edge.target, edge.kind, edge.cases});
    }
    std::ranges::stable_sort(out, [](const Successor& a, const Successor& b) {
        if (a.kind != b.kind)
            return a.kind < b.kind;
        const auto ca = a.cases.empty() ? 0u : a.cases.front();
        const auto cb = b.cases.empty() ? 0u : b.cases.front();
        return ca < cb;
    });
    return out;
}

}  // namespace eosscan::cfg
