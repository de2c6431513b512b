#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eosscan/cfg/cfg.hpp"
#include "eosscan/sym/expr.hpp"
#include "eosscan/sym/memory.hpp"
#include "eosscan/sym/solver.hpp"

namespace eosscan::engine {

using sym::Constraint;
using sym::Expr;

enum class Terminal : uint8_t
{
    running,
    returned,
    asserted_false,
    exited,
    depth_pruned,
    timeout_pruned,
    unsupported,
    loop_pruned,
    filtered,
    emulation_error,
};

std::string_view to_string(Terminal t) noexcept;

struct ImportCallRecord
{
    std::string name;
    uint32_t func_index = 0;
    std::vector<Expr> args;
    std::optional<Expr> return_value;
    /// Number of path constraints in force when the call happened.
    size_t constraint_index = 0;
    /// Calling function and call-site byte offset.
    uint32_t caller = 0;
    uint32_t offset = 0;
    /// Internal call depth of the caller (entry = 0).
    uint32_t depth = 0;
    /// Functions on the call stack at the call, entry first.
    std::vector<uint32_t> stack;
    bool default_modeled = false;
};

/// A call into a locally defined function.
struct CallEvent
{
    uint32_t caller = 0;
    uint32_t callee = 0;
    std::vector<Expr> args;
    /// Depth of the callee frame (entry = 0).
    uint32_t depth = 0;
    uint32_t offset = 0;
    size_t constraint_index = 0;
    size_t import_index = 0;
    bool indirect = false;
};

struct RemEvent
{
    uint32_t function = 0;
    uint32_t offset = 0;
    Expr dividend;
    Expr divisor;
    bool is_signed = false;
};

struct PathRecord
{
    std::vector<Constraint> constraints;
    std::vector<ImportCallRecord> import_calls;
    std::vector<CallEvent> calls;
    std::vector<RemEvent> rems;
    /// (function index, block id) pairs executed along the path.
    std::set<std::pair<uint32_t, uint32_t>> blocks;
    Terminal terminal = Terminal::running;
    std::string detail;
    std::vector<Expr> return_values;
    uint32_t max_depth = 0;
    bool default_modeled = false;
    /// Some fork was kept because the solver answered unknown.
    bool feasibility_unknown = false;
};

struct Label
{
    /// Instruction index of the block/loop/if opener.
    uint32_t opener = 0;
    /// Values a branch to this label carries.
    uint32_t arity = 0;
    /// Operand-stack height below the block's parameters.
    uint32_t height = 0;
    bool is_loop = false;
};

struct Frame
{
    uint32_t func = 0;
    std::shared_ptr<const cfg::ControlFlowGraph> graph;
    uint32_t pc = 0;
    std::vector<Expr> locals;
    std::vector<Label> labels;
    uint32_t stack_base = 0;
    uint32_t result_arity = 0;
    /// Back-edges taken per loop opener since the loop was last entered.
    std::map<uint32_t, uint32_t> loop_counts;
};

struct MachineState
{
    std::vector<Expr> value_stack;
    std::vector<Frame> call_stack;
    std::vector<Expr> globals;
    sym::SymbolicMemory memory;
    PathRecord record;
    /// Per-path counter behind fresh variable names (`name#k`).
    uint64_t fresh_counter = 0;
    uint32_t last_block = UINT32_MAX;

    [[nodiscard]] bool finished() const noexcept { return record.terminal != Terminal::running; }
    [[nodiscard]] Frame& frame() { return call_stack.back(); }
    [[nodiscard]] const Frame& frame() const { return call_stack.back(); }
    /// Internal call depth of the current frame (entry = 0).
    [[nodiscard]] uint32_t depth() const noexcept { return static_cast<uint32_t>(call_stack.size()) - 1; }
};

struct PathTree
{
    uint32_t entry = 0;
    std::vector<Expr> args;
    std::vector<PathRecord> paths;
    bool timed_out = false;
    bool stopped_early = false;
    uint64_t steps = 0;
    uint64_t solver_queries = 0;
};

struct ExplorationOptions
{
    uint32_t call_depth = 2;
    std::chrono::milliseconds timeout = std::chrono::seconds(300);
    std::chrono::milliseconds solver_budget = std::chrono::seconds(10);
    /// Back-edges allowed per loop entry.
    uint32_t loop_bound = 8;
    /// Models tried when concretizing a symbolic address or length.
    uint32_t concretize_limit = 4;
    size_t max_paths = 50000;
    /// Constraints assumed from the start.
    std::vector<Expr> assumptions;
    /// Keeps a path after a new constraint; false ends it as `filtered`.
    std::function<bool(const PathRecord&, sym::Solver&)> target_filter;
    /// Checked after each import call and at path end; true ends the exploration.
    std::function<bool(const PathRecord&, sym::Solver&)> early_stop;
    /// Concrete replay: fresh variables take these values (unbound ones zero).
    std::optional<sym::Model> replay_model;
};

}  // namespace eosscan::engine
