#pragma once

#include <chrono>
#include <map>
#include <memory>

#include "eosscan/engine/state.hpp"
#include "eosscan/wasm/module.hpp"

namespace eosscan::engine {

/// Lazily built CFGs of one module's functions.
class FunctionCache
{
public:
    explicit FunctionCache(const wasm::WasmModule& module) : module_(module) {}
    std::shared_ptr<const cfg::ControlFlowGraph> graph(uint32_t func_index);
    [[nodiscard]] const wasm::WasmModule& module() const noexcept { return module_; }

private:
    const wasm::WasmModule& module_;
    std::map<uint32_t, std::shared_ptr<const cfg::ControlFlowGraph>> graphs_;
};

/// Everything one exploration shares across its states.
class StepContext
{
public:
    StepContext(FunctionCache& functions, const ExplorationOptions& options, sym::Solver& solver);

    [[nodiscard]] const wasm::WasmModule& module() const noexcept { return functions_.module(); }
    [[nodiscard]] const ExplorationOptions& options() const noexcept { return options_; }
    [[nodiscard]] sym::Solver& solver() noexcept { return solver_; }
    [[nodiscard]] FunctionCache& functions() noexcept { return functions_; }

    /// Fresh variable `base#k`; in replay mode the model's value instead.
    Expr fresh(MachineState& s, std::string_view base, uint32_t width, const sym::Taint& taint);
    /// Variable with a fixed name (same on every use along a path).
    Expr named(std::string name, uint32_t width, const sym::Taint& taint) const;
    Expr load(const MachineState& s, uint64_t addr, uint64_t len) const;

    sym::SatResult feasible(const MachineState& s, const Expr& extra);
    /// Appends a constraint and applies the target filter.
    void assume(MachineState& s, const Expr& cond);
    /// Forks on `cond`: `s` continues on the first feasible side (true first);
    /// the other side, when feasible, is appended to `forks`. Returns which side
    /// `s` took, or nullopt if neither was feasible (then `s` is finished).
    std::optional<bool> split(MachineState& s, std::vector<MachineState>& forks, const Expr& cond);
    /// Replaces the symbolic operand at `stack_index` by each feasible concrete
    /// value (up to the concretization limit), re-queuing the current instruction.
    void concretize(MachineState& s, std::vector<MachineState>& forks, size_t stack_index);

    static void finish(MachineState& s, Terminal t, std::string detail = {});

    [[nodiscard]] bool replaying() const noexcept { return options_.replay_model.has_value(); }
    [[nodiscard]] bool expired() const;
    [[nodiscard]] std::chrono::steady_clock::time_point deadline() const noexcept { return deadline_; }

    /// Byte offset of the instruction being executed.
    uint32_t site_offset = 0;

private:
    void arm_solver();

    FunctionCache& functions_;
    const ExplorationOptions& options_;
    sym::Solver& solver_;
    std::chrono::steady_clock::time_point deadline_;
};

/// Initial state for entering `entry` with `args`.
MachineState initial_state(StepContext& ctx, uint32_t entry, const std::vector<Expr>& args);

/// Executes the instruction at the state's pc. `s` holds the first successor;
/// further successors go to `forks`.
void step(StepContext& ctx, MachineState& s, std::vector<MachineState>& forks);
/// Value-returning form of `step`.
std::vector<MachineState> step(StepContext& ctx, MachineState s);

PathTree explore(const wasm::WasmModule& module,
                 uint32_t entry,
                 const std::vector<Expr>& initial_args,
                 const ExplorationOptions& options);
PathTree explore(FunctionCache& functions,
                 uint32_t entry,
                 const std::vector<Expr>& initial_args,
                 const ExplorationOptions& options,
                 sym::Solver& solver);

/// Symbolic arguments for a standalone exploration: `arg{i}`, tagged entry_arg.
std::vector<Expr> entry_arguments(const wasm::WasmModule& module, uint32_t func_index);

}  // namespace eosscan::engine
