#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "eosscan/engine/engine.hpp"

namespace eosscan::emu {

enum class Category : uint8_t
{
    blockchain_state,
    memory_related,
    control_flow,
    authority,
    table_related,
    /// Action input and outgoing actions (read_action_data, send_inline, ...).
    action,
};

std::string_view to_string(Category c) noexcept;

enum class Behavior : uint8_t
{
    fresh_return,
    record_only,
    memcpy,
    memset,
    assert_true,
    exit,
    db_get,
    write_fresh_u64,
    read_action_data,
    action_data_size,
};

struct ImportModel
{
    std::string_view name;
    Category category;
    Behavior behavior;
    /// Argument positions that must be concrete before the model runs.
    std::vector<size_t> concrete_args;
};

const std::vector<ImportModel>& registry();
const ImportModel* find_model(std::string_view name) noexcept;

/// Runs the model of imported function `func_index` with `args` already popped.
/// Pushes the return value (if any) and records the call on every successor.
void emulate(engine::StepContext& ctx,
             engine::MachineState& s,
             std::vector<engine::MachineState>& forks,
             uint32_t func_index,
             std::vector<sym::Expr> args);

/// Value-returning form: the successor states of calling `name`.
std::vector<engine::MachineState> emulate(engine::StepContext& ctx,
                                          engine::MachineState s,
                                          uint32_t func_index,
                                          std::vector<sym::Expr> args);

}  // namespace eosscan::emu
