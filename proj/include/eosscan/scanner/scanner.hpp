#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "eosscan/engine/state.hpp"
#include "eosscan/wasm/module.hpp"

namespace eosscan::scanner {

enum class Detector : uint8_t
{
    fake_eos,
    fake_receipt,
    rollback,
    missing_permission,
};

enum class Verdict : uint8_t
{
    vulnerable,
    safe,
    inconclusive,
};

/// Which valuable operation made a function valuable.
enum class Criterion : uint8_t
{
    send_inline,
    db_update_i64,
    db_store_i64,
};

std::string_view to_string(Detector d) noexcept;
std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(Criterion c) noexcept;
std::optional<Detector> detector_from_string(std::string_view s) noexcept;
/// Valuable criterion for an import name, if any.
std::optional<Criterion> criterion_of(std::string_view import_name) noexcept;

inline constexpr Detector all_detectors[] = {Detector::fake_eos, Detector::fake_receipt, Detector::rollback,
                                             Detector::missing_permission};

struct ValuableEvidence
{
    Criterion criterion = Criterion::send_inline;
    /// Entry of the explored tree, path index in it, and import-call index on the path.
    uint32_t entry = 0;
    size_t path = 0;
    size_t call = 0;
};

struct ValuableFunctionSet
{
    std::set<uint32_t> members;
    std::map<uint32_t, std::vector<ValuableEvidence>> evidence;

    [[nodiscard]] bool contains(uint32_t f) const { return members.count(f) != 0; }
    [[nodiscard]] bool valuable_by(uint32_t f, Criterion c) const;
};

/// A function is valuable when it is on the call stack of a send_inline,
/// db_update_i64 or db_store_i64 call on some explored path.
ValuableFunctionSet locate_valuable_functions(const wasm::WasmModule& module,
                                              const std::vector<const engine::PathTree*>& trees);

/// Enough to re-run the flagged path concretely.
struct Witness
{
    uint32_t entry = 0;
    std::vector<sym::Expr> args;
    std::vector<sym::Expr> conditions;
    /// Import calls of the path up to and including the flagged one.
    std::vector<std::string> import_trace;
    /// Unchecked action names (missing_permission only).
    std::vector<std::string> actions;
};

struct Diagnostics
{
    bool timeout = false;
    bool depth_pruned = false;
    bool loop_pruned = false;
    bool default_modeled = false;
    bool unsupported = false;
    bool solver_unknown = false;
    bool emulation_error = false;
    bool analysis_error = false;
    std::vector<std::string> notes;

    [[nodiscard]] bool any_flag() const noexcept
    {
        return timeout || depth_pruned || loop_pruned || default_modeled || unsupported || solver_unknown ||
               emulation_error || analysis_error;
    }
    void absorb(const engine::PathTree& tree);
};

struct Finding
{
    std::string contract_id;
    Detector detector = Detector::fake_eos;
    Verdict verdict = Verdict::safe;
    std::optional<Witness> witness;
    Diagnostics diagnostics;
};

struct ScanConfig
{
    uint32_t call_depth = 2;
    std::chrono::milliseconds timeout = std::chrono::seconds(300);
    std::chrono::milliseconds solver_budget = std::chrono::seconds(10);
    std::set<Detector> detectors{std::begin(all_detectors), std::end(all_detectors)};
    /// Gate for the rollback detector.
    bool gambling = false;
    bool deterministic = false;
};

struct ScanTiming
{
    std::chrono::milliseconds total{0};
    std::map<Detector, std::chrono::milliseconds> detectors;
};

/// Runs the enabled detectors in the fixed order. Never throws for analysis
/// failures; they degrade the affected Finding to inconclusive.
std::vector<Finding> scan(const wasm::WasmModule& module,
                          const ScanConfig& config,
                          const std::string& contract_id = {},
                          ScanTiming* timing = nullptr);

struct ReplayResult
{
    bool reproduced = false;
    std::vector<std::string> replayed_trace;
    std::string detail;
};

/// Solves the witness, re-executes its entry concretely under the model and
/// checks the flagged import-call sequence comes out again.
ReplayResult replay_witness(const wasm::WasmModule& module, const Witness& witness, const ScanConfig& config);

/// Byte patterns of toolchain helpers whose `rem` sites the rollback detector ignores.
const std::vector<std::vector<uint8_t>>& library_rem_signatures();
bool is_library_function(const wasm::WasmModule& module, uint32_t func_index);

/// `contract_id<TAB>category` lines; '#' starts a comment.
std::map<std::string, std::string> load_labels(const std::filesystem::path& path);
bool is_gambling_category(std::string_view category) noexcept;

}  // namespace eosscan::scanner
