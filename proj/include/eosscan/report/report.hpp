#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eosscan/attacks/attacks.hpp"
#include "eosscan/scanner/scanner.hpp"

namespace eosscan::report {

inline constexpr std::string_view schema_version = "eosscan-report/1";

struct ContractEntry
{
    /// File stem; taken to be the account the contract is deployed at.
    std::string id;
    std::string path;
    std::optional<std::string> category;
    std::optional<std::string> error;
    std::vector<scanner::Finding> findings;
    std::optional<scanner::ScanTiming> timing;
};

struct AttackSection
{
    attacks::HeuristicConfig config;
    attacks::AttackReport result;
};

struct Report
{
    scanner::ScanConfig config;
    std::optional<std::string> labels_path;
    std::vector<ContractEntry> contracts;
    std::optional<AttackSection> attacks;
};

struct RunOptions
{
    scanner::ScanConfig config;
    std::optional<std::filesystem::path> labels_path;
    unsigned jobs = 1;
    /// Directory for per-contract apply CFGs in Graphviz form.
    std::optional<std::filesystem::path> dot_dir;
};

/// Files as given, directories expanded to their `.wasm` files (recursive, sorted).
std::vector<std::filesystem::path> collect_inputs(const std::vector<std::filesystem::path>& paths);

/// Reads, parses and scans one file. Failures land in `error`.
ContractEntry scan_file(const std::filesystem::path& path,
                        const scanner::ScanConfig& config,
                        const std::map<std::string, std::string>& labels);

/// Scans every input with `jobs` workers; entries keep input order.
Report run_scan(const std::vector<std::filesystem::path>& paths, const RunOptions& options);

[[nodiscard]] bool any_vulnerable(const Report& report);

std::string render_json(const Report& report);
std::string render_text(const Report& report);

/// Victims and vulnerable actions named by a JSON scan report.
attacks::AttackTargets targets_from_json(const std::string& report_json);
/// Same report document with `attacks` replaced.
std::string with_attacks_json(const std::string& report_json, const AttackSection& attacks);
std::string render_attacks_text(const AttackSection& attacks);

}  // namespace eosscan::report
