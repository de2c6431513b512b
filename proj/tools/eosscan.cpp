// eosscan: scan EOSIO contracts, then look for exploitation in transaction logs.
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "eosscan/error.hpp"
#include "eosscan/report/report.hpp"

namespace fs = std::filesystem;
using namespace eosscan;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_found = 1;
constexpr int exit_usage = 2;

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    if (!in)
        throw Error("cannot read " + p.string());
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, sep))
        if (!cur.empty())
            out.push_back(cur);
    return out;
}

}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"EOSIO smart contract vulnerability scanner"};
    app.require_subcommand(1);

    auto* scan = app.add_subcommand("scan", "Analyze .wasm files or directories of them");
    std::vector<std::string> paths;
    uint32_t call_depth = 2;
    double timeout_s = 300;
    std::string detectors = "fake_eos,fake_receipt,rollback,missing_permission";
    std::string labels;
    std::string format = "json";
    unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
    bool deterministic = false;
    std::string dot_dir;
    std::string output;
    scan->add_option("paths", paths, "Contract files or directories")->required();
    scan->add_option("--call-depth", call_depth, "Non-import call depth explored")->capture_default_str();
    scan->add_option("--timeout", timeout_s, "Seconds per detector per contract")->capture_default_str();
    scan->add_option("--detectors", detectors, "Comma separated detector list")->capture_default_str();
    scan->add_option("--labels", labels, "contract<TAB>category file; gambling/game enables rollback");
    scan->add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    scan->add_option("--jobs", jobs, "Contracts scanned in parallel");
    scan->add_flag("--deterministic", deterministic, "Single worker, no timing in the report");
    scan->add_option("--dot", dot_dir, "Write each contract's apply CFG as Graphviz here");
    scan->add_option("-o,--output", output, "Report file (default stdout)");

    auto* atk = app.add_subcommand("attacks", "Flag exploitation of scanned contracts in a transaction log");
    std::string log_path, scan_report;
    double window_h = 24, ratio = 10;
    std::string atk_format = "json";
    atk->add_option("log", log_path, "Line-delimited JSON transaction log")->required();
    atk->add_option("--scan-report", scan_report, "JSON report from `eosscan scan`")->required();
    atk->add_option("--window", window_h, "Join window in hours")->capture_default_str();
    atk->add_option("--ratio", ratio, "Received/spent ratio for suspicious")->capture_default_str();
    atk->add_option("--format", atk_format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
    atk->add_option("-o,--output", output, "Report file (default stdout)");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? exit_ok : exit_usage;
    }

    auto emit = [&](const std::string& text) {
        if (output.empty())
        {
            std::cout << text;
            return;
        }
        std::ofstream out(output, std::ios::binary);
        if (!out)
            throw Error("cannot write " + output);
        out << text;
    };

    try
    {
        if (*scan)
        {
            report::RunOptions opt;
            opt.config.call_depth = call_depth;
            opt.config.timeout = std::chrono::milliseconds(static_cast<int64_t>(timeout_s * 1000));
            opt.config.detectors.clear();
            for (const auto& d : split(detectors, ','))
            {
                const auto det = scanner::detector_from_string(d);
                if (!det)
                {
                    std::cerr << "unknown detector: " << d << "\n";
                    return exit_usage;
                }
                opt.config.detectors.insert(*det);
            }
            if (const char* b = std::getenv("EOSSCAN_SOLVER_BUDGET"))
                opt.config.solver_budget = std::chrono::milliseconds(static_cast<int64_t>(std::stod(b) * 1000));
            opt.config.deterministic = deterministic;
            // without labels nothing is known to be a game, so rollback is checked everywhere
            opt.config.gambling = labels.empty();
            if (!labels.empty())
                opt.labels_path = labels;
            if (!dot_dir.empty())
                opt.dot_dir = dot_dir;
            opt.jobs = deterministic ? 1 : jobs;
            for (const auto& p : paths)
                if (!fs::exists(p))
                {
                    std::cerr << "no such file or directory: " << p << "\n";
                    return exit_usage;
                }
            std::vector<fs::path> inputs(paths.begin(), paths.end());
            const auto rep = report::run_scan(inputs, opt);
            emit(format == "json" ? report::render_json(rep) : report::render_text(rep));
            return report::any_vulnerable(rep) ? exit_found : exit_ok;
        }

        const auto scan_json = slurp(scan_report);
        auto targets = report::targets_from_json(scan_json);
        std::ifstream log(log_path, std::ios::binary);
        if (!log)
        {
            std::cerr << "cannot read " << log_path << "\n";
            return exit_usage;
        }
        report::AttackSection section;
        section.config.window = std::chrono::seconds(static_cast<int64_t>(window_h * 3600));
        section.config.ratio = ratio;
        section.result = attacks::analyze_log(log, targets, section.config);
        emit(atk_format == "json" ? report::with_attacks_json(scan_json, section)
                                  : report::render_attacks_text(section));
        bool suspicious = false;
        for (const auto& f : section.result.flags)
            suspicious |= f.confidence == attacks::Confidence::suspicious;
        return suspicious ? exit_found : exit_ok;
    }
    catch (const std::exception& e)
    {
        std::cerr << "eosscan: " << e.what() << "\n";
        return exit_usage;
    }
}
