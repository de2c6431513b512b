#include "eosscan/report/report.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "eosscan/cfg/cfg.hpp"
#include "eosscan/eosio/name.hpp"
#include "eosscan/error.hpp"
#include "eosscan/sym/solver.hpp"
#include "eosscan/wasm/parser.hpp"

namespace eosscan::report {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using scanner::Finding;
using scanner::Verdict;

namespace {

std::vector<uint8_t> read_bytes(const fs::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error("cannot read " + path.string());
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Concrete apply arguments for the witness, decoded as names.
json witness_model(const scanner::Witness& w)
{
    json out = json::object();
    sym::Solver solver(std::chrono::seconds(5));
    const auto outcome = solver.solve(w.conditions);
    if (outcome.result != sym::SatResult::sat)
        return out;
    for (const auto& [name, value] : outcome.model)
    {
        if (value.width() != 64)
            continue;
        if (name == "receiver" || name == "code" || name == "action")
            out[name] = eosio::name_decode(value.to_u64());
        else
            out[name] = value.to_hex();
    }
    return out;
}

json diagnostics_json(const scanner::Diagnostics& d)
{
    return json{{"timeout", d.timeout},
                {"depth_pruned", d.depth_pruned},
                {"loop_pruned", d.loop_pruned},
                {"default_modeled", d.default_modeled},
                {"unsupported", d.unsupported},
                {"solver_unknown", d.solver_unknown},
                {"emulation_error", d.emulation_error},
                {"analysis_error", d.analysis_error},
                {"notes", d.notes}};
}

json finding_json(const Finding& f)
{
    json j{{"detector", scanner::to_string(f.detector)}, {"verdict", scanner::to_string(f.verdict)}};
    if (f.witness)
    {
        const auto& w = *f.witness;
        json args = json::array();
        for (const auto& a : w.args)
            args.push_back(sym::to_string(a));
        json conditions = json::array();
        for (const auto& c : w.conditions)
            conditions.push_back(sym::to_string(c));
        j["witness"] = json{{"entry", w.entry},
                            {"args", args},
                            {"conditions", conditions},
                            {"import_trace", w.import_trace},
                            {"actions", w.actions},
                            {"model", witness_model(w)}};
    }
    else
        j["witness"] = nullptr;
    j["diagnostics"] = diagnostics_json(f.diagnostics);
    return j;
}

json report_json(const Report& r)
{
    json detectors = json::array();
    for (auto d : r.config.detectors)
        detectors.push_back(scanner::to_string(d));
    json config{{"call_depth", r.config.call_depth},
                {"timeout_ms", r.config.timeout.count()},
                {"solver_budget_ms", r.config.solver_budget.count()},
                {"detectors", detectors},
                {"labels", r.labels_path ? json(*r.labels_path) : json(nullptr)},
                {"deterministic", r.config.deterministic}};
    json contracts = json::array();
    for (const auto& c : r.contracts)
    {
        json findings = json::array();
        for (const auto& f : c.findings)
            findings.push_back(finding_json(f));
        json entry{{"id", c.id},
                   {"path", c.path},
                   {"category", c.category ? json(*c.category) : json(nullptr)},
                   {"error", c.error ? json(*c.error) : json(nullptr)},
                   {"findings", findings}};
        if (c.timing && !r.config.deterministic)
        {
            json per = json::object();
            for (const auto& [d, ms] : c.timing->detectors)
                per[std::string(scanner::to_string(d))] = ms.count();
            entry["timing"] = json{{"total_ms", c.timing->total.count()}, {"detectors_ms", per}};
        }
        else
            entry["timing"] = nullptr;
        contracts.push_back(std::move(entry));
    }
    return json{{"schema_version", schema_version},
                {"config", config},
                {"contracts", contracts},
                {"attacks", nullptr}};
}

json attacks_json(const AttackSection& a)
{
    json flags = json::array();
    for (const auto& f : a.result.flags)
        flags.push_back(json{{"kind", attacks::to_string(f.kind)},
                             {"victim", f.victim},
                             {"suspects", f.suspects},
                             {"tx_ids", f.tx_ids},
                             {"gain_estimate", f.gain_estimate},
                             {"confidence", attacks::to_string(f.confidence)}});
    json rates = json::array();
    for (const auto& r : a.result.rollback_rates)
        rates.push_back(json{{"suspect", r.suspect},
                             {"victim", r.victim},
                             {"wins", r.wins},
                             {"bets", r.bets},
                             {"span_hours", r.span_hours},
                             {"wins_per_hour", r.wins_per_hour}});
    return json{{"window_hours", std::chrono::duration<double, std::ratio<3600>>(a.config.window).count()},
                {"ratio", a.config.ratio},
                {"flags", flags},
                {"rollback_rates", rates}};
}

void write_dot(const fs::path& dir, const std::string& id, const wasm::WasmModule& module)
{
    const auto apply = eosio::find_apply(module);
    fs::create_directories(dir);
    std::ofstream out(dir / (id + ".apply.dot"));
    out << cfg::build_cfg(module, apply).to_dot(&module);
}

}  // namespace

std::vector<fs::path> collect_inputs(const std::vector<fs::path>& paths)
{
    std::vector<fs::path> out;
    for (const auto& p : paths)
    {
        if (!fs::is_directory(p))
        {
            out.push_back(p);
            continue;
        }
        std::vector<fs::path> found;
        for (const auto& e : fs::recursive_directory_iterator(p))
            if (e.is_regular_file() && e.path().extension() == ".wasm")
                found.push_back(e.path());
        std::sort(found.begin(), found.end());
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

ContractEntry scan_file(const fs::path& path,
                        const scanner::ScanConfig& config,
                        const std::map<std::string, std::string>& labels)
{
    ContractEntry entry;
    entry.id = path.stem().string();
    entry.path = path.string();
    auto cfg = config;
    if (auto it = labels.find(entry.id); it != labels.end())
        entry.category = it->second;
    if (!labels.empty())
        cfg.gambling = entry.category && scanner::is_gambling_category(*entry.category);
    try
    {
        const auto module = wasm::parse_module(read_bytes(path));
        scanner::ScanTiming timing;
        entry.findings = scanner::scan(module, cfg, entry.id, &timing);
        entry.timing = timing;
    }
    catch (const std::exception& e)
    {
        entry.error = e.what();
    }
    return entry;
}

Report run_scan(const std::vector<fs::path>& paths, const RunOptions& options)
{
    Report report;
    report.config = options.config;
    std::map<std::string, std::string> labels;
    if (options.labels_path)
    {
        report.labels_path = options.labels_path->string();
        labels = scanner::load_labels(*options.labels_path);
    }
    const auto inputs = collect_inputs(paths);
    report.contracts.resize(inputs.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next++; i < inputs.size(); i = next++)
        {
            report.contracts[i] = scan_file(inputs[i], options.config, labels);
            if (options.dot_dir && !report.contracts[i].error)
            {
                try
                {
                    write_dot(*options.dot_dir, report.contracts[i].id,
                              wasm::parse_module(read_bytes(inputs[i])));
                }
                catch (const std::exception&)
                {
                    // no dispatcher, nothing to draw
                }
            }
        }
    };
    const unsigned jobs = std::max(1u, std::min<unsigned>(options.jobs, static_cast<unsigned>(inputs.size())));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < jobs; ++t)
        pool.emplace_back(worker);
    worker();
    for (auto& t : pool)
        t.join();
    return report;
}

bool any_vulnerable(const Report& report)
{
    for (const auto& c : report.contracts)
        for (const auto& f : c.findings)
            if (f.verdict == Verdict::vulnerable)
                return true;
    if (report.attacks)
        for (const auto& f : report.attacks->result.flags)
            if (f.confidence == attacks::Confidence::suspicious)
                return true;
    return false;
}

std::string render_json(const Report& report)
{
    auto j = report_json(report);
    if (report.attacks)
        j["attacks"] = attacks_json(*report.attacks);
    return j.dump(2) + "\n";
}

std::string render_text(const Report& report)
{
    std::ostringstream out;
    out << "eosscan " << schema_version << ": " << report.contracts.size() << " contract(s)\n";
    for (const auto& c : report.contracts)
    {
        out << "\n" << c.id << "  (" << c.path << ")";
        if (c.category)
            out << " [" << *c.category << "]";
        if (c.timing && !report.config.deterministic)
            out << "  " << c.timing->total.count() << " ms";
        out << "\n";
        if (c.error)
        {
            out << "  error: " << *c.error << "\n";
            continue;
        }
        for (const auto& f : c.findings)
        {
            const auto& d = f.diagnostics;
            std::vector<std::string> flags;
            if (d.timeout) flags.push_back("timeout");
            if (d.depth_pruned) flags.push_back("depth_pruned");
            if (d.loop_pruned) flags.push_back("loop_pruned");
            if (d.default_modeled) flags.push_back("default_modeled");
            if (d.unsupported) flags.push_back("unsupported");
            if (d.solver_unknown) flags.push_back("solver_unknown");
            if (d.emulation_error) flags.push_back("emulation_error");
            if (d.analysis_error) flags.push_back("analysis_error");
            for (const auto& n : d.notes)
                flags.push_back(n);
            out << "  " << std::left << std::setw(20) << scanner::to_string(f.detector);
            if (flags.empty())
                out << scanner::to_string(f.verdict);
            else
                out << std::setw(13) << scanner::to_string(f.verdict);
            for (size_t i = 0; i < flags.size(); ++i)
                out << (i ? ", " : "") << flags[i];
            out << "\n";
            if (f.witness)
            {
                out << "    via";
                for (const auto& s : f.witness->import_trace)
                    out << " " << s;
                out << "\n";
                if (!f.witness->actions.empty())
                {
                    out << "    actions:";
                    for (const auto& a : f.witness->actions)
                        out << " " << a;
                    out << "\n";
                }
            }
        }
    }
    if (report.attacks)
        out << "\n" << render_attacks_text(*report.attacks);
    return out.str();
}

attacks::AttackTargets targets_from_json(const std::string& report_json)
{
    attacks::AttackTargets t;
    nlohmann::json j;
    try
    {
        j = nlohmann::json::parse(report_json);
        for (const auto& c : j.at("contracts"))
        {
            const auto id = c.at("id").get<std::string>();
            if (c.contains("category") && c["category"].is_string())
                t.labels[id] = c["category"].get<std::string>();
            for (const auto& f : c.at("findings"))
            {
                if (f.at("verdict") != "vulnerable")
                    continue;
                const auto d = scanner::detector_from_string(f.at("detector").get<std::string>());
                if (!d)
                    continue;
                switch (*d)
                {
                case scanner::Detector::fake_eos: t.fake_eos.insert(id); break;
                case scanner::Detector::fake_receipt: t.fake_receipt.insert(id); break;
                case scanner::Detector::rollback: t.rollback.insert(id); break;
                case scanner::Detector::missing_permission:
                {
                    const auto& w = f.at("witness");
                    if (w.is_object() && !w.at("actions").empty())
                        for (const auto& a : w.at("actions"))
                            t.actions.insert({id, a.get<std::string>()});
                    else
                        t.actions.insert({id, "*"});
                    break;
                }
                }
            }
        }
    }
    catch (const nlohmann::json::exception& e)
    {
        throw Error(std::string("bad scan report: ") + e.what());
    }
    return t;
}

std::string with_attacks_json(const std::string& report_json, const AttackSection& attacks)
{
    json j;
    try
    {
        j = json::parse(report_json);
    }
    catch (const json::exception& e)
    {
        throw Error(std::string("bad scan report: ") + e.what());
    }
    j["attacks"] = attacks_json(attacks);
    return j.dump(2) + "\n";
}

std::string render_attacks_text(const AttackSection& a)
{
    std::ostringstream out;
    out << "attacks: " << a.result.flags.size() << " flag(s)\n";
    for (const auto& f : a.result.flags)
    {
        out << "  " << std::left << std::setw(26) << attacks::to_string(f.kind) << std::setw(11)
            << attacks::to_string(f.confidence) << " victim " << f.victim << " by";
        for (const auto& s : f.suspects)
            out << " " << s;
        out << "  gain " << f.gain_estimate << " EOS, " << f.tx_ids.size() << " tx\n";
    }
    if (!a.result.rollback_rates.empty())
    {
        out << "rollback win rates:\n";
        for (const auto& r : a.result.rollback_rates)
            out << "  " << r.suspect << " vs " << r.victim << ": " << r.wins << "/" << r.bets << " over "
                << r.span_hours << " h (" << r.wins_per_hour << " wins/h)\n";
    }
    return out.str();
}

}  // namespace eosscan::report
