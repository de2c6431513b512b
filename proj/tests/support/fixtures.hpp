#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <set>
#include <string>

#include "eosscan/wasm/assembler.hpp"
#include "eosscan/wasm/parser.hpp"

namespace fixtures {

using namespace eosscan::wasm;

inline FuncSignature sig(std::vector<ValType> params, std::vector<ValType> results = {})
{
    return FuncSignature{std::move(params), std::move(results)};
}

inline const FuncSignature apply_sig = sig({ValType::i64, ValType::i64, ValType::i64});

inline std::filesystem::path corpus_dir()
{
    return EOSSCAN_CORPUS_DIR;
}

inline bytes read_file(const std::filesystem::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return bytes(std::istreambuf_iterator<char>(in), {});
}

inline WasmModule load_corpus(const std::string& stem)
{
    const auto data = read_file(corpus_dir() / (stem + ".wasm"));
    return parse_module(data);
}

/// Round-trips a builder module through the binary format, as the scanner sees it.
inline WasmModule reparse(const ModuleBuilder& b)
{
    const auto data = b.encode();
    return parse_module(data);
}

/// One function `(i32)` whose body is `n` nested blocks around a br_table on
/// the argument with `n` entries (default included), each to a distinct depth.
inline WasmModule br_table_fixture(uint32_t n)
{
    CodeBuilder c;
    for (uint32_t i = 0; i < n; ++i)
        c.block();
    std::vector<uint32_t> targets;
    for (uint32_t i = 0; i + 1 < n; ++i)
        targets.push_back(i);
    c.local_get(0).br_table(targets, n - 1);
    for (uint32_t i = 0; i < n; ++i)
        c.op(Opcode::nop).end();
    ModuleBuilder b;
    b.add_function(sig({ValType::i32}), {}, c.finish());
    return reparse(b);
}

}  // namespace fixtures

namespace fixtures {

/// contract id -> detectors expected vulnerable, from corpus/expected.tsv.
inline std::map<std::string, std::set<std::string>> expected_verdicts()
{
    std::map<std::string, std::set<std::string>> out;
    std::ifstream in(corpus_dir() / "expected.tsv");
    std::string line;
    while (std::getline(in, line))
    {
        if (line.empty() || line[0] == '#')
            continue;
        const auto tab = line.find('\t');
        auto& set = out[line.substr(0, tab)];
        std::string rest = line.substr(tab + 1);
        size_t pos = 0;
        while (pos <= rest.size())
        {
            const auto comma = rest.find(',', pos);
            const auto item = rest.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
            if (!item.empty() && item != "-")
                set.insert(item);
            if (comma == std::string::npos)
                break;
            pos = comma + 1;
        }
    }
    return out;
}

}  // namespace fixtures
