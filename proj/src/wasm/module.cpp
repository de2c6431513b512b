#include "eosscan/wasm/module.hpp"

#include <algorithm>

#include "eosscan/error.hpp"

namespace eosscan::wasm {

std::string_view to_string(ValType t) noexcept
{
    switch (t)
    {
    case ValType::i32: return "i32";
    case ValType::i64: return "i64";
    case ValType::f32: return "f32";
    case ValType::f64: return "f64";
    case ValType::v128: return "v128";
    case ValType::funcref: return "funcref";
    case ValType::externref: return "externref";
    }
    return "?";
}

unsigned bit_width(ValType t) noexcept
{
    switch (t)
    {
    case ValType::i32: return 32;
    case ValType::i64: return 64;
    default: return 0;
    }
}

uint32_t WasmModule::imported_function_count() const noexcept
{
    return static_cast<uint32_t>(std::ranges::count_if(
        imports, [](const ImportEntry& e) { return e.kind == ExternalKind::function; }));
}

uint32_t WasmModule::imported_global_count() const noexcept
{
    return static_cast<uint32_t>(std::ranges::count_if(
        imports, [](const ImportEntry& e) { return e.kind == ExternalKind::global; }));
}

uint32_t WasmModule::function_count() const noexcept
{
    return imported_function_count() + static_cast<uint32_t>(functions.size());
}

bool WasmModule::is_imported_function(uint32_t func_index) const noexcept
{
    return func_index < imported_function_count();
}

const ImportEntry& WasmModule::imported_function(uint32_t func_index) const
{
    uint32_t n = 0;
    for (const auto& e : imports)
    {
        if (e.kind != ExternalKind::function)
            continue;
        if (n == func_index)
            return e;
        ++n;
    }
    throw Error("function " + std::to_string(func_index) + " is not imported");
}

const FuncSignature& WasmModule::function_signature(uint32_t func_index) const
{
    uint32_t type_index = 0;
    if (is_imported_function(func_index))
        type_index = imported_function(func_index).type_index;
    else
    {
        const auto local = func_index - imported_function_count();
        if (local >= functions.size())
            throw Error("function index " + std::to_string(func_index) + " out of range");
        type_index = functions[local];
    }
    if (type_index >= types.size())
        throw Error("type index " + std::to_string(type_index) + " out of range");
    return types[type_index];
}

const FunctionBody& WasmModule::body(uint32_t func_index) const
{
    if (is_imported_function(func_index))
        throw Error("function " + std::to_string(func_index) + " is imported and has no body");
    const auto local = func_index - imported_function_count();
    if (local >= code.size())
        throw Error("function index " + std::to_string(func_index) + " out of range");
    return code[local];
}

const ExportEntry* WasmModule::find_export(std::string_view name) const noexcept
{
    auto it = std::ranges::find_if(exports, [&](const ExportEntry& e) { return e.name == name; });
    return it == exports.end() ? nullptr : &*it;
}

std::string WasmModule::function_label(uint32_t func_index) const
{
    if (auto it = function_names.find(func_index); it != function_names.end())
        return it->second;
    if (is_imported_function(func_index))
        return imported_function(func_index).field;
    for (const auto& e : exports)
        if (e.kind == ExternalKind::function && e.index == func_index)
            return e.name;
    return "func" + std::to_string(func_index);
}

std::vector<GlobalType> WasmModule::global_types() const
{
    std::vector<GlobalType> out;
    for (const auto& e : imports)
        if (e.kind == ExternalKind::global)
            out.push_back(e.global);
    for (const auto& g : globals)
        out.push_back(g.type);
    return out;
}

}  // namespace eosscan::wasm
