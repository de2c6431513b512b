#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "eosscan/sym/expr.hpp"

namespace eosscan::sym {

/// Half-open byte range [lower, upper).
struct MemoryKey
{
    uint64_t lower = 0;
    uint64_t upper = 0;

    bool operator==(const MemoryKey&) const = default;
};

/// Sparse symbolic linear memory. Keys never overlap and never touch; a store
/// that overlaps or abuts existing keys fuses them into one.
///
/// Each key's data is held as a run of pieces (address -> expression); the key's
/// value is the little-endian concatenation of its pieces. Runs are shared
/// between forked copies and cloned on first write.
class SymbolicMemory
{
public:
    explicit SymbolicMemory(uint64_t limit = 65536) : limit_(limit) {}

    [[nodiscard]] uint64_t limit() const noexcept { return limit_; }
    void set_limit(uint64_t limit) noexcept { limit_ = limit; }

    /// Writes `data` (width 8*len) at [dest, dest+len).
    void store(uint64_t dest, uint64_t len, const Expr& data);
    void store_bytes(uint64_t dest, std::span<const uint8_t> bytes);
    /// Reads [src, src+len); unwritten bytes are `unwritten_byte(addr)`.
    [[nodiscard]] Expr load(uint64_t src, uint64_t len) const;

    [[nodiscard]] size_t key_count() const noexcept { return runs_.size(); }
    [[nodiscard]] std::vector<std::pair<MemoryKey, Expr>> entries() const;
    [[nodiscard]] std::optional<Expr> value_at(MemoryKey key) const;
    /// Checks the key-space invariants; returns a description of the first violation.
    [[nodiscard]] std::optional<std::string> audit() const;

private:
    struct Run
    {
        uint64_t upper = 0;
        std::map<uint64_t, Expr> pieces;
    };

    void check_range(uint64_t addr, uint64_t len) const;

    uint64_t limit_;
    std::map<uint64_t, std::shared_ptr<Run>> runs_;
};

/// The variable standing for a never-written byte; identical for every load of `addr`.
Expr unwritten_byte(uint64_t addr);

SymbolicMemory memory_store(SymbolicMemory sm, uint64_t dest, uint64_t len, const Expr& data);
Expr memory_load(const SymbolicMemory& sm, uint64_t src, uint64_t len);

}  // namespace eosscan::sym
