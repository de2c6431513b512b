#include "eosscan/sym/memory.hpp"

#include <algorithm>

#include "eosscan/error.hpp"

namespace eosscan::sym {

namespace {

uint64_t piece_end(const std::pair<const uint64_t, Expr>& p)
{
    return p.first + p.second->width / 8;
}

/// Splits the piece covering `addr` (if any starts before it) so a piece begins at `addr`.
void split_at(std::map<uint64_t, Expr>& pieces, uint64_t addr)
{
    auto it = pieces.upper_bound(addr);
    if (it == pieces.begin())
        return;
    --it;
    const uint64_t start = it->first;
    const uint64_t end = piece_end(*it);
    if (start == addr || end <= addr)
        return;
    const Expr whole = it->second;
    const auto cut = static_cast<uint32_t>(8 * (addr - start));
    it->second = extract(whole, cut - 1, 0);
    pieces.emplace(addr, extract(whole, whole->width - 1, cut));
}

}  // namespace

Expr unwritten_byte(uint64_t addr)
{
    return var("mem@" + std::to_string(addr), 8, Taint(tags::initial_memory));
}

void SymbolicMemory::check_range(uint64_t addr, uint64_t len) const
{
    if (addr > limit_ || len > limit_ - addr)
        throw AddressOverflow("access [" + std::to_string(addr) + ", +" + std::to_string(len) +
                              ") beyond memory bound " + std::to_string(limit_));
}

void SymbolicMemory::store(uint64_t dest, uint64_t len, const Expr& data)
{
    if (len == 0 || data->is_bool() || data->width != 8 * len)
        throw WidthMismatch("store of " + std::to_string(len) + " bytes with data width " +
                            std::to_string(data->width));
    check_range(dest, len);
    const uint64_t end = dest + len;

    // Every run overlapping or touching [dest, end) joins the new key.
    auto first = runs_.upper_bound(dest);
    if (first != runs_.begin())
    {
        auto prev = std::prev(first);
        if (prev->second->upper >= dest)
            first = prev;
    }
    auto last = first;
    while (last != runs_.end() && last->first <= end)
        ++last;

    uint64_t lower = dest;
    uint64_t upper = end;
    auto base_it = runs_.end();
    for (auto it = first; it != last; ++it)
    {
        lower = std::min(lower, it->first);
        upper = std::max(upper, it->second->upper);
        if (base_it == runs_.end() || it->second->pieces.size() > base_it->second->pieces.size())
            base_it = it;
    }

    std::shared_ptr<Run> base;
    if (base_it == runs_.end())
        base = std::make_shared<Run>();
    else if (base_it->second.use_count() == 1)
        base = base_it->second;
    else
        base = std::make_shared<Run>(*base_it->second);

    for (auto it = first; it != last; ++it)
    {
        if (it == base_it)
            continue;
        for (const auto& p : it->second->pieces)
            base->pieces.insert(p);
    }
    runs_.erase(first, last);

    split_at(base->pieces, dest);
    split_at(base->pieces, end);
    base->pieces.erase(base->pieces.lower_bound(dest), base->pieces.lower_bound(end));
    base->pieces.emplace(dest, data);
    base->upper = upper;
    runs_.emplace(lower, std::move(base));
}

void SymbolicMemory::store_bytes(uint64_t dest, std::span<const uint8_t> bytes)
{
    if (bytes.empty())
        return;
    store(dest, bytes.size(), constant(BitVec::from_bytes_le(bytes)));
}

Expr SymbolicMemory::load(uint64_t src, uint64_t len) const
{
    if (len == 0)
        throw WidthMismatch("load of zero bytes");
    check_range(src, len);
    const uint64_t end = src + len;
    std::vector<Expr> low_to_high;

    uint64_t cur = src;
    auto run = runs_.upper_bound(src);
    if (run != runs_.begin() && std::prev(run)->second->upper > src)
        --run;
    while (cur < end)
    {
        if (run == runs_.end() || cur < run->first)
        {
            const uint64_t stop = run == runs_.end() ? end : std::min(end, run->first);
            for (; cur < stop; ++cur)
                low_to_high.push_back(unwritten_byte(cur));
            continue;
        }
        const auto& pieces = run->second->pieces;
        auto p = std::prev(pieces.upper_bound(cur));
        const uint64_t stop = std::min(end, run->second->upper);
        while (cur < stop)
        {
            const uint64_t pe = piece_end(*p);
            const uint64_t take_end = std::min(stop, pe);
            const auto lo = static_cast<uint32_t>(8 * (cur - p->first));
            const auto hi = static_cast<uint32_t>(8 * (take_end - p->first)) - 1;
            low_to_high.push_back(extract(p->second, hi, lo));
            cur = take_end;
            ++p;
        }
        ++run;
    }
    std::reverse(low_to_high.begin(), low_to_high.end());
    return concat_all(low_to_high);
}

std::vector<std::pair<MemoryKey, Expr>> SymbolicMemory::entries() const
{
    std::vector<std::pair<MemoryKey, Expr>> out;
    for (const auto& [lower, run] : runs_)
    {
        std::vector<Expr> high_to_low;
        for (auto it = run->pieces.rbegin(); it != run->pieces.rend(); ++it)
            high_to_low.push_back(it->second);
        out.emplace_back(MemoryKey{lower, run->upper}, concat_all(high_to_low));
    }
    return out;
}

std::optional<Expr> SymbolicMemory::value_at(MemoryKey key) const
{
    auto it = runs_.find(key.lower);
    if (it == runs_.end() || it->second->upper != key.upper)
        return std::nullopt;
    return load(key.lower, key.upper - key.lower);
}

std::optional<std::string> SymbolicMemory::audit() const
{
    std::optional<uint64_t> prev_upper;
    for (const auto& [lower, run] : runs_)
    {
        auto where = [&] { return "key (" + std::to_string(lower) + ", " + std::to_string(run->upper) + ")"; };
        if (run->upper <= lower)
            return where() + " is empty or inverted";
        if (run->upper > limit_)
            return where() + " exceeds the memory bound";
        if (prev_upper && *prev_upper >= lower)
            return where() + (*prev_upper == lower ? " is adjacent to" : " overlaps") + " its predecessor";
        uint64_t cur = lower;
        for (const auto& p : run->pieces)
        {
            if (p.first != cur || p.second->is_bool() || p.second->width == 0 || p.second->width % 8 != 0)
                return where() + " has a malformed piece at " + std::to_string(p.first);
            cur = piece_end(p);
        }
        if (cur != run->upper)
            return where() + " value width does not match its range";
        prev_upper = run->upper;
    }
    return std::nullopt;
}

SymbolicMemory memory_store(SymbolicMemory sm, uint64_t dest, uint64_t len, const Expr& data)
{
    sm.store(dest, len, data);
    return sm;
}

Expr memory_load(const SymbolicMemory& sm, uint64_t src, uint64_t len)
{
    return sm.load(src, len);
}

}  // namespace eosscan::sym
