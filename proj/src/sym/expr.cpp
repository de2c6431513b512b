#include "eosscan/sym/expr.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <functional>
#include <mutex>
#include <sstream>
#include <unordered_map>

#include "eosscan/error.hpp"

namespace eosscan::sym {

// ---------------------------------------------------------------------------
// Tag interning

namespace {

struct TagRegistry
{
    std::mutex mu;
    std::deque<std::string> names;
    std::unordered_map<std::string, uint16_t> ids;

    uint16_t intern(std::string_view tag)
    {
        std::lock_guard lock(mu);
        auto it = ids.find(std::string(tag));
        if (it != ids.end())
            return it->second;
        const auto id = static_cast<uint16_t>(names.size());
        names.emplace_back(tag);
        ids.emplace(names.back(), id);
        return id;
    }

    std::string name(uint16_t id)
    {
        std::lock_guard lock(mu);
        return names.at(id);
    }
};

TagRegistry& registry()
{
    static TagRegistry r;
    return r;
}

}  // namespace

std::string tags::import_return(std::string_view import_name)
{
    return "import_return(" + std::string(import_name) + ")";
}

Taint::Taint(std::string_view tag) : ids_{registry().intern(tag)} {}

Taint::Taint(std::initializer_list<std::string_view> tags)
{
    for (auto t : tags)
        ids_.push_back(registry().intern(t));
    std::ranges::sort(ids_);
    ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());
}

bool Taint::contains(std::string_view tag) const
{
    if (ids_.empty())
        return false;
    return std::ranges::binary_search(ids_, registry().intern(tag));
}

std::set<std::string> Taint::names() const
{
    std::set<std::string> out;
    for (auto id : ids_)
        out.insert(registry().name(id));
    return out;
}

Taint Taint::unite(const Taint& other) const
{
    if (other.ids_.empty() || ids_ == other.ids_)
        return *this;
    if (ids_.empty())
        return other;
    Taint out;
    std::ranges::set_union(ids_, other.ids_, std::back_inserter(out.ids_));
    return out;
}

// ---------------------------------------------------------------------------
// Node construction

namespace {

size_t mix(size_t h, size_t v)
{
    return (h ^ (v + 0x9E3779B97F4A7C15ull + (h << 6) + (h >> 2)));
}

Expr make(Kind kind, uint32_t width, std::vector<Expr> args, uint32_t hi = 0, uint32_t lo = 0)
{
    auto n = std::make_shared<Node>();
    n->kind = kind;
    n->width = width;
    n->hi = hi;
    n->lo = lo;
    size_t h = mix(static_cast<size_t>(kind) * 31 + width, mix(hi, lo));
    for (const auto& a : args)
    {
        h = mix(h, a->hash);
        n->taint = n->taint.unite(a->taint);
    }
    n->args = std::move(args);
    n->hash = h;
    return n;
}

bool is_bv_const(const Expr& e, uint64_t v)
{
    return e->kind == Kind::constant && e->width <= 64 && e->value.to_u64() == v;
}

bool is_ones(const Expr& e)
{
    return e->kind == Kind::constant && e->value == BitVec::ones(e->width);
}

void require_same_width(const Expr& a, const Expr& b, const char* what)
{
    if (a->width != b->width || a->is_bool())
        throw WidthMismatch(std::string(what) + ": operand widths " + std::to_string(a->width) + " and " +
                            std::to_string(b->width));
}

uint64_t mask_of(uint32_t width)
{
    return width >= 64 ? ~uint64_t{0} : (uint64_t{1} << width) - 1;
}

BitVec wordwise(const BitVec& a, const BitVec& b, const std::function<uint64_t(uint64_t, uint64_t)>& f)
{
    std::vector<uint64_t> out(a.words().size());
    for (size_t i = 0; i < out.size(); ++i)
        out[i] = f(a.words()[i], b.words()[i]);
    return BitVec::from_words(a.width(), std::move(out));
}

int compare_unsigned(const BitVec& a, const BitVec& b)
{
    for (size_t i = a.words().size(); i-- > 0;)
    {
        if (a.words()[i] != b.words()[i])
            return a.words()[i] < b.words()[i] ? -1 : 1;
    }
    return 0;
}

int compare_signed(const BitVec& a, const BitVec& b)
{
    const bool sa = a.bit(a.width() - 1);
    const bool sb = b.bit(b.width() - 1);
    if (sa != sb)
        return sa ? -1 : 1;
    return compare_unsigned(a, b);
}

void require_narrow(uint32_t width)
{
    if (width > 64)
        throw Error("arithmetic wider than 64 bits is not supported");
}

BitVec fold_binary(Kind kind, const BitVec& a, const BitVec& b)
{
    const uint32_t w = a.width();
    switch (kind)
    {
    case Kind::band: return wordwise(a, b, [](uint64_t x, uint64_t y) { return x & y; });
    case Kind::bor: return wordwise(a, b, [](uint64_t x, uint64_t y) { return x | y; });
    case Kind::bxor: return wordwise(a, b, [](uint64_t x, uint64_t y) { return x ^ y; });
    case Kind::concat: return BitVec::concat(a, b);
    default: break;
    }
    require_narrow(w);
    const uint64_t x = a.to_u64();
    const uint64_t y = b.to_u64();
    const int64_t sx = a.to_i64();
    const int64_t sy = b.to_i64();
    const uint64_t m = mask_of(w);
    const int64_t smin = w == 64 ? INT64_MIN : -(int64_t{1} << (w - 1));
    switch (kind)
    {
    case Kind::add: return BitVec(w, x + y);
    case Kind::sub: return BitVec(w, x - y);
    case Kind::mul: return BitVec(w, x * y);
    case Kind::udiv: return y == 0 ? BitVec(w, m) : BitVec(w, x / y);
    case Kind::urem: return y == 0 ? a : BitVec(w, x % y);
    case Kind::sdiv:
        if (sy == 0)
            return BitVec(w, sx < 0 ? 1 : m);
        if (sx == smin && sy == -1)
            return BitVec(w, static_cast<uint64_t>(smin));
        return BitVec(w, static_cast<uint64_t>(sx / sy));
    case Kind::srem:
        if (sy == 0)
            return a;
        if (sy == -1)
            return BitVec(w, 0);
        return BitVec(w, static_cast<uint64_t>(sx % sy));
    case Kind::shl: return y >= w ? BitVec(w, 0) : BitVec(w, x << y);
    case Kind::lshr: return y >= w ? BitVec(w, 0) : BitVec(w, x >> y);
    case Kind::ashr:
        if (y >= w)
            return BitVec(w, sx < 0 ? m : 0);
        return BitVec(w, static_cast<uint64_t>(sx >> y));
    case Kind::rotl: {
        const uint64_t r = y % w;
        return r == 0 ? a : BitVec(w, (x << r) | (x >> (w - r)));
    }
    case Kind::rotr: {
        const uint64_t r = y % w;
        return r == 0 ? a : BitVec(w, (x >> r) | (x << (w - r)));
    }
    default: throw Error("not a binary bitvector operator");
    }
}

BitVec fold_unary(Kind kind, const BitVec& a)
{
    const uint32_t w = a.width();
    if (kind == Kind::bnot)
    {
        std::vector<uint64_t> out(a.words());
        for (auto& v : out)
            v = ~v;
        return BitVec::from_words(w, std::move(out));
    }
    require_narrow(w);
    const uint64_t x = a.to_u64();
    switch (kind)
    {
    case Kind::clz: return BitVec(w, x == 0 ? w : static_cast<uint64_t>(std::countl_zero(x) - (64 - w)));
    case Kind::ctz: return BitVec(w, x == 0 ? w : static_cast<uint64_t>(std::countr_zero(x)));
    case Kind::popcnt: return BitVec(w, static_cast<uint64_t>(std::popcount(x)));
    default: throw Error("not a unary bitvector operator");
    }
}

bool fold_compare(Kind kind, const BitVec& a, const BitVec& b)
{
    switch (kind)
    {
    case Kind::eq: return a == b;
    case Kind::ult: return compare_unsigned(a, b) < 0;
    case Kind::ule: return compare_unsigned(a, b) <= 0;
    case Kind::slt: return compare_signed(a, b) < 0;
    case Kind::sle: return compare_signed(a, b) <= 0;
    default: throw Error("not a comparison");
    }
}

BitVec fold_zext(const BitVec& a, uint32_t extra)
{
    return BitVec::concat(BitVec(extra, 0), a);
}

BitVec fold_sext(const BitVec& a, uint32_t extra)
{
    const bool sign = a.width() > 0 && a.bit(a.width() - 1);
    return BitVec::concat(sign ? BitVec::ones(extra) : BitVec(extra, 0), a);
}

/// `ite(c, k1, k2)` with constant arms; lets folds distribute over it.
bool const_ite(const Expr& e)
{
    return e->kind == Kind::ite && e->args[1]->is_const() && e->args[2]->is_const();
}

}  // namespace

Expr constant(BitVec value)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::constant;
    n->width = value.width();
    n->hash = mix(value.hash(), 0xC0);
    n->value = std::move(value);
    return n;
}

Expr bv(uint32_t width, uint64_t value)
{
    return constant(BitVec(width, value));
}

Expr var(std::string name, uint32_t width, Taint taint)
{
    auto n = std::make_shared<Node>();
    n->kind = Kind::variable;
    n->width = width;
    n->hash = mix(std::hash<std::string>{}(name), width);
    n->name = std::move(name);
    n->taint = std::move(taint);
    return n;
}

Expr boolean(bool value)
{
    static const Expr t = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::bool_const;
        n->truth = true;
        n->hash = 0xB001;
        return Expr(n);
    }();
    static const Expr f = [] {
        auto n = std::make_shared<Node>();
        n->kind = Kind::bool_const;
        n->truth = false;
        n->hash = 0xB000;
        return Expr(n);
    }();
    return value ? t : f;
}

Expr binary(Kind kind, Expr a, Expr b)
{
    if (kind == Kind::concat)
        return concat(std::move(a), std::move(b));
    require_same_width(a, b, "binary operator");
    const uint32_t w = a->width;
    if (a->is_const() && b->is_const())
        return constant(fold_binary(kind, a->value, b->value));
    switch (kind)
    {
    case Kind::add:
        if (is_bv_const(b, 0))
            return a;
        if (is_bv_const(a, 0))
            return b;
        break;
    case Kind::sub:
        if (is_bv_const(b, 0))
            return a;
        if (equal(a, b))
            return bv(w, 0);
        break;
    case Kind::mul:
        if (is_bv_const(a, 0) || is_bv_const(b, 0))
            return bv(w, 0);
        if (is_bv_const(b, 1))
            return a;
        if (is_bv_const(a, 1))
            return b;
        break;
    case Kind::band:
        if (is_bv_const(a, 0) || is_bv_const(b, 0))
            return bv(w, 0);
        if (is_ones(b) || equal(a, b))
            return a;
        if (is_ones(a))
            return b;
        break;
    case Kind::bor:
        if (is_bv_const(b, 0) || equal(a, b))
            return a;
        if (is_bv_const(a, 0))
            return b;
        break;
    case Kind::bxor:
        if (is_bv_const(b, 0))
            return a;
        if (is_bv_const(a, 0))
            return b;
        if (equal(a, b))
            return bv(w, 0);
        break;
    case Kind::shl:
    case Kind::lshr:
    case Kind::ashr:
    case Kind::rotl:
    case Kind::rotr:
        if (is_bv_const(b, 0))
            return a;
        break;
    case Kind::udiv:
        if (is_bv_const(b, 1))
            return a;
        // (x / c1) / c2 == x / (c1 * c2); zero once the product passes the width.
        if (w <= 64 && b->is_const() && !b->value.is_zero() && a->kind == Kind::udiv && a->args[1]->is_const() &&
            !a->args[1]->value.is_zero())
        {
            const unsigned __int128 prod =
                static_cast<unsigned __int128>(a->args[1]->value.to_u64()) * b->value.to_u64();
            if (prod >> w)
                return bv(w, 0);
            return binary(Kind::udiv, a->args[0], bv(w, static_cast<uint64_t>(prod)));
        }
        break;
    case Kind::sdiv:
        if (is_bv_const(b, 1))
            return a;
        break;
    default: break;
    }
    return make(kind, w, {std::move(a), std::move(b)});
}

Expr add(Expr a, Expr b) { return binary(Kind::add, std::move(a), std::move(b)); }
Expr sub(Expr a, Expr b) { return binary(Kind::sub, std::move(a), std::move(b)); }
Expr mul(Expr a, Expr b) { return binary(Kind::mul, std::move(a), std::move(b)); }
Expr bnot(Expr a) { return unary(Kind::bnot, std::move(a)); }

Expr unary(Kind kind, Expr a)
{
    if (a->is_bool())
        throw WidthMismatch("bitvector operator applied to boolean");
    if (a->is_const())
        return constant(fold_unary(kind, a->value));
    if (kind == Kind::bnot && a->kind == Kind::bnot)
        return a->args[0];
    const auto w = a->width;
    return make(kind, w, {std::move(a)});
}

Expr concat(Expr high, Expr low)
{
    if (high->is_bool() || low->is_bool())
        throw WidthMismatch("concat of boolean");
    if (high->is_const() && low->is_const())
        return constant(BitVec::concat(high->value, low->value));
    // Adjacent slices of the same expression fuse back together.
    if (high->kind == Kind::extract && low->kind == Kind::extract && high->lo == low->hi + 1 &&
        equal(high->args[0], low->args[0]))
        return extract(high->args[0], high->hi, low->lo);
    // Left-leaning normalisation lets slice fusion see through nested concats:
    // (a ++ b) ++ c stays, a ++ (b ++ c) becomes (a ++ b) ++ c.
    if (low->kind == Kind::concat)
    {
        auto merged = concat(high, low->args[0]);
        if (merged->kind != Kind::concat)
            return concat(merged, low->args[1]);
    }
    if (high->kind == Kind::concat)
    {
        const auto& hl = high->args[1];
        if ((hl->is_const() && low->is_const()) ||
            (hl->kind == Kind::extract && low->kind == Kind::extract && hl->lo == low->hi + 1 &&
             equal(hl->args[0], low->args[0])))
            return concat(high->args[0], concat(hl, low));
    }
    const auto w = high->width + low->width;
    return make(Kind::concat, w, {std::move(high), std::move(low)});
}

Expr concat_all(const std::vector<Expr>& high_to_low)
{
    if (high_to_low.empty())
        throw WidthMismatch("concat of nothing");
    Expr acc = high_to_low.front();
    for (size_t i = 1; i < high_to_low.size(); ++i)
        acc = concat(acc, high_to_low[i]);
    return acc;
}

Expr extract(Expr a, uint32_t hi, uint32_t lo)
{
    if (a->is_bool() || hi < lo || hi >= a->width)
        throw WidthMismatch("extract [" + std::to_string(hi) + ":" + std::to_string(lo) + "] of width " +
                            std::to_string(a->width));
    if (lo == 0 && hi + 1 == a->width)
        return a;
    if (a->is_const())
        return constant(a->value.extract(hi, lo));
    switch (a->kind)
    {
    case Kind::extract: return extract(a->args[0], hi + a->lo, lo + a->lo);
    case Kind::concat: {
        const auto& high = a->args[0];
        const auto& low = a->args[1];
        if (hi < low->width)
            return extract(low, hi, lo);
        if (lo >= low->width)
            return extract(high, hi - low->width, lo - low->width);
        return concat(extract(high, hi - low->width, 0), extract(low, low->width - 1, lo));
    }
    case Kind::zext:
    case Kind::sext: {
        const auto& inner = a->args[0];
        if (hi < inner->width)
            return extract(inner, hi, lo);
        if (a->kind == Kind::zext && lo >= inner->width)
            return bv(hi - lo + 1, 0);
        break;
    }
    case Kind::ite:
        if (const_ite(a))
            return ite(a->args[0], extract(a->args[1], hi, lo), extract(a->args[2], hi, lo));
        break;
    default: break;
    }
    return make(Kind::extract, hi - lo + 1, {std::move(a)}, hi, lo);
}

Expr zext(Expr a, uint32_t extra)
{
    if (a->is_bool())
        throw WidthMismatch("zext of boolean");
    if (extra == 0)
        return a;
    if (a->is_const())
        return constant(fold_zext(a->value, extra));
    if (const_ite(a))
        return ite(a->args[0], zext(a->args[1], extra), zext(a->args[2], extra));
    const auto w = a->width + extra;
    return make(Kind::zext, w, {std::move(a)}, extra, 0);
}

Expr sext(Expr a, uint32_t extra)
{
    if (a->is_bool())
        throw WidthMismatch("sext of boolean");
    if (extra == 0)
        return a;
    if (a->is_const())
        return constant(fold_sext(a->value, extra));
    if (const_ite(a))
        return ite(a->args[0], sext(a->args[1], extra), sext(a->args[2], extra));
    const auto w = a->width + extra;
    return make(Kind::sext, w, {std::move(a)}, extra, 0);
}

Expr ite(Expr cond, Expr then_value, Expr else_value)
{
    if (!cond->is_bool())
        throw WidthMismatch("ite condition must be boolean");
    require_same_width(then_value, else_value, "ite");
    if (cond->kind == Kind::bool_const)
        return cond->truth ? then_value : else_value;
    if (equal(then_value, else_value))
        return then_value;
    if (cond->kind == Kind::lnot)
        return ite(cond->args[0], std::move(else_value), std::move(then_value));
    const auto w = then_value->width;
    return make(Kind::ite, w, {std::move(cond), std::move(then_value), std::move(else_value)});
}

Expr compare(Kind kind, Expr a, Expr b)
{
    require_same_width(a, b, "comparison");
    if (a->is_const() && b->is_const())
        return boolean(fold_compare(kind, a->value, b->value));
    if (kind == Kind::eq)
    {
        if (equal(a, b))
            return boolean(true);
        if (a->is_const())
            std::swap(a, b);
        // x / c == 0  iff  x < c
        if (is_bv_const(b, 0) && a->kind == Kind::udiv && a->args[1]->is_const() && !a->args[1]->value.is_zero())
            return compare(Kind::ult, a->args[0], a->args[1]);
        if (b->is_const() && const_ite(a))
        {
            const bool t = a->args[1]->value == b->value;
            const bool f = a->args[2]->value == b->value;
            if (t && f)
                return boolean(true);
            if (t)
                return a->args[0];
            if (f)
                return lnot(a->args[0]);
            return boolean(false);
        }
        // ite(c, k1, e) == k  and  ite(c, e, k1) == k  with one constant arm.
        if (b->is_const() && a->kind == Kind::ite && a->args[1]->is_const() != a->args[2]->is_const())
        {
            const bool then_const = a->args[1]->is_const();
            const Expr& c = a->args[0];
            const Expr& k1 = then_const ? a->args[1] : a->args[2];
            const Expr& other = then_const ? a->args[2] : a->args[1];
            const Expr hit = then_const ? c : lnot(c);
            if (k1->value == b->value)
                return lor(hit, eq(other, b));
            return land(lnot(hit), eq(other, b));
        }
    }
    else if (equal(a, b))
        return boolean(kind == Kind::ule || kind == Kind::sle);
    return make(kind, 0, {std::move(a), std::move(b)});
}

Expr eq(Expr a, Expr b) { return compare(Kind::eq, std::move(a), std::move(b)); }
Expr ne(Expr a, Expr b) { return lnot(eq(std::move(a), std::move(b))); }
Expr ult(Expr a, Expr b) { return compare(Kind::ult, std::move(a), std::move(b)); }
Expr uge(Expr a, Expr b) { return lnot(ult(std::move(a), std::move(b))); }

Expr lnot(Expr a)
{
    if (!a->is_bool())
        throw WidthMismatch("logical not of bitvector");
    if (a->kind == Kind::bool_const)
        return boolean(!a->truth);
    if (a->kind == Kind::lnot)
        return a->args[0];
    return make(Kind::lnot, 0, {std::move(a)});
}

Expr land(Expr a, Expr b)
{
    if (!a->is_bool() || !b->is_bool())
        throw WidthMismatch("logical and of bitvector");
    if (a->kind == Kind::bool_const)
        return a->truth ? b : a;
    if (b->kind == Kind::bool_const)
        return b->truth ? a : b;
    if (equal(a, b))
        return a;
    return make(Kind::land, 0, {std::move(a), std::move(b)});
}

Expr lor(Expr a, Expr b)
{
    if (!a->is_bool() || !b->is_bool())
        throw WidthMismatch("logical or of bitvector");
    if (a->kind == Kind::bool_const)
        return a->truth ? a : b;
    if (b->kind == Kind::bool_const)
        return b->truth ? b : a;
    if (equal(a, b))
        return a;
    return make(Kind::lor, 0, {std::move(a), std::move(b)});
}

Expr lor_all(const std::vector<Expr>& terms)
{
    Expr acc = boolean(false);
    for (const auto& t : terms)
        acc = lor(acc, t);
    return acc;
}

Expr is_nonzero(const Expr& v)
{
    return lnot(eq(v, bv(v->width, 0)));
}

Expr bool_to_bv(const Expr& cond, uint32_t width)
{
    return ite(cond, bv(width, 1), bv(width, 0));
}

// ---------------------------------------------------------------------------
// Queries

bool equal(const Expr& a, const Expr& b)
{
    if (a == b)
        return true;
    if (!a || !b || a->hash != b->hash || a->kind != b->kind || a->width != b->width || a->hi != b->hi ||
        a->lo != b->lo || a->args.size() != b->args.size())
        return false;
    switch (a->kind)
    {
    case Kind::constant: return a->value == b->value;
    case Kind::variable: return a->name == b->name;
    case Kind::bool_const: return a->truth == b->truth;
    default: break;
    }
    for (size_t i = 0; i < a->args.size(); ++i)
        if (!equal(a->args[i], b->args[i]))
            return false;
    return true;
}

const Taint& taint_of(const Expr& e)
{
    return e->taint;
}

namespace {

template <typename F>
void visit_unique(const Expr& root, F&& f)
{
    std::vector<const Node*> stack{root.get()};
    std::set<const Node*> seen;
    while (!stack.empty())
    {
        const Node* n = stack.back();
        stack.pop_back();
        if (!seen.insert(n).second)
            continue;
        f(*n);
        for (const auto& a : n->args)
            stack.push_back(a.get());
    }
}

const char* op_name(Kind k)
{
    switch (k)
    {
    case Kind::add: return "bvadd";
    case Kind::sub: return "bvsub";
    case Kind::mul: return "bvmul";
    case Kind::udiv: return "bvudiv";
    case Kind::sdiv: return "bvsdiv";
    case Kind::urem: return "bvurem";
    case Kind::srem: return "bvsrem";
    case Kind::band: return "bvand";
    case Kind::bor: return "bvor";
    case Kind::bxor: return "bvxor";
    case Kind::shl: return "bvshl";
    case Kind::lshr: return "bvlshr";
    case Kind::ashr: return "bvashr";
    case Kind::rotl: return "rotl";
    case Kind::rotr: return "rotr";
    case Kind::concat: return "concat";
    case Kind::bnot: return "bvnot";
    case Kind::clz: return "clz";
    case Kind::ctz: return "ctz";
    case Kind::popcnt: return "popcnt";
    case Kind::zext: return "zext";
    case Kind::sext: return "sext";
    case Kind::extract: return "extract";
    case Kind::ite: return "ite";
    case Kind::eq: return "=";
    case Kind::ult: return "bvult";
    case Kind::ule: return "bvule";
    case Kind::slt: return "bvslt";
    case Kind::sle: return "bvsle";
    case Kind::lnot: return "not";
    case Kind::land: return "and";
    case Kind::lor: return "or";
    default: return "?";
    }
}

void print(std::ostringstream& os, const Expr& e, size_t max_len)
{
    if (static_cast<size_t>(os.tellp()) > max_len)
        return;
    switch (e->kind)
    {
    case Kind::constant:
        if (e->width <= 64)
            os << e->value.to_hex();
        else
            os << "<" << e->width << "-bit constant>";
        return;
    case Kind::variable: os << e->name; return;
    case Kind::bool_const: os << (e->truth ? "true" : "false"); return;
    default: break;
    }
    os << "(" << op_name(e->kind);
    if (e->kind == Kind::extract)
        os << " " << e->hi << " " << e->lo;
    if (e->kind == Kind::zext || e->kind == Kind::sext)
        os << " " << e->hi;
    for (const auto& a : e->args)
    {
        os << " ";
        print(os, a, max_len);
    }
    os << ")";
}

}  // namespace

std::set<std::string> variables(const Expr& e)
{
    std::set<std::string> out;
    visit_unique(e, [&](const Node& n) {
        if (n.kind == Kind::variable)
            out.insert(n.name);
    });
    return out;
}

bool mentions(const Expr& e, std::string_view var_name)
{
    bool found = false;
    visit_unique(e, [&](const Node& n) {
        if (n.kind == Kind::variable && n.name == var_name)
            found = true;
    });
    return found;
}

std::string to_string(const Expr& e, size_t max_len)
{
    std::ostringstream os;
    print(os, e, max_len);
    auto s = os.str();
    if (s.size() > max_len)
        s = s.substr(0, max_len) + "...";
    return s;
}

// ---------------------------------------------------------------------------
// Evaluation and substitution

namespace {

struct Evaluator
{
    const Model& model;
    std::unordered_map<const Node*, BitVec> bv_cache;
    std::unordered_map<const Node*, bool> bool_cache;

    BitVec value(const Expr& e)
    {
        if (auto it = bv_cache.find(e.get()); it != bv_cache.end())
            return it->second;
        BitVec out;
        switch (e->kind)
        {
        case Kind::constant: out = e->value; break;
        case Kind::variable: {
            auto it = model.find(e->name);
            out = it == model.end() ? BitVec(e->width, 0) : it->second;
            if (out.width() != e->width)
                out = out.width() > e->width ? out.extract(e->width - 1, 0) : fold_zext(out, e->width - out.width());
            break;
        }
        case Kind::concat: out = BitVec::concat(value(e->args[0]), value(e->args[1])); break;
        case Kind::extract: out = value(e->args[0]).extract(e->hi, e->lo); break;
        case Kind::zext: out = fold_zext(value(e->args[0]), e->hi); break;
        case Kind::sext: out = fold_sext(value(e->args[0]), e->hi); break;
        case Kind::ite: out = truth(e->args[0]) ? value(e->args[1]) : value(e->args[2]); break;
        case Kind::bnot:
        case Kind::clz:
        case Kind::ctz:
        case Kind::popcnt: out = fold_unary(e->kind, value(e->args[0])); break;
        default:
            if (e->is_bool())
                throw Error("boolean expression evaluated as bitvector");
            out = fold_binary(e->kind, value(e->args[0]), value(e->args[1]));
            break;
        }
        bv_cache.emplace(e.get(), out);
        return out;
    }

    bool truth(const Expr& e)
    {
        if (auto it = bool_cache.find(e.get()); it != bool_cache.end())
            return it->second;
        bool out = false;
        switch (e->kind)
        {
        case Kind::bool_const: out = e->truth; break;
        case Kind::lnot: out = !truth(e->args[0]); break;
        case Kind::land: out = truth(e->args[0]) && truth(e->args[1]); break;
        case Kind::lor: out = truth(e->args[0]) || truth(e->args[1]); break;
        case Kind::eq:
        case Kind::ult:
        case Kind::ule:
        case Kind::slt:
        case Kind::sle: out = fold_compare(e->kind, value(e->args[0]), value(e->args[1])); break;
        default: throw Error("bitvector expression evaluated as boolean");
        }
        bool_cache.emplace(e.get(), out);
        return out;
    }
};

Expr rebuild(const Expr& e, std::vector<Expr> args)
{
    switch (e->kind)
    {
    case Kind::concat: return concat(args[0], args[1]);
    case Kind::extract: return extract(args[0], e->hi, e->lo);
    case Kind::zext: return zext(args[0], e->hi);
    case Kind::sext: return sext(args[0], e->hi);
    case Kind::ite: return ite(args[0], args[1], args[2]);
    case Kind::bnot:
    case Kind::clz:
    case Kind::ctz:
    case Kind::popcnt: return unary(e->kind, args[0]);
    case Kind::eq:
    case Kind::ult:
    case Kind::ule:
    case Kind::slt:
    case Kind::sle: return compare(e->kind, args[0], args[1]);
    case Kind::lnot: return lnot(args[0]);
    case Kind::land: return land(args[0], args[1]);
    case Kind::lor: return lor(args[0], args[1]);
    default: return binary(e->kind, args[0], args[1]);
    }
}

}  // namespace

BitVec evaluate(const Expr& e, const Model& model)
{
    Evaluator ev{model, {}, {}};
    return ev.value(e);
}

bool evaluate_bool(const Expr& e, const Model& model)
{
    Evaluator ev{model, {}, {}};
    return ev.truth(e);
}

Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings)
{
    std::unordered_map<const Node*, Expr> memo;
    std::function<Expr(const Expr&)> go = [&](const Expr& n) -> Expr {
        if (auto it = memo.find(n.get()); it != memo.end())
            return it->second;
        Expr out = n;
        if (n->kind == Kind::variable)
        {
            if (auto b = bindings.find(n->name); b != bindings.end())
            {
                if (b->second->width != n->width)
                    throw WidthMismatch("substitution for " + n->name + " has the wrong width");
                out = b->second;
            }
        }
        else if (!n->args.empty())
        {
            std::vector<Expr> args;
            bool changed = false;
            for (const auto& a : n->args)
            {
                args.push_back(go(a));
                changed = changed || args.back() != a;
            }
            if (changed)
                out = rebuild(n, std::move(args));
        }
        memo.emplace(n.get(), out);
        return out;
    };
    return go(e);
}

}  // namespace eosscan::sym
