#include "eosscan/sym/solver.hpp"

#include <unordered_map>

#include <z3++.h>

#include "eosscan/error.hpp"

namespace eosscan::sym {

const char* to_string(SatResult r)
{
    switch (r)
    {
    case SatResult::sat: return "sat";
    case SatResult::unsat: return "unsat";
    default: return "unknown";
    }
}

struct Solver::Impl
{
    z3::context ctx;
    std::unordered_map<const Node*, std::pair<Expr, z3::expr>> cache;
    std::map<std::string, std::pair<uint32_t, z3::expr>> vars;

    z3::expr translate(const Expr& e)
    {
        if (auto it = cache.find(e.get()); it != cache.end())
            return it->second.second;
        z3::expr out = build(e);
        if (cache.size() > 200000)
            cache.clear();
        cache.emplace(e.get(), std::make_pair(e, out));
        return out;
    }

    z3::expr numeral(const BitVec& v)
    {
        if (v.width() <= 64)
            return ctx.bv_val(static_cast<uint64_t>(v.to_u64()), v.width());
        z3::expr acc = ctx.bv_val(static_cast<uint64_t>(v.words().back()), v.width() - 64 * (v.words().size() - 1));
        for (size_t i = v.words().size() - 1; i-- > 0;)
            acc = z3::concat(acc, ctx.bv_val(static_cast<uint64_t>(v.words()[i]), 64));
        return acc;
    }

    z3::expr count_bits(const z3::expr& x, uint32_t w)
    {
        z3::expr sum = ctx.bv_val(0, w);
        for (uint32_t i = 0; i < w; ++i)
            sum = sum + z3::zext(x.extract(i, i), w - 1);
        return sum;
    }

    z3::expr leading_zeros(const z3::expr& x, uint32_t w)
    {
        z3::expr r = ctx.bv_val(w, w);
        for (uint32_t i = 0; i < w; ++i)
            r = z3::ite(x.extract(i, i) == ctx.bv_val(1, 1), ctx.bv_val(w - 1 - i, w), r);
        return r;
    }

    z3::expr trailing_zeros(const z3::expr& x, uint32_t w)
    {
        z3::expr r = ctx.bv_val(w, w);
        for (uint32_t i = w; i-- > 0;)
            r = z3::ite(x.extract(i, i) == ctx.bv_val(1, 1), ctx.bv_val(i, w), r);
        return r;
    }

    z3::expr rotate(const z3::expr& x, const z3::expr& n, uint32_t w, bool left)
    {
        const z3::expr amount = z3::urem(n, ctx.bv_val(w, w));
        const z3::expr back = ctx.bv_val(w, w) - amount;
        if (left)
            return z3::shl(x, amount) | z3::lshr(x, back);
        return z3::lshr(x, amount) | z3::shl(x, back);
    }

    z3::expr build(const Expr& e)
    {
        const uint32_t w = e->width;
        auto arg = [&](size_t i) { return translate(e->args[i]); };
        switch (e->kind)
        {
        case Kind::constant: return numeral(e->value);
        case Kind::bool_const: return ctx.bool_val(e->truth);
        case Kind::variable: {
            auto it = vars.find(e->name);
            if (it != vars.end())
            {
                if (it->second.first != w)
                    throw WidthMismatch("variable " + e->name + " used at two widths");
                return it->second.second;
            }
            z3::expr v = ctx.bv_const(e->name.c_str(), w);
            vars.emplace(e->name, std::make_pair(w, v));
            return v;
        }
        case Kind::add: return arg(0) + arg(1);
        case Kind::sub: return arg(0) - arg(1);
        case Kind::mul: return arg(0) * arg(1);
        case Kind::udiv: return z3::udiv(arg(0), arg(1));
        case Kind::sdiv: return arg(0) / arg(1);
        case Kind::urem: return z3::urem(arg(0), arg(1));
        case Kind::srem: return z3::srem(arg(0), arg(1));
        case Kind::band: return arg(0) & arg(1);
        case Kind::bor: return arg(0) | arg(1);
        case Kind::bxor: return arg(0) ^ arg(1);
        case Kind::shl: return z3::shl(arg(0), arg(1));
        case Kind::lshr: return z3::lshr(arg(0), arg(1));
        case Kind::ashr: return z3::ashr(arg(0), arg(1));
        case Kind::rotl: return rotate(arg(0), arg(1), w, true);
        case Kind::rotr: return rotate(arg(0), arg(1), w, false);
        case Kind::concat: return z3::concat(arg(0), arg(1));
        case Kind::bnot: return ~arg(0);
        case Kind::clz: return leading_zeros(arg(0), w);
        case Kind::ctz: return trailing_zeros(arg(0), w);
        case Kind::popcnt: return count_bits(arg(0), w);
        case Kind::zext: return z3::zext(arg(0), e->hi);
        case Kind::sext: return z3::sext(arg(0), e->hi);
        case Kind::extract: return arg(0).extract(e->hi, e->lo);
        case Kind::ite: return z3::ite(arg(0), arg(1), arg(2));
        case Kind::eq: return arg(0) == arg(1);
        case Kind::ult: return z3::ult(arg(0), arg(1));
        case Kind::ule: return z3::ule(arg(0), arg(1));
        case Kind::slt: return arg(0) < arg(1);
        case Kind::sle: return arg(0) <= arg(1);
        case Kind::lnot: return !arg(0);
        case Kind::land: return arg(0) && arg(1);
        case Kind::lor: return arg(0) || arg(1);
        }
        throw Error("untranslatable expression");
    }

    BitVec read_value(const z3::model& m, const z3::expr& v, uint32_t width)
    {
        const z3::expr val = m.eval(v, true);
        if (width <= 64)
            return BitVec(width, val.get_numeral_uint64());
        std::vector<uint64_t> words((width + 63) / 64);
        for (uint32_t i = 0; i < words.size(); ++i)
        {
            const uint32_t lo = 64 * i;
            const uint32_t hi = std::min(width, lo + 64) - 1;
            words[i] = val.extract(hi, lo).simplify().get_numeral_uint64();
        }
        return BitVec::from_words(width, std::move(words));
    }
};

Solver::Solver(std::chrono::milliseconds budget) : impl_(std::make_unique<Impl>()), budget_(budget) {}

Solver::~Solver() = default;

SatResult Solver::check(const std::vector<Expr>& conjuncts)
{
    return solve(conjuncts, false).result;
}

SolveOutcome Solver::solve(const std::vector<Expr>& conjuncts, bool want_model)
{
    SolveOutcome out;
    // Cheap decisions before touching Z3.
    std::vector<Expr> live;
    for (const auto& c : conjuncts)
    {
        if (!c->is_bool())
            throw WidthMismatch("constraint must be boolean");
        if (c->kind == Kind::bool_const)
        {
            if (!c->truth)
            {
                out.result = SatResult::unsat;
                return out;
            }
            continue;
        }
        live.push_back(c);
    }
    if (live.empty() && !want_model)
    {
        out.result = SatResult::sat;
        return out;
    }

    ++queries_;
    try
    {
        z3::solver s(impl_->ctx, "QF_BV");
        z3::params p(impl_->ctx);
        p.set("timeout", static_cast<unsigned>(std::max<int64_t>(1, budget_.count())));
        s.set(p);
        for (const auto& c : live)
            s.add(impl_->translate(c));
        switch (s.check())
        {
        case z3::sat: out.result = SatResult::sat; break;
        case z3::unsat: out.result = SatResult::unsat; break;
        default: out.result = SatResult::unknown; break;
        }
        if (out.result == SatResult::sat && want_model)
        {
            const z3::model m = s.get_model();
            std::set<std::string> names;
            for (const auto& c : live)
                for (auto& n : variables(c))
                    names.insert(n);
            for (const auto& n : names)
            {
                const auto& [width, v] = impl_->vars.at(n);
                out.model.emplace(n, impl_->read_value(m, v, width));
            }
        }
    }
    catch (const z3::exception&)
    {
        out.result = SatResult::unknown;
        out.model.clear();
    }
    return out;
}

std::vector<BitVec> Solver::enumerate(const std::vector<Expr>& conjuncts, const Expr& value, size_t limit)
{
    std::vector<BitVec> found;
    if (value->is_const())
    {
        found.push_back(value->value);
        return found;
    }
    std::vector<Expr> query = conjuncts;
    const Expr probe = var("__probe", value->width);
    query.push_back(eq(probe, value));
    while (found.size() < limit)
    {
        auto r = solve(query, true);
        if (r.result != SatResult::sat)
            break;
        const BitVec v = r.model.count("__probe") ? r.model.at("__probe") : evaluate(value, r.model);
        found.push_back(v);
        query.push_back(ne(probe, constant(v)));
    }
    return found;
}

std::vector<Expr> exprs_of(const std::vector<Constraint>& constraints)
{
    std::vector<Expr> out;
    out.reserve(constraints.size());
    for (const auto& c : constraints)
        out.push_back(c.expr);
    return out;
}

SatResult solve(const std::vector<Constraint>& constraints)
{
    thread_local Solver solver;
    return solver.check(exprs_of(constraints));
}

}  // namespace eosscan::sym
