#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "eosscan/sym/bitvec.hpp"

namespace eosscan::sym {

/// Well-known origin tags. Import results use `import_return(name)`.
namespace tags {
inline constexpr std::string_view blockchain_state = "blockchain_state";
inline constexpr std::string_view apply_arg_receiver = "apply_arg_receiver";
inline constexpr std::string_view apply_arg_code = "apply_arg_code";
inline constexpr std::string_view apply_arg_action = "apply_arg_action";
inline constexpr std::string_view entry_arg = "entry_arg";
inline constexpr std::string_view initial_memory = "initial_memory";
inline constexpr std::string_view action_data = "action_data";
std::string import_return(std::string_view import_name);
}  // namespace tags

/// Set of origin tags, held as sorted interned ids.
class Taint
{
public:
    Taint() = default;
    explicit Taint(std::string_view tag);
    Taint(std::initializer_list<std::string_view> tags);

    [[nodiscard]] bool empty() const noexcept { return ids_.empty(); }
    [[nodiscard]] bool contains(std::string_view tag) const;
    [[nodiscard]] std::set<std::string> names() const;
    [[nodiscard]] Taint unite(const Taint& other) const;

    bool operator==(const Taint&) const = default;

private:
    std::vector<uint16_t> ids_;
};

enum class Kind : uint8_t
{
    constant,
    variable,
    bool_const,
    // bitvector -> bitvector
    add,
    sub,
    mul,
    udiv,
    sdiv,
    urem,
    srem,
    band,
    bor,
    bxor,
    shl,
    lshr,
    ashr,
    rotl,
    rotr,
    concat,
    bnot,
    clz,
    ctz,
    popcnt,
    zext,
    sext,
    extract,
    ite,
    // bitvector -> bool
    eq,
    ult,
    ule,
    slt,
    sle,
    // bool -> bool
    lnot,
    land,
    lor,
};

struct Node;
/// Immutable, shareable expression handle.
using Expr = std::shared_ptr<const Node>;

struct Node
{
    Kind kind = Kind::constant;
    /// Bit width; 0 for boolean-sorted nodes.
    uint32_t width = 0;
    BitVec value;
    bool truth = false;
    std::string name;
    std::vector<Expr> args;
    /// extract: [hi, lo]; zext/sext: extension amount in `hi`.
    uint32_t hi = 0;
    uint32_t lo = 0;
    Taint taint;
    size_t hash = 0;

    [[nodiscard]] bool is_bool() const noexcept { return width == 0; }
    [[nodiscard]] bool is_const() const noexcept { return kind == Kind::constant; }
};

// Leaves
Expr constant(BitVec value);
Expr bv(uint32_t width, uint64_t value);
Expr var(std::string name, uint32_t width, Taint taint = {});
Expr boolean(bool value);

// Bitvector operators. Operand widths must agree (WidthMismatch otherwise).
Expr binary(Kind kind, Expr a, Expr b);
Expr add(Expr a, Expr b);
Expr sub(Expr a, Expr b);
Expr mul(Expr a, Expr b);
Expr bnot(Expr a);
Expr unary(Kind kind, Expr a);
Expr concat(Expr high, Expr low);
/// Concatenation of many pieces, first element most significant.
Expr concat_all(const std::vector<Expr>& high_to_low);
Expr extract(Expr a, uint32_t hi, uint32_t lo);
Expr zext(Expr a, uint32_t extra_bits);
Expr sext(Expr a, uint32_t extra_bits);
Expr ite(Expr cond, Expr then_value, Expr else_value);

// Predicates
Expr compare(Kind kind, Expr a, Expr b);
Expr eq(Expr a, Expr b);
Expr ne(Expr a, Expr b);
Expr ult(Expr a, Expr b);
Expr uge(Expr a, Expr b);
Expr lnot(Expr a);
Expr land(Expr a, Expr b);
Expr lor(Expr a, Expr b);
Expr lor_all(const std::vector<Expr>& terms);

/// Wasm truth: `v != 0` as a boolean, folding `ite(c, 1, 0)` back to `c`.
Expr is_nonzero(const Expr& v);
/// Boolean as a 0/1 bitvector of the given width.
Expr bool_to_bv(const Expr& cond, uint32_t width);

[[nodiscard]] bool equal(const Expr& a, const Expr& b);
[[nodiscard]] const Taint& taint_of(const Expr& e);
/// Names of free variables mentioned anywhere in the tree.
[[nodiscard]] std::set<std::string> variables(const Expr& e);
[[nodiscard]] bool mentions(const Expr& e, std::string_view var_name);
[[nodiscard]] std::string to_string(const Expr& e, size_t max_len = 512);

using Model = std::map<std::string, BitVec>;

/// Concrete evaluation; unbound variables evaluate to zero.
BitVec evaluate(const Expr& e, const Model& model);
bool evaluate_bool(const Expr& e, const Model& model);
/// Replace variables by name.
Expr substitute(const Expr& e, const std::map<std::string, Expr>& bindings);

struct ExprHash
{
    size_t operator()(const Expr& e) const noexcept { return e ? e->hash : 0; }
};
struct ExprEqual
{
    bool operator()(const Expr& a, const Expr& b) const { return equal(a, b); }
};

}  // namespace eosscan::sym
