#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "eosscan/sym/expr.hpp"

namespace eosscan::sym {

/// Where a constraint came from: an instruction site or an import call.
struct Provenance
{
    uint32_t function = 0;
    uint32_t offset = 0;
    std::string import_tag;
};

struct Constraint
{
    Expr expr;
    Provenance provenance;
};

enum class SatResult
{
    sat,
    unsat,
    unknown,
};

const char* to_string(SatResult r);

struct SolveOutcome
{
    SatResult result = SatResult::unknown;
    /// Values for every variable mentioned in the query (only when sat and requested).
    Model model;
};

/// Bitvector solver over Z3. One instance per worker; not thread-safe.
class Solver
{
public:
    explicit Solver(std::chrono::milliseconds budget = std::chrono::seconds(10));
    ~Solver();
    Solver(const Solver&) = delete;
    Solver& operator=(const Solver&) = delete;

    [[nodiscard]] std::chrono::milliseconds budget() const noexcept { return budget_; }
    void set_budget(std::chrono::milliseconds budget) noexcept { budget_ = budget; }

    SatResult check(const std::vector<Expr>& conjuncts);
    SolveOutcome solve(const std::vector<Expr>& conjuncts, bool want_model = true);
    /// Up to `limit` distinct values `value` can take under the conjunction.
    std::vector<BitVec> enumerate(const std::vector<Expr>& conjuncts, const Expr& value, size_t limit);

    [[nodiscard]] uint64_t query_count() const noexcept { return queries_; }

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::chrono::milliseconds budget_;
    uint64_t queries_ = 0;
};

std::vector<Expr> exprs_of(const std::vector<Constraint>& constraints);

/// Decision over the conjunction with the default 10 s budget.
SatResult solve(const std::vector<Constraint>& constraints);

}  // namespace eosscan::sym
