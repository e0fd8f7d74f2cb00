#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>

#include "policymc/errors.hpp"

namespace policymc {

enum class ExprOp {
    IntLit, Var,
    Neg, Not,
    Add, Sub, Mul, Mod, Min, Max,
    Eq, Ne, Lt, Le, Gt, Ge,
    And, Or,
};

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

/// Immutable expression node. Variables carry both the declared name (for
/// printing) and an index into the model's variable table (for evaluation).
struct Expr {
    ExprOp op;
    std::int64_t value = 0; // IntLit
    int var = -1;           // Var
    std::string var_name;   // Var
    ExprPtr lhs, rhs;
};

ExprPtr make_int(std::int64_t v);
ExprPtr make_var(int index, std::string name);
ExprPtr make_unary(ExprOp op, ExprPtr arg);
ExprPtr make_binary(ExprOp op, ExprPtr lhs, ExprPtr rhs);

/// Evaluates over a valuation of all model variables. Booleans are 0/1.
/// 64-bit signed arithmetic; overflow is a model error.
std::int64_t eval_expr(const Expr& e, std::span<const std::int64_t> values);

/// Canonical text form; reparsing the output yields a structurally
/// identical tree.
std::string print_expr(const Expr& e);

bool expr_equal(const Expr& a, const Expr& b);

} // namespace policymc
