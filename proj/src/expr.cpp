#include "policymc/expr.hpp"

namespace policymc {

ExprPtr make_int(std::int64_t v) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::IntLit;
    e->value = v;
    return e;
}

ExprPtr make_var(int index, std::string name) {
    auto e = std::make_shared<Expr>();
    e->op = ExprOp::Var;
    e->var = index;
    e->var_name = std::move(name);
    return e;
}

ExprPtr make_unary(ExprOp op, ExprPtr arg) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->lhs = std::move(arg);
    return e;
}

ExprPtr make_binary(ExprOp op, ExprPtr lhs, ExprPtr rhs) {
    auto e = std::make_shared<Expr>();
    e->op = op;
    e->lhs = std::move(lhs);
    e->rhs = std::move(rhs);
    return e;
}

std::int64_t eval_expr(const Expr& e, std::span<const std::int64_t> values) {
    switch (e.op) {
    case ExprOp::IntLit: return e.value;
    case ExprOp::Var: return values[static_cast<std::size_t>(e.var)];
    case ExprOp::Neg: {
        std::int64_t v = eval_expr(*e.lhs, values);
        std::int64_t r;
        if (__builtin_sub_overflow(std::int64_t{0}, v, &r))
            throw ModelError("integer overflow in expression evaluation");
        return r;
    }
    case ExprOp::Not: return eval_expr(*e.lhs, values) == 0 ? 1 : 0;
    case ExprOp::And:
        return eval_expr(*e.lhs, values) != 0 && eval_expr(*e.rhs, values) != 0;
    case ExprOp::Or:
        return eval_expr(*e.lhs, values) != 0 || eval_expr(*e.rhs, values) != 0;
    default: break;
    }
    std::int64_t a = eval_expr(*e.lhs, values);
    std::int64_t b = eval_expr(*e.rhs, values);
    std::int64_t r = 0;
    switch (e.op) {
    case ExprOp::Add:
        if (__builtin_add_overflow(a, b, &r))
            throw ModelError("integer overflow in expression evaluation");
        return r;
    case ExprOp::Sub:
        if (__builtin_sub_overflow(a, b, &r))
            throw ModelError("integer overflow in expression evaluation");
        return r;
    case ExprOp::Mul:
        if (__builtin_mul_overflow(a, b, &r))
            throw ModelError("integer overflow in expression evaluation");
        return r;
    case ExprOp::Mod:
        if (b == 0) throw ModelError("mod by zero in expression evaluation");
        r = a % b;
        if (r < 0) r += (b < 0 ? -b : b);
        return r;
    case ExprOp::Min: return a < b ? a : b;
    case ExprOp::Max: return a > b ? a : b;
    case ExprOp::Eq: return a == b;
    case ExprOp::Ne: return a != b;
    case ExprOp::Lt: return a < b;
    case ExprOp::Le: return a <= b;
    case ExprOp::Gt: return a > b;
    case ExprOp::Ge: return a >= b;
    default: throw ModelError("malformed expression node");
    }
}

namespace {

const char* infix_symbol(ExprOp op) {
    switch (op) {
    case ExprOp::Add: return " + ";
    case ExprOp::Sub: return " - ";
    case ExprOp::Mul: return " * ";
    case ExprOp::Eq: return "=";
    case ExprOp::Ne: return "!=";
    case ExprOp::Lt: return "<";
    case ExprOp::Le: return "<=";
    case ExprOp::Gt: return ">";
    case ExprOp::Ge: return ">=";
    case ExprOp::And: return " & ";
    case ExprOp::Or: return " | ";
    default: return nullptr;
    }
}

} // namespace

std::string print_expr(const Expr& e) {
    switch (e.op) {
    case ExprOp::IntLit: return std::to_string(e.value);
    case ExprOp::Var: return e.var_name;
    case ExprOp::Neg: return "-" + print_expr(*e.lhs);
    case ExprOp::Not: return "!" + print_expr(*e.lhs);
    case ExprOp::Mod: return "mod(" + print_expr(*e.lhs) + ", " + print_expr(*e.rhs) + ")";
    case ExprOp::Min: return "min(" + print_expr(*e.lhs) + ", " + print_expr(*e.rhs) + ")";
    case ExprOp::Max: return "max(" + print_expr(*e.lhs) + ", " + print_expr(*e.rhs) + ")";
    default:
        // Fully parenthesized so the canonical form reparses unambiguously.
        return "(" + print_expr(*e.lhs) + infix_symbol(e.op) + print_expr(*e.rhs) + ")";
    }
}

bool expr_equal(const Expr& a, const Expr& b) {
    if (a.op != b.op) return false;
    switch (a.op) {
    case ExprOp::IntLit: return a.value == b.value;
    case ExprOp::Var: return a.var == b.var && a.var_name == b.var_name;
    case ExprOp::Neg:
    case ExprOp::Not: return expr_equal(*a.lhs, *b.lhs);
    default: return expr_equal(*a.lhs, *b.lhs) && expr_equal(*a.rhs, *b.rhs);
    }
}

} // namespace policymc
