#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "policymc/expr.hpp"
#include "policymc/rational.hpp"

namespace policymc {

struct VariableDecl {
    std::string name;
    std::int64_t lo = 0;
    std::int64_t hi = 0;
    ExprPtr init; // constant expression, folded at parse time
};

struct UpdateAssign {
    int var = -1;
    std::string var_name;
    ExprPtr expr;
};

struct Branch {
    Rational prob;
    std::vector<UpdateAssign> updates;
};

struct Command {
    std::string action;
    ExprPtr guard;
    std::vector<Branch> branches;
    int source_line = 0;
};

struct LabelDecl {
    std::string name;
    ExprPtr expr;
};

struct RewardItem {
    std::string action; // empty: applies to every action
    ExprPtr guard;
    Rational value;
};

/// Parsed guarded-command model. Only the `mdp` kind and a single module
/// are supported; `const int` declarations are folded away during parsing.
struct ModelAst {
    std::string module_name;
    std::vector<VariableDecl> variables;
    std::vector<Command> commands;
    std::vector<LabelDecl> labels;
    std::vector<RewardItem> rewards;

    int var_index(const std::string& name) const;
};

ModelAst parse_model(const std::string& source_text);

/// Canonical text form; `parse_model(print_model(ast))` is structurally
/// identical to `ast`.
std::string print_model(const ModelAst& ast);

bool model_equal(const ModelAst& a, const ModelAst& b);

} // namespace policymc
