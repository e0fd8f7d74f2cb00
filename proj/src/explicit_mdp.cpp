#include "policymc/explicit_mdp.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <string_view>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "policymc/io_util.hpp"

namespace policymc {

namespace {

struct ValuationHash {
    std::size_t operator()(const std::vector<std::int32_t>& v) const {
        std::uint64_t h = 1469598103934665603ull;
        for (std::int32_t x : v) {
            h ^= static_cast<std::uint32_t>(x);
            h *= 1099511628211ull;
        }
        return static_cast<std::size_t>(h);
    }
};

/// Guards are overwhelmingly conjunctions of `var <cmp> constant` atoms;
/// evaluating those as flat integer comparisons avoids a tree walk per
/// (state, command) pair.
struct GuardAtom {
    int var = 0;
    ExprOp op = ExprOp::Eq;
    std::int64_t rhs = 0;
};

struct CompiledGuard {
    std::vector<GuardAtom> atoms;
    std::vector<const Expr*> residual;

    bool eval(std::span<const std::int64_t> values) const {
        for (const auto& a : atoms) {
            std::int64_t v = values[static_cast<std::size_t>(a.var)];
            bool ok = false;
            switch (a.op) {
                case ExprOp::Eq: ok = v == a.rhs; break;
                case ExprOp::Ne: ok = v != a.rhs; break;
                case ExprOp::Lt: ok = v < a.rhs; break;
                case ExprOp::Le: ok = v <= a.rhs; break;
                case ExprOp::Gt: ok = v > a.rhs; break;
                case ExprOp::Ge: ok = v >= a.rhs; break;
                default: break;
            }
            if (!ok) return false;
        }
        for (const Expr* e : residual)
            if (eval_expr(*e, values) == 0) return false;
        return true;
    }
};

ExprOp flip_comparison(ExprOp op) {
    switch (op) {
        case ExprOp::Lt: return ExprOp::Gt;
        case ExprOp::Le: return ExprOp::Ge;
        case ExprOp::Gt: return ExprOp::Lt;
        case ExprOp::Ge: return ExprOp::Le;
        default: return op;
    }
}

void compile_guard_into(const Expr& e, CompiledGuard& out) {
    if (e.op == ExprOp::And) {
        compile_guard_into(*e.lhs, out);
        compile_guard_into(*e.rhs, out);
        return;
    }
    bool is_cmp = e.op == ExprOp::Eq || e.op == ExprOp::Ne || e.op == ExprOp::Lt ||
                  e.op == ExprOp::Le || e.op == ExprOp::Gt || e.op == ExprOp::Ge;
    if (is_cmp && e.lhs->op == ExprOp::Var && e.rhs->op == ExprOp::IntLit) {
        out.atoms.push_back({e.lhs->var, e.op, e.rhs->value});
        return;
    }
    if (is_cmp && e.lhs->op == ExprOp::IntLit && e.rhs->op == ExprOp::Var) {
        out.atoms.push_back({e.rhs->var, flip_comparison(e.op), e.lhs->value});
        return;
    }
    out.residual.push_back(&e);
}

std::string describe_valuation(const std::vector<VariableDecl>& vars,
                               std::span<const std::int64_t> values) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < vars.size(); ++i) {
        if (i > 0) os << ", ";
        os << vars[i].name << "=" << values[i];
    }
    os << ")";
    return os.str();
}

} // namespace

std::int64_t ExplicitMdp::find_state(std::span<const std::int32_t> values) const {
    const std::size_t n = variables.size();
    for (std::size_t s = 0; s < num_states(); ++s) {
        if (std::equal(values.begin(), values.end(), state_values.begin() + s * n))
            return static_cast<std::int64_t>(s);
    }
    return -1;
}

ExplicitMdp build_explicit(const ModelAst& ast, std::uint64_t state_cap) {
    ExplicitMdp mdp;
    mdp.variables = ast.variables;
    const std::size_t n_vars = ast.variables.size();
    if (n_vars == 0) throw ModelError("model declares no variables");
    for (const auto& v : ast.variables) {
        if (v.lo < INT32_MIN || v.hi > INT32_MAX)
            throw ModelError("variable range of '" + v.name + "' too large for state storage");
    }

    // Provisional action ids: sorted command labels, reserved sink appended.
    std::vector<std::string> labels;
    for (const auto& c : ast.commands) labels.push_back(c.action);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::unordered_map<std::string, std::uint32_t> action_id;
    for (std::size_t i = 0; i < labels.size(); ++i) action_id[labels[i]] = i;
    const std::uint32_t sink_id = static_cast<std::uint32_t>(labels.size());
    bool sink_used = false;

    std::vector<std::uint32_t> command_action(ast.commands.size());
    std::vector<CompiledGuard> command_guard(ast.commands.size());
    for (std::size_t i = 0; i < ast.commands.size(); ++i) {
        command_action[i] = action_id[ast.commands[i].action];
        compile_guard_into(*ast.commands[i].guard, command_guard[i]);
    }

    // Resolve each reward item's action filter to an id once (-1: all actions).
    std::vector<std::int64_t> reward_action(ast.rewards.size(), -1);
    for (std::size_t i = 0; i < ast.rewards.size(); ++i) {
        if (ast.rewards[i].action.empty()) continue;
        auto it = action_id.find(ast.rewards[i].action);
        if (it == action_id.end())
            throw ModelError("reward item names action '" + ast.rewards[i].action +
                             "', which no command carries");
        reward_action[i] = it->second;
    }

    mdp.label_words = (ast.labels.size() + 63) / 64;
    if (mdp.label_words == 0) mdp.label_words = 1;
    for (const auto& l : ast.labels) mdp.label_names.push_back(l.name);

    // Initial valuation.
    std::vector<std::int32_t> init_state(n_vars);
    for (std::size_t i = 0; i < n_vars; ++i)
        init_state[i] = static_cast<std::int32_t>(eval_expr(*ast.variables[i].init, {}));

    std::unordered_map<std::vector<std::int32_t>, std::uint32_t, ValuationHash> index;
    std::vector<std::vector<std::int32_t>> frontier_order;
    index.emplace(init_state, 0);
    mdp.state_values.insert(mdp.state_values.end(), init_state.begin(), init_state.end());
    mdp.initial = 0;
    mdp.state_action_begin.push_back(0);

    std::vector<std::int64_t> scratch(n_vars), succ_scratch(n_vars);
    std::vector<std::int32_t> succ_state(n_vars);

    auto intern = [&](const std::vector<std::int32_t>& v) -> std::uint32_t {
        auto it = index.find(v);
        if (it != index.end()) return it->second;
        std::uint32_t id = static_cast<std::uint32_t>(index.size());
        if (index.size() >= state_cap)
            throw ModelError("state count exceeds cap of " + std::to_string(state_cap));
        index.emplace(v, id);
        mdp.state_values.insert(mdp.state_values.end(), v.begin(), v.end());
        return id;
    };

    // BFS over discovery order; mdp.state_values doubles as the queue.
    for (std::uint32_t s = 0; std::size_t(s) * n_vars < mdp.state_values.size(); ++s) {
        for (std::size_t i = 0; i < n_vars; ++i)
            scratch[i] = mdp.state_values[std::size_t(s) * n_vars + i];

        std::size_t entries_before = mdp.action_entries.size();
        std::vector<std::uint32_t> enabled_commands;
        for (std::size_t c = 0; c < ast.commands.size(); ++c) {
            if (command_guard[c].eval(scratch))
                enabled_commands.push_back(static_cast<std::uint32_t>(c));
        }
        {
            std::vector<std::uint32_t> seen;
            seen.reserve(enabled_commands.size());
            for (std::uint32_t c : enabled_commands) seen.push_back(command_action[c]);
            std::sort(seen.begin(), seen.end());
            auto dup = std::adjacent_find(seen.begin(), seen.end());
            if (dup != seen.end())
                throw ModelError("two commands with action '" + labels[*dup] +
                                 "' enabled in state " +
                                 describe_valuation(ast.variables, scratch));
        }

        if (enabled_commands.empty()) {
            sink_used = true;
            mdp.action_entries.push_back(
                {sink_id, static_cast<std::uint32_t>(mdp.succ.size()),
                 static_cast<std::uint32_t>(mdp.succ.size() + 1), 0.0});
            mdp.succ.push_back(s);
            mdp.prob.push_back(1.0);
        } else {
            for (std::uint32_t c : enabled_commands) {
                const Command& cmd = ast.commands[c];
                std::uint32_t begin = static_cast<std::uint32_t>(mdp.succ.size());
                for (std::size_t b = 0; b < cmd.branches.size(); ++b) {
                    const Branch& br = cmd.branches[b];
                    std::copy(scratch.begin(), scratch.end(), succ_scratch.begin());
                    for (const auto& up : br.updates)
                        succ_scratch[up.var] = eval_expr(*up.expr, scratch);
                    for (std::size_t i = 0; i < n_vars; ++i) {
                        const auto& decl = ast.variables[i];
                        if (succ_scratch[i] < decl.lo || succ_scratch[i] > decl.hi)
                            throw ModelError(
                                "update drives variable '" + decl.name + "' to " +
                                std::to_string(succ_scratch[i]) + " outside [" +
                                std::to_string(decl.lo) + ".." + std::to_string(decl.hi) +
                                "] in state " + describe_valuation(ast.variables, scratch) +
                                ", command at line " + std::to_string(cmd.source_line) +
                                ", branch " + std::to_string(b + 1));
                        succ_state[i] = static_cast<std::int32_t>(succ_scratch[i]);
                    }
                    std::uint32_t t = intern(succ_state);
                    // Merge duplicate successors within this distribution.
                    bool merged = false;
                    for (std::uint32_t k = begin; k < mdp.succ.size(); ++k) {
                        if (mdp.succ[k] == t) {
                            mdp.prob[k] += br.prob.to_double();
                            merged = true;
                            break;
                        }
                    }
                    if (!merged) {
                        mdp.succ.push_back(t);
                        mdp.prob.push_back(br.prob.to_double());
                    }
                }
                mdp.action_entries.push_back(
                    {command_action[c], begin, static_cast<std::uint32_t>(mdp.succ.size()),
                     0.0});
            }
            std::sort(mdp.action_entries.begin() + entries_before, mdp.action_entries.end(),
                      [](const auto& a, const auto& b) { return a.action < b.action; });

            // Rewards: sum of items whose guard holds at s, restricted to
            // the item's action when one is named.
            for (std::size_t ri = 0; ri < ast.rewards.size(); ++ri) {
                const auto& item = ast.rewards[ri];
                if (eval_expr(*item.guard, scratch) == 0) continue;
                for (std::size_t e = entries_before; e < mdp.action_entries.size(); ++e) {
                    auto& entry = mdp.action_entries[e];
                    if (reward_action[ri] < 0 ||
                        reward_action[ri] == static_cast<std::int64_t>(entry.action))
                        entry.reward += item.value.to_double();
                }
            }
        }
        mdp.state_action_begin.push_back(mdp.action_entries.size());

        for (std::size_t li = 0; li < ast.labels.size(); ++li) {
            if (mdp.label_bits.size() < (std::size_t(s) + 1) * mdp.label_words)
                mdp.label_bits.resize((std::size_t(s) + 1) * mdp.label_words, 0);
            if (eval_expr(*ast.labels[li].expr, scratch) != 0)
                mdp.label_bits[std::size_t(s) * mdp.label_words + li / 64] |= 1ull << (li % 64);
        }
        if (ast.labels.empty())
            mdp.label_bits.resize((std::size_t(s) + 1) * mdp.label_words, 0);
    }

    // Final action table: drop the sink when unused, otherwise merge it into
    // sorted position and remap the stored ids.
    if (!sink_used) {
        mdp.action_names = labels;
    } else {
        std::vector<std::string> final_names = labels;
        final_names.push_back("__sink");
        std::sort(final_names.begin(), final_names.end());
        std::vector<std::uint32_t> remap(labels.size() + 1);
        for (std::size_t i = 0; i < labels.size(); ++i) {
            remap[i] = static_cast<std::uint32_t>(
                std::lower_bound(final_names.begin(), final_names.end(), labels[i]) -
                final_names.begin());
        }
        remap[sink_id] = static_cast<std::uint32_t>(
            std::lower_bound(final_names.begin(), final_names.end(), std::string("__sink")) -
            final_names.begin());
        for (auto& e : mdp.action_entries) e.action = remap[e.action];
        mdp.action_names = std::move(final_names);
    }
    return mdp;
}

std::vector<std::uint32_t> enabled_actions(const ExplicitMdp& mdp, std::uint32_t state) {
    std::vector<std::uint32_t> out;
    for (const auto& e : mdp.enabled(state)) out.push_back(e.action);
    return out;
}

void export_explicit(const ExplicitMdp& mdp, const std::string& prefix) {
    {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < mdp.variables.size(); ++i) {
            if (i > 0) os << ",";
            os << mdp.variables[i].name;
        }
        os << ")\n";
        for (std::size_t s = 0; s < mdp.num_states(); ++s) {
            os << s << ":(";
            auto vals = mdp.valuation(static_cast<std::uint32_t>(s));
            for (std::size_t i = 0; i < vals.size(); ++i) {
                if (i > 0) os << ",";
                os << vals[i];
            }
            os << ")\n";
        }
        write_file_atomic(prefix + ".sta", os.str());
    }
    {
        std::ostringstream os;
        char buf[40];
        for (std::size_t s = 0; s < mdp.num_states(); ++s) {
            for (const auto& e : mdp.enabled(static_cast<std::uint32_t>(s))) {
                for (std::uint32_t k = e.branch_begin; k < e.branch_end; ++k) {
                    // Shortest decimal that round-trips the double exactly.
                    auto res = std::to_chars(buf, buf + sizeof buf, mdp.prob[k]);
                    os << s << " " << mdp.action_names[e.action] << " " << mdp.succ[k] << " "
                       << std::string_view(buf, res.ptr) << "\n";
                }
            }
        }
        write_file_atomic(prefix + ".tra", os.str());
    }
    {
        std::ostringstream os;
        for (std::size_t s = 0; s < mdp.num_states(); ++s) {
            os << s << ":";
            for (std::size_t li = 0; li < mdp.label_names.size(); ++li)
                if (mdp.has_label(static_cast<std::uint32_t>(s), static_cast<int>(li)))
                    os << " " << mdp.label_names[li];
            os << "\n";
        }
        write_file_atomic(prefix + ".lab", os.str());
    }
}

} // namespace policymc
