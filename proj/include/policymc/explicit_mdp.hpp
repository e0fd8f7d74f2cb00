#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "policymc/model.hpp"

namespace policymc {

/// Reachable explicit-state MDP. States, actions and transitions live in
/// flat arrays; per-state action lists are ordered lexicographically by
/// action name (action ids follow the sorted global table). Construction
/// is single-threaded and deterministic; the finished object is immutable.
struct ExplicitMdp {
    struct ActionEntry {
        std::uint32_t action = 0;       // global action id
        std::uint32_t branch_begin = 0; // into succ/prob
        std::uint32_t branch_end = 0;
        double reward = 0.0;
    };

    std::vector<VariableDecl> variables;
    std::vector<std::int32_t> state_values; // num_states * variables.size()
    std::uint32_t initial = 0;              // one-point initial distribution

    std::vector<std::string> action_names;  // sorted lexicographically
    std::vector<std::uint64_t> state_action_begin; // size num_states + 1
    std::vector<ActionEntry> action_entries;
    std::vector<std::uint32_t> succ;
    std::vector<double> prob;

    std::vector<std::string> label_names;
    std::vector<std::uint64_t> label_bits;  // num_states * label_words
    std::size_t label_words = 0;

    std::size_t num_states() const { return state_action_begin.size() - 1; }
    std::size_t num_transitions() const { return succ.size(); }

    std::span<const std::int32_t> valuation(std::uint32_t state) const {
        return {state_values.data() + std::size_t(state) * variables.size(),
                variables.size()};
    }

    std::span<const ActionEntry> enabled(std::uint32_t state) const {
        return {action_entries.data() + state_action_begin[state],
                action_entries.data() + state_action_begin[state + 1]};
    }

    int label_index(const std::string& name) const {
        for (std::size_t i = 0; i < label_names.size(); ++i)
            if (label_names[i] == name) return static_cast<int>(i);
        return -1;
    }

    bool has_label(std::uint32_t state, int label) const {
        return (label_bits[state * label_words + std::size_t(label) / 64] >>
                (std::size_t(label) % 64)) & 1u;
    }

    int action_index(const std::string& name) const {
        for (std::size_t i = 0; i < action_names.size(); ++i)
            if (action_names[i] == name) return static_cast<int>(i);
        return -1;
    }

    /// A state whose only enabled action is a probability-1 self-loop.
    bool is_absorbing(std::uint32_t state) const {
        auto acts = enabled(state);
        if (acts.size() != 1) return false;
        const ActionEntry& a = acts[0];
        return a.branch_end - a.branch_begin == 1 && succ[a.branch_begin] == state;
    }

    /// Index of the state with the given valuation, or -1.
    std::int64_t find_state(std::span<const std::int32_t> values) const;
};

inline constexpr std::uint64_t kDefaultStateCap = 5'000'000;

/// Deterministic BFS enumeration of the reachable state space. Successors
/// are visited in (command order, branch order); states with no enabled
/// command get an absorbing self-loop under the reserved `__sink` action.
ExplicitMdp build_explicit(const ModelAst& ast, std::uint64_t state_cap = kDefaultStateCap);

/// Lexicographically ordered enabled action ids; never empty.
std::vector<std::uint32_t> enabled_actions(const ExplicitMdp& mdp, std::uint32_t state);

/// Writes <prefix>.sta, <prefix>.tra, <prefix>.lab.
void export_explicit(const ExplicitMdp& mdp, const std::string& prefix);

} // namespace policymc
