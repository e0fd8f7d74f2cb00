#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "policymc/explicit_mdp.hpp"
#include "policymc/policy.hpp"

namespace policymc {

/// One observation coarsening applied to the raw integer valuation before
/// normalization, so bins and representatives are stated in natural units.
struct ObservationTransform {
    enum class Kind { Lump, Remap };

    struct Bin {
        std::int64_t lo = 0;
        std::int64_t hi = 0;
        std::int64_t rep = 0;
    };

    Kind kind = Kind::Remap;
    std::string feature;
    std::vector<Bin> bins;                         // lump
    std::optional<std::int64_t> fixed;             // remap feature=...,value=k
    std::map<std::int64_t, std::int64_t> value_map; // remap feature=...,map=...
};

/// Per-bridge substitution source -> target, expanded across all joint-action
/// names containing the source index in at least one slot.
struct ActionReplacement {
    int source = -1;
    int target = -1;
};

/// Policy-induced chain over the MDP's reachable-under-pi fragment. All
/// nondeterminism is resolved: exactly one sparse row per state. States keep
/// full-resolution valuations; transforms only coarsen the policy's view.
struct InducedDtmc {
    std::vector<VariableDecl> variables;
    std::vector<std::int32_t> state_values;
    std::uint32_t initial = 0;

    std::vector<std::uint64_t> row_begin; // size num_states + 1
    std::vector<std::uint32_t> succ;
    std::vector<double> prob;

    std::vector<std::string> label_names; // model labels + extra labeler names
    std::vector<std::uint64_t> label_bits;
    std::size_t label_words = 0;

    std::vector<std::string> action_names;    // global table, copied from the MDP
    std::vector<std::uint32_t> chosen_action; // per state: the action taken
    std::vector<std::uint32_t> origin;        // DTMC index -> MDP state index

    std::vector<ObservationTransform> transforms; // view used during the build

    std::size_t num_states() const { return row_begin.size() - 1; }
    std::size_t num_transitions() const { return succ.size(); }

    std::span<const std::int32_t> valuation(std::uint32_t state) const {
        return {state_values.data() + std::size_t(state) * variables.size(),
                variables.size()};
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
};

/// Validates that bins cover the feature's declared range and that every
/// representative and map target lies inside it; throws ModelError otherwise.
void validate_transform(const ObservationTransform& t,
                        const std::vector<VariableDecl>& variables);

/// Applies transforms left to right to a copy of the raw valuation.
std::vector<std::int32_t> apply_transforms(std::span<const std::int32_t> valuation,
                                           const std::vector<VariableDecl>& variables,
                                           const std::vector<ObservationTransform>& transforms);

/// All joint-action renamings a replacement induces over names of the form
/// a{k1}_{k2}_..., keyed by original name. Names without the source index
/// (and non-joint names such as init/done) are absent.
std::map<std::string, std::string> expand_action_replacement(
    const ActionReplacement& rep, const std::vector<std::string>& action_names);

struct InducedBuildOptions {
    std::vector<ObservationTransform> transforms;
    std::optional<ActionReplacement> replacement;
    /// Extra atomic propositions evaluated on the originating MDP state.
    std::vector<std::pair<std::string,
                          std::function<bool(const ExplicitMdp&, std::uint32_t)>>>
        extra_labelers;
    /// When nonempty, states carrying this model label become absorbing
    /// (their successors are not expanded). Off by default.
    std::string absorb_label;
    std::uint64_t state_cap = kDefaultStateCap;
};

/// Deterministic BFS construction of the induced chain (one policy query per
/// state). Replacement targets infeasible in a state fall back to the first
/// enabled action, the same rule as the policy's own fallback.
InducedDtmc build_induced_dtmc(const ExplicitMdp& mdp, const PolicyNet& net,
                               const InducedBuildOptions& opts = {});

struct ActionShare {
    std::size_t count = 0;
    double fraction = 0.0;
};

/// States per selected-action label; fractions sum to 1 within 1e-12.
std::map<std::string, ActionShare> action_distribution(const InducedDtmc& dtmc);

struct SaliencyRow {
    std::string feature;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t count = 0;
};

/// Mean/std of per-feature |input gradient| over the filtered states, using
/// the same transformed observations the build used. Sorted by mean
/// descending, ties by feature declaration order. Throws VerifyError when the
/// filter selects no state.
std::vector<SaliencyRow> conditional_saliency(
    const InducedDtmc& dtmc, const PolicyNet& net,
    const std::function<bool(const InducedDtmc&, std::uint32_t)>& filter);

/// True when `name` holds in `state`, checking model/extra labels first and
/// the selected-action label second. Throws VerifyError for unknown names.
bool induced_state_satisfies(const InducedDtmc& dtmc, std::uint32_t state,
                             const std::string& name);

/// Per-state membership mask for a label or action name.
std::vector<char> induced_label_mask(const InducedDtmc& dtmc, const std::string& name);

/// Flag parsers for the CLI surface.
ObservationTransform parse_lump_flag(const std::string& spec);
ObservationTransform parse_remap_flag(const std::string& spec);
ActionReplacement parse_action_replace_flag(const std::string& spec);

/// Writes <prefix>.sta, <prefix>.tra, <prefix>.lab.
void export_induced(const InducedDtmc& dtmc, const std::string& prefix);

} // namespace policymc
