#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "policymc/explicit_mdp.hpp"
#include "policymc/induced.hpp"
#include "policymc/property.hpp"

namespace policymc {

struct CheckResult {
    double probability = 0.0;
    std::optional<bool> satisfied; // threshold queries only
    std::size_t states = 0;
    std::size_t transitions = 0;
    double wall_seconds = 0.0;
};

enum class ExtremalMode { Min, Max };

/// Exact reachability on the induced chain. Eventually-queries partition the
/// states by graph analysis (probability-1 and probability-0 sets) and solve
/// the remaining linear system directly (sparse LU) up to 50,000 unknowns,
/// iteratively to residual 1e-10 beyond that. Bounded queries run exactly B
/// matrix-vector iterations with target states absorbing. Until restricts the
/// same machinery to paths through constraint states. Labels may be model
/// labels, extra labels, or selected-action names.
CheckResult check_dtmc(const InducedDtmc& dtmc, const PctlQuery& q);

/// Extremal (min/max) reachability over the full MDP by value iteration to
/// max-change 1e-10, preceded by probability-0 (and, for max, probability-1)
/// graph precomputation. Bounded queries run exactly B iterations without
/// precomputation. Only eventually and bounded-eventually are supported.
CheckResult check_mdp_extremal(const ExplicitMdp& mdp, const PctlQuery& q,
                               ExtremalMode mode);

/// Renders a CheckResult as the CLI's single machine-readable line
/// (`probability=... satisfied=... states=... transitions=... seconds=...`).
std::string format_check_result(const CheckResult& r);

} // namespace policymc
