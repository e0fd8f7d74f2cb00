#pragma once

#include <algorithm>
#include <string>
#include <utility>
#include <vector>

#include "policymc/explicit_mdp.hpp"
#include "policymc/rng.hpp"
#include "policymc/induced.hpp"
#include "policymc/model.hpp"
#include "policymc/policy.hpp"

namespace policymc::testing {

/// Didactic two-decision chain used throughout the suites: from s=0, a0 is
/// the return-optimal choice (reach probability 0.86 vs 0.32 for a1).
inline const char* kChainModel = R"(mdp

module chain
  s : [0..3] init 0;

  [a0] s=0 -> 0.7:(s'=1) + 0.3:(s'=2);
  [a1] s=0 -> 0.4:(s'=1) + 0.6:(s'=3);
  [a0] s=1 -> 0.8:(s'=2) + 0.2:(s'=3);
  [end] s=2 -> 1:(s'=2);
  [end] s=3 -> 1:(s'=3);
endmodule

label "goal" = s=2;
label "empty" = s=3;

rewards
  s=2 : 1;
endrewards
)";

inline ExplicitMdp build_chain_mdp() { return build_explicit(parse_model(kChainModel)); }

/// All-zero network: every score ties at 0, so argmax picks global action 0
/// (lexicographically first) with the feasibility fallback everywhere else.
inline PolicyNet zero_net(const ExplicitMdp& mdp, const std::vector<int>& hidden = {4}) {
    PolicyNet net;
    std::vector<int> dims;
    dims.push_back(static_cast<int>(mdp.variables.size()));
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(static_cast<int>(mdp.action_names.size()));
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        net.weights.push_back(Eigen::MatrixXd::Zero(dims[l + 1], dims[l]));
        net.biases.push_back(Eigen::VectorXd::Zero(dims[l + 1]));
    }
    net.norm_low = Eigen::VectorXd::Zero(dims[0]);
    net.norm_width = Eigen::VectorXd::Ones(dims[0]);
    for (std::size_t i = 0; i < mdp.variables.size(); ++i) {
        net.norm_low[static_cast<Eigen::Index>(i)] = double(mdp.variables[i].lo);
        net.norm_width[static_cast<Eigen::Index>(i)] =
            double(std::max<std::int64_t>(1, mdp.variables[i].hi - mdp.variables[i].lo));
    }
    net.action_names = mdp.action_names;
    return net;
}

/// Hand-built chain: one implicit action, a "goal" label on `targets`, one
/// state variable enumerating the indices. Rows must be stochastic.
inline InducedDtmc make_dtmc(const std::vector<std::vector<std::pair<std::uint32_t, double>>>& rows,
                             const std::vector<std::uint32_t>& targets,
                             const std::vector<std::uint32_t>& constraint = {}) {
    InducedDtmc d;
    const std::uint32_t n = static_cast<std::uint32_t>(rows.size());
    d.variables.push_back({"s", 0, static_cast<std::int64_t>(n) - 1, make_int(0)});
    d.label_names = {"goal", "safe"};
    d.label_words = 1;
    d.action_names = {"a"};
    d.row_begin.push_back(0);
    for (std::uint32_t s = 0; s < n; ++s) {
        d.state_values.push_back(static_cast<std::int32_t>(s));
        for (const auto& [t, p] : rows[s]) {
            d.succ.push_back(t);
            d.prob.push_back(p);
        }
        d.row_begin.push_back(d.succ.size());
        d.chosen_action.push_back(0);
        d.origin.push_back(s);
        std::uint64_t bits = 0;
        if (std::find(targets.begin(), targets.end(), s) != targets.end()) bits |= 1;
        if (std::find(constraint.begin(), constraint.end(), s) != constraint.end())
            bits |= 2;
        d.label_bits.push_back(bits);
    }
    return d;
}

/// Seeded random chain for oracle-equivalence checks: 3..12 states, sparse
/// stochastic rows, nonempty random target set, initial state 0.
inline InducedDtmc random_chain(Rng& rng) {
    const std::uint32_t n = 3 + static_cast<std::uint32_t>(rng.uniform_int(10));
    std::vector<std::vector<std::pair<std::uint32_t, double>>> rows(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        if (rng.uniform() < 0.25) {
            rows[s].push_back({s, 1.0});
            continue;
        }
        std::uint32_t k = 1 + static_cast<std::uint32_t>(rng.uniform_int(3));
        double total = 0.0;
        std::vector<std::pair<std::uint32_t, double>> row;
        for (std::uint32_t i = 0; i < k; ++i) {
            std::uint32_t t = static_cast<std::uint32_t>(rng.uniform_int(n));
            double w = rng.uniform(0.05, 1.0);
            bool merged = false;
            for (auto& [u, p] : row)
                if (u == t) {
                    p += w;
                    merged = true;
                    break;
                }
            if (!merged) row.push_back({t, w});
            total += w;
        }
        for (auto& [u, p] : row) p /= total;
        // Re-normalize exactly so the stochasticity guard cannot trip.
        double sum = 0.0;
        for (auto& [u, p] : row) sum += p;
        row.back().second += 1.0 - sum;
        rows[s] = row;
    }
    std::vector<std::uint32_t> targets;
    for (std::uint32_t s = 0; s < n; ++s)
        if (rng.uniform() < 0.25) targets.push_back(s);
    if (targets.empty()) targets.push_back(static_cast<std::uint32_t>(rng.uniform_int(n)));
    return make_dtmc(rows, targets);
}

/// Structural equality of two induced chains, ignoring the recorded
/// transform list (bit-level on every numeric array).
inline bool same_chain(const InducedDtmc& a, const InducedDtmc& b) {
    return a.state_values == b.state_values && a.initial == b.initial &&
           a.row_begin == b.row_begin && a.succ == b.succ && a.prob == b.prob &&
           a.label_names == b.label_names && a.label_bits == b.label_bits &&
           a.chosen_action == b.chosen_action && a.origin == b.origin;
}

} // namespace policymc::testing
