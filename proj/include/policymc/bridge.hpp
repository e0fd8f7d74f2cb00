#pragma once

#include <string>
#include <vector>

#include "policymc/config.hpp"
#include "policymc/rational.hpp"

namespace policymc {

/// Per-bridge maintenance actions, indexed 0..3.
enum BridgeAction : int { kDoNothing = 0, kMinor = 1, kMajor = 2, kReplace = 3 };

struct BridgeConfig {
    int n_bridges = 3;
    int b_max = 10;
    int t_max = 20;
    int cycle_len = 4;
    std::vector<int> costs = {0, 1, 2, 4}; // DN, MN, MJ, RP

    // Stay probabilities under Do Nothing for conditions 9 down to 1;
    // condition 0 is absorbing. Synthetic defaults, config-overridable.
    std::vector<Rational> stay_prob = {
        Rational(96, 100), Rational(94, 100), Rational(90, 100),
        Rational(88, 100), Rational(85, 100), Rational(80, 100),
        Rational(70, 100), Rational(60, 100), Rational(50, 100)};

    // Per-bridge multipliers on the drop probability, clamped to [0,1].
    std::vector<Rational> deterioration_multipliers = {
        Rational(1), Rational(11, 10), Rational(12, 10)};

    // Maintenance effects: deterministic condition boosts, clamped at 9.
    int mn_boost = 1;
    int mj_boost = 3;
    int rp_condition = 9;

    std::vector<int> init_conditions = {7, 8, 9};

    int c_max() const { return n_bridges * costs[kReplace]; }

    void validate() const;
};

struct JointAction {
    std::vector<int> parts; // one per bridge, each in 0..3

    std::string name() const; // a{k1}_{k2}_{k3}
};

/// Sum of per-bridge costs.
int joint_action_cost(const JointAction& a, const BridgeConfig& cfg);

/// Drop probability of bridge `bridge` (0-based) at condition `cond` under
/// Do Nothing, with the per-bridge multiplier applied and clamped to [0,1].
Rational bridge_drop_prob(const BridgeConfig& cfg, int bridge, int cond);

/// Emits the full bridge-network model as guarded-command source text.
std::string generate_bridge_model(const BridgeConfig& cfg);

/// Reads a BridgeConfig from a sectioned key-value config file; missing keys
/// keep their defaults.
BridgeConfig bridge_config_from(const ConfigFile& file);

} // namespace policymc
