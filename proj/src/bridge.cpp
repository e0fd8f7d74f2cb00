#include "policymc/bridge.hpp"

#include <sstream>

#include "policymc/errors.hpp"

namespace policymc {

void BridgeConfig::validate() const {
    if (n_bridges < 1) throw ModelError("bridge config: n_bridges must be positive");
    if (b_max < 0) throw ModelError("bridge config: b_max must be nonnegative");
    if (t_max < 1) throw ModelError("bridge config: t_max must be positive");
    if (cycle_len < 1) throw ModelError("bridge config: cycle_len must be positive");
    if (costs.size() != 4) throw ModelError("bridge config: costs needs 4 entries");
    if (costs[kDoNothing] != 0) throw ModelError("bridge config: cost(DN) must be 0");
    for (int c : costs)
        if (c < 0) throw ModelError("bridge config: costs must be nonnegative");
    if (stay_prob.size() != 9)
        throw ModelError("bridge config: stay_prob needs 9 entries (conditions 9..1)");
    for (const auto& p : stay_prob)
        if (p <= Rational(0) || p > Rational(1))
            throw ModelError("bridge config: stay probabilities must lie in (0,1]");
    if (static_cast<int>(deterioration_multipliers.size()) != n_bridges)
        throw ModelError("bridge config: one deterioration multiplier per bridge required");
    for (const auto& m : deterioration_multipliers)
        if (m < Rational(0)) throw ModelError("bridge config: multipliers must be nonnegative");
    if (init_conditions.empty())
        throw ModelError("bridge config: init_conditions must be nonempty");
    for (int c : init_conditions)
        if (c < 1 || c > 9)
            throw ModelError("bridge config: init conditions must lie in 1..9");
    if (mn_boost < 0 || mj_boost < 0 || rp_condition < 0 || rp_condition > 9)
        throw ModelError("bridge config: invalid maintenance effects");
}

std::string JointAction::name() const {
    std::string out = "a";
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += "_";
        out += std::to_string(parts[i]);
    }
    return out;
}

int joint_action_cost(const JointAction& a, const BridgeConfig& cfg) {
    int total = 0;
    for (int k : a.parts) total += cfg.costs[static_cast<std::size_t>(k)];
    return total;
}

Rational bridge_drop_prob(const BridgeConfig& cfg, int bridge, int cond) {
    if (cond < 1 || cond > 9) throw ModelError("drop probability asked outside conditions 1..9");
    Rational drop = (Rational(1) - cfg.stay_prob[static_cast<std::size_t>(9 - cond)]) *
                    cfg.deterioration_multipliers[static_cast<std::size_t>(bridge)];
    if (drop > Rational(1)) drop = Rational(1);
    return drop;
}

namespace {

std::string cond_var(int bridge) { return "cond_b" + std::to_string(bridge + 1); }

// Condition after applying a maintenance action deterministically; DN is
// handled separately (stochastic).
std::string maintenance_update(const BridgeConfig& cfg, int bridge, int action) {
    switch (action) {
    case kMinor:
        return "min(9, " + cond_var(bridge) + " + " + std::to_string(cfg.mn_boost) + ")";
    case kMajor:
        return "min(9, " + cond_var(bridge) + " + " + std::to_string(cfg.mj_boost) + ")";
    case kReplace:
        return std::to_string(cfg.rp_condition);
    default:
        throw ModelError("maintenance_update called for DN");
    }
}

void emit_joint_action_commands(std::ostringstream& os, const BridgeConfig& cfg,
                                const JointAction& act) {
    const int n = cfg.n_bridges;
    const int cost = joint_action_cost(act, cfg);
    std::vector<int> dn_bridges;
    for (int i = 0; i < n; ++i)
        if (act.parts[static_cast<std::size_t>(i)] == kDoNothing) dn_bridges.push_back(i);

    // One command per assignment of current conditions to the DN bridges
    // (their branch probabilities depend on the condition) and per
    // reload-vs-plain budget year.
    std::vector<int> dn_cond(dn_bridges.size(), 1);
    while (true) {
        for (int reload = 0; reload < 2; ++reload) {
            if (cfg.cycle_len == 1 && reload == 0) continue; // every year reloads

            std::ostringstream guard;
            for (std::size_t d = 0; d < dn_bridges.size(); ++d)
                guard << "(" << cond_var(dn_bridges[d]) << "=" << dn_cond[d] << ") & ";
            guard << "(init_done=1) & (year<T_MAX)";
            for (int i = 0; i < n; ++i)
                if (act.parts[static_cast<std::size_t>(i)] != kDoNothing)
                    guard << " & (" << cond_var(i) << ">0)";
            guard << " & (budget>=" << cost << ")";
            if (cfg.cycle_len > 1) {
                if (reload) guard << " & (cycle_year=" << cfg.cycle_len - 1 << ")";
                else guard << " & (cycle_year<" << cfg.cycle_len - 1 << ")";
            }

            std::string budget_update =
                reload ? "B_MAX - " + std::to_string(cost)
                       : "budget - " + std::to_string(cost);
            std::string bookkeeping = "(budget'=" + budget_update +
                                      ") & (cycle_year'=mod(cycle_year + 1, CYCLE_LEN))" +
                                      " & (year'=year + 1)";

            // Branches: product over DN bridges of {stay, drop}.
            std::vector<std::pair<Rational, std::string>> branches = {{Rational(1), ""}};
            for (std::size_t d = 0; d < dn_bridges.size(); ++d) {
                int bridge = dn_bridges[d];
                int c = dn_cond[d];
                Rational drop = bridge_drop_prob(cfg, bridge, c);
                Rational stay = Rational(1) - drop;
                std::vector<std::pair<Rational, std::string>> expanded;
                for (const auto& [p, upd] : branches) {
                    if (stay > Rational(0))
                        expanded.emplace_back(p * stay, upd + " & (" + cond_var(bridge) +
                                                            "'=" + std::to_string(c) + ")");
                    if (drop > Rational(0))
                        expanded.emplace_back(p * drop, upd + " & (" + cond_var(bridge) +
                                                            "'=" + std::to_string(c - 1) + ")");
                }
                branches = std::move(expanded);
            }

            os << "  [" << act.name() << "] " << guard.str() << " -> ";
            for (std::size_t b = 0; b < branches.size(); ++b) {
                if (b > 0) os << " + ";
                os << branches[b].first.str() << ":" << bookkeeping;
                for (int i = 0; i < n; ++i) {
                    int k = act.parts[static_cast<std::size_t>(i)];
                    if (k != kDoNothing)
                        os << " & (" << cond_var(i) << "'=" << maintenance_update(cfg, i, k)
                           << ")";
                }
                os << branches[b].second;
            }
            os << ";\n";
        }

        // Next DN condition assignment.
        std::size_t d = 0;
        for (; d < dn_cond.size(); ++d) {
            if (dn_cond[d] < 9) { ++dn_cond[d]; break; }
            dn_cond[d] = 1;
        }
        if (dn_cond.empty() || d == dn_cond.size()) break;
    }
}

} // namespace

std::string generate_bridge_model(const BridgeConfig& cfg) {
    cfg.validate();
    const int n = cfg.n_bridges;
    std::ostringstream os;
    os << "mdp\n\n";
    os << "const int B_MAX = " << cfg.b_max << ";\n";
    os << "const int T_MAX = " << cfg.t_max << ";\n";
    os << "const int CYCLE_LEN = " << cfg.cycle_len << ";\n\n";
    os << "module bridge_network\n";
    for (int i = 0; i < n; ++i) os << "  " << cond_var(i) << " : [0..9] init 9;\n";
    os << "  budget : [0..B_MAX] init B_MAX;\n";
    os << "  cycle_year : [0.." << cfg.cycle_len - 1 << "] init 0;\n";
    os << "  year : [0..T_MAX] init 0;\n";
    os << "  init_done : [0..1] init 0;\n\n";

    // Initial draw: each bridge independently and uniformly from the
    // configured init set.
    {
        std::int64_t combos = 1;
        for (int i = 0; i < n; ++i)
            combos *= static_cast<std::int64_t>(cfg.init_conditions.size());
        Rational p(1, combos);
        os << "  [init] (init_done=0) -> ";
        std::vector<std::size_t> pick(static_cast<std::size_t>(n), 0);
        bool first = true;
        while (true) {
            if (!first) os << " + ";
            first = false;
            os << p.str() << ":(init_done'=1)";
            for (int i = 0; i < n; ++i)
                os << " & (" << cond_var(i)
                   << "'=" << cfg.init_conditions[pick[static_cast<std::size_t>(i)]] << ")";
            int d = n - 1;
            for (; d >= 0; --d) {
                if (pick[static_cast<std::size_t>(d)] + 1 < cfg.init_conditions.size()) {
                    ++pick[static_cast<std::size_t>(d)];
                    break;
                }
                pick[static_cast<std::size_t>(d)] = 0;
            }
            if (d < 0) break;
        }
        os << ";\n\n";
    }

    // Joint maintenance actions, in lexicographic action-name order.
    {
        JointAction act;
        act.parts.assign(static_cast<std::size_t>(n), 0);
        while (true) {
            emit_joint_action_commands(os, cfg, act);
            int d = n - 1;
            for (; d >= 0; --d) {
                if (act.parts[static_cast<std::size_t>(d)] < 3) {
                    ++act.parts[static_cast<std::size_t>(d)];
                    break;
                }
                act.parts[static_cast<std::size_t>(d)] = 0;
            }
            if (d < 0) break;
        }
    }

    // Terminal self-loop: any failed bridge or expired horizon.
    os << "\n  [done] (init_done=1) & ((year=T_MAX)";
    for (int i = 0; i < n; ++i) os << " | (" << cond_var(i) << "=0)";
    os << ") -> 1:(year'=year);\n";
    os << "endmodule\n\n";

    auto any_cond = [&](const std::string& rel, int bound) {
        std::string out;
        for (int i = 0; i < n; ++i) {
            if (i > 0) out += " | ";
            out += "(" + cond_var(i) + rel + std::to_string(bound) + ")";
        }
        return out;
    };
    os << "label \"failed\" = " << any_cond("=", 0) << ";\n";
    os << "label \"any_serious\" = " << any_cond("<=", 3) << ";\n";
    os << "label \"any_critical\" = " << any_cond("<=", 2) << ";\n";
    os << "label \"any_poor\" = " << any_cond("<=", 4) << ";\n";
    {
        std::string all_good;
        for (int i = 0; i < n; ++i) {
            if (i > 0) all_good += " & ";
            all_good += "(" + cond_var(i) + ">=7)";
        }
        os << "label \"all_good\" = " << all_good << ";\n";
    }
    os << "label \"budget_empty\" = (budget=0);\n";
    os << "label \"cycle_end\" = (cycle_year=" << cfg.cycle_len - 1 << ");\n\n";

    // Per joint action: rew = 1 - c(a)/C_max on non-terminal transitions.
    // Terminal self-loops (done) and the init draw carry no reward.
    os << "rewards\n";
    {
        JointAction act;
        act.parts.assign(static_cast<std::size_t>(n), 0);
        while (true) {
            Rational r = Rational(1) - Rational(joint_action_cost(act, cfg), cfg.c_max());
            os << "  [" << act.name() << "] (init_done=1) : " << r.str() << ";\n";
            int d = n - 1;
            for (; d >= 0; --d) {
                if (act.parts[static_cast<std::size_t>(d)] < 3) {
                    ++act.parts[static_cast<std::size_t>(d)];
                    break;
                }
                act.parts[static_cast<std::size_t>(d)] = 0;
            }
            if (d < 0) break;
        }
    }
    os << "endrewards\n";
    return os.str();
}

BridgeConfig bridge_config_from(const ConfigFile& file) {
    BridgeConfig cfg;
    cfg.n_bridges = static_cast<int>(file.get_int("bridge", "n_bridges", cfg.n_bridges));
    cfg.b_max = static_cast<int>(file.get_int("bridge", "b_max", cfg.b_max));
    cfg.t_max = static_cast<int>(file.get_int("bridge", "t_max", cfg.t_max));
    cfg.cycle_len = static_cast<int>(file.get_int("bridge", "cycle_len", cfg.cycle_len));
    if (file.has("bridge", "costs")) {
        cfg.costs.clear();
        for (const auto& c : file.get_list("bridge", "costs"))
            cfg.costs.push_back(std::stoi(c));
    }
    if (file.has("bridge", "stay_prob")) {
        cfg.stay_prob.clear();
        for (const auto& p : file.get_list("bridge", "stay_prob"))
            cfg.stay_prob.push_back(parse_rational(p));
    }
    if (file.has("bridge", "deterioration_multipliers")) {
        cfg.deterioration_multipliers.clear();
        for (const auto& m : file.get_list("bridge", "deterioration_multipliers"))
            cfg.deterioration_multipliers.push_back(parse_rational(m));
    } else if (cfg.n_bridges != 3) {
        // Defaults are for three bridges; other sizes must configure.
        cfg.deterioration_multipliers.assign(static_cast<std::size_t>(cfg.n_bridges),
                                             Rational(1));
    }
    if (file.has("bridge", "init_conditions")) {
        cfg.init_conditions.clear();
        for (const auto& c : file.get_list("bridge", "init_conditions"))
            cfg.init_conditions.push_back(std::stoi(c));
    }
    cfg.mn_boost = static_cast<int>(file.get_int("maintenance", "mn_boost", cfg.mn_boost));
    cfg.mj_boost = static_cast<int>(file.get_int("maintenance", "mj_boost", cfg.mj_boost));
    cfg.rp_condition =
        static_cast<int>(file.get_int("maintenance", "rp_condition", cfg.rp_condition));
    cfg.validate();
    return cfg;
}

} // namespace policymc
