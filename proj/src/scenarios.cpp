#include "policymc/scenarios.hpp"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "policymc/errors.hpp"
#include "policymc/io_util.hpp"
#include "policymc/model.hpp"
#include "policymc/property.hpp"

namespace policymc {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string csv_cell(const std::string& cell) {
    if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

std::vector<std::string> parse_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(cell);
            cell.clear();
        } else {
            cell += c;
        }
    }
    cells.push_back(cell);
    return cells;
}

const std::vector<std::string> kResultColumns = {"configuration", "query", "probability",
                                                 "states", "transitions"};
const std::vector<std::string> kSaliencyColumns = {"filter", "rank", "feature", "mean",
                                                   "std", "states"};

std::vector<std::string> result_row(const std::string& config, const std::string& query,
                                    const CheckResult& r) {
    return {config, query, fmt(r.probability), std::to_string(r.states),
            std::to_string(r.transitions)};
}

CheckResult verify_induced(const ScenarioContext& ctx, const InducedBuildOptions& opts,
                           const std::string& property) {
    InducedDtmc d = build_induced_dtmc(*ctx.mdp, *ctx.policy, opts);
    return check_dtmc(d, parse_property(property));
}

int feature_of(const InducedDtmc& d, const std::string& name) {
    for (std::size_t i = 0; i < d.variables.size(); ++i)
        if (d.variables[i].name == name) return static_cast<int>(i);
    throw ModelError("unknown feature '" + name + "'");
}

void append_saliency(ScenarioReport& report, const std::string& filter_desc,
                     const std::vector<SaliencyRow>& rows) {
    int rank = 1;
    for (const auto& r : rows)
        report.rows.push_back({filter_desc, std::to_string(rank++), r.feature, fmt(r.mean),
                               fmt(r.stddev), std::to_string(r.count)});
}

} // namespace

std::string render_report_text(const ScenarioReport& report) {
    std::ostringstream os;
    os << "scenario: " << report.name << "\n";
    for (const auto& note : report.notes) os << note << "\n";
    std::vector<std::size_t> width(report.columns.size());
    for (std::size_t c = 0; c < report.columns.size(); ++c)
        width[c] = report.columns[c].size();
    for (const auto& row : report.rows)
        for (std::size_t c = 0; c < row.size(); ++c)
            width[c] = std::max(width[c], row[c].size());
    auto emit = [&](const std::vector<std::string>& cells) {
        for (std::size_t c = 0; c < cells.size(); ++c) {
            if (c > 0) os << "  ";
            os << cells[c];
            if (c + 1 < cells.size())
                os << std::string(width[c] - cells[c].size(), ' ');
        }
        os << "\n";
    };
    os << "\n";
    emit(report.columns);
    std::size_t total = 0;
    for (std::size_t c = 0; c < width.size(); ++c) total += width[c] + (c > 0 ? 2 : 0);
    os << std::string(total, '-') << "\n";
    for (const auto& row : report.rows) emit(row);
    return os.str();
}

std::string render_report_csv(const ScenarioReport& report) {
    std::ostringstream os;
    for (const auto& note : report.notes) os << "# " << note << "\n";
    for (std::size_t c = 0; c < report.columns.size(); ++c) {
        if (c > 0) os << ",";
        os << csv_cell(report.columns[c]);
    }
    os << "\n";
    for (const auto& row : report.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c > 0) os << ",";
            os << csv_cell(row[c]);
        }
        os << "\n";
    }
    return os.str();
}

ScenarioReport parse_report_csv(const std::string& name, const std::string& text) {
    ScenarioReport report;
    report.name = name;
    std::istringstream in(text);
    std::string line;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            report.notes.push_back(line.substr(2));
            continue;
        }
        if (line.empty()) continue;
        if (!header_seen) {
            report.columns = parse_csv_line(line);
            header_seen = true;
        } else {
            report.rows.push_back(parse_csv_line(line));
        }
    }
    return report;
}

void write_report(const ScenarioReport& report, const std::string& out_dir) {
    write_file_atomic(out_dir + "/" + report.name + ".txt", render_report_text(report));
    write_file_atomic(out_dir + "/" + report.name + ".csv", render_report_csv(report));
}

ScenarioReport run_baseline(const ScenarioContext& ctx) {
    ScenarioReport report;
    report.name = "baseline";
    report.notes = {"reachability of the trained policy's induced chain, plus the "
                    "MDP-wide minimum for the failure query"};
    report.columns = kResultColumns;
    InducedDtmc d = build_induced_dtmc(*ctx.mdp, *ctx.policy, {});
    for (const std::string& label :
         {"failed", "any_critical", "any_poor", "budget_empty"}) {
        std::string prop = "P=? [ F \"" + std::string(label) + "\" ]";
        report.rows.push_back(result_row("induced", prop, check_dtmc(d, parse_property(prop))));
    }
    std::string prop = "P=? [ F \"failed\" ]";
    report.rows.push_back(
        result_row("mdp-min", prop,
                   check_mdp_extremal(*ctx.mdp, parse_property(prop), ExtremalMode::Min)));
    return report;
}

ScenarioReport run_lumping(const ScenarioContext& ctx) {
    ScenarioReport report;
    report.name = "lumping";
    report.notes = {"condition features coarsened to bins 0-3:2, 4-6:5, 7-9:7 before "
                    "policy evaluation; verification stays on the original model"};
    report.columns = kResultColumns;
    std::string prop = "P=? [ F \"failed\" ]";
    report.rows.push_back(result_row("baseline", prop, verify_induced(ctx, {}, prop)));
    InducedBuildOptions opts;
    for (int i = 1; i <= ctx.config.n_bridges; ++i)
        opts.transforms.push_back(
            parse_lump_flag("feature=cond_b" + std::to_string(i) + ",bins=0-3:2;4-6:5;7-9:7"));
    report.rows.push_back(result_row("lumped conditions", prop, verify_induced(ctx, opts, prop)));
    return report;
}

ScenarioReport run_global_saliency(const ScenarioContext& ctx) {
    ScenarioReport report;
    report.name = "global_saliency";
    report.notes = {"mean absolute input gradient of the selected action's score, over "
                    "every induced-chain state"};
    report.columns = kSaliencyColumns;
    InducedDtmc d = build_induced_dtmc(*ctx.mdp, *ctx.policy, {});
    append_saliency(report, "all states",
                    conditional_saliency(d, *ctx.policy,
                                         [](const InducedDtmc&, std::uint32_t) { return true; }));
    return report;
}

ScenarioReport run_budget_sweep(const ScenarioContext& ctx, const std::vector<int>& b_values) {
    ScenarioReport report;
    report.name = "budget_sweep";
    report.notes = {"model regenerated per budget cap; the same checkpoint is re-verified "
                    "on each variant"};
    report.columns = kResultColumns;
    std::string prop = "P=? [ F \"budget_empty\" ]";
    for (int b : b_values) {
        BridgeConfig cfg = ctx.config;
        cfg.b_max = b;
        ExplicitMdp mdp = build_explicit(parse_model(generate_bridge_model(cfg)));
        InducedDtmc d = build_induced_dtmc(mdp, *ctx.policy, {});
        report.rows.push_back(result_row("B_max=" + std::to_string(b), prop,
                                         check_dtmc(d, parse_property(prop))));
    }
    return report;
}

ScenarioReport run_cycle_remap(const ScenarioContext& ctx, const std::vector<int>& k_values) {
    ScenarioReport report;
    report.name = "cycle_remap";
    report.notes = {"the policy observes a fixed cycle position k instead of the true one"};
    report.columns = kResultColumns;
    std::string prop = "P=? [ F \"failed\" ]";
    report.rows.push_back(result_row("baseline", prop, verify_induced(ctx, {}, prop)));
    for (int k : k_values) {
        InducedBuildOptions opts;
        opts.transforms.push_back(
            parse_remap_flag("feature=cycle_year,value=" + std::to_string(k)));
        report.rows.push_back(result_row("cycle_year=" + std::to_string(k), prop,
                                         verify_induced(ctx, opts, prop)));
    }
    return report;
}

ScenarioReport run_horizon_remap(const ScenarioContext& ctx) {
    ScenarioReport report;
    report.name = "horizon_remap";
    report.columns = kResultColumns;
    std::string prop = "P=? [ F \"failed\" ]";
    CheckResult unmodified = verify_induced(ctx, {}, prop);
    report.rows.push_back(result_row("baseline", prop, unmodified));
    // Final-cycle base: 16 for the default 20-year horizon with 4-year cycles.
    int base = ctx.config.t_max - ctx.config.cycle_len;
    if (base < 0) base = 0;
    ObservationTransform t;
    t.kind = ObservationTransform::Kind::Remap;
    t.feature = "year";
    for (int y = 0; y <= ctx.config.t_max; ++y)
        t.value_map[y] = base + (y % ctx.config.cycle_len);
    InducedBuildOptions opts;
    opts.transforms.push_back(t);
    CheckResult remapped = verify_induced(ctx, opts, prop);
    report.rows.push_back(result_row("year remapped to " + std::to_string(base) +
                                         " + (year mod " +
                                         std::to_string(ctx.config.cycle_len) + ")",
                                     prop, remapped));
    report.notes = {"the policy sees every year as a final-cycle year, exposing "
                    "end-of-horizon behavior",
                    "delta vs baseline: " +
                        fmt(remapped.probability - unmodified.probability)};
    return report;
}

ScenarioReport run_worst_bridge_saliency(const ScenarioContext& ctx) {
    ScenarioReport report;
    report.name = "worst_bridge_saliency";
    report.notes = {"saliency conditioned on one bridge in poor condition (0-3) while the "
                    "others stay good (5-9)"};
    report.columns = kSaliencyColumns;
    InducedDtmc d = build_induced_dtmc(*ctx.mdp, *ctx.policy, {});
    for (int i = 1; i <= ctx.config.n_bridges; ++i) {
        std::vector<int> cond_idx;
        for (int j = 1; j <= ctx.config.n_bridges; ++j)
            cond_idx.push_back(feature_of(d, "cond_b" + std::to_string(j)));
        int poor = cond_idx[static_cast<std::size_t>(i - 1)];
        auto filter = [&cond_idx, poor](const InducedDtmc& dtmc, std::uint32_t s) {
            auto vals = dtmc.valuation(s);
            for (int idx : cond_idx) {
                std::int32_t v = vals[static_cast<std::size_t>(idx)];
                if (idx == poor) {
                    if (v < 0 || v > 3) return false;
                } else {
                    if (v < 5 || v > 9) return false;
                }
            }
            return true;
        };
        std::string desc = "cond_b" + std::to_string(i) + " in [0,3], others in [5,9]";
        try {
            append_saliency(report, desc, conditional_saliency(d, *ctx.policy, filter));
        } catch (const VerifyError&) {
            report.rows.push_back({desc, "-", "(no matching states)", "-", "-", "0"});
        }
    }
    return report;
}

ScenarioReport run_action_analysis(const ScenarioContext& ctx) {
    ScenarioReport report;
    report.name = "action_analysis";
    report.columns = kResultColumns;
    InducedDtmc d = build_induced_dtmc(*ctx.mdp, *ctx.policy, {});
    for (const auto& [name, share] : action_distribution(d))
        report.rows.push_back({"label " + name, "", fmt(share.fraction),
                               std::to_string(share.count), ""});
    ActionReplacement rep = parse_action_replace_flag("1:2");
    std::size_t renamed = expand_action_replacement(rep, ctx.mdp->action_names).size();
    std::size_t joint = 1;
    for (int i = 0; i < ctx.config.n_bridges; ++i)
        joint *= static_cast<std::size_t>(ctx.config.costs.size());
    report.notes = {"action labeling distribution and the 1:2 replacement counterfactual "
                    "(one shared report)",
                    std::to_string(renamed) + " of " + std::to_string(joint) +
                        " joint actions remapped"};
    std::string prop = "P=? [ F \"budget_empty\" ]";
    report.rows.push_back(result_row("baseline", prop, check_dtmc(d, parse_property(prop))));
    InducedBuildOptions opts;
    opts.replacement = rep;
    report.rows.push_back(
        result_row("action_replace=1:2", prop, verify_induced(ctx, opts, prop)));
    return report;
}

ScenarioReport run_scenario(const std::string& name, const ScenarioContext& ctx) {
    if (name == "baseline") return run_baseline(ctx);
    if (name == "lumping") return run_lumping(ctx);
    if (name == "global_saliency") return run_global_saliency(ctx);
    if (name == "budget_sweep") return run_budget_sweep(ctx);
    if (name == "cycle_remap") return run_cycle_remap(ctx);
    if (name == "horizon_remap") return run_horizon_remap(ctx);
    if (name == "worst_bridge_saliency") return run_worst_bridge_saliency(ctx);
    if (name == "action_analysis") return run_action_analysis(ctx);
    std::string known;
    for (const auto& n : kScenarioNames) known += (known.empty() ? "" : ", ") + n;
    throw ModelError("unknown scenario '" + name + "' (known: " + known + ")");
}

std::vector<ScenarioReport> run_all_scenarios(const ScenarioContext& ctx) {
    std::vector<ScenarioReport> reports;
    for (const auto& name : kScenarioNames) reports.push_back(run_scenario(name, ctx));
    return reports;
}

} // namespace policymc
