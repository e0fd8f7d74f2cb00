#pragma once

#include <string>
#include <vector>

#include "policymc/bridge.hpp"
#include "policymc/check.hpp"
#include "policymc/explicit_mdp.hpp"
#include "policymc/induced.hpp"
#include "policymc/policy.hpp"

namespace policymc {

/// One report table: free-form note lines, a header row, and string cells.
/// Cells are strings so that the CSV form round-trips exactly.
struct ScenarioReport {
    std::string name;
    std::vector<std::string> notes;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

std::string render_report_text(const ScenarioReport& report);
std::string render_report_csv(const ScenarioReport& report);

/// Inverse of render_report_csv (notes come back as comment lines).
ScenarioReport parse_report_csv(const std::string& name, const std::string& text);

/// Writes <out_dir>/<name>.txt and <out_dir>/<name>.csv atomically.
void write_report(const ScenarioReport& report, const std::string& out_dir);

/// Immutable inputs shared by every scenario run.
struct ScenarioContext {
    BridgeConfig config;
    const ExplicitMdp* mdp = nullptr;   // built from `config`
    const PolicyNet* policy = nullptr;  // trained checkpoint
};

ScenarioReport run_baseline(const ScenarioContext& ctx);
ScenarioReport run_lumping(const ScenarioContext& ctx);
ScenarioReport run_global_saliency(const ScenarioContext& ctx);
ScenarioReport run_budget_sweep(const ScenarioContext& ctx,
                                const std::vector<int>& b_values = {9, 10, 11});
ScenarioReport run_cycle_remap(const ScenarioContext& ctx,
                               const std::vector<int>& k_values = {0, 1, 2, 3});
ScenarioReport run_horizon_remap(const ScenarioContext& ctx);
ScenarioReport run_worst_bridge_saliency(const ScenarioContext& ctx);
/// Action labeling distribution and the 1->2 replacement counterfactual,
/// deliberately sharing one report.
ScenarioReport run_action_analysis(const ScenarioContext& ctx);

inline const std::vector<std::string> kScenarioNames = {
    "baseline",      "lumping",       "global_saliency",       "budget_sweep",
    "cycle_remap",   "horizon_remap", "worst_bridge_saliency", "action_analysis"};

/// Runs one scenario by name; throws ModelError for unknown names.
ScenarioReport run_scenario(const std::string& name, const ScenarioContext& ctx);

/// Runs the full suite in declaration order.
std::vector<ScenarioReport> run_all_scenarios(const ScenarioContext& ctx);

} // namespace policymc
