#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "policymc/bridge.hpp"
#include "policymc/check.hpp"
#include "policymc/config.hpp"
#include "policymc/errors.hpp"
#include "policymc/io_util.hpp"
#include "policymc/manifest.hpp"
#include "policymc/model.hpp"
#include "policymc/scenarios.hpp"
#include "policymc/train.hpp"

namespace {

using namespace policymc;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitModel = 2;
constexpr int kExitVerify = 3;

/// Seed precedence: explicit flag > POLICY_MC_SEED > config > default.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed,
                           const ConfigFile* config, std::uint64_t fallback) {
    if (flag_seed) return *flag_seed;
    if (const char* env = std::getenv("POLICY_MC_SEED")) {
        try {
            return std::stoull(env);
        } catch (const std::exception&) {
            throw ModelError("POLICY_MC_SEED is set to '" + std::string(env) +
                             "', which is not an unsigned integer");
        }
    }
    if (config && config->has("train", "seed"))
        return static_cast<std::uint64_t>(config->get_int("train", "seed", 0));
    return fallback;
}

BridgeConfig load_bridge_config(const std::string& path) {
    if (path.empty()) return BridgeConfig{};
    return bridge_config_from(ConfigFile::load(path));
}

ExplicitMdp load_mdp(const std::string& model_path) {
    return build_explicit(parse_model(read_file(model_path)));
}

struct TransformFlags {
    std::vector<std::string> lumps;
    std::vector<std::string> remaps;
    std::string action_replace;

    void attach(CLI::App* cmd) {
        cmd->add_option("--lump", lumps,
                        "observation lumping, e.g. feature=cond_b1,bins=0-3:2;4-6:5;7-9:7")
            ->take_all();
        cmd->add_option("--remap", remaps,
                        "observation remapping, e.g. feature=cycle_year,value=2 or "
                        "feature=year,map=0:16,1:17")
            ->take_all();
        cmd->add_option("--action_replace", action_replace,
                        "per-bridge action substitution SOURCE:TARGET, e.g. 1:2");
    }

    InducedBuildOptions build_options() const {
        InducedBuildOptions opts;
        for (const auto& s : lumps) opts.transforms.push_back(parse_lump_flag(s));
        for (const auto& s : remaps) opts.transforms.push_back(parse_remap_flag(s));
        if (!action_replace.empty())
            opts.replacement = parse_action_replace_flag(action_replace);
        return opts;
    }
};

int run(int argc, char** argv) {
    CLI::App app{"policy training, induced-chain construction and PCTL verification"};
    app.require_subcommand(1);

    // ---- generate ----------------------------------------------------------
    auto* generate = app.add_subcommand("generate", "emit the maintenance-network model");
    std::string gen_config, gen_out;
    generate->add_option("--config", gen_config, "sectioned key-value config file");
    generate->add_option("--out", gen_out, "output model path (stdout when omitted)");

    // ---- build -------------------------------------------------------------
    auto* build = app.add_subcommand("build", "enumerate the explicit MDP and report stats");
    std::string build_model, build_export;
    build->add_option("--model", build_model, "model file")->required();
    build->add_option("--export", build_export, "write <prefix>.sta/.tra/.lab");

    // ---- train -------------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train a policy on the explicit MDP");
    std::string train_model, train_out, train_config, train_hidden;
    std::optional<std::uint64_t> train_seed;
    std::optional<std::int64_t> train_episodes;
    train_cmd->add_option("--model", train_model, "model file")->required();
    train_cmd->add_option("--out", train_out, "checkpoint output path")->required();
    train_cmd->add_option("--config", train_config, "config file with a [train] section");
    train_cmd->add_option("--episodes", train_episodes, "training episodes");
    train_cmd->add_option("--seed", train_seed, "training seed");
    train_cmd->add_option("--hidden", train_hidden, "hidden sizes, e.g. 64,64");

    // ---- verify ------------------------------------------------------------
    auto* verify = app.add_subcommand("verify", "check a PCTL query");
    std::string verify_model, verify_policy, verify_prop, verify_extremal;
    TransformFlags verify_flags;
    verify->add_option("--model", verify_model, "model file")->required();
    verify->add_option("--policy", verify_policy, "policy checkpoint");
    verify->add_option("--prop", verify_prop, "PCTL query, e.g. 'P=? [ F \"failed\" ]'")
        ->required();
    verify->add_option("--extremal", verify_extremal,
                       "check the full MDP instead of the induced chain: min or max")
        ->check(CLI::IsMember({"min", "max"}));
    verify_flags.attach(verify);

    // ---- explain -----------------------------------------------------------
    auto* explain = app.add_subcommand(
        "explain", "saliency ranking and action distribution of the induced chain");
    std::string explain_model, explain_policy;
    TransformFlags explain_flags;
    explain->add_option("--model", explain_model, "model file")->required();
    explain->add_option("--policy", explain_policy, "policy checkpoint")->required();
    explain_flags.attach(explain);

    // ---- scenario ----------------------------------------------------------
    auto* scenario = app.add_subcommand("scenario", "scripted experiment reproductions");
    auto* scenario_run = scenario->add_subcommand("run", "run one scenario or 'all'");
    std::string scen_name, scen_config, scen_policy, scen_out_dir;
    scenario_run->add_option("name", scen_name, "scenario name or 'all'")->required();
    scenario_run->add_option("--model-config", scen_config, "model config file");
    scenario_run->add_option("--policy", scen_policy, "policy checkpoint")->required();
    scenario_run->add_option("--out-dir", scen_out_dir, "report output directory")
        ->required();
    scenario->require_subcommand(1);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*generate) {
            std::string text = generate_bridge_model(load_bridge_config(gen_config));
            if (gen_out.empty())
                std::cout << text;
            else
                write_file_atomic(gen_out, text);
            return kExitOk;
        }

        if (*build) {
            ExplicitMdp mdp = load_mdp(build_model);
            std::cout << "states=" << mdp.num_states()
                      << " transitions=" << mdp.num_transitions()
                      << " actions=" << mdp.action_names.size()
                      << " labels=" << mdp.label_names.size() << "\n";
            if (!build_export.empty()) {
                export_explicit(mdp, build_export);
                std::cout << "exported " << build_export << ".sta/.tra/.lab\n";
            }
            return kExitOk;
        }

        if (*train_cmd) {
            ExplicitMdp mdp = load_mdp(train_model);
            ConfigFile cfg_file;
            bool have_cfg = !train_config.empty();
            if (have_cfg) cfg_file = ConfigFile::load(train_config);
            TrainConfig cfg;
            if (have_cfg) {
                cfg.episodes = cfg_file.get_int("train", "episodes", cfg.episodes);
                cfg.learning_rate =
                    cfg_file.get_double("train", "learning_rate", cfg.learning_rate);
                cfg.gamma = cfg_file.get_double("train", "gamma", cfg.gamma);
                cfg.batch_size = static_cast<int>(
                    cfg_file.get_int("train", "batch_size", cfg.batch_size));
                cfg.clip_ratio = cfg_file.get_double("train", "clip_ratio", cfg.clip_ratio);
                cfg.epochs_per_batch = static_cast<int>(
                    cfg_file.get_int("train", "epochs_per_batch", cfg.epochs_per_batch));
                cfg.entropy_coef =
                    cfg_file.get_double("train", "entropy_coef", cfg.entropy_coef);
                cfg.value_coef = cfg_file.get_double("train", "value_coef", cfg.value_coef);
                if (cfg_file.has("train", "hidden")) {
                    cfg.hidden.clear();
                    for (const auto& h : cfg_file.get_list("train", "hidden"))
                        cfg.hidden.push_back(std::stoi(h));
                }
            }
            if (train_episodes) cfg.episodes = *train_episodes;
            if (!train_hidden.empty()) {
                cfg.hidden.clear();
                for (const auto& h : split(train_hidden, ','))
                    cfg.hidden.push_back(std::stoi(trim(h)));
            }
            cfg.seed = resolve_seed(train_seed, have_cfg ? &cfg_file : nullptr, cfg.seed);
            PolicyNet net = train(mdp, cfg);
            save_checkpoint(net, train_out);
            std::cout << "trained " << cfg.episodes << " episodes (seed " << cfg.seed
                      << "), checkpoint written to " << train_out << "\n";
            return kExitOk;
        }

        if (*verify) {
            ExplicitMdp mdp = load_mdp(verify_model);
            PctlQuery q = parse_property(verify_prop);
            CheckResult r;
            if (!verify_extremal.empty()) {
                r = check_mdp_extremal(
                    mdp, q,
                    verify_extremal == "min" ? ExtremalMode::Min : ExtremalMode::Max);
                std::cout << (verify_extremal == "min" ? "minimal" : "maximal")
                          << " probability of " << print_property(q) << " over the MDP: "
                          << r.probability << "\n";
            } else {
                if (verify_policy.empty())
                    throw ModelError(
                        "verify needs --policy for induced-chain checking "
                        "(or --extremal min|max for the full MDP)");
                PolicyNet net = load_checkpoint(verify_policy);
                InducedDtmc d = build_induced_dtmc(mdp, net, verify_flags.build_options());
                r = check_dtmc(d, q);
                std::cout << "probability of " << print_property(q)
                          << " on the induced chain: " << r.probability << "\n";
            }
            if (r.satisfied)
                std::cout << "threshold " << (*r.satisfied ? "satisfied" : "violated")
                          << "\n";
            std::cout << format_check_result(r) << "\n";
            return kExitOk;
        }

        if (*explain) {
            ExplicitMdp mdp = load_mdp(explain_model);
            PolicyNet net = load_checkpoint(explain_policy);
            InducedDtmc d = build_induced_dtmc(mdp, net, explain_flags.build_options());
            std::cout << "induced chain: " << d.num_states() << " states, "
                      << d.num_transitions() << " transitions\n\naction distribution:\n";
            for (const auto& [name, share] : action_distribution(d))
                std::cout << "  " << name << ": " << share.count << " states ("
                          << share.fraction << ")\n";
            std::cout << "\nsaliency ranking (mean |gradient| over all states):\n";
            int rank = 1;
            for (const auto& row : conditional_saliency(
                     d, net, [](const InducedDtmc&, std::uint32_t) { return true; }))
                std::cout << "  " << rank++ << ". " << row.feature << " mean=" << row.mean
                          << " std=" << row.stddev << "\n";
            return kExitOk;
        }

        if (*scenario_run) {
            RunManifest manifest;
            manifest.started_at = iso_utc_now();
            for (int i = 0; i < argc; ++i)
                manifest.command_line += std::string(i > 0 ? " " : "") + argv[i];

            BridgeConfig cfg = load_bridge_config(scen_config);
            std::string model_text = generate_bridge_model(cfg);
            ExplicitMdp mdp = build_explicit(parse_model(model_text));
            PolicyNet net = load_checkpoint(scen_policy);
            manifest.model_hash = content_hash(model_text);
            manifest.checkpoint_hash = content_hash(read_file(scen_policy));
            if (!scen_config.empty())
                manifest.config_hash = content_hash(read_file(scen_config));
            manifest.seed = net.seed;

            ScenarioContext ctx{cfg, &mdp, &net};
            std::filesystem::create_directories(scen_out_dir);
            std::vector<ScenarioReport> reports;
            if (scen_name == "all")
                reports = run_all_scenarios(ctx);
            else
                reports.push_back(run_scenario(scen_name, ctx));
            for (const auto& report : reports) {
                write_report(report, scen_out_dir);
                std::cout << "wrote " << scen_out_dir << "/" << report.name
                          << ".txt and .csv\n";
            }
            manifest.finished_at = iso_utc_now();
            write_manifest(manifest, scen_out_dir + "/manifest.txt");
            return kExitOk;
        }
    } catch (const VerifyError& e) {
        std::cerr << "verification error: " << e.what() << "\n";
        return kExitVerify;
    } catch (const ParseError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModel;
    } catch (const ModelError& e) {
        std::cerr << "model error: " << e.what() << "\n";
        return kExitModel;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitModel;
    }
    return kExitUsage;
}

} // namespace

int main(int argc, char** argv) { return run(argc, argv); }
