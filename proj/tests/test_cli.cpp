#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "policymc/io_util.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace policymc;

namespace {

struct RunOutcome {
    int exit_code = -1;
    std::string output; // stdout + stderr
};

RunOutcome run_cli(const std::string& args) {
    fs::path out = fs::temp_directory_path() / "policymc_cli_out.txt";
    std::string cmd = std::string(POLICYMC_BIN) + " " + args + " > " + out.string() + " 2>&1";
    int status = std::system(cmd.c_str());
    RunOutcome r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = read_file(out.string());
    fs::remove(out);
    return r;
}

fs::path workdir() {
    fs::path dir = fs::temp_directory_path() / "policymc_cli_test";
    fs::create_directories(dir);
    return dir;
}

fs::path chain_model_path() {
    fs::path p = workdir() / "chain.pm";
    write_file_atomic(p.string(), testing::kChainModel);
    return p;
}

} // namespace

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli("").exit_code == 1);
    CHECK(run_cli("frobnicate").exit_code == 1);
    CHECK(run_cli("verify --no-such-flag").exit_code == 1);
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("verify --help").exit_code == 0);
}

TEST_CASE("model errors exit with code 2 and a readable message") {
    fs::path bad = workdir() / "bad.pm";
    write_file_atomic(bad.string(), "dtmc\nmodule m\nendmodule\n");
    RunOutcome r = run_cli("build --model " + bad.string());
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("model error") != std::string::npos);
    RunOutcome missing = run_cli("build --model /nonexistent/nowhere.pm");
    CHECK(missing.exit_code == 2);
}

TEST_CASE("verification errors exit with code 3 naming the label") {
    fs::path model = chain_model_path();
    RunOutcome r = run_cli("verify --model " + model.string() +
                           " --prop 'P=? [ F \"nonexistent\" ]' --extremal max");
    CHECK(r.exit_code == 3);
    CHECK(r.output.find("nonexistent") != std::string::npos);
}

TEST_CASE("the happy path: build, extremal verify, train, induced verify") {
    fs::path model = chain_model_path();
    RunOutcome build = run_cli("build --model " + model.string());
    CHECK(build.exit_code == 0);
    CHECK(build.output.find("states=4") != std::string::npos);

    RunOutcome mx = run_cli("verify --model " + model.string() +
                            " --prop 'P=? [ F \"goal\" ]' --extremal max");
    CHECK(mx.exit_code == 0);
    CHECK(mx.output.find("0.86") != std::string::npos);

    fs::path ckpt = workdir() / "chain.ckpt";
    RunOutcome tr = run_cli("train --model " + model.string() + " --out " + ckpt.string() +
                            " --episodes 300 --hidden 8 --seed 1");
    CHECK(tr.exit_code == 0);
    REQUIRE(fs::exists(ckpt));

    RunOutcome vf = run_cli("verify --model " + model.string() + " --policy " +
                            ckpt.string() + " --prop 'P=? [ F \"goal\" ]'");
    CHECK(vf.exit_code == 0);
    CHECK(vf.output.find("probability=") != std::string::npos);
}

TEST_CASE("generate produces a parseable model and POLICY_MC_SEED is honored") {
    fs::path model = workdir() / "net.pm";
    fs::path cfg = workdir() / "net.cfg";
    write_file_atomic(cfg.string(), "[bridge]\nt_max = 2\n");
    CHECK(run_cli("generate --config " + cfg.string() + " --out " + model.string())
              .exit_code == 0);
    RunOutcome build = run_cli("build --model " + model.string());
    CHECK(build.exit_code == 0);
    CHECK(build.output.find("actions=66") != std::string::npos);

    fs::path chain = chain_model_path();
    fs::path ck1 = workdir() / "env1.ckpt";
    fs::path ck2 = workdir() / "env2.ckpt";
    // Same env seed twice: identical checkpoints.
    std::string base = "POLICY_MC_SEED=123 " + std::string(POLICYMC_BIN) + " train --model " +
                       chain.string() + " --episodes 50 --hidden 4 --out ";
    CHECK(std::system((base + ck1.string() + " >/dev/null 2>&1").c_str()) == 0);
    CHECK(std::system((base + ck2.string() + " >/dev/null 2>&1").c_str()) == 0);
    CHECK(read_file(ck1.string()) == read_file(ck2.string()));
    CHECK(read_file(ck1.string()).find("seed 123") != std::string::npos);
}

TEST_CASE("scenario run writes reports and a manifest") {
    fs::path chain = chain_model_path();
    fs::path cfg = workdir() / "tiny.cfg";
    write_file_atomic(cfg.string(), "[bridge]\nt_max = 2\n");
    fs::path model = workdir() / "tiny.pm";
    CHECK(run_cli("generate --config " + cfg.string() + " --out " + model.string())
              .exit_code == 0);
    fs::path ckpt = workdir() / "tiny.ckpt";
    CHECK(run_cli("train --model " + model.string() + " --out " + ckpt.string() +
                  " --episodes 30 --hidden 4 --seed 5")
              .exit_code == 0);
    fs::path out_dir = workdir() / "reports";
    RunOutcome r = run_cli("scenario run baseline --model-config " + cfg.string() +
                           " --policy " + ckpt.string() + " --out-dir " + out_dir.string());
    CHECK(r.exit_code == 0);
    CHECK(fs::exists(out_dir / "baseline.txt"));
    CHECK(fs::exists(out_dir / "baseline.csv"));
    CHECK(fs::exists(out_dir / "manifest.txt"));
    std::string manifest = read_file((out_dir / "manifest.txt").string());
    CHECK(manifest.find("tool_version = ") != std::string::npos);
    CHECK(manifest.find("checkpoint_hash = ") != std::string::npos);
}
