#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "policymc/errors.hpp"
#include "policymc/io_util.hpp"
#include "policymc/policy.hpp"
#include "policymc/rng.hpp"
#include "test_support.hpp"

using namespace policymc;

TEST_CASE("fresh nets have fan-in-scaled weights and zero biases") {
    Rng rng(7);
    PolicyNet net = make_policy_net(3, {8, 8}, 4, rng);
    REQUIRE(net.weights.size() == 3);
    CHECK(net.input_dim() == 3);
    CHECK(net.output_dim() == 4);
    double bound = 1.0 / std::sqrt(3.0);
    CHECK(net.weights[0].cwiseAbs().maxCoeff() <= bound);
    CHECK(net.biases[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("observation normalization uses the declared ranges") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    PolicyNet net = testing::zero_net(mdp);
    std::int32_t vals[] = {3};
    Eigen::VectorXd obs = observe(net, vals);
    CHECK(obs[0] == doctest::Approx(1.0)); // (3 - 0) / 3
    std::int32_t wrong[] = {1, 2};
    CHECK_THROWS_AS(observe(net, wrong), ModelError);
}

TEST_CASE("argmax breaks ties toward the lowest index and fallback applies") {
    Eigen::VectorXd scores(3);
    scores << 1.0, 1.0, 0.5;
    CHECK(argmax_action(scores) == 0);

    ExplicitMdp mdp = testing::build_chain_mdp();
    PolicyNet net = testing::zero_net(mdp);
    // Zero scores tie everywhere: global argmax is action 0 (a0).
    std::int32_t v0[] = {0};
    std::uint32_t feasible01[] = {0, 1};
    CHECK(select_action(net, observe(net, v0), feasible01) == 0);
    // In absorbing states only `end` (id 2) is enabled: fallback to it.
    std::uint32_t feasible2[] = {2};
    CHECK(select_action(net, observe(net, v0), feasible2) == 2);
}

TEST_CASE("saliency matches central finite differences") {
    Rng rng(20260823);
    for (int trial = 0; trial < 25; ++trial) {
        PolicyNet net = make_policy_net(5, {12, 12}, 4, rng);
        Eigen::VectorXd obs(5);
        for (int i = 0; i < 5; ++i) obs[i] = rng.uniform(-1.0, 1.0);
        Eigen::VectorXd grad = saliency(net, obs);
        std::uint32_t chosen = argmax_action(forward(net, obs));
        const double h = 1e-5;
        for (int i = 0; i < 5; ++i) {
            Eigen::VectorXd hi = obs, lo = obs;
            hi[i] += h;
            lo[i] -= h;
            double fd =
                std::abs((forward(net, hi)[chosen] - forward(net, lo)[chosen]) / (2 * h));
            CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4));
        }
    }
}

TEST_CASE("the zero network is the always-first-action policy") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    PolicyNet net = testing::zero_net(mdp);
    std::int32_t v0[] = {0};
    Eigen::VectorXd g = saliency(net, observe(net, v0));
    CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("checkpoints round-trip bit-identically") {
    namespace fs = std::filesystem;
    Rng rng(99);
    PolicyNet net = make_policy_net(4, {6}, 3, rng);
    net.action_names = {"a", "b", "c"};
    net.seed = 99;
    net.episodes = 1234;
    net.metadata["gamma"] = "0.99";
    net.norm_low << 0, 0, 1, 0;
    net.norm_width << 9, 10, 3, 1;

    fs::path path = fs::temp_directory_path() / "policymc_ckpt_test.txt";
    save_checkpoint(net, path.string());
    PolicyNet back = load_checkpoint(path.string());
    CHECK(back.seed == net.seed);
    CHECK(back.episodes == net.episodes);
    CHECK(back.metadata == net.metadata);
    CHECK(back.action_names == net.action_names);
    REQUIRE(back.weights.size() == net.weights.size());
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        CHECK(back.weights[l] == net.weights[l]); // exact, via %.17g
        CHECK(back.biases[l] == net.biases[l]);
    }
    CHECK(back.norm_low == net.norm_low);
    CHECK(back.norm_width == net.norm_width);

    // Saving the loaded net reproduces the file byte for byte.
    fs::path again = fs::temp_directory_path() / "policymc_ckpt_test2.txt";
    save_checkpoint(back, again.string());
    CHECK(read_file(path.string()) == read_file(again.string()));
    fs::remove(path);
    fs::remove(again);
}

TEST_CASE("malformed checkpoints are rejected with context") {
    namespace fs = std::filesystem;
    fs::path path = fs::temp_directory_path() / "policymc_ckpt_bad.txt";
    write_file_atomic(path.string(), "not-a-checkpoint 1\n");
    CHECK_THROWS_AS(load_checkpoint(path.string()), ModelError);
    fs::remove(path);
}
