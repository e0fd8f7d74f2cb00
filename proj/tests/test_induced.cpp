#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "policymc/bridge.hpp"
#include "policymc/check.hpp"
#include "policymc/errors.hpp"
#include "test_support.hpp"

using namespace policymc;

TEST_CASE("the first-action policy induces the expected four-state chain") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    InducedDtmc d = build_induced_dtmc(mdp, testing::zero_net(mdp), {});
    REQUIRE(d.num_states() == 4);
    CHECK(d.initial == 0);
    // s0 under a0: 0.7 -> s1, 0.3 -> s2.
    CHECK(d.row_begin[1] - d.row_begin[0] == 2);
    CHECK(d.prob[0] == doctest::Approx(0.7));
    CHECK(d.prob[1] == doctest::Approx(0.3));
    // Every row is stochastic and every state carries one action label.
    for (std::uint32_t s = 0; s < d.num_states(); ++s) {
        double sum = 0.0;
        for (std::uint64_t k = d.row_begin[s]; k < d.row_begin[s + 1]; ++k)
            sum += d.prob[k];
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
    }
    CHECK(d.action_names[d.chosen_action[0]] == "a0");
    CHECK(d.action_names[d.chosen_action[2]] == "end");
    // The origin map is injective.
    auto origins = d.origin;
    std::sort(origins.begin(), origins.end());
    CHECK(std::adjacent_find(origins.begin(), origins.end()) == origins.end());
}

TEST_CASE("action distribution counts selected-action labels") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    InducedDtmc d = build_induced_dtmc(mdp, testing::zero_net(mdp), {});
    auto shares = action_distribution(d);
    CHECK(shares["a0"].count == 2);
    CHECK(shares["end"].count == 2);
    double total = 0.0;
    for (const auto& [name, share] : shares) total += share.fraction;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("transform flag parsing") {
    ObservationTransform lump = parse_lump_flag("feature=cond_b1,bins=0-3:2;4-6:5;7-9:7");
    CHECK(lump.kind == ObservationTransform::Kind::Lump);
    CHECK(lump.feature == "cond_b1");
    REQUIRE(lump.bins.size() == 3);
    CHECK(lump.bins[1].lo == 4);
    CHECK(lump.bins[1].rep == 5);

    ObservationTransform fixed = parse_remap_flag("feature=cycle_year,value=2");
    CHECK(fixed.fixed.has_value());
    CHECK(*fixed.fixed == 2);

    ObservationTransform mapped = parse_remap_flag("feature=year,map=0:16,4:16,1:17");
    CHECK(mapped.value_map.at(0) == 16);
    CHECK(mapped.value_map.at(1) == 17);

    ActionReplacement rep = parse_action_replace_flag("1:2");
    CHECK(rep.source == 1);
    CHECK(rep.target == 2);

    CHECK_THROWS_AS(parse_lump_flag("bins=0-3:2"), ModelError);
    CHECK_THROWS_AS(parse_remap_flag("feature=x,weird=3"), ModelError);
    CHECK_THROWS_AS(parse_action_replace_flag("12"), ModelError);
}

TEST_CASE("transform validation enforces coverage and range membership") {
    ExplicitMdp mdp = testing::build_chain_mdp(); // s : [0..3]
    ObservationTransform gap = parse_lump_flag("feature=s,bins=0-1:0");
    CHECK_THROWS_WITH_AS(validate_transform(gap, mdp.variables),
                         doctest::Contains("cover"), ModelError);
    ObservationTransform out = parse_lump_flag("feature=s,bins=0-3:9");
    CHECK_THROWS_WITH_AS(validate_transform(out, mdp.variables),
                         doctest::Contains("outside"), ModelError);
    ObservationTransform bad_fix = parse_remap_flag("feature=s,value=7");
    CHECK_THROWS_AS(validate_transform(bad_fix, mdp.variables), ModelError);
    ObservationTransform unknown = parse_remap_flag("feature=nope,value=1");
    CHECK_THROWS_AS(validate_transform(unknown, mdp.variables), ModelError);
}

TEST_CASE("transforms act on the raw valuation") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    std::int32_t vals[] = {3};
    auto lumped = apply_transforms(
        vals, mdp.variables, {parse_lump_flag("feature=s,bins=0-1:0;2-3:2")});
    CHECK(lumped[0] == 2);
    auto remapped =
        apply_transforms(vals, mdp.variables, {parse_remap_flag("feature=s,value=1")});
    CHECK(remapped[0] == 1);
    auto off_map =
        apply_transforms(vals, mdp.variables, {parse_remap_flag("feature=s,map=0:1")});
    CHECK(off_map[0] == 3); // off-map values pass through
}

TEST_CASE("identity transforms and empty replacements build bit-identical chains") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    PolicyNet net = testing::zero_net(mdp);
    InducedDtmc base = build_induced_dtmc(mdp, net, {});

    InducedBuildOptions identity_lump;
    identity_lump.transforms.push_back(
        parse_lump_flag("feature=s,bins=0-0:0;1-1:1;2-2:2;3-3:3"));
    CHECK(testing::same_chain(base, build_induced_dtmc(mdp, net, identity_lump)));

    InducedBuildOptions identity_remap;
    identity_remap.transforms.push_back(parse_remap_flag("feature=s,map=0:0,1:1,2:2,3:3"));
    CHECK(testing::same_chain(base, build_induced_dtmc(mdp, net, identity_remap)));

    InducedBuildOptions noop_replace;
    noop_replace.replacement = ActionReplacement{7, 7}; // matches no action name
    CHECK(testing::same_chain(base, build_induced_dtmc(mdp, net, noop_replace)));
}

TEST_CASE("single-source replacement over 3 bridges yields 37 renamings") {
    std::vector<std::string> names;
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b)
            for (int c = 0; c < 4; ++c)
                names.push_back(JointAction{{a, b, c}}.name());
    names.push_back("init");
    names.push_back("done");
    auto renames = expand_action_replacement(ActionReplacement{1, 2}, names);
    CHECK(renames.size() == 37);
    CHECK(renames.at("a1_0_0") == "a2_0_0");
    CHECK(renames.at("a1_1_1") == "a2_2_2");
    CHECK(renames.count("a0_2_3") == 0);
    CHECK(renames.count("init") == 0);
}

TEST_CASE("replacement rewires choices, with fallback when infeasible") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    PolicyNet net = testing::zero_net(mdp); // picks a0 where enabled
    // a0 -> a1 at s=0 (feasible): the induced chain follows a1.
    InducedBuildOptions opts;
    opts.replacement = ActionReplacement{0, 1};
    InducedDtmc d = build_induced_dtmc(mdp, net, opts);
    CHECK(d.action_names[d.chosen_action[0]] == "a1");
    // At s=1 only a0 is enabled; the a1 target is infeasible, so the
    // lexicographic fallback keeps a0 there.
    std::int64_t s1 = -1;
    for (std::uint32_t s = 0; s < d.num_states(); ++s)
        if (d.valuation(s)[0] == 1) s1 = s;
    REQUIRE(s1 >= 0);
    CHECK(d.action_names[d.chosen_action[static_cast<std::uint32_t>(s1)]] == "a0");
}

TEST_CASE("absorb label short-circuits expansion without changing probability") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    PolicyNet net = testing::zero_net(mdp);
    InducedBuildOptions opts;
    opts.absorb_label = "goal";
    InducedDtmc pruned = build_induced_dtmc(mdp, net, opts);
    InducedDtmc full = build_induced_dtmc(mdp, net, {});
    PctlQuery q = parse_property("P=? [ F \"goal\" ]");
    CHECK(check_dtmc(pruned, q).probability ==
          doctest::Approx(check_dtmc(full, q).probability).epsilon(1e-12));
}

TEST_CASE("extra labelers add propositions evaluated on the MDP state") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    InducedBuildOptions opts;
    opts.extra_labelers.push_back(
        {"mid", [](const ExplicitMdp& m, std::uint32_t s) { return m.valuation(s)[0] == 1; }});
    InducedDtmc d = build_induced_dtmc(mdp, testing::zero_net(mdp), opts);
    CHECK(check_dtmc(d, parse_property("P=? [ F \"mid\" ]")).probability ==
          doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("conditional saliency of the zero net keeps declaration order") {
    ExplicitMdp mdp = build_explicit(parse_model(R"(mdp
module m
  x : [0..2] init 0;
  y : [0..2] init 0;
  [go] x<2 -> 0.5:(x'=x+1) + 0.5:(x'=x+1)&(y'=min(2, y+1));
  [stop] x=2 -> 1:(x'=x);
endmodule
)"));
    InducedDtmc d = build_induced_dtmc(mdp, testing::zero_net(mdp), {});
    auto rows = conditional_saliency(
        d, testing::zero_net(mdp),
        [](const InducedDtmc&, std::uint32_t) { return true; });
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].feature == "x");
    CHECK(rows[0].mean == 0.0);
    CHECK(rows[1].feature == "y");
    CHECK_THROWS_AS(conditional_saliency(
                        d, testing::zero_net(mdp),
                        [](const InducedDtmc&, std::uint32_t) { return false; }),
                    VerifyError);
}

TEST_CASE("repeated induced builds are bit-identical") {
    ExplicitMdp mdp = testing::build_chain_mdp();
    PolicyNet net = testing::zero_net(mdp);
    CHECK(testing::same_chain(build_induced_dtmc(mdp, net, {}),
                              build_induced_dtmc(mdp, net, {})));
}
