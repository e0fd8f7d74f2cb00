#pragma once

#include <cstdint>
#include <vector>

#include "policymc/explicit_mdp.hpp"
#include "policymc/policy.hpp"

namespace policymc {

struct TrainConfig {
    std::int64_t episodes = 10'000;
    double learning_rate = 3e-4;
    double gamma = 0.99;
    int batch_size = 64;
    double clip_ratio = 0.2;
    int epochs_per_batch = 4;
    std::vector<int> hidden = {512, 512, 512, 512}; // desk-scale override: {64, 64}
    std::uint64_t seed = 42;

    double entropy_coef = 0.01;
    double value_coef = 0.5;
    int rollout_min_steps = 256;  // steps gathered before each update
    int max_episode_steps = 1000;

    void validate() const;
};

/// Clipped-surrogate policy-gradient training with a learned value baseline,
/// using the explicit MDP as the simulator. Single-threaded and fully
/// reproducible from the seed. Sampled infeasible actions fall back to the
/// first enabled action, exactly as at evaluation time.
PolicyNet train(const ExplicitMdp& mdp, const TrainConfig& cfg);

} // namespace policymc
