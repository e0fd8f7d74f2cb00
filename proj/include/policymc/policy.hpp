#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "policymc/rng.hpp"

namespace policymc {

/// Feedforward policy with rectified-linear hidden layers and one
/// pre-softmax score per global action. Evaluation is deterministic and a
/// finished net is immutable, so concurrent readers are safe.
struct PolicyNet {
    std::vector<Eigen::MatrixXd> weights; // layer l: (out x in)
    std::vector<Eigen::VectorXd> biases;
    std::vector<std::string> action_names; // fixes output ordering
    Eigen::VectorXd norm_low;              // per input feature
    Eigen::VectorXd norm_width;

    std::uint64_t seed = 0;
    std::int64_t episodes = 0;
    std::map<std::string, std::string> metadata;

    int input_dim() const { return static_cast<int>(weights.front().cols()); }
    int output_dim() const { return static_cast<int>(weights.back().rows()); }
};

/// Fresh net with fan-in-scaled uniform weights from the seeded generator.
PolicyNet make_policy_net(int input_dim, const std::vector<int>& hidden, int output_dim,
                          Rng& rng);

/// Normalizes a raw integer valuation into the net's observation space.
Eigen::VectorXd observe(const PolicyNet& net, std::span<const std::int32_t> valuation);

/// Pre-softmax scores, one per global action.
Eigen::VectorXd forward(const PolicyNet& net, const Eigen::VectorXd& obs);

/// Argmax over the scores (ties to the lowest index).
std::uint32_t argmax_action(const Eigen::VectorXd& scores);

/// Argmax over the global action set; when the argmax is infeasible, falls
/// back to the first element of `feasible` (lexicographically first, by the
/// MDP's enabled ordering).
std::uint32_t select_action(const PolicyNet& net, const Eigen::VectorXd& obs,
                            std::span<const std::uint32_t> feasible);

/// |d score_{a*} / d f_i| per input feature, where a* is the action
/// select_action would pick on the unrestricted action set; exact
/// reverse-mode differentiation.
Eigen::VectorXd saliency(const PolicyNet& net, const Eigen::VectorXd& obs);

void save_checkpoint(const PolicyNet& net, const std::string& path);
PolicyNet load_checkpoint(const std::string& path);

} // namespace policymc
