#include "policymc/train.hpp"

#include <cmath>

#include "policymc/errors.hpp"

namespace policymc {

void TrainConfig::validate() const {
    if (episodes <= 0) throw ModelError("train config: episodes must be positive");
    if (learning_rate <= 0) throw ModelError("train config: learning rate must be positive");
    if (gamma < 0 || gamma > 1) throw ModelError("train config: gamma must lie in [0,1]");
    if (batch_size <= 0) throw ModelError("train config: batch size must be positive");
    if (clip_ratio <= 0 || clip_ratio >= 1)
        throw ModelError("train config: clip ratio must lie in (0,1)");
    if (epochs_per_batch <= 0) throw ModelError("train config: epochs must be positive");
    if (hidden.empty()) throw ModelError("train config: at least one hidden layer required");
    for (int h : hidden)
        if (h <= 0) throw ModelError("train config: hidden sizes must be positive");
    if (rollout_min_steps <= 0 || max_episode_steps <= 0)
        throw ModelError("train config: rollout and episode limits must be positive");
}

namespace {

struct Grads {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;

    explicit Grads(const PolicyNet& net) {
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            w.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
            b.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
        }
    }

    void scale(double f) {
        for (auto& m : w) m *= f;
        for (auto& v : b) v *= f;
    }
};

struct Adam {
    std::vector<Eigen::MatrixXd> mw, vw;
    std::vector<Eigen::VectorXd> mb, vb;
    double beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::int64_t t = 0;

    explicit Adam(const PolicyNet& net) {
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            mw.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
            vw.emplace_back(Eigen::MatrixXd::Zero(net.weights[l].rows(), net.weights[l].cols()));
            mb.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
            vb.emplace_back(Eigen::VectorXd::Zero(net.biases[l].size()));
        }
    }

    void step(PolicyNet& net, const Grads& g, double lr) {
        ++t;
        double c1 = 1.0 - std::pow(beta1, double(t));
        double c2 = 1.0 - std::pow(beta2, double(t));
        for (std::size_t l = 0; l < net.weights.size(); ++l) {
            mw[l] = beta1 * mw[l] + (1 - beta1) * g.w[l];
            vw[l] = beta2 * vw[l] + (1 - beta2) * g.w[l].cwiseProduct(g.w[l]);
            net.weights[l] -= lr * (mw[l] / c1)
                                  .cwiseQuotient(((vw[l] / c2).cwiseSqrt().array() + eps)
                                                     .matrix());
            mb[l] = beta1 * mb[l] + (1 - beta1) * g.b[l];
            vb[l] = beta2 * vb[l] + (1 - beta2) * g.b[l].cwiseProduct(g.b[l]);
            net.biases[l] -= lr * (mb[l] / c1)
                                 .cwiseQuotient(((vb[l] / c2).cwiseSqrt().array() + eps)
                                                    .matrix());
        }
    }
};

struct ForwardCache {
    std::vector<Eigen::VectorXd> inputs; // input to each layer
    std::vector<Eigen::VectorXd> pre;    // pre-activation per layer
    Eigen::VectorXd out;
};

ForwardCache forward_cached(const PolicyNet& net, const Eigen::VectorXd& obs) {
    ForwardCache c;
    Eigen::VectorXd h = obs;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        c.inputs.push_back(h);
        c.pre.push_back(net.weights[l] * h + net.biases[l]);
        h = (l + 1 < net.weights.size()) ? c.pre[l].cwiseMax(0.0).eval() : c.pre[l];
    }
    c.out = h;
    return c;
}

void backward(const PolicyNet& net, const ForwardCache& cache, Eigen::VectorXd grad_out,
              Grads& grads) {
    for (std::size_t l = net.weights.size(); l-- > 0;) {
        grads.w[l] += grad_out * cache.inputs[l].transpose();
        grads.b[l] += grad_out;
        if (l == 0) break;
        grad_out = (net.weights[l].transpose() * grad_out).eval();
        for (Eigen::Index i = 0; i < grad_out.size(); ++i)
            if (cache.pre[l - 1][i] <= 0.0) grad_out[i] = 0.0;
    }
}

Eigen::VectorXd softmax(const Eigen::VectorXd& scores) {
    Eigen::VectorXd p = (scores.array() - scores.maxCoeff()).exp();
    return p / p.sum();
}

struct Step {
    Eigen::VectorXd obs;
    std::uint32_t action = 0;
    double logp = 0.0;
    double ret = 0.0;
};

} // namespace

PolicyNet train(const ExplicitMdp& mdp, const TrainConfig& cfg) {
    cfg.validate();
    if (mdp.num_states() == 0) throw ModelError("train: empty MDP");

    const int n_vars = static_cast<int>(mdp.variables.size());
    const int n_actions = static_cast<int>(mdp.action_names.size());
    Rng rng(cfg.seed);

    PolicyNet policy = make_policy_net(n_vars, cfg.hidden, n_actions, rng);
    PolicyNet value = make_policy_net(n_vars, cfg.hidden, 1, rng);
    policy.action_names = mdp.action_names;
    policy.seed = cfg.seed;
    for (int i = 0; i < n_vars; ++i) {
        const auto& v = mdp.variables[static_cast<std::size_t>(i)];
        policy.norm_low[i] = double(v.lo);
        policy.norm_width[i] = double(v.hi > v.lo ? v.hi - v.lo : 1);
    }
    value.norm_low = policy.norm_low;
    value.norm_width = policy.norm_width;

    Adam policy_adam(policy), value_adam(value);
    std::vector<Step> buffer;

    auto run_update = [&]() {
        // Monte Carlo advantages against the value baseline, normalized.
        std::vector<double> adv(buffer.size());
        double mean = 0.0;
        for (std::size_t i = 0; i < buffer.size(); ++i) {
            adv[i] = buffer[i].ret - forward(value, buffer[i].obs)[0];
            mean += adv[i];
        }
        mean /= double(buffer.size());
        double var = 0.0;
        for (double a : adv) var += (a - mean) * (a - mean);
        double sd = std::sqrt(var / double(buffer.size())) + 1e-8;
        for (double& a : adv) a = (a - mean) / sd;

        std::vector<std::size_t> order(buffer.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

        for (int epoch = 0; epoch < cfg.epochs_per_batch; ++epoch) {
            for (std::size_t i = order.size(); i > 1; --i)
                std::swap(order[i - 1], order[rng.uniform_int(i)]);
            for (std::size_t start = 0; start < order.size();
                 start += static_cast<std::size_t>(cfg.batch_size)) {
                std::size_t end = std::min(order.size(),
                                           start + static_cast<std::size_t>(cfg.batch_size));
                Grads pg(policy), vg(value);
                double loss = 0.0;
                for (std::size_t k = start; k < end; ++k) {
                    const Step& st = buffer[order[k]];
                    double a = adv[order[k]];

                    ForwardCache pc = forward_cached(policy, st.obs);
                    Eigen::VectorXd p = softmax(pc.out);
                    double logp_new = std::log(std::max(p[st.action], 1e-300));
                    double ratio = std::exp(logp_new - st.logp);
                    double clipped = std::clamp(ratio, 1.0 - cfg.clip_ratio,
                                                1.0 + cfg.clip_ratio);
                    double entropy = 0.0;
                    for (Eigen::Index j = 0; j < p.size(); ++j)
                        if (p[j] > 0) entropy -= p[j] * std::log(p[j]);
                    loss += -std::min(ratio * a, clipped * a) - cfg.entropy_coef * entropy;

                    Eigen::VectorXd grad_logits = Eigen::VectorXd::Zero(p.size());
                    if (ratio * a <= clipped * a) {
                        // Unclipped branch active: d(-ratio*adv)/dlogits.
                        grad_logits = ratio * a * p;
                        grad_logits[st.action] -= ratio * a;
                    }
                    for (Eigen::Index j = 0; j < p.size(); ++j) {
                        double lp = p[j] > 0 ? std::log(p[j]) : 0.0;
                        grad_logits[j] += cfg.entropy_coef * p[j] * (lp + entropy);
                    }
                    backward(policy, pc, grad_logits, pg);

                    ForwardCache vc = forward_cached(value, st.obs);
                    double verr = vc.out[0] - st.ret;
                    loss += 0.5 * cfg.value_coef * verr * verr;
                    Eigen::VectorXd gv(1);
                    gv[0] = cfg.value_coef * verr;
                    backward(value, vc, gv, vg);
                }
                if (!std::isfinite(loss))
                    throw ModelError("training diverged: non-finite loss");
                double inv = 1.0 / double(end - start);
                pg.scale(inv);
                vg.scale(inv);
                policy_adam.step(policy, pg, cfg.learning_rate);
                value_adam.step(value, vg, cfg.learning_rate);
            }
        }
        buffer.clear();
    };

    for (std::int64_t ep = 0; ep < cfg.episodes; ++ep) {
        std::uint32_t s = mdp.initial;
        std::vector<Step> episode;
        std::vector<double> rewards;
        for (int t = 0; t < cfg.max_episode_steps; ++t) {
            auto acts = mdp.enabled(s);
            if (mdp.is_absorbing(s)) {
                // One final forced step so terminal rewards enter the return.
                rewards.push_back(acts[0].reward);
                break;
            }
            Eigen::VectorXd obs = observe(policy, mdp.valuation(s));
            Eigen::VectorXd p = softmax(forward(policy, obs));
            double u = rng.uniform();
            std::uint32_t sampled = static_cast<std::uint32_t>(p.size()) - 1;
            double acc = 0.0;
            for (Eigen::Index j = 0; j < p.size(); ++j) {
                acc += p[j];
                if (u < acc) { sampled = static_cast<std::uint32_t>(j); break; }
            }
            const ExplicitMdp::ActionEntry* exec = &acts[0];
            for (const auto& e : acts)
                if (e.action == sampled) { exec = &e; break; }

            Step st;
            st.obs = std::move(obs);
            st.action = exec->action;
            st.logp = std::log(std::max(p[exec->action], 1e-300));
            episode.push_back(std::move(st));
            rewards.push_back(exec->reward);

            double v = rng.uniform();
            double cum = 0.0;
            std::uint32_t next = mdp.succ[exec->branch_end - 1];
            for (std::uint32_t k = exec->branch_begin; k < exec->branch_end; ++k) {
                cum += mdp.prob[k];
                if (v < cum) { next = mdp.succ[k]; break; }
            }
            s = next;
        }
        double g = 0.0;
        for (std::size_t i = rewards.size(); i-- > 0;) {
            g = rewards[i] + cfg.gamma * g;
            if (i < episode.size()) episode[i].ret = g;
        }
        for (auto& st : episode) buffer.push_back(std::move(st));
        if (static_cast<int>(buffer.size()) >= cfg.rollout_min_steps) run_update();
    }
    if (!buffer.empty()) run_update();

    policy.episodes = cfg.episodes;
    policy.metadata["learning_rate"] = std::to_string(cfg.learning_rate);
    policy.metadata["gamma"] = std::to_string(cfg.gamma);
    policy.metadata["batch_size"] = std::to_string(cfg.batch_size);
    policy.metadata["clip_ratio"] = std::to_string(cfg.clip_ratio);
    policy.metadata["epochs_per_batch"] = std::to_string(cfg.epochs_per_batch);
    policy.metadata["entropy_coef"] = std::to_string(cfg.entropy_coef);
    policy.metadata["value_coef"] = std::to_string(cfg.value_coef);
    {
        std::string h;
        for (std::size_t i = 0; i < cfg.hidden.size(); ++i) {
            if (i > 0) h += "x";
            h += std::to_string(cfg.hidden[static_cast<std::size_t>(i)]);
        }
        policy.metadata["hidden"] = h;
    }
    return policy;
}

} // namespace policymc
