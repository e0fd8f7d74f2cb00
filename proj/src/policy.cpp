#include "policymc/policy.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "policymc/errors.hpp"
#include "policymc/io_util.hpp"

namespace policymc {

PolicyNet make_policy_net(int input_dim, const std::vector<int>& hidden, int output_dim,
                          Rng& rng) {
    PolicyNet net;
    std::vector<int> dims;
    dims.push_back(input_dim);
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(output_dim);
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        int in = dims[l], out = dims[l + 1];
        double scale = 1.0 / std::sqrt(double(in));
        Eigen::MatrixXd w(out, in);
        for (int r = 0; r < out; ++r)
            for (int c = 0; c < in; ++c) w(r, c) = rng.uniform(-scale, scale);
        net.weights.push_back(std::move(w));
        net.biases.push_back(Eigen::VectorXd::Zero(out));
    }
    net.norm_low = Eigen::VectorXd::Zero(input_dim);
    net.norm_width = Eigen::VectorXd::Ones(input_dim);
    return net;
}

Eigen::VectorXd observe(const PolicyNet& net, std::span<const std::int32_t> valuation) {
    if (static_cast<int>(valuation.size()) != net.input_dim())
        throw ModelError("observation dimension mismatch: net expects " +
                         std::to_string(net.input_dim()) + " features, got " +
                         std::to_string(valuation.size()));
    Eigen::VectorXd obs(valuation.size());
    for (Eigen::Index i = 0; i < obs.size(); ++i)
        obs[i] = (double(valuation[static_cast<std::size_t>(i)]) - net.norm_low[i]) /
                 net.norm_width[i];
    return obs;
}

Eigen::VectorXd forward(const PolicyNet& net, const Eigen::VectorXd& obs) {
    if (obs.size() != net.input_dim())
        throw ModelError("forward: observation dimension mismatch");
    Eigen::VectorXd h = obs;
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        h = (net.weights[l] * h + net.biases[l]).eval();
        if (l + 1 < net.weights.size()) h = h.cwiseMax(0.0);
    }
    return h;
}

std::uint32_t argmax_action(const Eigen::VectorXd& scores) {
    Eigen::Index best = 0;
    for (Eigen::Index i = 1; i < scores.size(); ++i)
        if (scores[i] > scores[best]) best = i;
    return static_cast<std::uint32_t>(best);
}

std::uint32_t select_action(const PolicyNet& net, const Eigen::VectorXd& obs,
                            std::span<const std::uint32_t> feasible) {
    std::uint32_t choice = argmax_action(forward(net, obs));
    for (std::uint32_t a : feasible)
        if (a == choice) return choice;
    return feasible.front();
}

Eigen::VectorXd saliency(const PolicyNet& net, const Eigen::VectorXd& obs) {
    const std::size_t n_layers = net.weights.size();
    std::vector<Eigen::VectorXd> pre(n_layers); // pre-activation per layer
    Eigen::VectorXd h = obs;
    for (std::size_t l = 0; l < n_layers; ++l) {
        pre[l] = net.weights[l] * h + net.biases[l];
        h = (l + 1 < n_layers) ? pre[l].cwiseMax(0.0).eval() : pre[l];
    }
    std::uint32_t chosen = argmax_action(h);

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(h.size());
    grad[chosen] = 1.0;
    for (std::size_t l = n_layers; l-- > 0;) {
        grad = (net.weights[l].transpose() * grad).eval();
        if (l > 0) {
            for (Eigen::Index i = 0; i < grad.size(); ++i)
                if (pre[l - 1][i] <= 0.0) grad[i] = 0.0;
        }
    }
    return grad.cwiseAbs();
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

void save_checkpoint(const PolicyNet& net, const std::string& path) {
    std::ostringstream os;
    os << "policymc-checkpoint 1\n";
    os << "seed " << net.seed << "\n";
    os << "episodes " << net.episodes << "\n";
    for (const auto& [k, v] : net.metadata) os << "meta " << k << " " << v << "\n";
    os << "inputs " << net.input_dim() << "\n";
    os << "norm_low";
    for (Eigen::Index i = 0; i < net.norm_low.size(); ++i) os << " " << fmt(net.norm_low[i]);
    os << "\nnorm_width";
    for (Eigen::Index i = 0; i < net.norm_width.size(); ++i)
        os << " " << fmt(net.norm_width[i]);
    os << "\nactions " << net.action_names.size() << "\n";
    for (const auto& a : net.action_names) os << a << "\n";
    os << "layers " << net.weights.size() << "\n";
    for (std::size_t l = 0; l < net.weights.size(); ++l) {
        const auto& w = net.weights[l];
        os << "layer " << w.rows() << " " << w.cols() << "\n";
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            for (Eigen::Index c = 0; c < w.cols(); ++c) {
                if (c > 0) os << " ";
                os << fmt(w(r, c));
            }
            os << "\n";
        }
        os << "bias";
        for (Eigen::Index r = 0; r < net.biases[l].size(); ++r)
            os << " " << fmt(net.biases[l][r]);
        os << "\n";
    }
    write_file_atomic(path, os.str());
}

PolicyNet load_checkpoint(const std::string& path) {
    std::istringstream in(read_file(path));
    std::string word;
    auto need = [&](const std::string& what) {
        if (!(in >> word) || word != what)
            throw ModelError("checkpoint " + path + ": expected '" + what + "'");
    };
    need("policymc-checkpoint");
    int version = 0;
    in >> version;
    if (version != 1) throw ModelError("checkpoint " + path + ": unsupported version");
    PolicyNet net;
    need("seed");
    in >> net.seed;
    need("episodes");
    in >> net.episodes;
    while (in >> word && word == "meta") {
        std::string k, v;
        in >> k >> v;
        net.metadata[k] = v;
    }
    if (word != "inputs") throw ModelError("checkpoint " + path + ": expected 'inputs'");
    int inputs = 0;
    in >> inputs;
    net.norm_low.resize(inputs);
    net.norm_width.resize(inputs);
    need("norm_low");
    for (int i = 0; i < inputs; ++i) in >> net.norm_low[i];
    need("norm_width");
    for (int i = 0; i < inputs; ++i) in >> net.norm_width[i];
    need("actions");
    std::size_t n_actions = 0;
    in >> n_actions;
    for (std::size_t i = 0; i < n_actions; ++i) {
        std::string a;
        in >> a;
        net.action_names.push_back(a);
    }
    need("layers");
    std::size_t n_layers = 0;
    in >> n_layers;
    for (std::size_t l = 0; l < n_layers; ++l) {
        need("layer");
        Eigen::Index rows = 0, cols = 0;
        in >> rows >> cols;
        Eigen::MatrixXd w(rows, cols);
        for (Eigen::Index r = 0; r < rows; ++r)
            for (Eigen::Index c = 0; c < cols; ++c) in >> w(r, c);
        need("bias");
        Eigen::VectorXd b(rows);
        for (Eigen::Index r = 0; r < rows; ++r) in >> b[r];
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    if (!in) throw ModelError("checkpoint " + path + ": truncated or malformed");
    if (net.weights.empty()) throw ModelError("checkpoint " + path + ": no layers");
    if (net.weights.front().cols() != inputs)
        throw ModelError("checkpoint " + path + ": input dimension mismatch");
    if (static_cast<std::size_t>(net.weights.back().rows()) != n_actions)
        throw ModelError("checkpoint " + path + ": action table size mismatch");
    return net;
}

} // namespace policymc
