#include "policymc/induced.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <iomanip>
#include <sstream>
#include <unordered_map>

#include "policymc/errors.hpp"
#include "policymc/io_util.hpp"

namespace policymc {

namespace {

int feature_index(const std::vector<VariableDecl>& variables, const std::string& name) {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return static_cast<int>(i);
    throw ModelError("unknown feature '" + name + "'");
}

} // namespace

void validate_transform(const ObservationTransform& t,
                        const std::vector<VariableDecl>& variables) {
    int idx = feature_index(variables, t.feature);
    const VariableDecl& v = variables[static_cast<std::size_t>(idx)];
    if (t.kind == ObservationTransform::Kind::Lump) {
        if (t.bins.empty())
            throw ModelError("lump on '" + t.feature + "': no bins given");
        for (const auto& b : t.bins) {
            if (b.lo > b.hi)
                throw ModelError("lump on '" + t.feature + "': empty bin " +
                                 std::to_string(b.lo) + "-" + std::to_string(b.hi));
            if (b.rep < v.lo || b.rep > v.hi)
                throw ModelError("lump on '" + t.feature + "': representative " +
                                 std::to_string(b.rep) + " outside range [" +
                                 std::to_string(v.lo) + ".." + std::to_string(v.hi) + "]");
        }
        for (std::int64_t val = v.lo; val <= v.hi; ++val) {
            bool covered = false;
            for (const auto& b : t.bins)
                if (val >= b.lo && val <= b.hi) { covered = true; break; }
            if (!covered)
                throw ModelError("lump on '" + t.feature + "': bins do not cover value " +
                                 std::to_string(val));
        }
    } else {
        if (t.fixed) {
            if (*t.fixed < v.lo || *t.fixed > v.hi)
                throw ModelError("remap on '" + t.feature + "': value " +
                                 std::to_string(*t.fixed) + " outside range [" +
                                 std::to_string(v.lo) + ".." + std::to_string(v.hi) + "]");
        } else {
            for (const auto& [from, to] : t.value_map)
                if (to < v.lo || to > v.hi)
                    throw ModelError("remap on '" + t.feature + "': target " +
                                     std::to_string(to) + " for value " +
                                     std::to_string(from) + " outside range [" +
                                     std::to_string(v.lo) + ".." + std::to_string(v.hi) +
                                     "]");
        }
    }
}

std::vector<std::int32_t> apply_transforms(
    std::span<const std::int32_t> valuation, const std::vector<VariableDecl>& variables,
    const std::vector<ObservationTransform>& transforms) {
    std::vector<std::int32_t> out(valuation.begin(), valuation.end());
    for (const auto& t : transforms) {
        int idx = feature_index(variables, t.feature);
        std::int64_t v = out[static_cast<std::size_t>(idx)];
        if (t.kind == ObservationTransform::Kind::Lump) {
            bool hit = false;
            for (const auto& b : t.bins)
                if (v >= b.lo && v <= b.hi) {
                    v = b.rep;
                    hit = true;
                    break;
                }
            if (!hit)
                throw ModelError("lump on '" + t.feature + "': bins do not cover value " +
                                 std::to_string(v));
        } else if (t.fixed) {
            v = *t.fixed;
        } else {
            auto it = t.value_map.find(v);
            if (it != t.value_map.end()) v = it->second; // off-map values are identity
        }
        out[static_cast<std::size_t>(idx)] = static_cast<std::int32_t>(v);
    }
    return out;
}

std::map<std::string, std::string> expand_action_replacement(
    const ActionReplacement& rep, const std::vector<std::string>& action_names) {
    if (rep.source < 0 || rep.target < 0)
        throw ModelError("action replacement: indices must be non-negative");
    std::map<std::string, std::string> renames;
    for (const auto& name : action_names) {
        // Joint-action names look like a<k1>_<k2>_..._<kn>.
        if (name.size() < 2 || name[0] != 'a' || !std::isdigit(name[1])) continue;
        std::vector<int> parts;
        bool well_formed = true;
        std::size_t i = 1;
        while (i < name.size()) {
            std::size_t j = i;
            while (j < name.size() && std::isdigit(name[j])) ++j;
            if (j == i) { well_formed = false; break; }
            parts.push_back(std::stoi(name.substr(i, j - i)));
            if (j == name.size()) { i = j; break; }
            if (name[j] != '_') { well_formed = false; break; }
            i = j + 1;
            if (i == name.size()) { well_formed = false; break; }
        }
        if (!well_formed) continue;
        bool touched = false;
        for (int& p : parts)
            if (p == rep.source) {
                p = rep.target;
                touched = true;
            }
        if (!touched) continue;
        std::string renamed = "a";
        for (std::size_t k = 0; k < parts.size(); ++k) {
            if (k > 0) renamed += "_";
            renamed += std::to_string(parts[k]);
        }
        if (renamed != name) renames[name] = renamed;
    }
    return renames;
}

InducedDtmc build_induced_dtmc(const ExplicitMdp& mdp, const PolicyNet& net,
                               const InducedBuildOptions& opts) {
    if (mdp.num_states() == 0) throw ModelError("induced build: empty MDP");
    if (!net.action_names.empty() && net.action_names != mdp.action_names)
        throw ModelError("induced build: policy action table does not match the model's");
    if (static_cast<std::size_t>(net.output_dim()) != mdp.action_names.size())
        throw ModelError("induced build: policy emits " + std::to_string(net.output_dim()) +
                         " scores but the model has " +
                         std::to_string(mdp.action_names.size()) + " actions");
    for (const auto& t : opts.transforms) validate_transform(t, mdp.variables);

    std::map<std::string, std::string> renames;
    if (opts.replacement)
        renames = expand_action_replacement(*opts.replacement, mdp.action_names);

    int absorb = -1;
    if (!opts.absorb_label.empty()) {
        absorb = mdp.label_index(opts.absorb_label);
        if (absorb < 0)
            throw VerifyError("unknown label '" + opts.absorb_label + "'");
    }

    InducedDtmc d;
    d.variables = mdp.variables;
    d.action_names = mdp.action_names;
    d.transforms = opts.transforms;
    d.label_names = mdp.label_names;
    for (const auto& [name, fn] : opts.extra_labelers) {
        (void)fn;
        if (d.label_index(name) >= 0)
            throw ModelError("extra label '" + name + "' collides with a model label");
        d.label_names.push_back(name);
    }
    d.label_words = (d.label_names.size() + 63) / 64;
    d.row_begin.push_back(0);

    std::unordered_map<std::uint32_t, std::uint32_t> index; // MDP state -> DTMC state
    std::deque<std::uint32_t> frontier;                     // MDP state ids, BFS order
    index.emplace(mdp.initial, 0u);
    frontier.push_back(mdp.initial);
    d.origin.push_back(mdp.initial);
    d.initial = 0;

    const std::size_t nv = mdp.variables.size();
    while (!frontier.empty()) {
        std::uint32_t s = frontier.front();
        frontier.pop_front();

        auto raw = mdp.valuation(s);
        d.state_values.insert(d.state_values.end(), raw.begin(), raw.end());

        std::vector<std::int32_t> view = apply_transforms(raw, mdp.variables, opts.transforms);
        Eigen::VectorXd obs = observe(net, view);
        std::vector<std::uint32_t> feasible = enabled_actions(mdp, s);
        std::uint32_t chosen = select_action(net, obs, feasible);
        if (!renames.empty()) {
            auto it = renames.find(mdp.action_names[chosen]);
            if (it != renames.end()) {
                int target = mdp.action_index(it->second);
                bool ok = false;
                if (target >= 0)
                    for (std::uint32_t a : feasible)
                        if (a == static_cast<std::uint32_t>(target)) { ok = true; break; }
                chosen = ok ? static_cast<std::uint32_t>(target) : feasible.front();
            }
        }
        d.chosen_action.push_back(chosen);

        std::uint32_t self = index.at(s);
        if (absorb >= 0 && mdp.has_label(s, absorb)) {
            d.succ.push_back(self);
            d.prob.push_back(1.0);
        } else {
            const ExplicitMdp::ActionEntry* entry = nullptr;
            for (const auto& e : mdp.enabled(s))
                if (e.action == chosen) { entry = &e; break; }
            for (std::uint32_t k = entry->branch_begin; k < entry->branch_end; ++k) {
                std::uint32_t t = mdp.succ[k];
                auto [it, fresh] = index.emplace(t, static_cast<std::uint32_t>(index.size()));
                if (fresh) {
                    if (index.size() > opts.state_cap)
                        throw ModelError("induced DTMC exceeds the state cap of " +
                                         std::to_string(opts.state_cap) + " states");
                    frontier.push_back(t);
                    d.origin.push_back(t);
                }
                d.succ.push_back(it->second);
                d.prob.push_back(mdp.prob[k]);
            }
        }
        d.row_begin.push_back(d.succ.size());

        for (std::size_t w = 0; w < d.label_words; ++w) d.label_bits.push_back(0);
        std::uint64_t* bits = d.label_bits.data() + std::size_t(self) * d.label_words;
        for (std::size_t l = 0; l < mdp.label_names.size(); ++l)
            if (mdp.has_label(s, static_cast<int>(l))) bits[l / 64] |= 1ull << (l % 64);
        for (std::size_t e = 0; e < opts.extra_labelers.size(); ++e)
            if (opts.extra_labelers[e].second(mdp, s)) {
                std::size_t l = mdp.label_names.size() + e;
                bits[l / 64] |= 1ull << (l % 64);
            }
    }
    (void)nv;
    return d;
}

std::map<std::string, ActionShare> action_distribution(const InducedDtmc& dtmc) {
    std::map<std::string, ActionShare> shares;
    for (std::uint32_t a : dtmc.chosen_action) ++shares[dtmc.action_names[a]].count;
    double n = double(dtmc.num_states());
    for (auto& [name, share] : shares) share.fraction = double(share.count) / n;
    return shares;
}

std::vector<SaliencyRow> conditional_saliency(
    const InducedDtmc& dtmc, const PolicyNet& net,
    const std::function<bool(const InducedDtmc&, std::uint32_t)>& filter) {
    const std::size_t nf = dtmc.variables.size();
    std::vector<double> sum(nf, 0.0), sumsq(nf, 0.0);
    std::size_t count = 0;
    for (std::uint32_t s = 0; s < dtmc.num_states(); ++s) {
        if (!filter(dtmc, s)) continue;
        std::vector<std::int32_t> view =
            apply_transforms(dtmc.valuation(s), dtmc.variables, dtmc.transforms);
        Eigen::VectorXd g = saliency(net, observe(net, view));
        for (std::size_t f = 0; f < nf; ++f) {
            sum[f] += g[static_cast<Eigen::Index>(f)];
            sumsq[f] += g[static_cast<Eigen::Index>(f)] * g[static_cast<Eigen::Index>(f)];
        }
        ++count;
    }
    if (count == 0) throw VerifyError("conditional saliency: the filter selects no state");
    std::vector<SaliencyRow> rows(nf);
    for (std::size_t f = 0; f < nf; ++f) {
        rows[f].feature = dtmc.variables[f].name;
        rows[f].mean = sum[f] / double(count);
        rows[f].stddev =
            std::sqrt(std::max(0.0, sumsq[f] / double(count) - rows[f].mean * rows[f].mean));
        rows[f].count = count;
    }
    std::stable_sort(rows.begin(), rows.end(),
                     [](const SaliencyRow& a, const SaliencyRow& b) { return a.mean > b.mean; });
    return rows;
}

std::vector<char> induced_label_mask(const InducedDtmc& dtmc, const std::string& name) {
    std::vector<char> mask(dtmc.num_states(), 0);
    int l = dtmc.label_index(name);
    if (l >= 0) {
        for (std::uint32_t s = 0; s < dtmc.num_states(); ++s)
            mask[s] = dtmc.has_label(s, l) ? 1 : 0;
        return mask;
    }
    for (std::size_t a = 0; a < dtmc.action_names.size(); ++a)
        if (dtmc.action_names[a] == name) {
            for (std::uint32_t s = 0; s < dtmc.num_states(); ++s)
                mask[s] = dtmc.chosen_action[s] == a ? 1 : 0;
            return mask;
        }
    throw VerifyError("unknown label '" + name + "'");
}

bool induced_state_satisfies(const InducedDtmc& dtmc, std::uint32_t state,
                             const std::string& name) {
    int l = dtmc.label_index(name);
    if (l >= 0) return dtmc.has_label(state, l);
    for (std::size_t a = 0; a < dtmc.action_names.size(); ++a)
        if (dtmc.action_names[a] == name) return dtmc.chosen_action[state] == a;
    throw VerifyError("unknown label '" + name + "'");
}

namespace {

std::pair<std::string, std::string> split_kv(const std::string& part,
                                             const std::string& flag) {
    auto eq = part.find('=');
    if (eq == std::string::npos)
        throw ModelError(flag + ": expected key=value, got '" + part + "'");
    return {part.substr(0, eq), part.substr(eq + 1)};
}

std::int64_t parse_int(const std::string& s, const std::string& flag) {
    try {
        std::size_t pos = 0;
        std::int64_t v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ModelError(flag + ": '" + s + "' is not an integer");
    }
}

} // namespace

ObservationTransform parse_lump_flag(const std::string& spec) {
    const std::string flag = "--lump";
    auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw ModelError(flag + ": expected 'feature=NAME,bins=LO-HI:REP;...', got '" +
                         spec + "'");
    auto [k1, feature] = split_kv(spec.substr(0, comma), flag);
    auto [k2, binspec] = split_kv(spec.substr(comma + 1), flag);
    if (k1 != "feature" || k2 != "bins" || feature.empty())
        throw ModelError(flag + ": expected 'feature=NAME,bins=LO-HI:REP;...', got '" +
                         spec + "'");
    ObservationTransform t;
    t.kind = ObservationTransform::Kind::Lump;
    t.feature = feature;
    std::istringstream in(binspec);
    std::string item;
    while (std::getline(in, item, ';')) {
        auto dash = item.find('-');
        auto colon = item.find(':');
        if (dash == std::string::npos || colon == std::string::npos || colon < dash)
            throw ModelError(flag + ": bin '" + item + "' must look like LO-HI:REP");
        ObservationTransform::Bin b;
        b.lo = parse_int(item.substr(0, dash), flag);
        b.hi = parse_int(item.substr(dash + 1, colon - dash - 1), flag);
        b.rep = parse_int(item.substr(colon + 1), flag);
        t.bins.push_back(b);
    }
    if (t.bins.empty()) throw ModelError(flag + ": no bins given");
    return t;
}

ObservationTransform parse_remap_flag(const std::string& spec) {
    const std::string flag = "--remap";
    auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw ModelError(flag +
                         ": expected 'feature=NAME,value=K' or 'feature=NAME,map=K:V,...', "
                         "got '" + spec + "'");
    auto [k1, feature] = split_kv(spec.substr(0, comma), flag);
    auto [k2, rest] = split_kv(spec.substr(comma + 1), flag);
    if (k1 != "feature" || feature.empty())
        throw ModelError(flag + ": expected 'feature=NAME,...', got '" + spec + "'");
    ObservationTransform t;
    t.kind = ObservationTransform::Kind::Remap;
    t.feature = feature;
    if (k2 == "value") {
        t.fixed = parse_int(rest, flag);
    } else if (k2 == "map") {
        std::istringstream in(rest);
        std::string item;
        while (std::getline(in, item, ',')) {
            auto colon = item.find(':');
            if (colon == std::string::npos)
                throw ModelError(flag + ": map entry '" + item + "' must look like K:V");
            std::int64_t from = parse_int(item.substr(0, colon), flag);
            std::int64_t to = parse_int(item.substr(colon + 1), flag);
            t.value_map[from] = to;
        }
        if (t.value_map.empty()) throw ModelError(flag + ": empty map");
    } else {
        throw ModelError(flag + ": expected 'value=K' or 'map=K:V,...', got '" +
                         spec.substr(comma + 1) + "'");
    }
    return t;
}

ActionReplacement parse_action_replace_flag(const std::string& spec) {
    const std::string flag = "--action_replace";
    auto colon = spec.find(':');
    if (colon == std::string::npos)
        throw ModelError(flag + ": expected SOURCE:TARGET, got '" + spec + "'");
    ActionReplacement rep;
    rep.source = static_cast<int>(parse_int(spec.substr(0, colon), flag));
    rep.target = static_cast<int>(parse_int(spec.substr(colon + 1), flag));
    if (rep.source < 0 || rep.target < 0)
        throw ModelError(flag + ": indices must be non-negative");
    return rep;
}

void export_induced(const InducedDtmc& dtmc, const std::string& prefix) {
    {
        std::ostringstream os;
        os << "(";
        for (std::size_t i = 0; i < dtmc.variables.size(); ++i) {
            if (i > 0) os << ",";
            os << dtmc.variables[i].name;
        }
        os << ")\n";
        for (std::uint32_t s = 0; s < dtmc.num_states(); ++s) {
            os << s << ":(";
            auto vals = dtmc.valuation(s);
            for (std::size_t i = 0; i < vals.size(); ++i) {
                if (i > 0) os << ",";
                os << vals[i];
            }
            os << ")\n";
        }
        write_file_atomic(prefix + ".sta", os.str());
    }
    {
        std::ostringstream os;
        os << std::setprecision(17);
        for (std::uint32_t s = 0; s < dtmc.num_states(); ++s)
            for (std::uint64_t k = dtmc.row_begin[s]; k < dtmc.row_begin[s + 1]; ++k)
                os << s << " " << dtmc.succ[k] << " " << dtmc.prob[k] << "\n";
        write_file_atomic(prefix + ".tra", os.str());
    }
    {
        std::ostringstream os;
        for (std::uint32_t s = 0; s < dtmc.num_states(); ++s) {
            os << s << ":";
            for (std::size_t l = 0; l < dtmc.label_names.size(); ++l)
                if (dtmc.has_label(s, static_cast<int>(l))) os << " " << dtmc.label_names[l];
            os << " " << dtmc.action_names[dtmc.chosen_action[s]] << "\n";
        }
        write_file_atomic(prefix + ".lab", os.str());
    }
}

} // namespace policymc
