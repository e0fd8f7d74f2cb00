#include "policymc/check.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <vector>

#include "policymc/errors.hpp"

namespace policymc {

namespace {

constexpr std::size_t kDirectSolveLimit = 50'000;
constexpr double kConvergence = 1e-10;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Backward reachability: states with a path to `seed` where every state on
/// the path before the seed satisfies `via` (pass nullptr for no restriction).
std::vector<char> backward_reach(const InducedDtmc& d, const std::vector<char>& seed,
                                 const std::vector<char>* via) {
    const std::size_t n = d.num_states();
    std::vector<std::vector<std::uint32_t>> pred(n);
    for (std::uint32_t s = 0; s < n; ++s) {
        if (via && !(*via)[s]) continue;
        for (std::uint64_t k = d.row_begin[s]; k < d.row_begin[s + 1]; ++k)
            if (d.prob[k] > 0.0) pred[d.succ[k]].push_back(s);
    }
    std::vector<char> reach(n, 0);
    std::deque<std::uint32_t> queue;
    for (std::uint32_t s = 0; s < n; ++s)
        if (seed[s]) {
            reach[s] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        std::uint32_t t = queue.front();
        queue.pop_front();
        for (std::uint32_t s : pred[t])
            if (!reach[s]) {
                reach[s] = 1;
                queue.push_back(s);
            }
    }
    return reach;
}

/// Unbounded reachability probabilities with an optional constraint set
/// ("until" semantics: paths must stay inside `constraint` before the target).
std::vector<double> solve_unbounded(const InducedDtmc& d, const std::vector<char>& target,
                                    const std::vector<char>* constraint) {
    const std::size_t n = d.num_states();
    for (std::uint32_t s = 0; s < n; ++s) {
        double row = 0.0;
        for (std::uint64_t k = d.row_begin[s]; k < d.row_begin[s + 1]; ++k)
            row += d.prob[k];
        if (std::abs(row - 1.0) > 1e-9)
            throw VerifyError("non-stochastic row at state " + std::to_string(s) +
                              " (sums to " + std::to_string(row) + ")");
    }

    // Path states: non-target states the path may pass through.
    std::vector<char> via(n, 1);
    for (std::uint32_t s = 0; s < n; ++s)
        if (target[s] || (constraint && !(*constraint)[s])) via[s] = 0;

    // S0: no path through `via` states reaches the target.
    std::vector<char> can_reach = backward_reach(d, target, &via);
    std::vector<char> s0(n, 0);
    for (std::uint32_t s = 0; s < n; ++s) s0[s] = can_reach[s] ? 0 : 1;

    // S1: cannot reach S0 while the target is absorbing.
    std::vector<char> reaches_s0 = backward_reach(d, s0, &via);
    std::vector<char> s1(n, 0);
    for (std::uint32_t s = 0; s < n; ++s) s1[s] = reaches_s0[s] ? 0 : 1;

    std::vector<double> x(n, 0.0);
    for (std::uint32_t s = 0; s < n; ++s)
        if (s1[s]) x[s] = 1.0;

    std::vector<std::int64_t> unknown_of(n, -1);
    std::vector<std::uint32_t> unknowns;
    for (std::uint32_t s = 0; s < n; ++s)
        if (!s0[s] && !s1[s]) {
            unknown_of[s] = static_cast<std::int64_t>(unknowns.size());
            unknowns.push_back(s);
        }
    if (unknowns.empty()) return x;

    if (unknowns.size() <= kDirectSolveLimit) {
        // (I - A) y = b over the unknown block.
        std::vector<Eigen::Triplet<double>> trips;
        Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(unknowns.size()));
        for (std::size_t i = 0; i < unknowns.size(); ++i) {
            std::uint32_t s = unknowns[i];
            double diag = 1.0;
            for (std::uint64_t k = d.row_begin[s]; k < d.row_begin[s + 1]; ++k) {
                std::uint32_t t = d.succ[k];
                if (s1[t]) {
                    b[static_cast<Eigen::Index>(i)] += d.prob[k];
                } else if (unknown_of[t] >= 0) {
                    if (t == s)
                        diag -= d.prob[k];
                    else
                        trips.emplace_back(static_cast<int>(i),
                                           static_cast<int>(unknown_of[t]), -d.prob[k]);
                }
            }
            trips.emplace_back(static_cast<int>(i), static_cast<int>(i), diag);
        }
        Eigen::SparseMatrix<double> m(static_cast<int>(unknowns.size()),
                                      static_cast<int>(unknowns.size()));
        m.setFromTriplets(trips.begin(), trips.end());
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(m);
        if (lu.info() != Eigen::Success)
            throw VerifyError("linear solve failed on the reachability system");
        Eigen::VectorXd y = lu.solve(b);
        for (std::size_t i = 0; i < unknowns.size(); ++i)
            x[unknowns[i]] = y[static_cast<Eigen::Index>(i)];
    } else {
        for (;;) {
            double delta = 0.0;
            for (std::uint32_t s : unknowns) {
                double v = 0.0;
                for (std::uint64_t k = d.row_begin[s]; k < d.row_begin[s + 1]; ++k)
                    v += d.prob[k] * x[d.succ[k]];
                delta = std::max(delta, std::abs(v - x[s]));
                x[s] = v;
            }
            if (delta <= kConvergence) break;
        }
    }
    for (std::uint32_t s = 0; s < n; ++s) x[s] = std::clamp(x[s], 0.0, 1.0);
    return x;
}

std::vector<double> solve_bounded(const InducedDtmc& d, const std::vector<char>& target,
                                  std::int64_t bound) {
    const std::size_t n = d.num_states();
    std::vector<double> x(n, 0.0), next(n, 0.0);
    for (std::uint32_t s = 0; s < n; ++s)
        if (target[s]) x[s] = 1.0;
    for (std::int64_t step = 0; step < bound; ++step) {
        for (std::uint32_t s = 0; s < n; ++s) {
            if (target[s]) {
                next[s] = 1.0;
                continue;
            }
            double v = 0.0;
            for (std::uint64_t k = d.row_begin[s]; k < d.row_begin[s + 1]; ++k)
                v += d.prob[k] * x[d.succ[k]];
            next[s] = v;
        }
        x.swap(next);
    }
    return x;
}

std::vector<char> mdp_label_mask(const ExplicitMdp& mdp, const std::string& name) {
    int l = mdp.label_index(name);
    if (l < 0) throw VerifyError("unknown label '" + name + "'");
    std::vector<char> mask(mdp.num_states(), 0);
    for (std::uint32_t s = 0; s < mdp.num_states(); ++s)
        mask[s] = mdp.has_label(s, l) ? 1 : 0;
    return mask;
}

double opt_action_value(const ExplicitMdp& mdp, std::uint32_t s,
                        const std::vector<double>& x, ExtremalMode mode) {
    double best = mode == ExtremalMode::Max ? 0.0 : 1.0;
    for (const auto& e : mdp.enabled(s)) {
        double v = 0.0;
        for (std::uint32_t k = e.branch_begin; k < e.branch_end; ++k)
            v += mdp.prob[k] * x[mdp.succ[k]];
        best = mode == ExtremalMode::Max ? std::max(best, v) : std::min(best, v);
    }
    return best;
}

/// Max mode: states the target is unreachable from under every scheduler.
/// Min mode: states some scheduler keeps away from the target forever.
std::vector<char> mdp_prob0(const ExplicitMdp& mdp, const std::vector<char>& target,
                            ExtremalMode mode) {
    const std::size_t n = mdp.num_states();
    std::vector<char> positive = target; // min over target, or reach set for max
    if (mode == ExtremalMode::Max) {
        std::vector<std::vector<std::uint32_t>> pred(n);
        for (std::uint32_t s = 0; s < n; ++s)
            for (const auto& e : mdp.enabled(s))
                for (std::uint32_t k = e.branch_begin; k < e.branch_end; ++k)
                    if (mdp.prob[k] > 0.0) pred[mdp.succ[k]].push_back(s);
        std::deque<std::uint32_t> queue;
        for (std::uint32_t s = 0; s < n; ++s)
            if (positive[s]) queue.push_back(s);
        while (!queue.empty()) {
            std::uint32_t t = queue.front();
            queue.pop_front();
            for (std::uint32_t s : pred[t])
                if (!positive[s]) {
                    positive[s] = 1;
                    queue.push_back(s);
                }
        }
    } else {
        // Least fixpoint: positive iff every action has some successor already
        // positive; repeat to saturation.
        bool changed = true;
        while (changed) {
            changed = false;
            for (std::uint32_t s = 0; s < n; ++s) {
                if (positive[s]) continue;
                bool all_actions = true;
                for (const auto& e : mdp.enabled(s)) {
                    bool hits = false;
                    for (std::uint32_t k = e.branch_begin; k < e.branch_end; ++k)
                        if (mdp.prob[k] > 0.0 && positive[mdp.succ[k]]) {
                            hits = true;
                            break;
                        }
                    if (!hits) {
                        all_actions = false;
                        break;
                    }
                }
                if (all_actions) {
                    positive[s] = 1;
                    changed = true;
                }
            }
        }
    }
    std::vector<char> zero(n, 0);
    for (std::uint32_t s = 0; s < n; ++s) zero[s] = positive[s] ? 0 : 1;
    return zero;
}

/// Greatest fixpoint computation of the states where the maximal reachability
/// probability equals 1.
std::vector<char> mdp_prob1_max(const ExplicitMdp& mdp, const std::vector<char>& target) {
    const std::size_t n = mdp.num_states();
    std::vector<char> outer(n, 1);
    for (;;) {
        std::vector<char> inner = target;
        bool grew = true;
        while (grew) {
            grew = false;
            for (std::uint32_t s = 0; s < n; ++s) {
                if (inner[s] || !outer[s]) continue;
                for (const auto& e : mdp.enabled(s)) {
                    bool stays = true, hits = false;
                    for (std::uint32_t k = e.branch_begin; k < e.branch_end; ++k) {
                        if (mdp.prob[k] <= 0.0) continue;
                        if (!outer[mdp.succ[k]]) stays = false;
                        if (inner[mdp.succ[k]]) hits = true;
                    }
                    if (stays && hits) {
                        inner[s] = 1;
                        grew = true;
                        break;
                    }
                }
            }
        }
        if (inner == outer) return outer;
        outer.swap(inner);
    }
}

} // namespace

CheckResult check_dtmc(const InducedDtmc& dtmc, const PctlQuery& q) {
    auto start = Clock::now();
    std::vector<char> target = induced_label_mask(dtmc, q.target);
    std::vector<double> x;
    switch (q.path) {
        case PathKind::Eventually:
            x = solve_unbounded(dtmc, target, nullptr);
            break;
        case PathKind::BoundedEventually:
            x = solve_bounded(dtmc, target, q.step_bound);
            break;
        case PathKind::Until: {
            std::vector<char> constraint = induced_label_mask(dtmc, q.constraint);
            x = solve_unbounded(dtmc, target, &constraint);
            break;
        }
    }
    CheckResult r;
    r.probability = x[dtmc.initial];
    r.states = dtmc.num_states();
    r.transitions = dtmc.num_transitions();
    if (q.kind == QueryKind::Threshold) {
        double bound = q.bound.to_double();
        switch (q.comparator) {
            case Comparator::Lt: r.satisfied = r.probability < bound; break;
            case Comparator::Le: r.satisfied = r.probability <= bound; break;
            case Comparator::Gt: r.satisfied = r.probability > bound; break;
            case Comparator::Ge: r.satisfied = r.probability >= bound; break;
        }
    }
    r.wall_seconds = seconds_since(start);
    return r;
}

CheckResult check_mdp_extremal(const ExplicitMdp& mdp, const PctlQuery& q,
                               ExtremalMode mode) {
    auto start = Clock::now();
    if (q.path == PathKind::Until)
        throw VerifyError("extremal checking supports only F and F<= path operators");
    std::vector<char> target = mdp_label_mask(mdp, q.target);
    const std::size_t n = mdp.num_states();
    std::vector<double> x(n, 0.0);

    if (q.path == PathKind::BoundedEventually) {
        std::vector<double> next(n, 0.0);
        for (std::uint32_t s = 0; s < n; ++s)
            if (target[s]) x[s] = 1.0;
        for (std::int64_t step = 0; step < q.step_bound; ++step) {
            for (std::uint32_t s = 0; s < n; ++s)
                next[s] = target[s] ? 1.0 : opt_action_value(mdp, s, x, mode);
            x.swap(next);
        }
    } else {
        std::vector<char> zero = mdp_prob0(mdp, target, mode);
        std::vector<char> one = target;
        if (mode == ExtremalMode::Max) one = mdp_prob1_max(mdp, target);
        std::vector<std::uint32_t> unknowns;
        for (std::uint32_t s = 0; s < n; ++s) {
            if (one[s])
                x[s] = 1.0;
            else if (!zero[s])
                unknowns.push_back(s);
        }
        double delta = 1.0;
        while (delta > kConvergence && !unknowns.empty()) {
            delta = 0.0;
            for (std::uint32_t s : unknowns) {
                double v = opt_action_value(mdp, s, x, mode);
                delta = std::max(delta, std::abs(v - x[s]));
                x[s] = v;
            }
        }
    }

    CheckResult r;
    r.probability = std::clamp(x[mdp.initial], 0.0, 1.0);
    r.states = n;
    r.transitions = mdp.num_transitions();
    if (q.kind == QueryKind::Threshold) {
        double bound = q.bound.to_double();
        switch (q.comparator) {
            case Comparator::Lt: r.satisfied = r.probability < bound; break;
            case Comparator::Le: r.satisfied = r.probability <= bound; break;
            case Comparator::Gt: r.satisfied = r.probability > bound; break;
            case Comparator::Ge: r.satisfied = r.probability >= bound; break;
        }
    }
    r.wall_seconds = seconds_since(start);
    return r;
}

std::string format_check_result(const CheckResult& r) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", r.probability);
    std::string line = "probability=" + std::string(buf);
    if (r.satisfied) line += std::string(" satisfied=") + (*r.satisfied ? "true" : "false");
    line += " states=" + std::to_string(r.states);
    line += " transitions=" + std::to_string(r.transitions);
    std::snprintf(buf, sizeof buf, "%.3f", r.wall_seconds);
    line += " seconds=" + std::string(buf);
    return line;
}

} // namespace policymc
