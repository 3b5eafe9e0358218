#pragma once

// Bernoulli bond percolation on balls and implicit graphs: sampling,
// connection probabilities, sphere-reaching probabilities, p_c estimation,
// and exact small-instance oracles.

#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_set>
#include <vector>

#include "ball.hpp"
#include "rng.hpp"

namespace percloc {

class UnionFind {
public:
    explicit UnionFind(size_t n) : parent_(n) {
        std::iota(parent_.begin(), parent_.end(), 0);
    }

    int find(int x) {
        while (parent_[size_t(x)] != x) {
            parent_[size_t(x)] = parent_[size_t(parent_[size_t(x)])];
            x = parent_[size_t(x)];
        }
        return x;
    }

    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent_[size_t(a)] = b;
    }

    void reset() { std::iota(parent_.begin(), parent_.end(), 0); }

private:
    std::vector<int> parent_;
};

struct PercSample {
    uint64_t master_seed = 0;
    uint64_t trial = 0;
    double p = 0.0;
    std::vector<uint8_t> open;  // one bit per ball edge, EdgeKey order
};

inline PercSample sample_percolation(const Ball& b, double p, uint64_t master_seed,
                                     uint64_t trial) {
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("p must lie in [0,1]");
    PercSample s{master_seed, trial, p, {}};
    s.open.reserve(b.edges.size());
    uint64_t stream = trial_stream(master_seed, trial);
    for (const BallEdge& e : b.edges)
        s.open.push_back(edge_open(stream, e.key, p) ? 1 : 0);
    return s;
}

struct ConnectionEstimate {
    std::vector<int> sphere;        // ball vertex indices
    std::vector<Word> sphere_words;
    std::vector<double> b_hat;
    std::vector<double> std_err;
    uint64_t trials = 0;
};

namespace detail {

template <class Body>
void run_trials(uint64_t trials, int threads, Body body) {
    if (threads <= 1) {
        for (uint64_t t = 0; t < trials; ++t) body(t, 0);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([=] {
            for (uint64_t t = uint64_t(w); t < trials; t += uint64_t(threads))
                body(t, w);
        });
    }
    for (std::thread& th : pool) th.join();
}

}  // namespace detail

// Monte Carlo b_n(x, root) for every sphere vertex x from common samples.
inline ConnectionEstimate connection_prob(const Ball& b, double p, uint64_t trials,
                                          uint64_t master_seed, int threads = 1) {
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    const auto& sphere = b.spheres[size_t(b.radius)];
    std::vector<std::vector<int64_t>> counts(
        size_t(std::max(threads, 1)), std::vector<int64_t>(sphere.size(), 0));

    detail::run_trials(trials, threads, [&](uint64_t trial, int worker) {
        UnionFind uf(b.vertices.size());
        uint64_t stream = trial_stream(master_seed, trial);
        for (const BallEdge& e : b.edges)
            if (edge_open(stream, e.key, p)) uf.unite(e.u, e.v);
        int root = uf.find(0);
        auto& c = counts[size_t(worker)];
        for (size_t i = 0; i < sphere.size(); ++i)
            if (uf.find(sphere[i]) == root) ++c[i];
    });

    ConnectionEstimate est;
    est.trials = trials;
    for (size_t i = 0; i < sphere.size(); ++i) {
        int64_t total = 0;
        for (const auto& c : counts) total += c[i];
        double bh = double(total) / double(trials);
        est.sphere.push_back(sphere[i]);
        est.sphere_words.push_back(b.vertices[size_t(sphere[i])]);
        est.b_hat.push_back(bh);
        est.std_err.push_back(std::sqrt(bh * (1.0 - bh) / double(trials)));
    }
    return est;
}

// Exact b_n per sphere vertex by summing over all 2^|E| configurations.
inline std::vector<double> connection_prob_exact(const Ball& b, double p) {
    const size_t ne = b.edges.size();
    if (ne > 20) throw std::invalid_argument("exact oracle limited to 20 edges");
    const auto& sphere = b.spheres[size_t(b.radius)];
    std::vector<double> prob(sphere.size(), 0.0);
    UnionFind uf(b.vertices.size());
    for (uint32_t mask = 0; mask < (1u << ne); ++mask) {
        double w = 1.0;
        uf.reset();
        for (size_t e = 0; e < ne; ++e) {
            if (mask & (1u << e)) {
                w *= p;
                uf.unite(b.edges[e].u, b.edges[e].v);
            } else {
                w *= 1.0 - p;
            }
        }
        if (w == 0.0) continue;
        int root = uf.find(0);
        for (size_t i = 0; i < sphere.size(); ++i)
            if (uf.find(sphere[i]) == root) prob[i] += w;
    }
    return prob;
}

struct Assumption2Report {
    double min_b = 0.0, max_b = 0.0;
    double max_ratio = 1.0;       // max b / min b across the sphere
    double max_se = 0.0;          // largest per-vertex standard error
    bool has_zero_estimate = false;
    ConnectionEstimate estimates;
};

inline Assumption2Report assumption2_report(const Ball& b, double p, uint64_t trials,
                                            uint64_t master_seed, int threads = 1) {
    Assumption2Report rep;
    rep.estimates = connection_prob(b, p, trials, master_seed, threads);
    rep.min_b = 1.0;
    rep.max_b = 0.0;
    for (size_t i = 0; i < rep.estimates.b_hat.size(); ++i) {
        double bh = rep.estimates.b_hat[i];
        if (bh <= 0.0) rep.has_zero_estimate = true;
        rep.min_b = std::min(rep.min_b, bh);
        rep.max_b = std::max(rep.max_b, bh);
        rep.max_se = std::max(rep.max_se, rep.estimates.std_err[i]);
    }
    rep.max_ratio = rep.min_b > 0.0 ? rep.max_b / rep.min_b
                                    : std::numeric_limits<double>::infinity();
    return rep;
}

// One lazy-percolation trial: does the open cluster of the root reach
// sphere(n) inside B(root, n)? Edges are sampled only when first touched.
inline bool reach_trial(const ImplicitGraph& g, double p, int n, uint64_t stream) {
    if (n < 1) throw std::invalid_argument("n must be >= 1");
    VertexSet visited;
    std::deque<Word> queue;
    Word root = g.root();
    visited.insert(root);
    queue.push_back(root);
    while (!queue.empty()) {
        Word v = queue.front();
        queue.pop_front();
        std::unordered_map<Word, uint32_t, WordHash> slot;
        for (const Word& w : g.neighbors(v)) {
            uint32_t s = slot[w]++;
            if (w == v) continue;
            if (g.dist_to_root(w) > n) continue;
            if (visited.count(w)) continue;
            if (!edge_open(stream, make_edge_key(v, w, s), p)) continue;
            if (g.dist_to_root(w) == n) return true;
            visited.insert(w);
            queue.push_back(w);
        }
    }
    return false;
}

struct ReachEstimate {
    double h = 0.0;
    double std_err = 0.0;
    uint64_t successes = 0;
    uint64_t trials = 0;
};

namespace detail {

// Flattened radius-n neighborhood used to run many reach trials without
// touching words: per interior vertex (dist < n) the ordered outgoing
// occurrences with their precomputed edge keys. Replays exactly the edge
// queries of reach_trial, in the same order.
struct ReachPlan {
    struct Arc {
        int to;       // interior vertex index, or -1 for a sphere-n target
        EdgeKey key;  // undirected occurrence key
    };
    std::vector<std::vector<Arc>> arcs;

    ReachPlan(const ImplicitGraph& g, int n) {
        if (n < 1) throw std::invalid_argument("n must be >= 1");
        std::unordered_map<Word, int, WordHash> idx;
        std::vector<Word> verts{g.root()};
        idx.emplace(g.root(), 0);
        for (size_t i = 0; i < verts.size(); ++i) {
            Word v = verts[i];
            arcs.emplace_back();
            std::unordered_map<Word, uint32_t, WordHash> slot;
            for (const Word& w : g.neighbors(v)) {
                uint32_t s = slot[w]++;
                if (w == v) continue;
                int dw = g.dist_to_root(w);
                if (dw > n) continue;
                EdgeKey k = make_edge_key(v, w, s);
                if (dw == n) {
                    arcs[i].push_back(Arc{-1, k});
                    continue;
                }
                auto [it, fresh] = idx.try_emplace(w, int(verts.size()));
                if (fresh) verts.push_back(w);
                arcs[i].push_back(Arc{it->second, k});
            }
        }
    }

    bool trial(double p, uint64_t stream, std::vector<uint32_t>& stamp,
               uint32_t epoch, std::vector<int>& queue) const {
        if (stamp.size() != arcs.size()) stamp.assign(arcs.size(), 0);
        queue.clear();
        stamp[0] = epoch;
        queue.push_back(0);
        for (size_t head = 0; head < queue.size(); ++head) {
            for (const Arc& a : arcs[size_t(queue[head])]) {
                if (a.to >= 0 && stamp[size_t(a.to)] == epoch) continue;
                if (!edge_open(stream, a.key, p)) continue;
                if (a.to < 0) return true;
                stamp[size_t(a.to)] = epoch;
                queue.push_back(a.to);
            }
        }
        return false;
    }
};

}  // namespace detail

inline ReachEstimate reach_prob(const ImplicitGraph& g, double p, int n,
                                uint64_t trials, uint64_t master_seed,
                                int threads = 1) {
    detail::ReachPlan plan(g, n);
    int nworkers = std::max(threads, 1);
    std::vector<int64_t> counts(size_t(nworkers), 0);
    std::vector<std::vector<uint32_t>> stamps(static_cast<size_t>(nworkers));
    std::vector<std::vector<int>> queues(static_cast<size_t>(nworkers));
    detail::run_trials(trials, threads, [&](uint64_t trial, int worker) {
        if (plan.trial(p, trial_stream(master_seed, trial), stamps[size_t(worker)],
                       uint32_t(trial) + 1u, queues[size_t(worker)]))
            ++counts[size_t(worker)];
    });
    ReachEstimate est;
    est.trials = trials;
    for (int64_t c : counts) est.successes += uint64_t(c);
    est.h = double(est.successes) / double(trials);
    est.std_err = std::sqrt(est.h * (1.0 - est.h) / double(trials));
    return est;
}

// Exact P[root reaches sphere(n) in B(root,n)] on T_d.
inline double tree_reach_exact(int d, double p, int n) {
    if (d < 2 || n < 1) throw std::invalid_argument("need d >= 2, n >= 1");
    double q = p;
    for (int m = 1; m < n; ++m) q = p * (1.0 - std::pow(1.0 - q, d - 1));
    return 1.0 - std::pow(1.0 - q, d);
}

struct PcPoint {
    int n = 0;
    double p_hat = 0.0;
    double std_err = 0.0;  // Monte Carlo-induced uncertainty; 0 for oracles
    uint64_t trials = 0;
};

struct PcEstimate {
    std::vector<PcPoint> points;
    double theta_star = 0.0;
    double tolerance = 0.0;
};

namespace detail {

// bisection on a nondecreasing h(p) for h(p) = theta*
template <class H>
PcPoint pc_bisect(H h, int n, double theta_star, double tol) {
    double lo = 0.0, hi = 1.0;
    if (h(1.0) < theta_star)
        throw std::runtime_error("non-bracketing: h_n(1) < theta*");
    double h_lo = 0.0, h_hi = 1.0;
    while (hi - lo > tol) {
        double mid = 0.5 * (lo + hi);
        double hm = h(mid);
        if (hm < theta_star) {
            lo = mid;
            h_lo = hm;
        } else {
            hi = mid;
            h_hi = hm;
        }
    }
    PcPoint pt;
    pt.n = n;
    pt.p_hat = 0.5 * (lo + hi);
    pt.std_err = 0.0;
    (void)h_lo;
    (void)h_hi;
    return pt;
}

}  // namespace detail

// theta*-crossing estimator: solve h_n(p) = theta* by bisection with
// common random numbers across probes. The crossing limit as n grows is a
// modeling choice, not p_c itself; outputs label it as an estimate.
inline PcEstimate pc_estimate(const ImplicitGraph& g, const std::vector<int>& n_list,
                              double theta_star, uint64_t trials,
                              uint64_t master_seed, int threads = 1,
                              double tol = 0.002) {
    if (!(theta_star > 0.0 && theta_star < 1.0))
        throw std::invalid_argument("theta* must lie in (0,1)");
    PcEstimate est;
    est.theta_star = theta_star;
    est.tolerance = tol;
    for (int n : n_list) {
        PcPoint pt = detail::pc_bisect(
            [&](double p) { return reach_prob(g, p, n, trials, master_seed, threads).h; },
            n, theta_star, tol);
        pt.trials = trials;
        // slope of h near the crossing from a +-2% secant, for a
        // Monte Carlo error bar on p_hat
        double dp = 0.02;
        double h1 = reach_prob(g, std::max(0.0, pt.p_hat - dp), n, trials, master_seed,
                               threads).h;
        double h2 = reach_prob(g, std::min(1.0, pt.p_hat + dp), n, trials, master_seed,
                               threads).h;
        double slope = (h2 - h1) / (2 * dp);
        double se_h = std::sqrt(theta_star * (1.0 - theta_star) / double(trials));
        pt.std_err = slope > 1e-9 ? se_h / slope + 0.5 * tol : 1.0;
        est.points.push_back(pt);
    }
    return est;
}

// Same estimator against the exact T_d recursion; no Monte Carlo error.
inline PcEstimate pc_estimate_tree_oracle(int d, const std::vector<int>& n_list,
                                          double theta_star, double tol = 0.002) {
    if (!(theta_star > 0.0 && theta_star < 1.0))
        throw std::invalid_argument("theta* must lie in (0,1)");
    PcEstimate est;
    est.theta_star = theta_star;
    est.tolerance = tol;
    for (int n : n_list)
        est.points.push_back(detail::pc_bisect(
            [&](double p) { return tree_reach_exact(d, p, n); }, n, theta_star, tol));
    return est;
}

}  // namespace percloc
