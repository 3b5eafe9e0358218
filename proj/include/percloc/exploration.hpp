#pragma once

// The coupled three-field exploration process from the locality proof, and
// the end-to-end experiment comparing p_c estimates across a quotient
// sequence.

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "percolation.hpp"
#include "walk.hpp"

namespace percloc {

// Per-edge triple (X_e(p), Y_e(eps), Z_e(eps1)) of independent Bernoulli
// marks, lazily derived from a counter RNG so that a mark never changes
// once queried. Checked-status bookkeeping lives here too.
class CoupledField {
public:
    CoupledField(double p, double eps, double eps1, uint64_t stream)
        : p_(p), eps_(eps), eps1_(eps1), stream_(stream) {
        for (double v : {p, eps, eps1})
            if (!(v >= 0.0 && v <= 1.0))
                throw std::invalid_argument("mark means must lie in [0,1]");
    }

    bool x_open(const EdgeKey& e) const { return mark(e, 1, p_, x_seen_); }
    bool y_open(const EdgeKey& e) const { return mark(e, 2, eps_, y_seen_); }
    bool z_open(const EdgeKey& e) const { return mark(e, 3, eps1_, z_seen_); }
    bool any_open(const EdgeKey& e) const {
        return x_open(e) || y_open(e) || z_open(e);
    }

    bool eps_checked(const EdgeKey& e) const { return eps_checked_.count(e) > 0; }
    void mark_eps_checked(const EdgeKey& e) { eps_checked_.insert(e); }
    bool eps1_checked(const EdgeKey& e) const { return eps1_checked_.count(e) > 0; }
    void mark_eps1_checked(const EdgeKey& e) { eps1_checked_.insert(e); }

    double p() const { return p_; }
    double eps() const { return eps_; }
    double eps1() const { return eps1_; }

private:
    bool mark(const EdgeKey& e, uint64_t salt, double mean,
              std::unordered_map<EdgeKey, uint8_t, EdgeKeyHash>& memo) const {
        bool v = edge_open(stream_, e, mean, salt);
        auto [it, fresh] = memo.try_emplace(e, uint8_t(v));
        if (!fresh && it->second != uint8_t(v))
            throw std::logic_error("coupled mark changed between queries");
        return v;
    }

    double p_, eps_, eps1_;
    uint64_t stream_;
    mutable std::unordered_map<EdgeKey, uint8_t, EdgeKeyHash> x_seen_, y_seen_, z_seen_;
    std::unordered_set<EdgeKey, EdgeKeyHash> eps_checked_, eps1_checked_;
};

enum class StopCause { tau_stop, survival, frontier_empty, step_cap };

inline const char* to_string(StopCause c) {
    switch (c) {
        case StopCause::tau_stop: return "tau";
        case StopCause::survival: return "survival";
        case StopCause::frontier_empty: return "frontier_empty";
        case StopCause::step_cap: return "step_cap";
    }
    return "?";
}

struct ExplorationTrace {
    std::vector<long long> a_size;  // |A_t|, t = 0..steps
    std::vector<long long> xi;      // |A_{t}| - |A_{t-1}| for t = 1..steps
    std::vector<long long> z_checked_closed;  // Z_t per step
    StopCause cause = StopCause::step_cap;
    long long steps = 0;
    std::vector<Word> final_set;  // filled when requested via collect_set
    bool survived() const { return cause == StopCause::survival; }
};

// X-open cluster of the root, truncated at `cap` vertices. Truncation is
// reported through the bool (cluster still growing when cut).
inline std::pair<VertexSet, bool> initial_cluster(const ImplicitGraph& g,
                                                  const CoupledField& field,
                                                  size_t cap) {
    if (cap < 1) throw std::invalid_argument("cap must be >= 1");
    VertexSet cluster;
    std::deque<Word> queue;
    cluster.insert(g.root());
    queue.push_back(g.root());
    while (!queue.empty()) {
        Word v = queue.front();
        queue.pop_front();
        std::unordered_map<Word, uint32_t, WordHash> slot;
        for (const Word& w : g.neighbors(v)) {
            uint32_t s = slot[w]++;
            if (w == v || cluster.count(w)) continue;
            if (!field.x_open(make_edge_key(v, w, s))) continue;
            if (cluster.size() >= cap) return {std::move(cluster), true};
            cluster.insert(w);
            queue.push_back(w);
        }
    }
    return {std::move(cluster), false};
}

namespace detail {

// Radius-r template ball around the root, reused at every growth site via
// left translation.
struct GrowthTemplate {
    Ball ball;
    explicit GrowthTemplate(const ImplicitGraph& g, int r)
        : ball(bfs_ball(g, g.root(), r)) {}
};

struct EdgeKeyLess {
    bool operator()(const EdgeKey& a, const EdgeKey& b) const {
        if (a.a != b.a) return a.a < b.a;
        if (a.b != b.b) return a.b < b.b;
        return a.slot < b.slot;
    }
};

}  // namespace detail

// One growth step at the epsilon-open edge's endpoint u: Case 1 takes the
// X-open cluster of u inside the translated radius-r ball avoiding A; Case
// 2 rescues clusters hanging off A through a Z-open first connecting edge
// (in EdgeKey order, one sample per boundary vertex). Returns the added
// vertices; the caller merges them into A.
inline std::vector<Word> grow_step(const ImplicitGraph& g, const VertexSet& A,
                                   const Word& u, CoupledField& field,
                                   const Ball& tpl_ball) {
    std::vector<Word> site(tpl_ball.vertices.size());
    for (size_t i = 0; i < site.size(); ++i)
        site[i] = g.translate(u, tpl_ball.vertices[i]);
    std::vector<uint8_t> in_A(site.size());
    for (size_t i = 0; i < site.size(); ++i) in_A[i] = A.count(site[i]) ? 1 : 0;

    // X-open clusters on ball vertices outside A (paths avoiding A)
    UnionFind uf(site.size());
    std::vector<std::pair<EdgeKey, int>> boundary;  // (edge, outside endpoint)
    for (const BallEdge& e : tpl_ball.edges) {
        EdgeKey ge = make_edge_key(site[size_t(e.u)], site[size_t(e.v)], e.key.slot);
        if (!in_A[size_t(e.u)] && !in_A[size_t(e.v)]) {
            if (field.x_open(ge)) uf.unite(e.u, e.v);
        } else if (in_A[size_t(e.u)] != in_A[size_t(e.v)]) {
            boundary.emplace_back(ge, in_A[size_t(e.u)] ? e.v : e.u);
        }
    }

    std::unordered_set<int> selected;  // cluster reps to absorb
    if (!in_A[0]) selected.insert(uf.find(0));  // Case 1: u itself

    std::sort(boundary.begin(), boundary.end(),
              [](const auto& a, const auto& b) {
                  return detail::EdgeKeyLess()(a.first, b.first);
              });
    std::unordered_set<int> z_done;
    for (const auto& [ge, z] : boundary) {
        if (!z_done.insert(z).second) continue;
        field.mark_eps1_checked(ge);
        if (field.z_open(ge)) selected.insert(uf.find(z));
    }

    std::vector<Word> added;
    VertexSet seen;
    for (size_t i = 0; i < site.size(); ++i) {
        if (in_A[i]) continue;
        if (!selected.count(uf.find(int(i)))) continue;
        if (seen.insert(site[i]).second) added.push_back(site[i]);
    }
    return added;
}

struct ExplorationParams {
    double p = 0.0;     // X-mark mean (the paper's p = p_c(G) + eps)
    double eps = 0.0;   // Y-mark mean
    double eps1 = 0.0;  // Z-mark mean
    int r_n = 1;
    double lambda1 = 0.0;  // lambda_1(G_n) estimate for alpha and the tau rule
    size_t survival_cap = 10'000;  // M
    long long step_cap = 2'000'000;
    bool collect_set = false;  // copy the final A into the trace
};

// One run of the adaptive exploration. Strictly sequential; independent
// runs parallelize through distinct run indices.
inline ExplorationTrace run_exploration(const ImplicitGraph& g,
                                        const ExplorationParams& par,
                                        const ExitTemplates& templates,
                                        uint64_t master_seed, uint64_t run_index) {
    if (par.r_n < 1 || par.r_n > templates.jmax())
        throw std::invalid_argument("r_n out of template range");
    if (!(par.lambda1 > 0.0)) throw std::invalid_argument("lambda1 must be positive");
    double closed = (1.0 - par.p) * (1.0 - par.eps) * (1.0 - par.eps1);
    if (closed <= 0.0)
        throw std::invalid_argument("combined open probability must be < 1");

    const double alpha = par.lambda1 / 2.0;
    const double d = double(g.degree());
    CoupledField field(par.p, par.eps, par.eps1, trial_stream(master_seed, run_index));
    detail::GrowthTemplate tpl(g, par.r_n);

    ExplorationTrace trace;
    auto [A, truncated] = initial_cluster(g, field, par.survival_cap);
    trace.a_size.push_back((long long)A.size());
    if (truncated || A.size() >= par.survival_cap) {
        trace.cause = StopCause::survival;
        if (par.collect_set) trace.final_set.assign(A.begin(), A.end());
        return trace;
    }

    // FIFO frontier of directed edges (x, u, slot); an edge that fails the
    // niceness test is dropped for good (beta only shrinks as A grows)
    std::deque<std::tuple<Word, Word, uint32_t>> frontier;
    auto enqueue_edges = [&](const Word& x) {
        std::unordered_map<Word, uint32_t, WordHash> slot;
        for (const Word& u : g.neighbors(x)) {
            uint32_t s = slot[u]++;
            if (u == x) continue;
            frontier.emplace_back(x, u, s);
        }
    };
    for (const Word& x : A) enqueue_edges(x);

    long long z_closed = 0;
    long long t = 0;
    while (true) {
        // next epsilon-unchecked nice edge, if any
        Word u;
        EdgeKey key;
        bool have_edge = false;
        while (!frontier.empty()) {
            auto [fx, fu, fs] = frontier.front();
            frontier.pop_front();
            EdgeKey k = make_edge_key(fx, fu, fs);
            if (field.eps_checked(k)) continue;
            bool nice = true;
            for (int j = 1; j <= par.r_n && nice; ++j)
                nice = nice_beta(g, A, fx, fu, j, templates) >= alpha;
            if (!nice) continue;
            u = fu;
            key = k;
            have_edge = true;
            break;
        }
        if (!have_edge) {
            trace.cause = StopCause::frontier_empty;
            break;
        }

        ++t;
        long long grown = 0;
        field.mark_eps_checked(key);
        if (!field.y_open(key)) {
            ++z_closed;
        } else {
            for (const Word& v : grow_step(g, A, u, field, tpl.ball)) {
                if (A.insert(v).second) {
                    ++grown;
                    enqueue_edges(v);
                }
            }
        }

        trace.xi.push_back(grown);
        trace.z_checked_closed.push_back(z_closed);
        trace.a_size.push_back((long long)A.size());
        trace.steps = t;
        if (A.size() >= par.survival_cap) {
            trace.cause = StopCause::survival;
            break;
        }
        if (double(A.size()) <= 2.0 * double(t) / (par.lambda1 * d)) {
            trace.cause = StopCause::tau_stop;
            break;
        }
        if (t >= par.step_cap) {
            trace.cause = StopCause::step_cap;
            break;
        }
    }
    if (par.collect_set) trace.final_set.assign(A.begin(), A.end());
    return trace;
}

}  // namespace percloc
