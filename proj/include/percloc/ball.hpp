#pragma once

// Explicit finite balls with level structure, rooted-ball isomorphism, and
// the local-agreement radius of two transitive graphs.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "graphs.hpp"

namespace percloc {

struct BallEdge {
    int u, v;  // vertex indices, u <= v, u != v (self-loops excluded)
    EdgeKey key;
};

// Induced subgraph on B(root, R) with exact BFS levels. `adj` holds the
// full neighbor-entry multiset (self-loop entries included) restricted to
// the ball; `edges` is the self-loop-free undirected edge list used by
// percolation.
struct Ball {
    Word root;
    int radius = 0;
    std::vector<Word> vertices;                // index 0 = root
    std::vector<int> level;                    // BFS distance to root
    std::vector<std::vector<int>> adj;         // neighbor indices, multiset
    std::vector<std::vector<int>> spheres;     // spheres[j] = indices at level j
    std::vector<BallEdge> edges;
    int self_loops = 0;                        // excluded neighbor entries
    std::unordered_map<Word, int, WordHash> index;

    int find(const Word& w) const {
        auto it = index.find(w);
        return it == index.end() ? -1 : it->second;
    }
    size_t sphere_size(int j) const { return spheres[size_t(j)].size(); }
};

inline Ball bfs_ball(const ImplicitGraph& g, const Word& root, int R,
                     size_t vertex_cap = 5'000'000) {
    if (R < 0) throw std::invalid_argument("radius must be >= 0");
    Ball b;
    b.root = root;
    b.radius = R;
    b.vertices.push_back(root);
    b.level.push_back(0);
    b.index.emplace(root, 0);
    std::deque<int> queue{0};
    while (!queue.empty()) {
        int i = queue.front();
        queue.pop_front();
        if (b.level[size_t(i)] == R) continue;
        for (const Word& w : g.neighbors(b.vertices[size_t(i)])) {
            auto it = b.index.find(w);
            if (it == b.index.end()) {
                if (b.vertices.size() >= vertex_cap)
                    throw std::runtime_error("ball vertex cap exceeded");
                b.index.emplace(w, int(b.vertices.size()));
                b.vertices.push_back(w);
                b.level.push_back(b.level[size_t(i)] + 1);
                queue.push_back(int(b.vertices.size()) - 1);
            }
        }
    }
    const int n = int(b.vertices.size());
    b.adj.resize(size_t(n));
    b.spheres.resize(size_t(R) + 1);
    for (int i = 0; i < n; ++i) b.spheres[size_t(b.level[size_t(i)])].push_back(i);
    // adjacency and edges within the ball
    for (int i = 0; i < n; ++i) {
        std::unordered_map<int, uint32_t> slot_count;
        for (const Word& w : g.neighbors(b.vertices[size_t(i)])) {
            int j = b.find(w);
            if (j < 0) continue;  // neighbor outside the ball
            b.adj[size_t(i)].push_back(j);
            if (j == i) {
                ++b.self_loops;  // counted twice is impossible: loop entries pair up below
                continue;
            }
            if (i < j) {
                uint32_t s = slot_count[j]++;
                b.edges.push_back(
                    BallEdge{i, j, make_edge_key(b.vertices[size_t(i)], b.vertices[size_t(j)], s)});
            }
        }
    }
    return b;
}

enum class IsoResult { yes, no, undecided };

namespace detail {

struct IsoSignature {
    int level;
    std::vector<int> degree_hist;  // sorted neighbor levels, with multiplicity

    friend bool operator==(const IsoSignature&, const IsoSignature&) = default;
};

inline std::vector<IsoSignature> signatures(const Ball& b) {
    std::vector<IsoSignature> sig(b.vertices.size());
    for (size_t i = 0; i < b.vertices.size(); ++i) {
        sig[i].level = b.level[i];
        for (int j : b.adj[i]) sig[i].degree_hist.push_back(b.level[size_t(j)]);
        std::sort(sig[i].degree_hist.begin(), sig[i].degree_hist.end());
    }
    return sig;
}

}  // namespace detail

// Root-preserving isomorphism test via backtracking in BFS order with
// (level, neighbor-level multiset) pruning. Multiplicities must match.
inline IsoResult rooted_isomorphic(const Ball& b1, const Ball& b2,
                                   uint64_t step_cap = 10'000'000) {
    if (b1.radius != b2.radius)
        throw std::invalid_argument("rooted_isomorphic requires equal radii");
    const size_t n = b1.vertices.size();
    if (n != b2.vertices.size()) return IsoResult::no;
    if (b1.self_loops != b2.self_loops) return IsoResult::no;
    for (int j = 0; j <= b1.radius; ++j)
        if (b1.spheres[size_t(j)].size() != b2.spheres[size_t(j)].size())
            return IsoResult::no;

    auto sig1 = detail::signatures(b1);
    auto sig2 = detail::signatures(b2);
    {
        auto s1 = sig1, s2 = sig2;
        auto cmp = [](const detail::IsoSignature& a, const detail::IsoSignature& x) {
            return a.level != x.level ? a.level < x.level : a.degree_hist < x.degree_hist;
        };
        std::sort(s1.begin(), s1.end(), cmp);
        std::sort(s2.begin(), s2.end(), cmp);
        if (s1 != s2) return IsoResult::no;
    }

    // multiplicity of undirected adjacency, queried a lot during matching
    auto mult = [](const Ball& b, int i, int j) {
        int m = 0;
        for (int k : b.adj[size_t(i)]) m += (k == j);
        return m;
    };

    std::vector<int> map1(n, -1), map2(n, -1);
    map1[0] = 0;
    map2[0] = 0;
    uint64_t steps = 0;
    bool exhausted = false;

    // vertices of b1 in BFS index order; each vertex beyond the root has at
    // least one previously mapped neighbor
    std::function<bool(size_t)> rec = [&](size_t i) -> bool {
        if (i == n) return true;
        for (size_t c = 0; c < n; ++c) {
            if (map2[c] != -1 || !(sig1[i] == sig2[c])) continue;
            if (++steps > step_cap) {
                exhausted = true;
                return false;
            }
            bool ok = true;
            for (int j : b1.adj[i]) {
                if (map1[size_t(j)] == -1) continue;
                if (mult(b1, int(i), j) != mult(b2, int(c), map1[size_t(j)])) {
                    ok = false;
                    break;
                }
            }
            if (ok) {
                // no extra mapped neighbors on the b2 side
                int mapped1 = 0, mapped2 = 0;
                for (int j : b1.adj[i]) mapped1 += (map1[size_t(j)] != -1);
                for (int j : b2.adj[c]) mapped2 += (map2[size_t(j)] != -1);
                ok = (mapped1 == mapped2);
            }
            if (!ok) continue;
            map1[i] = int(c);
            map2[c] = int(i);
            if (rec(i + 1)) return true;
            map1[i] = -1;
            map2[c] = -1;
            if (exhausted) return false;
        }
        return false;
    };
    bool found = rec(1);
    if (exhausted) return IsoResult::undecided;
    return found ? IsoResult::yes : IsoResult::no;
}

// Largest r <= Rmax with B(root1, r) ~ B(root2, r); Rmax means agreement
// persisted to the cap and is only a lower bound on the true radius.
inline int local_radius(const ImplicitGraph& g1, const ImplicitGraph& g2, int Rmax) {
    if (Rmax < 0) throw std::invalid_argument("Rmax must be >= 0");
    for (int r = 0; r <= Rmax; ++r) {
        Ball b1 = bfs_ball(g1, g1.root(), r);
        Ball b2 = bfs_ball(g2, g2.root(), r);
        IsoResult res = rooted_isomorphic(b1, b2);
        if (res == IsoResult::undecided)
            throw std::runtime_error("isomorphism search undecided at radius " +
                                     std::to_string(r));
        if (res == IsoResult::no) return r - 1;
    }
    return Rmax;
}

}  // namespace percloc
