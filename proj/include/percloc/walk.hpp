#pragma once

// Exact SRW computations on balls: harmonic exit measures, return
// probabilities, spectral-radius / lambda_1 estimates, the coset-quotient
// return identity, and nice-edge certification.

#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ball.hpp"

namespace percloc {

// First-hitting distribution of the sphere of a ball, for the SRW started
// at the center. Support is sphere(R) of the ball.
struct ExitDistribution {
    Word center;
    int radius = 0;
    std::vector<int> sphere;        // vertex indices into the ball
    std::vector<Word> sphere_words;
    std::vector<double> mu;         // same order as sphere
};

namespace detail {

// Expected-visits solve y = (I - Q^T)^{-1} e_center over transient states
// (levels < R). Dense elimination for small systems, damped sweeps
// otherwise.
inline std::vector<double> expected_visits(const Ball& b,
                                           const std::vector<int>& transient,
                                           const std::vector<int>& tindex) {
    const size_t m = transient.size();
    if (m <= 2000) {
        // dense (I - Q^T) y = e0
        std::vector<double> A(m * m, 0.0);
        for (size_t col = 0; col < m; ++col) {
            int v = transient[col];
            const auto& nb = b.adj[size_t(v)];
            double step = 1.0 / double(nb.size());
            for (int w : nb) {
                int row = tindex[size_t(w)];
                if (row >= 0) A[size_t(row) * m + col] -= step;
            }
            A[col * m + col] += 1.0;
        }
        std::vector<double> y(m, 0.0);
        y[0] = 1.0;  // transient[0] must be the center
        // Gaussian elimination with partial pivoting
        std::vector<size_t> perm(m);
        for (size_t i = 0; i < m; ++i) perm[i] = i;
        for (size_t k = 0; k < m; ++k) {
            size_t piv = k;
            for (size_t i = k + 1; i < m; ++i)
                if (std::abs(A[i * m + k]) > std::abs(A[piv * m + k])) piv = i;
            if (piv != k) {
                for (size_t j = 0; j < m; ++j) std::swap(A[k * m + j], A[piv * m + j]);
                std::swap(y[k], y[piv]);
            }
            double akk = A[k * m + k];
            if (akk == 0.0) throw std::runtime_error("singular transient system");
            for (size_t i = k + 1; i < m; ++i) {
                double f = A[i * m + k] / akk;
                if (f == 0.0) continue;
                for (size_t j = k; j < m; ++j) A[i * m + j] -= f * A[k * m + j];
                y[i] -= f * y[k];
            }
        }
        for (size_t k = m; k-- > 0;) {
            double s = y[k];
            for (size_t j = k + 1; j < m; ++j) s -= A[k * m + j] * y[j];
            y[k] = s / A[k * m + k];
        }
        return y;
    }
    // iterative y <- Q^T y + e0; contraction since Q is strictly
    // sub-stochastic on a ball of a nonamenable graph
    std::vector<double> y(m, 0.0), next(m, 0.0);
    for (int iter = 0; iter < 1'000'000; ++iter) {
        std::fill(next.begin(), next.end(), 0.0);
        next[0] = 1.0;
        for (size_t col = 0; col < m; ++col) {
            if (y[col] == 0.0) continue;
            int v = transient[col];
            const auto& nb = b.adj[size_t(v)];
            double step = y[col] / double(nb.size());
            for (int w : nb) {
                int row = tindex[size_t(w)];
                if (row >= 0) next[size_t(row)] += step;
            }
        }
        double delta = 0.0;
        for (size_t i = 0; i < m; ++i) delta = std::max(delta, std::abs(next[i] - y[i]));
        y.swap(next);
        if (delta < 1e-14) return y;
    }
    throw std::runtime_error("expected-visits iteration did not converge");
}

}  // namespace detail

inline ExitDistribution harmonic_measure(const Ball& b) {
    if (b.radius < 1) throw std::invalid_argument("ball radius must be >= 1");
    const int R = b.radius;
    std::vector<int> transient;
    std::vector<int> tindex(b.vertices.size(), -1);
    transient.push_back(0);  // center first
    tindex[0] = 0;
    for (size_t i = 1; i < b.vertices.size(); ++i)
        if (b.level[i] < R) {
            tindex[i] = int(transient.size());
            transient.push_back(int(i));
        }
    std::vector<double> y = detail::expected_visits(b, transient, tindex);

    ExitDistribution out;
    out.center = b.root;
    out.radius = R;
    std::unordered_map<int, double> mass;
    for (size_t col = 0; col < transient.size(); ++col) {
        int v = transient[col];
        const auto& nb = b.adj[size_t(v)];
        double step = y[col] / double(nb.size());
        for (int w : nb)
            if (b.level[size_t(w)] == R) mass[w] += step;
    }
    double total = 0.0;
    for (int i : b.spheres[size_t(R)]) {
        out.sphere.push_back(i);
        out.sphere_words.push_back(b.vertices[size_t(i)]);
        double mu = mass.count(i) ? mass[i] : 0.0;
        out.mu.push_back(mu);
        total += mu;
    }
    if (std::abs(total - 1.0) > 1e-10)
        throw std::runtime_error("exit distribution does not normalize: sum = " +
                                 std::to_string(total));
    return out;
}

struct RatioReport {
    double global_max_ratio = 1.0;  // max mu / min mu over the sphere
    bool has_zero_mass = false;
    // (class_i, class_j) -> max_{x in i, y in j} mu(x)/mu(y)
    std::map<std::pair<int, int>, double> class_pair_max;
    std::map<int, double> within_class_max;
};

inline RatioReport ratio_report(const ExitDistribution& dist,
                                const std::vector<int>& classes) {
    if (classes.size() != dist.mu.size())
        throw std::invalid_argument("class labels must match sphere size");
    RatioReport rep;
    std::map<int, std::pair<double, double>> extremes;  // class -> (min, max)
    double gmin = std::numeric_limits<double>::infinity(), gmax = 0.0;
    for (size_t i = 0; i < dist.mu.size(); ++i) {
        double m = dist.mu[i];
        if (m <= 0.0) rep.has_zero_mass = true;
        gmin = std::min(gmin, m);
        gmax = std::max(gmax, m);
        auto [it, fresh] = extremes.try_emplace(classes[i], std::make_pair(m, m));
        if (!fresh) {
            it->second.first = std::min(it->second.first, m);
            it->second.second = std::max(it->second.second, m);
        }
    }
    rep.global_max_ratio = gmin > 0.0 ? gmax / gmin
                                      : std::numeric_limits<double>::infinity();
    for (const auto& [ci, ei] : extremes) {
        rep.within_class_max[ci] =
            ei.first > 0.0 ? ei.second / ei.first
                           : std::numeric_limits<double>::infinity();
        for (const auto& [cj, ej] : extremes)
            rep.class_pair_max[{ci, cj}] =
                ej.first > 0.0 ? ei.second / ej.first
                               : std::numeric_limits<double>::infinity();
    }
    return rep;
}

// Exact t-step distribution of the SRW from the root, as a vector over a
// radius-t ball (mass cannot leave it). Self-loop entries count.
class WalkDistribution {
public:
    WalkDistribution(const ImplicitGraph& g, int tmax, size_t vertex_cap = 5'000'000)
        : ball_(bfs_ball(g, g.root(), tmax, vertex_cap)), dist_(ball_.vertices.size(), 0.0) {
        dist_[0] = 1.0;
    }

    const Ball& ball() const { return ball_; }
    int steps_taken() const { return t_; }

    void step() {
        std::vector<double> next(dist_.size(), 0.0);
        for (size_t i = 0; i < dist_.size(); ++i) {
            if (dist_[i] == 0.0) continue;
            const auto& nb = ball_.adj[i];
            double s = dist_[i] / double(nb.size());
            for (int w : nb) next[size_t(w)] += s;
        }
        dist_.swap(next);
        ++t_;
    }

    void advance_to(int t) {
        if (t > ball_.radius) throw std::invalid_argument("t exceeds ball radius");
        while (t_ < t) step();
    }

    double at(const Word& w) const {
        int i = ball_.find(w);
        return i < 0 ? 0.0 : dist_[size_t(i)];
    }

    double at_root() const { return dist_[0]; }

private:
    Ball ball_;
    std::vector<double> dist_;
    int t_ = 0;
};

inline double return_probability(const ImplicitGraph& g, int t,
                                 size_t vertex_cap = 5'000'000) {
    if (t < 0) throw std::invalid_argument("t must be >= 0");
    WalkDistribution wd(g, t, vertex_cap);
    wd.advance_to(t);
    return wd.at_root();
}

struct SpectralEstimate {
    std::vector<int> t;                 // even step counts
    std::vector<double> p2t;            // p^{t}(o,o)
    std::vector<double> root_estimate;  // p^{t}(o,o)^{1/t}
    double rho_cert_lower = 0.0;  // p^{2t}(o,o)^{1/(2t)} at the largest t
    double rho_fit = 0.0;         // slope fit with t^{-3/2} correction term
    double rho_upper = 0.0;       // exponent-corrected consecutive ratio
    double lambda1_point = 0.0;   // 1 - rho_fit
    double lambda1_lower = 0.0;   // 1 - rho_upper  (pessimistic band end)
    double lambda1_upper = 0.0;   // 1 - rho_cert_lower
};

// rho lower bounds from return probabilities plus a fitted point estimate.
// The fit models log p^{2t} = a*(2t) + b*log(t) + c over the last (up to)
// ten even t; the band's upper end corrects the consecutive-ratio
// estimator by the generic t^{-3/2} local-limit factor.
inline SpectralEstimate spectral_estimate(const ImplicitGraph& g, int tmax,
                                          size_t vertex_cap = 5'000'000) {
    if (tmax < 2 || tmax % 2 != 0)
        throw std::invalid_argument("tmax must be even and >= 2");
    WalkDistribution wd(g, tmax, vertex_cap);
    SpectralEstimate est;
    for (int t = 2; t <= tmax; t += 2) {
        wd.advance_to(t);
        double p = wd.at_root();
        est.t.push_back(t);
        est.p2t.push_back(p);
        est.root_estimate.push_back(std::pow(p, 1.0 / double(t)));
    }
    for (size_t i = 1; i < est.root_estimate.size(); ++i)
        if (est.root_estimate[i] + 1e-12 < est.root_estimate[i - 1])
            throw std::runtime_error("return-probability roots not monotone");
    est.rho_cert_lower = est.root_estimate.back();

    // least-squares fit over the last window
    size_t win = std::min<size_t>(10, est.t.size());
    size_t off = est.t.size() - win;
    double S[3][3] = {};
    double b[3] = {};
    for (size_t i = off; i < est.t.size(); ++i) {
        double x0 = double(est.t[i]);
        double x1 = std::log(double(est.t[i]) / 2.0);
        double x2 = 1.0;
        double yv = std::log(est.p2t[i]);
        double xs[3] = {x0, x1, x2};
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) S[r][c] += xs[r] * xs[c];
            b[r] += xs[r] * yv;
        }
    }
    if (win >= 3) {
        // solve the 3x3 normal equations
        double M[3][4];
        for (int r = 0; r < 3; ++r) {
            for (int c = 0; c < 3; ++c) M[r][c] = S[r][c];
            M[r][3] = b[r];
        }
        for (int k = 0; k < 3; ++k) {
            int piv = k;
            for (int r = k + 1; r < 3; ++r)
                if (std::abs(M[r][k]) > std::abs(M[piv][k])) piv = r;
            std::swap(M[k], M[piv]);
            for (int r = k + 1; r < 3; ++r) {
                double f = M[r][k] / M[k][k];
                for (int c = k; c < 4; ++c) M[r][c] -= f * M[k][c];
            }
        }
        double coef[3];
        for (int k = 3; k-- > 0;) {
            double s = M[k][3];
            for (int c = k + 1; c < 3; ++c) s -= M[k][c] * coef[c];
            coef[k] = s / M[k][k];
        }
        est.rho_fit = std::exp(coef[0]);
    } else {
        est.rho_fit = est.rho_cert_lower;
    }

    if (est.t.size() >= 2) {
        size_t i = est.t.size() - 1;
        double m = double(est.t[i - 1]) / 2.0;  // index of p_{2m}
        double ratio = std::sqrt(est.p2t[i] / est.p2t[i - 1]);
        est.rho_upper = std::min(1.0, ratio * std::pow((m + 1.0) / m, 0.75));
    } else {
        est.rho_upper = 1.0;
    }
    est.rho_fit = std::min(est.rho_fit, 1.0);
    est.rho_upper = std::max(est.rho_upper, est.rho_fit);
    est.rho_fit = std::max(est.rho_fit, est.rho_cert_lower);

    est.lambda1_point = 1.0 - est.rho_fit;
    est.lambda1_lower = std::max(0.0, 1.0 - est.rho_upper);
    est.lambda1_upper = 1.0 - est.rho_cert_lower;
    return est;
}

// |p_quot^j(o,o) - sum_k p_base^j(o, r^{nk})|; terms with |r^{nk}| > j
// vanish and are not computed.
inline double quotient_identity_residual(const ImplicitGraph& base,
                                         const ImplicitGraph& quot,
                                         const CosetContext& ctx, int j) {
    if (j < 0) throw std::invalid_argument("j must be >= 0");
    WalkDistribution wq(quot, j);
    wq.advance_to(j);
    double lhs = wq.at_root();

    WalkDistribution wb(base, j);
    wb.advance_to(j);
    const FreeProductGroup& grp = ctx.group();
    double rhs = wb.at_root();  // k = 0
    for (int sign : {+1, -1}) {
        for (int k = 1;; ++k) {
            Word rk = grp.power(ctx.rn(), sign * k);
            if (int(rk.length()) > j) break;
            rhs += wb.at(rk);
        }
    }
    return std::abs(lhs - rhs);
}

// Per-radius template exit distributions of a transitive graph, reused via
// left translation.
class ExitTemplates {
public:
    ExitTemplates(const ImplicitGraph& g, int jmax) : graph_(g) {
        for (int j = 1; j <= jmax; ++j) {
            Ball b = bfs_ball(g, g.root(), j);
            templates_.push_back(harmonic_measure(b));
        }
    }

    const ImplicitGraph& graph() const { return graph_; }
    int jmax() const { return int(templates_.size()); }
    const ExitDistribution& at(int j) const { return templates_[size_t(j - 1)]; }

    // translate a template sphere word y to the ball centered at u
    Word translate(const Word& u, const Word& y) const {
        return graph_.translate(u, y);
    }

private:
    ImplicitGraph graph_;
    std::vector<ExitDistribution> templates_;
};

// beta_{(x,u,j)} = P[X_1 = u, exit of B(u,j) lands outside A | X_0 = x].
inline double nice_beta(const ImplicitGraph& g, const VertexSet& A, const Word& x,
                        const Word& u, int j, const ExitTemplates& templates) {
    if (!A.count(x)) throw std::invalid_argument("x must belong to A");
    if (j < 1 || j > templates.jmax())
        throw std::invalid_argument("j out of template range");
    int mult = 0;
    for (const Word& w : g.neighbors(x)) mult += (w == u);
    if (mult == 0) throw std::invalid_argument("u is not adjacent to x");
    const ExitDistribution& tpl = templates.at(j);
    double mass = 0.0;
    for (size_t i = 0; i < tpl.mu.size(); ++i) {
        Word y = templates.translate(u, tpl.sphere_words[i]);
        if (!A.count(y)) mass += tpl.mu[i];
    }
    return double(mult) / double(g.degree()) * mass;
}

// Directed edges (x,u), x in A, whose beta stays >= alpha for all
// j = 1..nmax; parallel edges count with multiplicity.
inline long long nice_edge_count(const ImplicitGraph& g, const VertexSet& A,
                                 double alpha, int nmax,
                                 const ExitTemplates& templates) {
    if (A.empty()) throw std::invalid_argument("A must be nonempty");
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("alpha must lie in (0,1]");
    if (nmax < 1 || nmax > templates.jmax())
        throw std::invalid_argument("nmax out of template range");
    long long count = 0;
    for (const Word& x : A) {
        std::unordered_map<Word, int, WordHash> mult;
        for (const Word& u : g.neighbors(x)) ++mult[u];
        for (const auto& [u, m] : mult) {
            if (u == x) continue;  // self-loop entries are not edges
            bool nice = true;
            for (int j = 1; j <= nmax && nice; ++j)
                nice = nice_beta(g, A, x, u, j, templates) >= alpha;
            if (nice) count += m;
        }
    }
    return count;
}

}  // namespace percloc
