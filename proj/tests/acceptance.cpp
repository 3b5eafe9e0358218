// Acceptance gate: one line per criterion, pass/fail, with timings.
// Exit code 0 iff every criterion passes.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "percloc/percloc.hpp"

using namespace percloc;

namespace {

constexpr int kThreads = 4;

struct Gate {
    int failures = 0;

    void report(int idx, const std::string& what, bool ok, double seconds,
                double limit_s, const std::string& detail) {
        bool in_time = seconds <= limit_s;
        if (!(ok && in_time)) ++failures;
        std::printf("%s  criterion %d (%s): %s  [%.1fs / limit %.0fs]\n",
                    (ok && in_time) ? "PASS" : "FAIL", idx, what.c_str(),
                    detail.c_str(), seconds, limit_s);
        std::fflush(stdout);
    }
};

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double s() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

ImplicitGraph z2z3() { return make_free_product({FactorSpec{2}, FactorSpec{3}}); }

VertexSet random_connected(const ImplicitGraph& g, std::mt19937_64& rng, size_t size) {
    VertexSet A{g.root()};
    std::vector<Word> pool{g.root()};
    while (A.size() < size) {
        const Word& v = pool[rng() % pool.size()];
        auto nb = g.neighbors(v);
        const Word& w = nb[rng() % nb.size()];
        if (A.insert(w).second) pool.push_back(w);
    }
    return A;
}

std::vector<int> classes_of(const ImplicitGraph& g, const ExitDistribution& d) {
    std::vector<int> c;
    for (const Word& w : d.sphere_words) c.push_back(g.sphere_class(w));
    return c;
}

// criterion 1: tree p_c anchor, oracle and Monte Carlo
void criterion1(Gate& gate) {
    Timer t;
    const double theta = 0.3;
    PcEstimate oracle = pc_estimate_tree_oracle(3, {12}, theta, 0.002);
    double po = oracle.points[0].p_hat;
    PcEstimate mc =
        pc_estimate(make_tree(3), {12}, theta, 100'000, 0xACC1, kThreads, 0.002);
    double pm = mc.points[0].p_hat;
    bool ok = std::abs(po - 0.5) <= 0.03 && std::abs(pm - po) <= 0.01;
    gate.report(1, "tree pc oracle + Monte Carlo", ok, t.s(), 120,
                fmt("oracle p=%.4f (|p-0.5|=%.4f<=0.03), mc p=%.4f (diff %.4f<=0.01)",
                    po, std::abs(po - 0.5), pm, std::abs(pm - po)));
}

// criterion 2: quotient return identity
void criterion2(Gate& gate) {
    Timer t;
    ImplicitGraph base = z2z3();
    const auto& grp = base.group();
    Word r = grp.multiply(grp.letter_word(0, 1), grp.letter_word(1, 1));
    double worst = 0.0;
    for (int n : {2, 3, 4}) {
        ImplicitGraph q = make_quotient(base, r, n);
        for (int j = 0; j <= 10; ++j)
            worst = std::max(worst,
                             quotient_identity_residual(base, q, quotient_context(q), j));
    }
    gate.report(2, "quotient return identity", worst <= 1e-12, t.s(), 10,
                fmt("max residual %.2e <= 1e-12", worst));
}

// criterion 3: harmonic-measure ratio bounds
void criterion3(Gate& gate) {
    Timer t;
    bool ok = true;
    std::ostringstream why;
    for (int d : {3, 4}) {
        ImplicitGraph g = make_tree(d);
        for (int r = 1; r <= 6; ++r) {
            ExitDistribution dist = harmonic_measure(bfs_ball(g, g.root(), r));
            RatioReport rep = ratio_report(dist, classes_of(g, dist));
            if (std::abs(rep.global_max_ratio - 1.0) > 1e-10) {
                ok = false;
                why << " T" << d << " r=" << r;
            }
        }
    }
    {
        ImplicitGraph mg = make_modified_grandparent(make_tree(3));
        for (int r = 1; r <= 6; ++r) {
            ExitDistribution dist = harmonic_measure(bfs_ball(mg, mg.root(), r));
            RatioReport rep = ratio_report(dist, classes_of(mg, dist));
            bool here = rep.global_max_ratio >= 1.0 - 1e-10 &&
                        rep.global_max_ratio <= 9.0 + 1e-10;
            for (const auto& [c, v] : rep.within_class_max)
                here = here && v <= 1.0 + 1e-10;
            if (!here) {
                ok = false;
                why << " mgp r=" << r << " ratio=" << rep.global_max_ratio;
            }
        }
    }
    {
        ImplicitGraph g = z2z3();
        for (int r = 1; r <= 6; ++r) {
            ExitDistribution dist = harmonic_measure(bfs_ball(g, g.root(), r));
            RatioReport rep = ratio_report(dist, classes_of(g, dist));
            if (!(rep.global_max_ratio >= 1.0 - 1e-10 &&
                  rep.global_max_ratio <= 3.0 + 1e-10)) {
                ok = false;
                why << " z2z3 r=" << r << " ratio=" << rep.global_max_ratio;
            }
        }
    }
    gate.report(3, "harmonic ratio bounds", ok, t.s(), 60,
                ok ? "T_d==1, mgp in [1,9] with flat classes, Z2*Z3 in [1,3]"
                   : "violations:" + why.str());
}

// criterion 4: Monte Carlo connection ratios within [p, 1/p]
void criterion4(Gate& gate) {
    Timer t;
    const double p = 0.6;
    const uint64_t trials = 100'000;
    bool ok = true;
    std::ostringstream why;
    int which = 0;
    for (auto g : {make_modified_grandparent(make_tree(3)), z2z3()}) {
        const char* name = which++ == 0 ? "mgp" : "z2z3";
        for (int n = 1; n <= 4; ++n) {
            Ball b = bfs_ball(g, g.root(), n);
            ConnectionEstimate e =
                connection_prob(b, p, trials, 0xACC4 + uint64_t(n), kThreads);
            double hi_lo = 0.0, lo_hi = 1.0;  // max(b-3se), min(b+3se)
            for (size_t i = 0; i < e.b_hat.size(); ++i) {
                hi_lo = std::max(hi_lo, e.b_hat[i] - 3 * e.std_err[i]);
                lo_hi = std::min(lo_hi, e.b_hat[i] + 3 * e.std_err[i]);
            }
            if (!(hi_lo <= (1.0 / p) * lo_hi)) {
                ok = false;
                why << " " << name << " n=" << n << " ratio>" << hi_lo / lo_hi;
            }
        }
    }
    gate.report(4, "connection ratio bounds at p=0.6", ok, t.s(), 180,
                ok ? "all sphere ratios within [p, 1/p] up to 3 sigma"
                   : "violations:" + why.str());
}

// criterion 5: Monte Carlo vs exhaustive oracle on small balls
void criterion5(Gate& gate) {
    Timer t;
    const uint64_t trials = 100'000;
    bool ok = true;
    double worst_sigma = 0.0;
    ImplicitGraph base = z2z3();
    const auto& grp = base.group();
    Word r = grp.multiply(grp.letter_word(0, 1), grp.letter_word(1, 1));
    std::vector<std::pair<ImplicitGraph, int>> cases = {
        {make_tree(3), 1}, {make_tree(3), 2},       {base, 1},
        {base, 2},         {make_quotient(base, r, 2), 2}};
    for (const auto& [g, R] : cases) {
        Ball b = bfs_ball(g, g.root(), R);
        if (b.edges.size() > 20) continue;
        auto exact = connection_prob_exact(b, 0.55);
        ConnectionEstimate mc = connection_prob(b, 0.55, trials, 0xACC5, kThreads);
        for (size_t i = 0; i < exact.size(); ++i) {
            double se = std::sqrt(exact[i] * (1 - exact[i]) / double(trials));
            double dev = std::abs(mc.b_hat[i] - exact[i]);
            if (se == 0.0) {
                if (dev != 0.0) ok = false;
            } else {
                worst_sigma = std::max(worst_sigma, dev / se);
                if (dev > 4 * se) ok = false;
            }
        }
    }
    gate.report(5, "Monte Carlo vs exact oracle", ok, t.s(), 120,
                fmt("worst deviation %.2f sigma (limit 4)", worst_sigma));
}

// criterion 6: nice-edge count bound
void criterion6(Gate& gate) {
    Timer t;
    bool ok = true;
    std::ostringstream why;
    int which = 0;
    for (auto g : {make_tree(3), z2z3()}) {
        const char* name = which++ == 0 ? "t3" : "z2z3";
        SpectralEstimate se = spectral_estimate(g, 16);
        double alpha = se.lambda1_point / 2.0;
        double lam_lo = se.lambda1_lower;
        ExitTemplates tpl(g, 3);
        std::mt19937_64 rng(0xACC6);
        for (int i = 0; i < 50; ++i) {
            VertexSet A = random_connected(g, rng, 2 + rng() % 29);
            double bound = lam_lo * (3.0 / 2.0) * double(A.size());
            long long count = nice_edge_count(g, A, alpha, 3, tpl);
            if (double(count) < bound) {
                ok = false;
                why << " " << name << " |A|=" << A.size() << " count=" << count
                    << " bound=" << bound;
            }
        }
    }
    gate.report(6, "nice-edge count bound", ok, t.s(), 120,
                ok ? "50 random sets per graph all meet lambda1*d/2*|A|"
                   : "violations:" + why.str());
}

// criterion 7: exploration survival on the Z2*Z3 quotient, n = 6
void criterion7(Gate& gate) {
    Timer t;
    ImplicitGraph base = z2z3();
    ImplicitGraph g = family_member(QuotientFamily::z2z3, 6);
    const double eps = 0.05, eps1 = 0.05;
    double pc_hat =
        pc_estimate(base, {10}, 0.3, 20'000, 0xACC7, kThreads, 0.002).points[0].p_hat;

    ExplorationParams par;
    par.eps = eps;
    par.eps1 = eps1;
    par.r_n = local_radius(g, base, 8);
    par.lambda1 = spectral_estimate(g, 12).lambda1_point;
    par.survival_cap = 10'000;
    ExitTemplates tpl(g, par.r_n);

    auto survivors = [&](double p_x, uint64_t seed) {
        par.p = p_x;
        std::vector<uint8_t> res(200, 0);
        percloc::detail::run_trials(200, kThreads, [&](uint64_t run, int) {
            res[run] = run_exploration(g, par, tpl, seed, run).survived() ? 1 : 0;
        });
        int s = 0;
        for (uint8_t v : res) s += v;
        return s;
    };
    int super = survivors(pc_hat + 2 * eps + eps1, 0xACC7A);
    int sub = survivors(0.05, 0xACC7B);            // total 0.15
    bool ok = super >= 10 && sub == 0;
    gate.report(
        7, "exploration survival", ok, t.s(), 600,
        fmt("pc_hat=%.3f r_n=%d lambda1=%.4f; supercritical %d/200 (>=10), "
            "subcritical %d/200 (==0)",
            pc_hat, par.r_n, par.lambda1, super, sub));
}

// criterion 8: locality trend along both quotient families
void criterion8(Gate& gate) {
    Timer t;
    bool ok = true;
    std::ostringstream why;
    for (auto fam : {QuotientFamily::tree3, QuotientFamily::z2z3}) {
        LocalityConfig cfg;
        cfg.n_list = {3, 4, 5, 6, 7, 8};
        cfg.theta_star = 0.3;
        cfg.est_radius = 10;
        cfg.trials = 20'000;
        cfg.master_seed = 0xACC8;
        cfg.threads = kThreads;
        LocalityReport rep = locality_experiment(fam, cfg);
        if (!rep.trend_nonincreasing) {
            ok = false;
            why << " " << to_string(fam) << ": trend broken; |diffs|:";
            for (const auto& row : rep.rows)
                why << " " << std::abs(row.pc_hat - rep.pc_base);
        }
    }
    gate.report(8, "locality trend", ok, t.s(), 600,
                ok ? "|pc(G_n)-pc(G)| nonincreasing up to 2x combined SE, both families"
                   : "violations:" + why.str());
}

// criterion 9: determinism of the stochastic primitives across thread counts
void criterion9(Gate& gate) {
    Timer t;
    std::ostringstream a, b;
    for (int th : {1, 4}) {
        std::ostringstream& o = th == 1 ? a : b;
        ImplicitGraph g = z2z3();
        ReachEstimate re = reach_prob(g, 0.55, 6, 20'000, 0xACC9, th);
        o << re.successes << "|";
        Ball ball = bfs_ball(g, g.root(), 3);
        ConnectionEstimate ce = connection_prob(ball, 0.6, 20'000, 0xACC9, th);
        for (double v : ce.b_hat) o << csv::num(v) << ",";
        o << "|";
        PcEstimate pe = pc_estimate(g, {6}, 0.3, 5'000, 0xACC9, th, 0.002);
        o << csv::num(pe.points[0].p_hat) << "," << csv::num(pe.points[0].std_err)
          << "|";
        ImplicitGraph q = family_member(QuotientFamily::z2z3, 6);
        ExplorationParams par;
        par.p = 0.55;
        par.eps = par.eps1 = 0.05;
        par.r_n = 5;
        par.lambda1 = 0.028;
        par.survival_cap = 500;
        ExitTemplates tpl(q, par.r_n);
        std::vector<ExplorationTrace> traces(40);
        percloc::detail::run_trials(40, th, [&](uint64_t run, int) {
            traces[run] = run_exploration(q, par, tpl, 0xACC9, run);
        });
        for (const auto& tr : traces) {
            o << to_string(tr.cause) << ":";
            for (long long v : tr.a_size) o << v << ",";
            o << ";";
        }
    }
    bool ok = a.str() == b.str();
    gate.report(9, "thread-count determinism", ok, t.s(), 300,
                ok ? "reach/connection/pc/exploration byte-identical at threads 1 vs 4"
                   : "outputs differ between thread counts");
}

}  // namespace

int main() {
    Gate gate;
    criterion1(gate);
    criterion2(gate);
    criterion3(gate);
    criterion4(gate);
    criterion5(gate);
    criterion6(gate);
    criterion7(gate);
    criterion8(gate);
    criterion9(gate);
    if (gate.failures == 0) {
        std::printf("ALL %d ACCEPTANCE CRITERIA PASS\n", 9);
        return 0;
    }
    std::printf("%d criterion(s) FAILED\n", gate.failures);
    return 1;
}
