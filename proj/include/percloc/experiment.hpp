#pragma once

// The locality experiment: along a quotient sequence G_n -> G, tabulate the
// local agreement radius, the spectral-gap estimate, and the theta*-crossing
// p_c estimate, and check that the estimates approach the limit graph's.

#include <cmath>
#include <vector>

#include "exploration.hpp"

namespace percloc {

enum class QuotientFamily { tree3, z2z3 };

inline const char* to_string(QuotientFamily f) {
    return f == QuotientFamily::tree3 ? "tree3" : "z2z3";
}

// Limit graph of the family.
inline ImplicitGraph family_base(QuotientFamily f) {
    if (f == QuotientFamily::tree3) return make_tree(3);
    return make_free_product({FactorSpec{2}, FactorSpec{3}});
}

// n-th member G_n of the quotient sequence. Both relators have infinite
// order and cyclically reduced normal form, and the resulting quotients
// agree with the limit graph on balls of radius growing linearly in n.
inline ImplicitGraph family_member(QuotientFamily f, int n) {
    if (n < 1) throw std::invalid_argument("family index must be >= 1");
    ImplicitGraph base = family_base(f);
    const FreeProductGroup& grp = base.group();
    if (f == QuotientFamily::tree3) {
        // r = a1 a2, exponent n + 1
        Word r = grp.multiply(grp.letter_word(0, 1), grp.letter_word(1, 1));
        return make_quotient(base, r, n + 1);
    }
    // Z2 * Z3, r = a b, exponent n
    Word r = grp.multiply(grp.letter_word(0, 1), grp.letter_word(1, 1));
    return make_quotient(base, r, n);
}

struct LocalityRow {
    int n = 0;
    int r_n = 0;            // measured local agreement radius with the limit
    double lambda1 = 0.0;   // spectral-gap point estimate on G_n
    double lambda1_sq_rn = 0.0;  // lambda1^2 * r_n, the locality driver
    double pc_hat = 0.0;
    double pc_se = 0.0;
};

struct LocalityReport {
    QuotientFamily family = QuotientFamily::tree3;
    std::vector<LocalityRow> rows;
    double pc_base = 0.0;    // same estimator on the limit graph
    double pc_base_se = 0.0;
    double theta_star = 0.0;
    int est_radius = 0;
    // |pc_hat(G_n) - pc_hat(G)| nonincreasing along n up to twice the
    // combined standard error of each consecutive pair
    bool trend_nonincreasing = false;
};

struct LocalityConfig {
    std::vector<int> n_list{3, 4, 5, 6, 7, 8};
    double theta_star = 0.5;
    int est_radius = 10;     // sphere radius for the crossing estimator
    uint64_t trials = 20'000;
    double tol = 0.002;
    uint64_t master_seed = 0;
    int threads = 1;
    int tmax_spectral = 12;  // even
    int rmax_local = 12;     // cap for the agreement-radius scan
};

inline LocalityReport locality_experiment(QuotientFamily f, const LocalityConfig& cfg) {
    LocalityReport rep;
    rep.family = f;
    rep.theta_star = cfg.theta_star;
    rep.est_radius = cfg.est_radius;

    ImplicitGraph base = family_base(f);
    {
        PcEstimate e = pc_estimate(base, {cfg.est_radius}, cfg.theta_star, cfg.trials,
                                   cfg.master_seed, cfg.threads, cfg.tol);
        rep.pc_base = e.points[0].p_hat;
        rep.pc_base_se = e.points[0].std_err;
    }

    for (int n : cfg.n_list) {
        ImplicitGraph gn = family_member(f, n);
        LocalityRow row;
        row.n = n;
        row.r_n = local_radius(gn, base, cfg.rmax_local);
        row.lambda1 = spectral_estimate(gn, cfg.tmax_spectral).lambda1_point;
        row.lambda1_sq_rn = row.lambda1 * row.lambda1 * double(row.r_n);
        PcEstimate e = pc_estimate(gn, {cfg.est_radius}, cfg.theta_star, cfg.trials,
                                   cfg.master_seed, cfg.threads, cfg.tol);
        row.pc_hat = e.points[0].p_hat;
        row.pc_se = e.points[0].std_err;
        rep.rows.push_back(row);
    }

    rep.trend_nonincreasing = true;
    for (size_t i = 1; i < rep.rows.size(); ++i) {
        double prev = std::abs(rep.rows[i - 1].pc_hat - rep.pc_base);
        double cur = std::abs(rep.rows[i].pc_hat - rep.pc_base);
        double comb = std::sqrt(rep.rows[i - 1].pc_se * rep.rows[i - 1].pc_se +
                                rep.rows[i].pc_se * rep.rows[i].pc_se +
                                2.0 * rep.pc_base_se * rep.pc_base_se);
        if (cur > prev + 2.0 * comb) rep.trend_nonincreasing = false;
    }
    return rep;
}

}  // namespace percloc
