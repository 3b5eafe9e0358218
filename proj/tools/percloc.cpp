// percloc: graphs, random walks, percolation, and the locality experiment
// from one deterministic command-line tool.
//
// Exit codes: 0 success, 2 validation/usage error, 3 inconclusive
// (non-bracketing bisection, undecidable isomorphism, cap overflow).

#include <chrono>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "percloc/percloc.hpp"

using nlohmann::ordered_json;
using namespace percloc;

namespace {

const char* kVersion = "0.1.0";

std::vector<FactorSpec> parse_family(const std::string& s) {
    if (s.size() >= 2 && s[0] == 't') {
        int d = std::stoi(s.substr(1));
        return std::vector<FactorSpec>(size_t(d), FactorSpec{2});
    }
    std::vector<FactorSpec> factors;
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != 'z') throw CLI::ValidationError("--family", "expected t<d> or z<k>z<k>...");
        size_t j = ++i;
        while (j < s.size() && std::isdigit((unsigned char)s[j])) ++j;
        if (j == i) throw CLI::ValidationError("--family", "missing factor order");
        factors.push_back(FactorSpec{uint16_t(std::stoi(s.substr(i, j - i)))});
        i = j;
    }
    if (factors.size() < 2)
        throw CLI::ValidationError("--family", "need at least two factors");
    return factors;
}

struct GraphOpts {
    std::string family = "t3";
    int quotient = 0;       // exponent n of the relator; 0 = no quotient
    bool grandparent = false;
};

// Relator for quotients: product of the first generators of the first two
// factors (cyclically reduced, infinite order in any free product).
Word family_relator(const FreeProductGroup& g) {
    return g.multiply(g.letter_word(0, 1), g.letter_word(1, 1));
}

ImplicitGraph build_base(const GraphOpts& o) {
    return make_free_product(parse_family(o.family));
}

ImplicitGraph build_graph(const GraphOpts& o) {
    ImplicitGraph g = build_base(o);
    if (o.quotient > 0)
        g = make_quotient(g, family_relator(g.group()), o.quotient);
    if (o.grandparent) g = make_modified_grandparent(g);
    return g;
}

// Assumption 1.4-style harmonic ratio bound published for the family, or 0
// when none applies.
double harmonic_bound(const GraphOpts& o, const ImplicitGraph& g) {
    if (o.quotient > 0) return 0.0;
    if (o.grandparent) {
        int d2 = g.degree();
        return double(d2);
    }
    uint16_t mx = 0;
    for (const FactorSpec& f : g.group().factors()) mx = std::max(mx, f.order);
    return mx == 2 ? 1.0 : double(mx);
}

struct Output {
    std::string path;  // empty = stdout, no manifest
    std::ostringstream csv;
    ordered_json manifest;

    explicit Output(const std::string& p, const std::string& sub,
                    const std::vector<std::string>& argv) : path(p) {
        manifest["tool"] = "percloc";
        manifest["version"] = kVersion;
        manifest["subcommand"] = sub;
        manifest["argv"] = argv;
    }

    void finish(double wall_s) {
        manifest["wall_time_s"] = wall_s;
        if (path.empty()) {
            std::cout << csv.str();
            return;
        }
        std::ofstream f(path, std::ios::binary);
        if (!f) throw std::runtime_error("cannot open output file: " + path);
        f << csv.str();
        std::ofstream m(path + ".manifest.json", std::ios::binary);
        m << manifest.dump(2) << "\n";
    }
};

std::string word_key(const Word& w) { return hex_key(w); }

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    // --config FILE: prepend the argv recorded in an emitted manifest; later
    // (explicit) flags win
    for (size_t i = 0; i + 1 < args.size(); ++i) {
        if (args[i] == "--config") {
            std::ifstream f(args[i + 1]);
            if (!f) {
                std::cerr << "cannot read config: " << args[i + 1] << "\n";
                return 2;
            }
            ordered_json m = ordered_json::parse(f, nullptr, false);
            if (m.is_discarded() || !m.contains("argv")) {
                std::cerr << "config is not a percloc manifest\n";
                return 2;
            }
            std::vector<std::string> merged = m["argv"].get<std::vector<std::string>>();
            for (size_t j = 0; j < args.size(); ++j)
                if (j != i && j != i + 1) merged.push_back(args[j]);
            args = std::move(merged);
            break;
        }
    }

    CLI::App app{"transitive-graph percolation toolkit"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    GraphOpts go;
    std::string out_path;
    uint64_t master_seed = 0;
    bool have_seed = false;
    int threads = 1;
    uint64_t trials = 100'000;
    int radius = 3;
    double p = 0.5;
    bool have_p = false;
    std::vector<int> n_list;
    double theta_star = 0.5;
    double tol = 0.002;
    int tmax = 16;

    auto add_common = [&](CLI::App* sub, bool with_graph = true) {
        sub->add_option("--out", out_path, "CSV output path (manifest written alongside)");
        sub->add_option("--threads", threads, "worker count (results independent of it)")
            ->check(CLI::Range(1, 64));
        if (with_graph) {
            sub->add_option("--family", go.family, "t<d> or z<k>z<k>... free product");
            sub->add_option("--quotient", go.quotient,
                            "quotient by <r^n> with r = first-generator product")
                ->check(CLI::NonNegativeNumber);
            sub->add_flag("--grandparent", go.grandparent,
                          "modified grandparent construction on top");
        }
        return sub;
    };
    auto add_seed = [&](CLI::App* sub) {
        sub->add_option("--master-seed", master_seed, "root seed (required)")
            ->required()
            ->trigger_on_parse();
        have_seed = true;
        return sub;
    };

    auto* c_info = add_common(app.add_subcommand("graph-info", "family descriptor and degree"));
    auto* c_ball = add_common(app.add_subcommand("ball", "per-level ball structure"));
    c_ball->add_option("--radius", radius)->check(CLI::NonNegativeNumber);
    size_t vertex_cap = 5'000'000;
    c_ball->add_option("--vertex-cap", vertex_cap)->check(CLI::PositiveNumber);
    auto* c_harm = add_common(app.add_subcommand("harmonic", "exit measure of a ball"));
    c_harm->add_option("--radius", radius)->check(CLI::PositiveNumber);
    auto* c_assm = add_common(app.add_subcommand("assumption", "harmonic and connection ratio bounds"));
    c_assm->add_option("--radius", radius)->check(CLI::PositiveNumber);
    c_assm->add_option("--p", p)->check(CLI::Range(0.0, 1.0));
    c_assm->add_option("--trials", trials)->check(CLI::PositiveNumber);
    c_assm->add_option("--master-seed", master_seed);
    auto* c_spec = add_common(app.add_subcommand("spectral", "return probabilities and spectral band"));
    c_spec->add_option("--tmax", tmax)->check(CLI::PositiveNumber);
    auto* c_quot = add_common(app.add_subcommand("quotient-check", "quotient return identity residuals"));
    int jmax = 10;
    c_quot->add_option("--n-list", n_list, "quotient exponents")->delimiter(',');
    c_quot->add_option("--jmax", jmax)->check(CLI::PositiveNumber);
    auto* c_perc = add_common(app.add_subcommand("percolate", "sphere-reaching probabilities"));
    std::vector<double> p_grid;
    c_perc->add_option("--p-grid", p_grid, "retention probabilities")->delimiter(',');
    c_perc->add_option("--n-list", n_list, "sphere radii")->delimiter(',');
    c_perc->add_option("--trials", trials)->check(CLI::PositiveNumber);
    add_seed(c_perc);
    auto* c_pc = add_common(app.add_subcommand("pc-estimate", "theta*-crossing p_c estimate"));
    bool use_oracle = false;
    c_pc->add_option("--n-list", n_list)->delimiter(',');
    c_pc->add_option("--theta-star", theta_star)->check(CLI::Range(0.0, 1.0));
    c_pc->add_option("--tol", tol)->check(CLI::PositiveNumber);
    c_pc->add_option("--trials", trials)->check(CLI::PositiveNumber);
    c_pc->add_flag("--oracle", use_oracle, "exact tree recursion instead of Monte Carlo");
    c_pc->add_option("--master-seed", master_seed);
    auto* c_expl = add_common(app.add_subcommand("explore", "coupled exploration process runs"));
    double eps = 0.05, eps1 = 0.05, lambda1_flag = 0.0;
    uint64_t cap = 10'000, runs = 10;
    int r_n_flag = 0;
    long long step_cap = 2'000'000;
    c_expl->add_option("--p", p)->check(CLI::Range(0.0, 1.0));
    c_expl->add_option("--eps", eps)->check(CLI::Range(0.0, 1.0));
    c_expl->add_option("--eps1", eps1)->check(CLI::Range(0.0, 1.0));
    c_expl->add_option("--cap", cap, "survival threshold M")->check(CLI::PositiveNumber);
    c_expl->add_option("--runs", runs)->check(CLI::PositiveNumber);
    c_expl->add_option("--r-n", r_n_flag, "agreement radius (0 = measure it)");
    c_expl->add_option("--lambda1", lambda1_flag, "spectral gap (0 = estimate it)");
    c_expl->add_option("--step-cap", step_cap)->check(CLI::PositiveNumber);
    add_seed(c_expl);
    auto* c_loc = add_common(app.add_subcommand("locality", "p_c estimates along a quotient sequence"), false);
    std::string seq = "z2z3";
    int est_radius = 10, rmax_local = 12, tmax_loc = 12;
    c_loc->add_option("--family", seq, "t3 or z2z3 quotient sequence")
        ->check(CLI::IsMember({"t3", "z2z3"}));
    c_loc->add_option("--n-list", n_list)->delimiter(',');
    c_loc->add_option("--theta-star", theta_star)->check(CLI::Range(0.0, 1.0));
    c_loc->add_option("--est-radius", est_radius)->check(CLI::PositiveNumber);
    c_loc->add_option("--trials", trials)->check(CLI::PositiveNumber);
    c_loc->add_option("--tol", tol)->check(CLI::PositiveNumber);
    c_loc->add_option("--tmax", tmax_loc)->check(CLI::PositiveNumber);
    c_loc->add_option("--rmax", rmax_local)->check(CLI::PositiveNumber);
    add_seed(c_loc);

    try {
        app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    auto started = std::chrono::steady_clock::now();
    CLI::App* sub = app.get_subcommands().front();
    Output out(out_path, sub->get_name(), args);
    csv::Writer w(out.csv);

    try {
        if (sub == c_info) {
            ImplicitGraph g = build_graph(go);
            w.row({"family", "description", "degree", "tree"});
            w.row({go.family, g.describe(), csv::num(g.degree()),
                   is_tree_graph(g) ? "1" : "0"});
        } else if (sub == c_ball) {
            ImplicitGraph g = build_graph(go);
            Ball b = bfs_ball(g, g.root(), radius, vertex_cap);
            std::vector<long long> within(size_t(radius) + 1, 0), down(size_t(radius) + 1, 0);
            for (const BallEdge& e : b.edges) {
                int lu = b.level[size_t(e.u)], lv = b.level[size_t(e.v)];
                if (lu == lv)
                    ++within[size_t(lu)];
                else
                    ++down[size_t(std::min(lu, lv))];
            }
            w.row({"level", "vertices", "edges_within", "edges_down"});
            for (int j = 0; j <= radius; ++j)
                w.row({csv::num(j), csv::num((long long)b.sphere_size(j)),
                       csv::num(within[size_t(j)]), csv::num(down[size_t(j)])});
        } else if (sub == c_harm) {
            ImplicitGraph g = build_graph(go);
            ExitDistribution d = harmonic_measure(bfs_ball(g, g.root(), radius));
            w.row({"vertex", "level", "class", "mu"});
            for (size_t i = 0; i < d.mu.size(); ++i)
                w.row({word_key(d.sphere_words[i]), csv::num(radius),
                       csv::num(g.sphere_class(d.sphere_words[i])), csv::num(d.mu[i])});
        } else if (sub == c_assm) {
            ImplicitGraph g = build_graph(go);
            Ball b = bfs_ball(g, g.root(), radius);
            ExitDistribution d = harmonic_measure(b);
            std::vector<int> classes;
            for (const Word& wd : d.sphere_words) classes.push_back(g.sphere_class(wd));
            RatioReport rr = ratio_report(d, classes);
            bool with_p = c_assm->count("--p") > 0;
            if (with_p && c_assm->count("--master-seed") == 0)
                throw CLI::RequiredError("--master-seed (required with --p)");
            w.row({"family", "radius", "mu_max_ratio", "mu_bound", "p", "trials",
                   "b_max_ratio", "b_max_se", "b_bound_low", "b_bound_high"});
            std::vector<std::string> row{go.family, csv::num(radius),
                                         csv::num(rr.global_max_ratio),
                                         csv::num(harmonic_bound(go, g))};
            if (with_p) {
                Assumption2Report ar = assumption2_report(b, p, trials, master_seed, threads);
                row.insert(row.end(), {csv::num(p), csv::num((long long)trials),
                                       csv::num(ar.max_ratio), csv::num(ar.max_se),
                                       csv::num(p), csv::num(1.0 / p)});
            } else {
                row.insert(row.end(), {"", "", "", "", "", ""});
            }
            w.row(row);
            out.manifest["result"]["mu_within_class_max"] = ordered_json::object();
            for (const auto& [c, v] : rr.within_class_max)
                out.manifest["result"]["mu_within_class_max"][std::to_string(c)] = v;
        } else if (sub == c_spec) {
            ImplicitGraph g = build_graph(go);
            SpectralEstimate e = spectral_estimate(g, tmax);
            w.row({"t", "p_return", "root_estimate"});
            for (size_t i = 0; i < e.t.size(); ++i)
                w.row({csv::num(e.t[i]), csv::num(e.p2t[i]), csv::num(e.root_estimate[i])});
            auto& r = out.manifest["result"];
            r["rho_cert_lower"] = e.rho_cert_lower;
            r["rho_fit"] = e.rho_fit;
            r["rho_upper"] = e.rho_upper;
            r["lambda1_point"] = e.lambda1_point;
            r["lambda1_lower"] = e.lambda1_lower;
            r["lambda1_upper"] = e.lambda1_upper;
        } else if (sub == c_quot) {
            if (n_list.empty()) n_list = {2, 3, 4};
            ImplicitGraph base = build_base(go);
            w.row({"n", "j", "residual"});
            for (int n : n_list) {
                ImplicitGraph q = make_quotient(base, family_relator(base.group()), n);
                for (int j = 0; j <= jmax; ++j)
                    w.row({csv::num(n), csv::num(j),
                           csv::num(quotient_identity_residual(base, q, quotient_context(q), j))});
            }
        } else if (sub == c_perc) {
            if (p_grid.empty()) p_grid = {0.5};
            if (n_list.empty()) n_list = {4};
            ImplicitGraph g = build_graph(go);
            w.row({"p", "n", "h", "stderr"});
            for (double pp : p_grid)
                for (int n : n_list) {
                    ReachEstimate e = reach_prob(g, pp, n, trials, master_seed, threads);
                    w.row({csv::num(pp), csv::num(n), csv::num(e.h), csv::num(e.std_err)});
                }
        } else if (sub == c_pc) {
            if (n_list.empty()) n_list = {4, 6, 8};
            PcEstimate e;
            if (use_oracle) {
                std::vector<FactorSpec> f = parse_family(go.family);
                for (const FactorSpec& fs : f)
                    if (fs.order != 2)
                        throw CLI::ValidationError("--oracle", "oracle needs a tree family");
                if (go.quotient > 0 || go.grandparent)
                    throw CLI::ValidationError("--oracle", "oracle needs the plain tree");
                e = pc_estimate_tree_oracle(int(f.size()), n_list, theta_star, tol);
            } else {
                if (c_pc->count("--master-seed") == 0)
                    throw CLI::RequiredError("--master-seed (required without --oracle)");
                e = pc_estimate(build_graph(go), n_list, theta_star, trials, master_seed,
                                threads, tol);
            }
            w.row({"n", "p_hat", "stderr", "trials"});
            for (const PcPoint& pt : e.points)
                w.row({csv::num(pt.n), csv::num(pt.p_hat), csv::num(pt.std_err),
                       csv::num((long long)(use_oracle ? 0 : trials))});
        } else if (sub == c_expl) {
            if (go.quotient <= 0)
                throw CLI::ValidationError("--quotient", "explore needs a finite quotient");
            ImplicitGraph g = build_graph(go);
            ExplorationParams par;
            par.p = p;
            par.eps = eps;
            par.eps1 = eps1;
            par.survival_cap = cap;
            par.step_cap = step_cap;
            par.r_n = r_n_flag > 0 ? r_n_flag
                                   : local_radius(g, build_base(go), go.quotient + 2);
            par.lambda1 = lambda1_flag > 0.0 ? lambda1_flag
                                             : spectral_estimate(g, 12).lambda1_point;
            ExitTemplates templates(g, par.r_n);
            std::vector<ExplorationTrace> traces(runs);
            detail::run_trials(runs, threads, [&](uint64_t run, int) {
                traces[run] = run_exploration(g, par, templates, master_seed, run);
            });
            w.row({"run", "t", "a_size", "xi", "z_closed", "stop_cause"});
            long long survivors = 0;
            for (uint64_t run = 0; run < runs; ++run) {
                const ExplorationTrace& tr = traces[run];
                survivors += tr.survived();
                for (size_t t = 0; t < tr.a_size.size(); ++t)
                    w.row({csv::num((long long)run), csv::num((long long)t),
                           csv::num(tr.a_size[t]),
                           t ? csv::num(tr.xi[t - 1]) : std::string(),
                           t ? csv::num(tr.z_checked_closed[t - 1]) : std::string(),
                           to_string(tr.cause)});
            }
            auto& r = out.manifest["result"];
            r["r_n"] = par.r_n;
            r["lambda1"] = par.lambda1;
            r["survivors"] = survivors;
            r["runs"] = runs;
        } else if (sub == c_loc) {
            LocalityConfig cfg;
            if (!n_list.empty()) cfg.n_list = n_list;
            cfg.theta_star = theta_star;
            cfg.est_radius = est_radius;
            cfg.trials = trials;
            cfg.tol = tol;
            cfg.master_seed = master_seed;
            cfg.threads = threads;
            cfg.tmax_spectral = tmax_loc;
            cfg.rmax_local = rmax_local;
            QuotientFamily fam = seq == "t3" ? QuotientFamily::tree3 : QuotientFamily::z2z3;
            LocalityReport rep = locality_experiment(fam, cfg);
            w.row({"family", "n", "r_n", "lambda1", "lambda1_sq_rn", "pc_hat", "pc_se",
                   "pc_base", "pc_base_se"});
            for (const LocalityRow& row : rep.rows)
                w.row({seq, csv::num(row.n), csv::num(row.r_n), csv::num(row.lambda1),
                       csv::num(row.lambda1_sq_rn), csv::num(row.pc_hat),
                       csv::num(row.pc_se), csv::num(rep.pc_base),
                       csv::num(rep.pc_base_se)});
            out.manifest["result"]["trend_nonincreasing"] = rep.trend_nonincreasing;
        }
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::runtime_error& e) {
        std::cerr << "inconclusive: " << e.what() << "\n";
        return 3;
    }

    double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    try {
        out.finish(wall);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    (void)have_seed;
    (void)have_p;
    return 0;
}
