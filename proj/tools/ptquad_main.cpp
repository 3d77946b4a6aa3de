// Command-line front end: closed-form constructors, Newton solves, branch
// continuation, stability spectra, ghost branches, z-propagation, and the
// per-figure reproduction recipes. All outputs are deterministic; every
// stochastic choice takes an explicit integer seed that is echoed into the
// output metadata.
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <mutex>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "ptquad/ptquad.hpp"

namespace fs = std::filesystem;
using namespace ptquad;
using nlohmann::json;

namespace {

struct ParamFlags {
    double k = 1.0;
    double gamma = 0.0;
    int alpha = 0;
    double delta1 = 0.0;
    double delta2 = 0.0;

    CouplerParams params() const { return {k, gamma, alpha, delta1, delta2}; }
};

void add_param_flags(CLI::App* cmd, ParamFlags& p) {
    cmd->add_option("--k", p.k, "coupling strength (> 0)")->capture_default_str();
    cmd->add_option("--gamma", p.gamma, "gain/loss coefficient (>= 0)")->capture_default_str();
    cmd->add_option("--alpha", p.alpha, "four-wave switch, 0 or 1")->capture_default_str();
    cmd->add_option("--delta1", p.delta1, "mismatch rate 1 (dynamics only)")
        ->capture_default_str();
    cmd->add_option("--delta2", p.delta2, "mismatch rate 2 (dynamics only)")
        ->capture_default_str();
}

int parse_sign(const std::string& s) {
    if (s == "+" || s == "plus" || s == "1") return +1;
    if (s == "-" || s == "minus" || s == "-1") return -1;
    throw CLI::ValidationError("--sign", "expected + or -");
}

// Exact-family constructor shared by several subcommands.
StationaryMode make_exact_mode(const std::string& family, int sign, double b,
                               const CouplerParams& p) {
    if (family == "circular") return circular_mode({sign, b, p});
    if (family == "elliptic") {
        if (p.alpha == 1) return elliptic_mode_alpha1({sign, b, p});
        // alpha = 0: no closed form; seed from the perturbative root and
        // continue to the requested propagation constant.
        const double bt = btilde(p, sign);
        const auto root = elliptic_root(p, bt);
        if (!root)
            throw std::runtime_error("elliptic family does not exist at these parameters");
        const double eps = 0.15;
        FieldState s;
        const auto wt = pt_eigenvector(p, bt, root->theta).v;
        for (int j = 0; j < 4; ++j) s[j] = eps * wt[j];
        StationaryMode m = newton_solve(p, bt + eps * eps * root->B2, s);
        m.family = sign > 0 ? Family::EllipticPlus : Family::EllipticMinus;
        if (std::abs(m.b - b) < 1e-12) return m;
        ContinuationOptions opts;
        opts.with_stability = false;
        const BranchCurve leg = continue_branch(p, Axis::B, {m.b, b}, m, opts, "seed-leg");
        if (leg.termination != Termination::Boundary)
            throw std::runtime_error("elliptic family lost before reaching requested b");
        return leg.points.back().mode;
    }
    throw CLI::ValidationError("--family", "expected circular or elliptic");
}

void echo_config(const CLI::App& app, const fs::path& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    std::ofstream cfg(out_dir / "effective_config.ini");
    cfg << app.config_to_str(true, true);
}

int worker_count() {
    if (const char* env = std::getenv("PTQUAD_WORKERS")) {
        const int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

// Run independent jobs with at most `workers` in flight.
void run_jobs(std::vector<std::function<void()>> jobs) {
    const int workers = worker_count();
    if (workers <= 1) {
        for (auto& j : jobs) j();
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::future<void>> pool;
    for (int w = 0; w < workers; ++w)
        pool.push_back(std::async(std::launch::async, [&jobs, &next] {
            for (;;) {
                const size_t i = next.fetch_add(1);
                if (i >= jobs.size()) return;
                jobs[i]();
            }
        }));
    for (auto& f : pool) f.get();
}

// Branch curve assembled from a closed-form family on a gamma grid (used
// where the generic corrector is degenerate, e.g. the alpha = 1 asymmetric
// families whose rotation symmetry makes them non-isolated).
BranchCurve exact_gamma_curve(const CouplerParams& base, int sign, double b,
                              const std::vector<double>& gammas, const std::string& label,
                              bool elliptic) {
    BranchCurve curve;
    curve.label = label;
    curve.axis = Axis::Gamma;
    for (double g : gammas) {
        CouplerParams p = base;
        p.gamma = g;
        StationaryMode m;
        try {
            m = elliptic ? elliptic_mode_alpha1({sign, b, p}) : circular_mode({sign, b, p});
        } catch (const std::exception&) {
            break;
        }
        BranchPoint pt;
        pt.param = g;
        pt.mode = m;
        pt.U = power(m.w);
        for (int j = 0; j < 4; ++j) pt.amplitudes[j] = std::abs(m.w[j]);
        for (int j = 0; j < 3; ++j) {
            double d = std::arg(m.w[j + 1]) - std::arg(m.w[j]);
            while (d > M_PI) d -= 2.0 * M_PI;
            while (d <= -M_PI) d += 2.0 * M_PI;
            pt.phase_diffs[j] = d;
        }
        pt.stability = stability_report(m);
        curve.points.push_back(pt);
    }
    curve.termination = Termination::ExistenceLost;
    return curve;
}

// Two-leg continuation from an interior seed, stitched into one curve
// ordered by parameter.
BranchCurve stitched_gamma_curve(const CouplerParams& p, const StationaryMode& seed,
                                 double lo, double hi, const ContinuationOptions& opts,
                                 const std::string& label) {
    const double g0 = seed.params.gamma;
    const BranchCurve down = continue_branch(p, Axis::Gamma, {g0, lo}, seed, opts, label);
    const BranchCurve up = continue_branch(p, Axis::Gamma, {g0, hi}, seed, opts, label);
    BranchCurve out;
    out.label = label;
    out.axis = Axis::Gamma;
    out.points.assign(down.points.rbegin(), down.points.rend());
    out.points.insert(out.points.end(), up.points.begin() + 1, up.points.end());
    out.termination = up.termination;
    return out;
}

void write_eigs_csv(const BranchCurve& curve, const fs::path& path) {
    auto out = std::ofstream(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << "param";
    for (int i = 1; i <= 8; ++i) out << ",re_l" << i;
    for (int i = 1; i <= 8; ++i) out << ",im_l" << i;
    out << "\n";
    for (const auto& pt : curve.points) {
        if (!pt.stability) continue;
        out << g17(pt.param);
        for (const auto& l : pt.stability->eigenvalues) out << ',' << g17(l.real());
        for (const auto& l : pt.stability->eigenvalues) out << ',' << g17(l.imag());
        out << "\n";
    }
}

json curve_summary(const BranchCurve& curve) {
    json j;
    j["label"] = curve.label;
    j["axis"] = axis_name(curve.axis);
    j["n_points"] = curve.points.size();
    j["termination"] = termination_name(curve.termination);
    if (!curve.points.empty()) {
        j["param_first"] = curve.points.front().param;
        j["param_last"] = curve.points.back().param;
    }
    const auto folds = detect_fold(curve);
    if (!folds.empty()) j["folds"] = folds;
    return j;
}

// ---------------------------------------------------------------------------
// figure recipes

void figure2(const fs::path& dir) {
    struct Panel { const char* tag; double gamma; int alpha; };
    const Panel panels[] = {{"A", 0.5, 0}, {"B", 0.5, 1}, {"C", 1.1, 0}, {"D", 1.1, 1}};
    json manifest;
    std::vector<std::function<void()>> jobs;
    std::mutex mj;
    for (const Panel& panel : panels) {
        jobs.push_back([panel, &dir, &manifest, &mj] {
            CouplerParams p{1.0, panel.gamma, panel.alpha};
            ContinuationOptions opts;
            opts.step_max = 0.05;
            json local;
            for (int sign : {+1, -1}) {
                const double bt = btilde(p, sign);
                StationaryMode seed = circular_mode({sign, bt + 0.05, p});
                const std::string name =
                    std::string("fig2_") + panel.tag + "_circular" + (sign > 0 ? "+" : "-");
                const BranchCurve c = continue_branch(p, Axis::B, {bt + 0.05, 4.0}, seed,
                                                      opts, name);
                write_branch_csv(c, dir / (name + ".csv"));
                local[name] = curve_summary(c);
            }
            for (int sign : {+1, -1}) {
                const std::string name =
                    std::string("fig2_") + panel.tag + "_elliptic" + (sign > 0 ? "+" : "-");
                try {
                    if (p.alpha == 1) {
                        const double bt = btilde(p, sign);
                        std::vector<double> bs;
                        for (double b = bt + 0.05; b <= 4.0 + 1e-12; b += 0.05) bs.push_back(b);
                        BranchCurve c;
                        c.label = name;
                        c.axis = Axis::B;
                        for (double b : bs) {
                            StationaryMode m = elliptic_mode_alpha1({sign, b, p});
                            BranchPoint pt;
                            pt.param = b;
                            pt.mode = m;
                            pt.U = power(m.w);
                            for (int j = 0; j < 4; ++j) pt.amplitudes[j] = std::abs(m.w[j]);
                            for (int j = 0; j < 3; ++j)
                                pt.phase_diffs[j] =
                                    std::remainder(std::arg(m.w[j + 1]) - std::arg(m.w[j]),
                                                   2.0 * M_PI);
                            pt.stability = stability_report(m);
                            c.points.push_back(pt);
                        }
                        c.termination = Termination::Boundary;
                        write_branch_csv(c, dir / (name + ".csv"));
                        local[name] = curve_summary(c);
                    } else {
                        const double bt = btilde(p, sign);
                        StationaryMode seed = make_exact_mode("elliptic", sign, bt + 0.08, p);
                        const BranchCurve c = continue_branch(p, Axis::B, {seed.b, 4.0},
                                                              seed, opts, name);
                        write_branch_csv(c, dir / (name + ".csv"));
                        local[name] = curve_summary(c);
                    }
                } catch (const std::exception& e) {
                    local[name] = {{"exists", false}, {"reason", e.what()}};
                }
            }
            const std::lock_guard<std::mutex> lock(mj);
            manifest[std::string("panel_") + panel.tag] = local;
        });
    }
    run_jobs(std::move(jobs));
    write_json(manifest, dir / "fig2_manifest.json");
}

// Shared by figures 3 and 4 (alpha = 0 and 1) and by figure 5, which emits
// the eigenvalue tracks of the same branches.
struct GammaBranchSet {
    std::vector<BranchCurve> curves;
    GhostBranchCurve ghost_grow;
    GhostBranchCurve ghost_decay;
};

GammaBranchSet gamma_branches(int alpha) {
    CouplerParams p{1.0, 0.0, alpha};
    ContinuationOptions opts;
    opts.step_max = 0.02;
    GammaBranchSet set;

    for (int sign : {+1, -1}) {
        StationaryMode seed = circular_mode({sign, 2.0, p});
        set.curves.push_back(continue_branch(p, Axis::Gamma, {0.0, 1.6}, seed, opts,
                                             std::string("circular") + (sign > 0 ? "+" : "-")));
    }
    if (alpha == 0) {
        for (int sign : {+1, -1}) {
            CouplerParams ps = p;
            ps.gamma = 0.5;
            StationaryMode seed = make_exact_mode("elliptic", sign, 2.0, ps);
            set.curves.push_back(
                stitched_gamma_curve(ps, seed, 0.0, 1.05, opts,
                                     std::string("elliptic") + (sign > 0 ? "+" : "-")));
        }
    } else {
        // The alpha = 1 asymmetric families carry the polarization-rotation
        // symmetry, so their branch of record is the closed form.
        std::vector<double> gs;
        for (double g = 0.0; g < std::sqrt(2.0); g += 0.01) gs.push_back(g);
        gs.push_back(std::sqrt(2.0));
        for (int sign : {+1, -1})
            set.curves.push_back(exact_gamma_curve(
                p, sign, 2.0, gs, std::string("asymmetric") + (sign > 0 ? "+" : "-"), true));
    }
    CouplerParams pg = p;
    pg.gamma = 1.0;
    set.ghost_grow = ghost_branch(pg, 2.0, {1.0, 2.6}, true);
    set.ghost_decay = ghost_branch(pg, 2.0, {1.0, 2.6}, false);
    return set;
}

void figure34(int alpha, const fs::path& dir) {
    const std::string fig = alpha == 0 ? "fig3" : "fig4";
    const GammaBranchSet set = gamma_branches(alpha);
    json manifest;
    std::vector<const BranchCurve*> all;
    for (const auto& c : set.curves) all.push_back(&c);
    for (const auto& c : set.curves) {
        write_branch_csv(c, dir / (fig + "_" + c.label + ".csv"));
        json s = curve_summary(c);
        json events = json::array();
        for (const auto& ev : detect_branch_point(c, all))
            events.push_back({{"param", ev.param},
                              {"count_before", ev.count_before},
                              {"count_after", ev.count_after},
                              {"classification", ev.classification}});
        if (!events.empty()) s["stability_crossings"] = events;
        manifest[c.label] = s;
    }
    write_ghost_csv(set.ghost_grow, dir / (fig + "_ghost_growing.csv"));
    write_ghost_csv(set.ghost_decay, dir / (fig + "_ghost_decaying.csv"));
    manifest["ghost"] = {{"gamma_onset", ghost_gamma_onset({1.0, 1.0, alpha}, 2.0)},
                         {"gamma_last", set.ghost_grow.gamma_last},
                         {"termination", set.ghost_grow.termination}};
    write_json(manifest, dir / (fig + "_manifest.json"));
}

void figure5(const fs::path& dir) {
    json manifest;
    for (int alpha : {0, 1}) {
        const GammaBranchSet set = gamma_branches(alpha);
        for (const auto& c : set.curves) {
            const std::string name =
                "fig5_alpha" + std::to_string(alpha) + "_" + c.label + "_eigs";
            write_eigs_csv(c, dir / (name + ".csv"));
            manifest[name] = {{"n_points", c.points.size()}};
        }
    }
    write_json(manifest, dir / "fig5_manifest.json");
}

struct SweepOutcome {
    unsigned seed;
    std::string classification;  // "growth" or "bounded"
    double z_end;
    double u_end;
};

// Seed sweep behind figure 6: unstable circularly polarized mode at b = 3,
// gamma = 0.5, alpha = 0. Growth runs truncate quickly at a practical
// overflow norm; bounded runs integrate the full distance.
std::vector<SweepOutcome> fig6_sweep(int n_seeds, double z_max, double overflow) {
    CouplerParams p{1.0, 0.5, 0};
    const StationaryMode m = circular_mode({+1, 3.0, p});
    std::vector<SweepOutcome> outcomes(n_seeds);
    std::vector<std::function<void()>> jobs;
    for (int s = 0; s < n_seeds; ++s)
        jobs.push_back([s, z_max, overflow, &outcomes, &p, &m] {
            IntegratorOptions opts;
            opts.overflow_norm = overflow;
            opts.sample_dz = 0.25;
            const EvolutionTrace tr = integrate(p, perturb(m, 1e-3, s + 1), z_max, opts);
            outcomes[s] = {static_cast<unsigned>(s + 1),
                           tr.status == EvolutionTrace::Status::Blowup ? "growth" : "bounded",
                           tr.z.back(), tr.U.back()};
        });
    run_jobs(std::move(jobs));
    return outcomes;
}

void figure6(const fs::path& dir) {
    const double z_max = 2000.0;
    const auto outcomes = fig6_sweep(32, z_max, 300.0);
    json manifest;
    manifest["mode"] = {{"family", "circular+"}, {"b", 3.0}, {"gamma", 0.5}, {"alpha", 0},
                        {"eps", 1e-3}};
    json per_seed = json::array();
    int growth_seed = -1, bounded_seed = -1;
    for (const auto& o : outcomes) {
        per_seed.push_back({{"seed", o.seed}, {"class", o.classification},
                            {"z_end", o.z_end}, {"U_end", o.u_end}});
        if (o.classification == "growth" && growth_seed < 0) growth_seed = o.seed;
        if (o.classification == "bounded" && bounded_seed < 0) bounded_seed = o.seed;
    }
    manifest["seeds"] = per_seed;

    CouplerParams p{1.0, 0.5, 0};
    const StationaryMode m = circular_mode({+1, 3.0, p});
    if (growth_seed >= 0) {
        IntegratorOptions opts;
        opts.overflow_norm = 1e3;
        const EvolutionTrace tr = integrate(p, perturb(m, 1e-3, growth_seed), z_max, opts);
        write_trace_csv(tr, dir / "fig6_growth.csv");
        manifest["growth_seed"] = growth_seed;
    }
    if (bounded_seed >= 0) {
        IntegratorOptions opts;
        opts.overflow_norm = 1e3;
        const EvolutionTrace tr = integrate(p, perturb(m, 1e-3, bounded_seed), z_max, opts);
        write_trace_csv(tr, dir / "fig6_breathing.csv");
        manifest["bounded_seed"] = bounded_seed;
    }
    write_json(manifest, dir / "fig6_manifest.json");
}

struct Fig7Result {
    EvolutionTrace dynamics;
    EvolutionTrace ghost;
    ShiftFit fit;
    std::pair<double, double> window;
};

Fig7Result fig7_overlay(double rel_tol, double abs_tol) {
    CouplerParams p{1.0, 1.02, 0};
    const StationaryMode m = circular_mode({+1, 2.0, p});
    IntegratorOptions opts;
    opts.rel_tol = rel_tol;
    opts.abs_tol = abs_tol;
    opts.overflow_norm = 1e3;
    opts.sample_dz = 0.05;
    Fig7Result r;
    r.dynamics = integrate(p, perturb(m, 1e-3, 20240807), 400.0, opts);

    const GhostMode g = ghost_solve(p, 2.0, *ghost_closed_form(p, 2.0, true));
    const double z_end = r.dynamics.z.back();
    r.ghost = ghost_trace(g, z_end + 80.0, 0.05);

    // post-onset window: from where the perturbation has clearly taken over
    double z_on = r.dynamics.z.back() * 0.5;
    for (size_t i = 0; i < r.dynamics.size(); ++i)
        if (r.dynamics.U[i] > 4.0 * r.dynamics.U[0]) { z_on = r.dynamics.z[i]; break; }
    r.window = {z_on, z_end};
    r.fit = overlay_shift_fit(r.dynamics, r.ghost, r.window);
    return r;
}

void figure7(const fs::path& dir) {
    const Fig7Result r = fig7_overlay(1e-10, 1e-12);
    write_trace_csv(r.dynamics, dir / "fig7_dynamics.csv");
    write_trace_csv(r.ghost, dir / "fig7_ghost.csv");
    const Fig7Result half = fig7_overlay(5e-11, 5e-13);
    json fit = {{"shift", r.fit.shift},
                {"misfit_per_sample", r.fit.misfit},
                {"window", {r.window.first, r.window.second}},
                {"shift_tolerance_halved", half.fit.shift},
                {"shift_drift", std::abs(half.fit.shift - r.fit.shift)},
                {"perturbation_seed", 20240807},
                {"eps", 1e-3}};
    write_json(fit, dir / "fig7_fit.json");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"PT-symmetric birefringent-coupler quadrimer toolkit"};
    app.set_config("--config", "", "read options from an INI file");
    app.require_subcommand(1);

    // ---- spectrum ----
    ParamFlags sp;
    auto* cmd_spectrum = app.add_subcommand("spectrum", "linear spectrum and PT phase");
    add_param_flags(cmd_spectrum, sp);

    // ---- predict ----
    ParamFlags pr;
    std::string pr_family = "circular", pr_sign = "+";
    auto* cmd_predict = app.add_subcommand("predict", "small-amplitude bifurcation prediction");
    add_param_flags(cmd_predict, pr);
    cmd_predict->add_option("--family", pr_family, "circular or elliptic")
        ->capture_default_str();
    cmd_predict->add_option("--sign", pr_sign, "+ or -")->capture_default_str();

    // ---- mode ----
    ParamFlags mo;
    std::string mo_family = "circular", mo_sign = "+";
    double mo_b = 2.0;
    auto* cmd_mode = app.add_subcommand("mode", "closed-form stationary mode");
    add_param_flags(cmd_mode, mo);
    cmd_mode->add_option("--family", mo_family)->capture_default_str();
    cmd_mode->add_option("--sign", mo_sign)->capture_default_str();
    cmd_mode->add_option("--b", mo_b, "propagation constant")->capture_default_str();

    // ---- solve ----
    ParamFlags so;
    double so_b = 2.0;
    std::string so_seed_json;
    unsigned long long so_seed_rng = 0;
    double so_seed_scale = 1.0;
    auto* cmd_solve = app.add_subcommand("solve", "Newton solve from a seed");
    add_param_flags(cmd_solve, so);
    cmd_solve->add_option("--b", so_b)->capture_default_str();
    cmd_solve->add_option("--seed-json", so_seed_json,
                          "file with a FieldState as JSON [[re,im] x 4]");
    cmd_solve->add_option("--seed-random", so_seed_rng, "random unit seed from this RNG seed");
    cmd_solve->add_option("--seed-scale", so_seed_scale, "norm of the random seed")
        ->capture_default_str();

    // ---- continue ----
    ParamFlags co;
    std::string co_axis = "b", co_family = "circular", co_sign = "+", co_out = "branch.csv";
    double co_from = 0.0, co_to = 1.0, co_b = 2.0;
    bool co_no_stability = false;
    auto* cmd_continue = app.add_subcommand("continue", "branch continuation in b or gamma");
    add_param_flags(cmd_continue, co);
    cmd_continue->add_option("--axis", co_axis, "b or gamma")->capture_default_str();
    cmd_continue->add_option("--family", co_family)->capture_default_str();
    cmd_continue->add_option("--sign", co_sign)->capture_default_str();
    cmd_continue->add_option("--from", co_from)->required();
    cmd_continue->add_option("--to", co_to)->required();
    cmd_continue->add_option("--b", co_b, "propagation constant (gamma axis)")
        ->capture_default_str();
    cmd_continue->add_option("--out", co_out, "output CSV path")->capture_default_str();
    cmd_continue->add_flag("--no-stability", co_no_stability, "skip stability reports");

    // ---- stability ----
    ParamFlags st;
    std::string st_family = "circular", st_sign = "+";
    double st_b = 2.0;
    auto* cmd_stability = app.add_subcommand("stability", "linearization spectrum of a mode");
    add_param_flags(cmd_stability, st);
    cmd_stability->add_option("--family", st_family)->capture_default_str();
    cmd_stability->add_option("--sign", st_sign)->capture_default_str();
    cmd_stability->add_option("--b", st_b)->capture_default_str();

    // ---- ghost ----
    ParamFlags gh;
    double gh_b = 2.0, gh_from = 1.0, gh_to = 2.6;
    bool gh_mirror = false, gh_branch_flag = false;
    std::string gh_out = "ghost.csv";
    auto* cmd_ghost = app.add_subcommand("ghost", "ghost states with complex b (|b| pinned)");
    add_param_flags(cmd_ghost, gh);
    cmd_ghost->add_option("--b", gh_b, "pinned modulus of the propagation constant")
        ->capture_default_str();
    cmd_ghost->add_flag("--mirror", gh_mirror, "decaying mirror branch (c2 > c1)");
    cmd_ghost->add_flag("--branch", gh_branch_flag, "continue the branch over gamma");
    cmd_ghost->add_option("--from", gh_from)->capture_default_str();
    cmd_ghost->add_option("--to", gh_to)->capture_default_str();
    cmd_ghost->add_option("--out", gh_out, "CSV output (branch mode)")->capture_default_str();

    // ---- evolve ----
    ParamFlags ev;
    std::string ev_family = "circular", ev_sign = "+", ev_out = "trace.csv", ev_initial_json;
    double ev_b = 2.0, ev_eps = 1e-3, ev_zmax = 100.0, ev_rel = 1e-10, ev_abs = 1e-12,
           ev_dz = 0.1, ev_overflow = 1e12;
    unsigned long long ev_seed = 1;
    bool ev_four_wave = false;
    auto* cmd_evolve = app.add_subcommand("evolve", "integrate the dynamical system");
    add_param_flags(cmd_evolve, ev);
    cmd_evolve->add_option("--family", ev_family)->capture_default_str();
    cmd_evolve->add_option("--sign", ev_sign)->capture_default_str();
    cmd_evolve->add_option("--b", ev_b)->capture_default_str();
    cmd_evolve->add_option("--eps", ev_eps, "perturbation size")->capture_default_str();
    cmd_evolve->add_option("--seed", ev_seed, "perturbation RNG seed")->capture_default_str();
    cmd_evolve->add_option("--zmax", ev_zmax)->capture_default_str();
    cmd_evolve->add_option("--rel-tol", ev_rel)->capture_default_str();
    cmd_evolve->add_option("--abs-tol", ev_abs)->capture_default_str();
    cmd_evolve->add_option("--sample-dz", ev_dz)->capture_default_str();
    cmd_evolve->add_option("--overflow-norm", ev_overflow)->capture_default_str();
    cmd_evolve->add_option("--initial-json", ev_initial_json,
                           "file with the initial FieldState (overrides --family)");
    cmd_evolve->add_flag("--four-wave", ev_four_wave,
                         "keep the mismatch four-wave terms at alpha = 0");
    cmd_evolve->add_option("--out", ev_out)->capture_default_str();

    // ---- figure ----
    int fig_n = 0;
    std::string fig_out = "figures";
    auto* cmd_figure = app.add_subcommand("figure", "reproduce the data behind a figure");
    cmd_figure->add_option("number", fig_n, "figure number (2-7)")->required();
    cmd_figure->add_option("--out", fig_out, "output directory")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (cmd_spectrum->parsed()) {
            std::cout << json_spectrum(eigenvalues_closed(sp.params())).dump(2) << "\n";
        } else if (cmd_predict->parsed()) {
            const int sign = parse_sign(pr_sign);
            if (pr_family == "circular") {
                std::cout << json_prediction(circular_prediction(pr.params(), sign)).dump(2)
                          << "\n";
            } else {
                const auto pred = elliptic_prediction(pr.params(), sign);
                if (!pred) {
                    std::cout << json{{"family", "elliptic"}, {"exists", false}}.dump(2)
                              << "\n";
                } else {
                    json j = json_prediction(*pred);
                    j["exists"] = true;
                    std::cout << j.dump(2) << "\n";
                }
            }
        } else if (cmd_mode->parsed()) {
            const StationaryMode m =
                make_exact_mode(mo_family, parse_sign(mo_sign), mo_b, mo.params());
            std::cout << json_mode(m).dump(2) << "\n";
        } else if (cmd_solve->parsed()) {
            FieldState seed;
            if (!so_seed_json.empty()) {
                std::ifstream in(so_seed_json);
                if (!in) throw std::runtime_error("cannot read " + so_seed_json);
                seed = field_from_json(json::parse(in));
            } else {
                seed = random_unit_state(so_seed_rng);
                for (auto& v : seed) v *= so_seed_scale;
            }
            const StationaryMode m = newton_solve(so.params(), so_b, seed);
            std::cout << json_mode(m).dump(2) << "\n";
        } else if (cmd_continue->parsed()) {
            const Axis axis = (co_axis == "gamma") ? Axis::Gamma : Axis::B;
            CouplerParams p_start = co.params();
            if (axis == Axis::Gamma) p_start.gamma = co_from;
            const double b_seed = (axis == Axis::B) ? co_from : co_b;
            StationaryMode seed =
                make_exact_mode(co_family, parse_sign(co_sign), b_seed, p_start);
            ContinuationOptions opts;
            opts.with_stability = !co_no_stability;
            const BranchCurve curve = continue_branch(p_start, axis, {co_from, co_to}, seed,
                                                      opts, co_family + co_sign);
            write_branch_csv(curve, co_out);
            const fs::path parent = fs::path(co_out).parent_path();
            echo_config(app, parent.empty() ? fs::path(".") : parent);
            std::cout << curve_summary(curve).dump(2) << "\n";
        } else if (cmd_stability->parsed()) {
            const StationaryMode m =
                make_exact_mode(st_family, parse_sign(st_sign), st_b, st.params());
            std::cout << json_stability(stability_report(m)).dump(2) << "\n";
        } else if (cmd_ghost->parsed()) {
            const CouplerParams p = gh.params();
            if (gh_branch_flag) {
                const GhostBranchCurve curve =
                    ghost_branch(p, gh_b, {gh_from, gh_to}, !gh_mirror);
                write_ghost_csv(curve, gh_out);
                const fs::path parent = fs::path(gh_out).parent_path();
                echo_config(app, parent.empty() ? fs::path(".") : parent);
                std::cout << json{{"n_points", curve.points.size()},
                                  {"gamma_last", curve.gamma_last},
                                  {"termination", curve.termination}}
                                 .dump(2)
                          << "\n";
            } else {
                const auto cf = ghost_closed_form(p, gh_b, !gh_mirror);
                if (!cf) throw std::runtime_error("no ghost at these parameters");
                const GhostMode g = ghost_solve(p, gh_b, *cf);
                std::cout << json_ghost(g).dump(2) << "\n";
            }
        } else if (cmd_evolve->parsed()) {
            const CouplerParams p = ev.params();
            FieldState u0;
            if (!ev_initial_json.empty()) {
                std::ifstream in(ev_initial_json);
                if (!in) throw std::runtime_error("cannot read " + ev_initial_json);
                u0 = field_from_json(json::parse(in));
            } else {
                const StationaryMode m =
                    make_exact_mode(ev_family, parse_sign(ev_sign), ev_b, p);
                u0 = perturb(m, ev_eps, ev_seed);
            }
            IntegratorOptions opts;
            opts.rel_tol = ev_rel;
            opts.abs_tol = ev_abs;
            opts.sample_dz = ev_dz;
            opts.overflow_norm = ev_overflow;
            opts.four_wave_override = ev_four_wave;
            const EvolutionTrace tr = integrate(p, u0, ev_zmax, opts);
            write_trace_csv(tr, ev_out);
            const fs::path parent = fs::path(ev_out).parent_path();
            echo_config(app, parent.empty() ? fs::path(".") : parent);
            std::cout << json{{"status", tr.status == EvolutionTrace::Status::Blowup
                                             ? "blowup"
                                             : "completed"},
                              {"z_end", tr.z.back()},
                              {"U_end", tr.U.back()}}
                             .dump(2)
                      << "\n";
        } else if (cmd_figure->parsed()) {
            const fs::path dir(fig_out);
            fs::create_directories(dir);
            switch (fig_n) {
                case 2: figure2(dir); break;
                case 3: figure34(0, dir); break;
                case 4: figure34(1, dir); break;
                case 5: figure5(dir); break;
                case 6: figure6(dir); break;
                case 7: figure7(dir); break;
                default: throw CLI::ValidationError("number", "figure must be 2..7");
            }
            echo_config(app, dir);
            std::cout << json{{"figure", fig_n}, {"out", dir.string()}}.dump(2) << "\n";
        }
    } catch (const CLI::ValidationError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
