#include <catch2/catch_amalgamated.hpp>

#include "ptquad/continuation.hpp"
#include "ptquad/exact_modes.hpp"

using namespace ptquad;
using Catch::Approx;

namespace {

StationaryMode elliptic_seed(const CouplerParams& p, int sign, double eps = 0.3) {
    const double bt = btilde(p, sign);
    const auto root = elliptic_root(p, bt);
    REQUIRE(root.has_value());
    const auto wt = pt_eigenvector(p, bt, root->theta).v;
    FieldState s;
    for (int j = 0; j < 4; ++j) s[j] = eps * wt[j];
    StationaryMode m = newton_solve(p, bt + eps * eps * root->B2, s);
    m.family = sign > 0 ? Family::EllipticPlus : Family::EllipticMinus;
    return m;
}

}  // namespace

TEST_CASE("circular branch over b: affine energy with slope 12/5") {
    CouplerParams p{1.0, 0.5, 0};
    const double bt = btilde(p, +1);
    StationaryMode seed = circular_mode({+1, bt + 0.01, p});
    ContinuationOptions opts;
    opts.with_stability = false;
    const BranchCurve curve = continue_branch(p, Axis::B, {bt + 0.01, 4.0}, seed, opts, "circ+");
    REQUIRE(curve.termination == Termination::Boundary);
    REQUIRE(curve.points.size() >= 10);

    // slope near the linear limit (smallest-U points)
    const auto& a = curve.points[0];
    const auto& b = curve.points[2];
    CHECK((b.U - a.U) / (b.param - a.param) == Approx(2.4).margin(0.01));

    // exactness cross-check: reproduce the closed-form family pointwise
    for (const auto& pt : curve.points) {
        const StationaryMode exact = circular_mode({+1, pt.param, p});
        for (int j = 0; j < 4; ++j)
            CHECK(pt.amplitudes[j] == Approx(std::abs(exact.w[j])).margin(1e-10));
        for (int j = 0; j < 3; ++j) {
            double d = std::arg(exact.w[j + 1]) - std::arg(exact.w[j]);
            while (d > M_PI) d -= 2.0 * M_PI;
            while (d <= -M_PI) d += 2.0 * M_PI;
            CHECK(std::abs(pt.phase_diffs[j]) == Approx(std::abs(d)).margin(1e-10));
        }
        CHECK(gauge_distance(pt.mode.w, exact.w) < 1e-10);
    }
}

TEST_CASE("gamma continuation of the circular pair folds at sqrt(2) k") {
    for (int alpha : {0, 1}) {
        CouplerParams p{1.0, 0.5, alpha};
        StationaryMode seed = circular_mode({+1, 2.0, p});
        ContinuationOptions opts;
        opts.with_stability = false;
        opts.step_max = 0.02;
        const BranchCurve curve =
            continue_branch(p, Axis::Gamma, {0.5, 1.6}, seed, opts, "circ+");
        CHECK(curve.termination == Termination::Fold);
        const auto folds = detect_fold(curve);
        REQUIRE_FALSE(folds.empty());
        CHECK(folds.back() == Approx(std::sqrt(2.0)).margin(1e-3));
    }
}

TEST_CASE("elliptic branch in gamma exists below k and merges into the circular branch") {
    CouplerParams p{1.0, 0.5, 0};
    StationaryMode seed = elliptic_seed(p, +1);
    // bring the elliptic mode to b = 2 first
    ContinuationOptions bopts;
    bopts.with_stability = false;
    const BranchCurve up = continue_branch(p, Axis::B, {seed.b, 2.0}, seed, bopts, "ell+");
    REQUIRE(up.termination == Termination::Boundary);
    StationaryMode at2 = up.points.back().mode;
    REQUIRE(std::abs(at2.b - 2.0) < 1e-12);
    const double asym_seed = std::abs(std::abs(at2.w[0]) - std::abs(at2.w[1]));
    REQUIRE(asym_seed > 0.1);

    ContinuationOptions gopts;
    gopts.with_stability = false;
    gopts.step_max = 0.02;
    const BranchCurve curve =
        continue_branch(p, Axis::Gamma, {0.5, 1.3}, at2, gopts, "ell+");
    // The branch ends on the circular family at the subcritical pitchfork:
    // the march stalls at the apex (tangent turns parameter-orthogonal).
    CHECK(curve.termination == Termination::Fold);
    const auto& last = curve.points.back();
    CHECK(last.param == Approx(1.0).margin(0.01));
    // asymmetry has collapsed onto the circular branch
    CHECK(std::abs(last.amplitudes[0] - last.amplitudes[1]) < 0.02);

    // and the branch extends down to the Hamiltonian limit
    const BranchCurve down =
        continue_branch(p, Axis::Gamma, {0.5, 0.0}, at2, gopts, "ell+");
    CHECK(down.termination == Termination::Boundary);
    CHECK(down.points.back().param == Approx(0.0).margin(1e-9));
}

TEST_CASE("branch identity: consecutive points stay within the trust step") {
    CouplerParams p{1.0, 0.5, 0};
    StationaryMode seed = circular_mode({-1, 2.0, p});
    ContinuationOptions opts;
    opts.with_stability = false;
    const BranchCurve curve = continue_branch(p, Axis::Gamma, {0.5, 1.3}, seed, opts, "circ-");
    for (size_t i = 1; i < curve.points.size(); ++i) {
        const double dist =
            gauge_distance(curve.points[i].mode.w, curve.points[i - 1].mode.w);
        const double dp = std::abs(curve.points[i].param - curve.points[i - 1].param);
        CHECK(dist < 10.0 * std::max(dp, opts.step_max) *
                         std::max(1.0, std::sqrt(curve.points[i].U)));
    }
}

TEST_CASE("stability crossings at the secondary critical point") {
    CouplerParams p{1.0, 0.5, 0};
    ContinuationOptions opts;
    opts.step_max = 0.02;

    // smaller-amplitude branch (from +btilde): count reaches 2 past gamma = 1,
    // through the two simultaneous pitchforks (elliptic and ghost)
    StationaryMode sp = circular_mode({+1, 2.0, {1.0, 0.8, 0}});
    const BranchCurve cp = continue_branch(p, Axis::Gamma, {0.8, 1.25}, sp, opts, "circ+");
    const auto ep = detect_branch_point(cp, {}, opts);
    REQUIRE_FALSE(ep.empty());
    CHECK(ep.front().param == Approx(1.0).margin(0.01));
    CHECK(ep.front().count_before == 0);
    CHECK(ep.back().param == Approx(1.0).margin(0.01));
    CHECK(ep.back().count_after == 2);

    // larger-amplitude branch (from -btilde): count jumps 0 -> 1 at gamma = 1
    StationaryMode sm = circular_mode({-1, 2.0, {1.0, 0.8, 0}});
    const BranchCurve cm = continue_branch(p, Axis::Gamma, {0.8, 1.25}, sm, opts, "circ-");
    const auto em = detect_branch_point(cm, {}, opts);
    REQUIRE_FALSE(em.empty());
    CHECK(em.front().param == Approx(1.0).margin(0.01));
    CHECK(em.front().count_before == 0);
    CHECK(em.front().count_after == 1);
}

TEST_CASE("Hamiltonian segment of the ground-state branch has no crossings") {
    CouplerParams p{1.0, 0.0, 0};
    StationaryMode seed = circular_mode({-1, 2.0, p});
    ContinuationOptions opts;
    const BranchCurve curve = continue_branch(p, Axis::Gamma, {0.0, 0.9}, seed, opts, "circ-");
    CHECK(detect_branch_point(curve, {}, opts).empty());
}

TEST_CASE("no folds along the monotone circular energy ray") {
    CouplerParams p{1.0, 0.5, 0};
    StationaryMode seed = circular_mode({+1, btilde(p, +1) + 0.05, p});
    ContinuationOptions opts;
    opts.with_stability = false;
    const BranchCurve curve =
        continue_branch(p, Axis::B, {btilde(p, +1) + 0.05, 4.0}, seed, opts, "circ+");
    CHECK(detect_fold(curve).empty());
}

TEST_CASE("multi-seed search: elliptic existence boundary") {
    for (double g : {0.2, 0.5, 0.9}) {
        CouplerParams p{1.0, g, 0};
        const auto result = multi_seed_search(p, 2.0);
        bool found_asym = false;
        for (const auto& m : result.modes) {
            const double a1 = std::abs(m.w[0]), a2 = std::abs(m.w[1]);
            if (std::abs(a1 - a2) > 1e-3 && power(m.w) > 1e-4) found_asym = true;
        }
        CHECK(found_asym);
    }
    for (double g : {1.1, 1.3}) {
        CouplerParams p{1.0, g, 0};
        const auto result = multi_seed_search(p, 2.0);
        for (const auto& m : result.modes) {
            if (power(m.w) < 1e-4) continue;
            const double a1 = std::abs(m.w[0]), a2 = std::abs(m.w[1]);
            CHECK(std::abs(a1 - a2) < 1e-6);  // only circular modes remain
        }
    }
}
