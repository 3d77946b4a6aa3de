// Deterministic serialization: CSV writers/readers for branch curves, ghost
// branches and evolution traces, plus JSON views of the result types.
// Floating-point fields are printed with 17 significant digits so every
// value round-trips bit-exactly; complex numbers are always (re, im) pairs.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "ptquad/continuation.hpp"
#include "ptquad/core.hpp"
#include "ptquad/dynamics.hpp"
#include "ptquad/ghosts.hpp"
#include "ptquad/perturbation.hpp"
#include "ptquad/spectrum.hpp"
#include "ptquad/stability.hpp"

namespace ptquad {

inline std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline nlohmann::json json_complex(const Complex& c) {
    return nlohmann::json::array({c.real(), c.imag()});
}

inline nlohmann::json json_field(const FieldState& u) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& v : u) a.push_back(json_complex(v));
    return a;
}

inline FieldState field_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.size() != 4)
        throw std::invalid_argument("field_from_json: expected array of 4 [re, im] pairs");
    FieldState u;
    for (int i = 0; i < 4; ++i) u[i] = Complex(j[i][0].get<double>(), j[i][1].get<double>());
    return u;
}

inline nlohmann::json json_params(const CouplerParams& p) {
    return {{"k", p.k}, {"gamma", p.gamma}, {"alpha", p.alpha},
            {"delta1", p.delta1}, {"delta2", p.delta2}};
}

inline nlohmann::json json_spectrum(const LinearSpectrum& s) {
    return {{"b_plus", json_complex(s.b_plus)},
            {"b_minus", json_complex(s.b_minus)},
            {"broken", s.broken},
            {"gamma_cr1", s.gamma_cr1}};
}

inline nlohmann::json json_mode(const StationaryMode& m) {
    return {{"w", json_field(m.w)},
            {"b", m.b},
            {"family", family_name(m.family)},
            {"params", json_params(m.params)},
            {"U", power(m.w)},
            {"residual", residual_norm(m)}};
}

inline nlohmann::json json_stability(const StabilityReport& r) {
    nlohmann::json eig = nlohmann::json::array();
    for (const auto& l : r.eigenvalues) eig.push_back(json_complex(l));
    return {{"eigenvalues", eig},
            {"max_growth", r.max_growth},
            {"n_unstable", r.n_unstable},
            {"stable", r.stable}};
}

inline nlohmann::json json_prediction(const BifurcationPrediction& p) {
    return {{"btilde", p.btilde}, {"theta", p.theta}, {"B2", p.B2},
            {"slope", p.slope}, {"family", family_name(p.family)}};
}

inline nlohmann::json json_ghost(const GhostMode& g) {
    return {{"c1", g.c1}, {"c2", g.c2}, {"phi1", g.phi1}, {"phi2", g.phi2},
            {"B", g.B}, {"phi_b", g.phi_b},
            {"b", json_complex(g.b())},
            {"params", json_params(g.params)}};
}

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    return out;
}

}  // namespace detail

inline constexpr const char* kBranchCsvHeader =
    "param,b,U,a1,a2,a3,a4,dphi12,dphi23,dphi34,max_re_lambda,n_unstable,stable";

inline void write_branch_csv(const BranchCurve& curve, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << kBranchCsvHeader << "\n";
    for (const auto& pt : curve.points) {
        out << g17(pt.param) << ',' << g17(pt.mode.b) << ',' << g17(pt.U);
        for (double a : pt.amplitudes) out << ',' << g17(a);
        for (double d : pt.phase_diffs) out << ',' << g17(d);
        if (pt.stability) {
            out << ',' << g17(pt.stability->max_growth) << ',' << pt.stability->n_unstable
                << ',' << (pt.stability->stable ? 1 : 0);
        } else {
            out << ",nan,-1,-1";
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

struct BranchCsvRow {
    double param, b, U;
    std::array<double, 4> a;
    std::array<double, 3> dphi;
    double max_re_lambda;
    int n_unstable;
    int stable;
};

inline std::vector<BranchCsvRow> read_branch_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
    std::string line;
    if (!std::getline(in, line) || line != kBranchCsvHeader)
        throw std::runtime_error("bad branch CSV header in " + path.string());
    std::vector<BranchCsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<std::string> toks;
        while (std::getline(ss, tok, ',')) toks.push_back(tok);
        if (toks.size() != 13) throw std::runtime_error("bad branch CSV row in " + path.string());
        BranchCsvRow r{};
        r.param = std::stod(toks[0]);
        r.b = std::stod(toks[1]);
        r.U = std::stod(toks[2]);
        for (int j = 0; j < 4; ++j) r.a[j] = std::stod(toks[3 + j]);
        for (int j = 0; j < 3; ++j) r.dphi[j] = std::stod(toks[7 + j]);
        r.max_re_lambda = std::stod(toks[10]);
        r.n_unstable = std::stoi(toks[11]);
        r.stable = std::stoi(toks[12]);
        rows.push_back(r);
    }
    return rows;
}

inline constexpr const char* kGhostCsvHeader = "gamma,c1,c2,dphi,B,phi_b,re_b,im_b";

inline void write_ghost_csv(const GhostBranchCurve& curve, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << kGhostCsvHeader << "\n";
    for (const auto& pt : curve.points) {
        const Complex b = pt.mode.b();
        out << g17(pt.gamma) << ',' << g17(pt.mode.c1) << ',' << g17(pt.mode.c2) << ','
            << g17(pt.mode.phi2 - pt.mode.phi1) << ',' << g17(pt.mode.B) << ','
            << g17(pt.mode.phi_b) << ',' << g17(b.real()) << ',' << g17(b.imag()) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

inline constexpr const char* kTraceCsvHeader = "z,i1,i2,i3,i4,U";

// Trace CSV plus a JSON sidecar (<path>.meta.json) with parameters, the
// initial condition and integrator settings.
inline void write_trace_csv(const EvolutionTrace& t, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << kTraceCsvHeader << "\n";
    for (size_t i = 0; i < t.size(); ++i) {
        out << g17(t.z[i]);
        for (double v : t.intensities[i]) out << ',' << g17(v);
        out << ',' << g17(t.U[i]) << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());

    nlohmann::json meta = {
        {"params", json_params(t.params)},
        {"initial", json_field(t.initial)},
        {"rel_tol", t.options.rel_tol},
        {"abs_tol", t.options.abs_tol},
        {"sample_dz", t.options.sample_dz},
        {"four_wave_override", t.options.four_wave_override},
        {"status", t.status == EvolutionTrace::Status::Blowup ? "blowup" : "completed"},
    };
    if (t.status == EvolutionTrace::Status::Blowup) meta["blowup_z"] = t.blowup_z;
    auto side = detail::open_out(path.string() + ".meta.json");
    side << meta.dump(2) << "\n";
}

inline void write_json(const nlohmann::json& j, const std::filesystem::path& path) {
    auto out = detail::open_out(path);
    out << j.dump(2) << "\n";
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace ptquad
