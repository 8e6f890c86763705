#pragma once

// JSON encodings of signals, quadratures, fields, weights, lattices,
// neighbourhoods, sequences, certificates and reports. Every top-level
// document carries "version": "coorbit/1". Doubles are written with
// round-trip precision.

#include "coorbit/discretization.hpp"
#include "coorbit/frames.hpp"
#include "coorbit/group_core.hpp"
#include "coorbit/group_field.hpp"
#include "coorbit/signal.hpp"
#include "coorbit/weights.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <limits>
#include <string>

namespace coorbit::io {

using json = nlohmann::json;

inline constexpr const char* kVersion = "coorbit/1";

class FormatError : public CoorbitError {
public:
    using CoorbitError::CoorbitError;
};

namespace detail {

inline void split_complex(const std::vector<cplx>& v, json& j) {
    json re = json::array(), im = json::array();
    for (const auto& z : v) {
        re.push_back(z.real());
        im.push_back(z.imag());
    }
    j["re"] = std::move(re);
    j["im"] = std::move(im);
}

inline std::vector<cplx> join_complex(const json& j) {
    if (!j.contains("re")) throw FormatError("missing \"re\" array");
    const auto& re = j.at("re");
    std::vector<cplx> out(re.size());
    for (std::size_t i = 0; i < re.size(); ++i) out[i] = re[i].get<double>();
    if (j.contains("im")) {
        const auto& im = j.at("im");
        if (im.size() != re.size()) throw FormatError("\"re\" and \"im\" differ in length");
        for (std::size_t i = 0; i < im.size(); ++i) out[i].imag(im[i].get<double>());
    }
    return out;
}

inline void expect_kind(const json& j, const char* kind) {
    if (j.contains("kind") && j.at("kind") != kind)
        throw FormatError(std::string("expected a ") + kind + " document, got " + j.at("kind").dump());
}

}  // namespace detail

inline json versioned(json j) {
    j["version"] = kVersion;
    return j;
}

inline void check_version(const json& j) {
    if (!j.contains("version")) throw FormatError("missing version tag");
    if (j.at("version") != kVersion) throw FormatError("unsupported version " + j.at("version").dump());
}

// --- signals ---------------------------------------------------------------

inline json to_json(const SampledSignal& s) {
    json j{{"kind", "signal"}, {"t0", s.t0}, {"dt", s.dt}};
    detail::split_complex(s.values, j);
    return j;
}

inline SampledSignal signal_from_json(const json& j) {
    detail::expect_kind(j, "signal");
    return SampledSignal(j.at("t0").get<double>(), j.at("dt").get<double>(), detail::join_complex(j));
}

// --- grids and quadratures -------------------------------------------------

inline json to_json(const UniformGrid& g) { return {{"origin", g.origin}, {"step", g.step}, {"count", g.count}}; }

inline UniformGrid grid_from_json(const json& j) {
    return {j.at("origin").get<double>(), j.at("step").get<double>(), j.at("count").get<int>()};
}

inline json to_json(const AffineQuadrature& q) {
    return {{"type", "affine"},     {"b_lo", q.b_lo()},   {"b_hi", q.b_hi()},         {"n_b", q.n_b()},
            {"a_min", q.a_min()},   {"a_max", q.a_max()}, {"n_scales", q.n_scales()}, {"signs", q.signs()}};
}

inline json to_json(const TFQuadrature& q) { return {{"type", "tf_plane"}, {"x", to_json(q.x())}, {"omega", to_json(q.omega())}}; }

inline AffineQuadrature affine_quadrature_from_json(const json& j) {
    return {j.at("b_lo").get<double>(),   j.at("b_hi").get<double>(),  j.at("n_b").get<int>(),
            j.at("a_min").get<double>(),  j.at("a_max").get<double>(), j.at("n_scales").get<int>(),
            j.at("signs").get<std::vector<int>>()};
}

inline TFQuadrature tf_quadrature_from_json(const json& j) { return {grid_from_json(j.at("x")), grid_from_json(j.at("omega"))}; }

// --- fields ----------------------------------------------------------------

/// Values in node order: sign branch, then scale ascending, then b ascending.
inline json to_json(const GroupField& f) {
    json j{{"kind", "group_field"}, {"quadrature", to_json(f.quad)}, {"coverage", f.coverage}, {"tail_bound", f.tail_bound}};
    detail::split_complex(f.values, j);
    return j;
}

/// Values x-major, then omega.
inline json to_json(const TFField& f) {
    json j{{"kind", "tf_field"}, {"grid", to_json(f.quad)}, {"coverage", f.coverage}};
    detail::split_complex(f.values, j);
    return j;
}

inline GroupField group_field_from_json(const json& j) {
    detail::expect_kind(j, "group_field");
    GroupField f(affine_quadrature_from_json(j.at("quadrature")), detail::join_complex(j));
    f.coverage = j.value("coverage", 1.0);
    f.tail_bound = j.value("tail_bound", 0.0);
    return f;
}

inline TFField tf_field_from_json(const json& j) {
    detail::expect_kind(j, "tf_field");
    TFField f(tf_quadrature_from_json(j.at("grid")), detail::join_complex(j));
    f.coverage = j.value("coverage", 1.0);
    return f;
}

// --- weights ---------------------------------------------------------------

inline json to_json(const WeightSpec& w) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, PowerScale>) return {{"family", "m"}, {"s", v.s}};
            else if constexpr (std::is_same_v<T, SymmetricPower>) return {{"family", "w"}, {"rho", v.rho}};
            else if constexpr (std::is_same_v<T, PolyTF>) return {{"family", "v"}, {"r", v.r}, {"s", v.s}};
            else return {{"family", "custom"}, {"name", v.name}, {"group", to_string(v.group)}};
        },
        w.variant());
}

inline WeightSpec weight_from_json(const json& j) {
    const auto fam = j.at("family").get<std::string>();
    if (fam == "m") return PowerScale{j.at("s").get<double>()};
    if (fam == "w") return SymmetricPower{j.at("rho").get<double>()};
    if (fam == "v") return PolyTF{j.at("r").get<double>(), j.at("s").get<double>()};
    throw FormatError("unknown weight family \"" + fam + "\" (expected m, w or v)");
}

// --- neighbourhoods --------------------------------------------------------

inline json to_json(const NeighborhoodSpec& u) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, AffineNeighborhood>)
                return {{"type", "affine"}, {"beta", v.beta}, {"alpha", v.alpha}, {"density", v.density}};
            else
                return {{"type", "tf"}, {"beta_x", v.beta_x}, {"beta_omega", v.beta_omega}, {"density", v.density}};
        },
        u);
}

inline NeighborhoodSpec neighborhood_from_json(const json& j) {
    const int d = j.value("density", kDefaultNeighborhoodDensity);
    if (j.value("type", std::string("affine")) == "affine") return AffineNeighborhood(j.at("beta").get<double>(), j.at("alpha").get<double>(), d);
    return TFNeighborhood(j.at("beta_x").get<double>(), j.at("beta_omega").get<double>(), d);
}

// --- lattices --------------------------------------------------------------

inline json to_json(const AffineLattice& l) {
    json j{{"type", "affine"}, {"alpha", l.alpha()}, {"beta", l.beta()}, {"j", {l.j_min(), l.j_max()}}, {"k", {l.k_min(), l.k_max()}},
           {"signs", l.signs()}};
    if (l.bounded()) j["b_reach"] = l.b_reach();
    return j;
}

inline json to_json(const TFLattice& l) {
    json j{{"type", "tf"}, {"k1", {l.k1_min, l.k1_max}}, {"k2", {l.k2_min, l.k2_max}}};
    if (l.separable && l.c == 1.0) {
        j["alpha_x"] = l.a[0];
        j["beta_omega"] = l.a[3];
    } else {
        j["generator"] = l.a;
        j["c"] = l.c;
    }
    return j;
}

inline AffineLattice affine_lattice_from_json(const json& j) {
    const auto jr = j.at("j").get<std::array<int, 2>>();
    const auto kr = j.at("k").get<std::array<int, 2>>();
    return {j.at("alpha").get<double>(), j.at("beta").get<double>(), jr[0], jr[1], kr[0], kr[1],
            j.value("signs", std::vector<int>{1, -1}), j.value("b_reach", std::numeric_limits<double>::infinity())};
}

inline TFLattice tf_lattice_from_json(const json& j) {
    const auto k1 = j.at("k1").get<std::array<int, 2>>();
    const auto k2 = j.at("k2").get<std::array<int, 2>>();
    if (j.contains("generator"))
        return {j.at("generator").get<std::array<double, 4>>(), j.value("c", 1.0), k1[0], k1[1], k2[0], k2[1], false};
    return TFLattice::separable_lattice(j.at("alpha_x").get<double>(), j.at("beta_omega").get<double>(), k1[0], k1[1], k2[0], k2[1]);
}

// --- sequences -------------------------------------------------------------

template <class P>
json to_json(const CoefficientSequence<P>& c) {
    json tags = json::array();
    for (const auto& t : c.tags) tags.push_back({t.j, t.k, t.eps});
    json j{{"kind", "sequence"}, {"tags", std::move(tags)}, {"in_chart_fraction", c.in_chart_fraction}};
    detail::split_complex(c.values, j);
    return j;
}

/// Reads values and tags, and places them on the lattice's index order.
template <class Lattice>
auto sequence_from_json(const json& j, const Lattice& lat) {
    detail::expect_kind(j, "sequence");
    auto c = empty_sequence(lat);
    const auto vals = detail::join_complex(j);
    const auto& tags = j.at("tags");
    if (tags.size() != vals.size()) throw FormatError("sequence: tag count does not match value count");
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const LatticeTag t{tags[i][0].get<int>(), tags[i][1].get<int>(), tags[i][2].get<int>()};
        const auto idx = lat.flat(t);
        if (!idx) throw FormatError("sequence: tag outside the lattice window");
        c.values[*idx] = vals[i];
    }
    return c;
}

// --- certificates and reports ----------------------------------------------

inline json to_json(const FrameCertificate& c) {
    json chart = std::visit([](const auto& q) { return to_json(q); }, c.chart);
    return {{"kind", "frame_certificate"}, {"kernel_l1w", c.kernel_l1w}, {"osc_l1w", c.osc_l1w}, {"q", c.q},
            {"U", to_json(c.u)},           {"w", to_json(c.w)},          {"chart", chart},   {"pass", c.pass},
            {"caveat", c.caveat}};
}

inline json to_json(const WaveletSufficiencyReport& r) {
    return {{"kind", "wavelet_sufficiency"}, {"vanishing_moments", r.vanishing_moments}, {"rho", r.rho},
            {"threshold", r.threshold},      {"next_abs_moment", r.next_abs_moment},     {"derivative_l1", r.derivative_l1},
            {"finite", r.finite},            {"pass", r.pass}};
}

inline json to_json(const WindowSufficiencyReport& r) {
    return {{"kind", "window_sufficiency"}, {"alpha", r.alpha},         {"beta", r.beta},
            {"time_norm", r.time_norm},     {"freq_norm", r.freq_norm}, {"time_tail", r.time_tail},
            {"freq_tail", r.freq_tail},     {"pass", r.pass}};
}

inline json to_json(const FrameBoundsReport& r) {
    return {{"kind", "frame_bounds"}, {"a_hat", r.a_hat}, {"b_hat", r.b_hat}, {"ratios", r.ratios}, {"redraws", r.redraws}};
}

inline json to_json(const ReconstructionReport& r) {
    json j{{"kind", "reconstruction"},
           {"iterations", r.iterations},
           {"residual_history", r.residual_history},
           {"asymptotic_ratio", r.asymptotic_ratio},
           {"converged", r.converged}};
    j["final_relative_error"] = r.final_relative_error ? json(*r.final_relative_error) : json(nullptr);
    return j;
}

inline json to_json(const YoungReport& r) {
    json checks = json::array();
    for (const auto& c : r.checks) checks.push_back({{"name", c.name}, {"lhs", c.lhs}, {"rhs", c.rhs}, {"pass", c.pass}, {"slack", r.slack}});
    return {{"kind", "young"}, {"checks", checks}, {"slack", r.slack}, {"pass", r.pass}};
}

inline json to_json(const DesignResult& d) {
    json hist = json::array();
    for (const auto& s : d.history) hist.push_back({{"alpha", s.alpha}, {"beta", s.beta}, {"q", s.q}, {"osc_l1w", s.osc_l1w}});
    return {{"kind", "lattice_design"}, {"alpha", d.alpha}, {"beta", d.beta}, {"lattice", to_json(d.lattice)},
            {"certificate", to_json(d.certificate)}, {"history", hist}};
}

// --- files -----------------------------------------------------------------

class IoError : public CoorbitError {
public:
    using CoorbitError::CoorbitError;
};

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw IoError("malformed JSON in " + path + ": " + e.what());
    }
}

inline void write_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    out << j.dump(1) << '\n';
    if (!out) throw IoError("write failed for " + path);
}

}  // namespace coorbit::io
