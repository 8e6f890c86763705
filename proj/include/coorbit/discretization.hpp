#pragma once

// Lattices on the affine group and the time-frequency plane, well-spreadness
// checks, sampling of fields, weighted sequence norms, norm equivalence and
// indicator-based bounded uniform partitions of unity.

#include "coorbit/group_core.hpp"
#include "coorbit/group_field.hpp"
#include "coorbit/weights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coorbit {

inline constexpr double kTileTolerance = 1e-12;

/// Index tag of a lattice point: (j, k, eps) on the affine group, (k1, k2, 0)
/// on the time-frequency plane.
struct LatticeTag {
    int j = 0;
    int k = 0;
    int eps = 0;
    friend bool operator==(const LatticeTag&, const LatticeTag&) = default;
};

// ---------------------------------------------------------------------------
// Lattices
// ---------------------------------------------------------------------------

/// Points (eps alpha^j beta k, eps alpha^j) for j in [j_min, j_max] and
/// k in [k_min, k_max]. An optional b-reach further restricts level j to
/// |eps alpha^j beta k| <= b_reach, which keeps fine lattices over a bounded
/// chart compact. Point order: sign (as listed), then j ascending, then k
/// ascending.
class AffineLattice {
public:
    AffineLattice() : AffineLattice(2.0, 1.0, 0, 0, 0, 0) {}
    AffineLattice(double alpha, double beta, int j_min, int j_max, int k_min, int k_max, std::vector<int> signs = {1, -1},
                  double b_reach = std::numeric_limits<double>::infinity())
        : alpha_(alpha), beta_(beta), j_min_(j_min), j_max_(j_max), k_min_(k_min), k_max_(k_max), signs_(std::move(signs)),
          b_reach_(b_reach) {
        if (!(alpha_ > 1)) throw std::invalid_argument("affine lattice: alpha must exceed 1");
        if (!(beta_ > 0)) throw std::invalid_argument("affine lattice: beta must be positive");
        if (j_min_ > j_max_ || k_min_ > k_max_) throw std::invalid_argument("affine lattice: empty index window");
        if (signs_.empty() || signs_.size() > 2) throw std::invalid_argument("affine lattice: signs must be {1}, {-1} or {1,-1}");
        for (int s : signs_)
            if (s != 1 && s != -1) throw std::invalid_argument("affine lattice: signs must be +1 or -1");
        if (signs_.size() == 2 && signs_[0] == signs_[1]) throw std::invalid_argument("affine lattice: duplicate sign");
        if (!(b_reach_ >= 0)) throw std::invalid_argument("affine lattice: b_reach must be >= 0");
        offsets_.push_back(0);
        for (std::size_t s = 0; s < signs_.size(); ++s)
            for (int j = j_min_; j <= j_max_; ++j) {
                const auto [lo, hi] = k_range(j);
                offsets_.push_back(offsets_.back() + static_cast<std::size_t>(std::max(0, hi - lo + 1)));
            }
    }

    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    int j_min() const { return j_min_; }
    int j_max() const { return j_max_; }
    int k_min() const { return k_min_; }
    int k_max() const { return k_max_; }
    const std::vector<int>& signs() const { return signs_; }
    double b_reach() const { return b_reach_; }
    bool bounded() const { return std::isfinite(b_reach_); }
    int nj() const { return j_max_ - j_min_ + 1; }
    std::size_t size() const { return offsets_.back(); }
    void validate() const {}

    /// Admissible k at level j.
    std::pair<int, int> k_range(int j) const {
        if (!bounded()) return {k_min_, k_max_};
        const double r = b_reach_ / (beta_ * std::pow(alpha_, j));
        return {std::max(k_min_, static_cast<int>(std::ceil(-r - 1e-9))), std::min(k_max_, static_cast<int>(std::floor(r + 1e-9)))};
    }

    static AffinePoint point(double alpha, double beta, int j, int k, int eps) {
        const double s = eps * std::pow(alpha, j);
        return {s * beta * k, s};
    }
    AffinePoint point(const LatticeTag& t) const { return point(alpha_, beta_, t.j, t.k, t.eps); }

    std::optional<std::size_t> flat(const LatticeTag& t) const {
        if (t.j < j_min_ || t.j > j_max_) return std::nullopt;
        const auto [lo, hi] = k_range(t.j);
        if (t.k < lo || t.k > hi) return std::nullopt;
        for (std::size_t s = 0; s < signs_.size(); ++s)
            if (signs_[s] == t.eps) return offsets_[s * nj() + static_cast<std::size_t>(t.j - j_min_)] + static_cast<std::size_t>(t.k - lo);
        return std::nullopt;
    }

    LatticeTag tag(std::size_t idx) const {
        const auto row = static_cast<std::size_t>(std::upper_bound(offsets_.begin(), offsets_.end(), idx) - offsets_.begin()) - 1;
        const int j = j_min_ + static_cast<int>(row % nj());
        return {j, k_range(j).first + static_cast<int>(idx - offsets_[row]), signs_[row / nj()]};
    }

    /// Lattice spanning the chart of `q` with one spare level on each side
    /// and a b-reach one lattice step beyond the chart at the largest scale.
    static AffineLattice covering(double alpha, double beta, const AffineQuadrature& q) {
        const int jlo = static_cast<int>(std::floor(std::log(q.a_min()) / std::log(alpha))) - 1;
        const int jhi = static_cast<int>(std::ceil(std::log(q.a_max()) / std::log(alpha))) + 1;
        const double reach = std::max(std::abs(q.b_lo()), std::abs(q.b_hi())) + beta * std::pow(alpha, jhi);
        const int kmax = static_cast<int>(std::ceil(reach / (beta * std::pow(alpha, jlo)))) + 1;
        return {alpha, beta, jlo, jhi, -kmax, kmax, q.signs(), reach};
    }

private:
    double alpha_, beta_;
    int j_min_, j_max_, k_min_, k_max_;
    std::vector<int> signs_;
    double b_reach_;
    std::vector<std::size_t> offsets_;  // start of each (sign, j) row
};

/// Points c A (k1, k2) for a 2x2 generator A; separable lattices use
/// A = diag(alpha_x, beta_omega), c = 1. Point order: k1 major, then k2.
struct TFLattice {
    std::array<double, 4> a{1.0, 0.0, 0.0, 1.0};  // row-major
    double c = 1.0;
    int k1_min = 0, k1_max = 0;
    int k2_min = 0, k2_max = 0;
    bool separable = true;

    TFLattice() = default;
    TFLattice(std::array<double, 4> gen, double scale, int k1lo, int k1hi, int k2lo, int k2hi, bool sep = false)
        : a(gen), c(scale), k1_min(k1lo), k1_max(k1hi), k2_min(k2lo), k2_max(k2hi), separable(sep) {
        validate();
    }

    static TFLattice separable_lattice(double alpha_x, double beta_omega, int k1lo, int k1hi, int k2lo, int k2hi) {
        if (!(alpha_x > 0) || !(beta_omega > 0)) throw std::invalid_argument("tf lattice: steps must be positive");
        return {{alpha_x, 0.0, 0.0, beta_omega}, 1.0, k1lo, k1hi, k2lo, k2hi, true};
    }

    void validate() const {
        if (!(c > 0)) throw std::invalid_argument("tf lattice: scale c must be positive");
        if (std::abs(det()) <= 1e-12) throw std::invalid_argument("tf lattice: generator is singular");
        if (k1_min > k1_max || k2_min > k2_max) throw std::invalid_argument("tf lattice: empty index window");
    }

    double det() const { return a[0] * a[3] - a[1] * a[2]; }
    int n1() const { return k1_max - k1_min + 1; }
    int n2() const { return k2_max - k2_min + 1; }
    std::size_t size() const { return static_cast<std::size_t>(n1()) * n2(); }

    TFPoint point(int k1, int k2) const { return {c * (a[0] * k1 + a[1] * k2), c * (a[2] * k1 + a[3] * k2)}; }
    TFPoint point(const LatticeTag& t) const { return point(t.j, t.k); }
    LatticeTag tag(std::size_t idx) const {
        return {static_cast<int>(idx / n2()) + k1_min, static_cast<int>(idx % n2()) + k2_min, 0};
    }
    std::optional<std::size_t> flat(const LatticeTag& t) const {
        if (t.j < k1_min || t.j > k1_max || t.k < k2_min || t.k > k2_max) return std::nullopt;
        return static_cast<std::size_t>(t.j - k1_min) * n2() + static_cast<std::size_t>(t.k - k2_min);
    }

    // Integer index box containing every k with c A k inside the given box.
    std::array<int, 4> index_box(double x_lo, double x_hi, double w_lo, double w_hi) const {
        const double d = c * det();
        const std::array<double, 4> inv{a[3] / d, -a[1] / d, -a[2] / d, a[0] / d};
        double lo1 = std::numeric_limits<double>::infinity(), hi1 = -lo1, lo2 = lo1, hi2 = -lo1;
        for (double x : {x_lo, x_hi})
            for (double w : {w_lo, w_hi}) {
                const double k1 = inv[0] * x + inv[1] * w, k2 = inv[2] * x + inv[3] * w;
                lo1 = std::min(lo1, k1), hi1 = std::max(hi1, k1), lo2 = std::min(lo2, k2), hi2 = std::max(hi2, k2);
            }
        return {static_cast<int>(std::floor(lo1 - 1e-9)), static_cast<int>(std::ceil(hi1 + 1e-9)),
                static_cast<int>(std::floor(lo2 - 1e-9)), static_cast<int>(std::ceil(hi2 + 1e-9))};
    }
};

template <class P>
struct LatticePoint {
    LatticeTag tag;
    P point;
};

inline std::vector<LatticePoint<AffinePoint>> lattice_points(const AffineLattice& lat) {
    lat.validate();
    std::vector<LatticePoint<AffinePoint>> out;
    out.reserve(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const auto t = lat.tag(i);
        out.push_back({t, lat.point(t)});
    }
    return out;
}

inline std::vector<LatticePoint<TFPoint>> lattice_points(const TFLattice& lat) {
    lat.validate();
    std::vector<LatticePoint<TFPoint>> out;
    out.reserve(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const auto t = lat.tag(i);
        out.push_back({t, lat.point(t)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Tiles x_i U
// ---------------------------------------------------------------------------

inline bool in_tile(const AffinePoint& xi, const AffineNeighborhood& u, const AffinePoint& x) {
    return u.contains(affine_mul(affine_inv(xi), x), kTileTolerance);
}

inline bool in_tile(const TFPoint& xi, const TFNeighborhood& u, const TFPoint& x) {
    return u.contains(tf_mul(tf_inv(xi), x), kTileTolerance);
}

/// Flat indices of lattice points whose tile contains x, ascending.
inline std::vector<std::size_t> covering_tiles(const AffineLattice& lat, const AffineNeighborhood& u, const AffinePoint& x) {
    std::vector<std::size_t> out;
    const int eps = x.a > 0 ? 1 : -1;
    if (std::find(lat.signs().begin(), lat.signs().end(), eps) == lat.signs().end()) return out;
    const double la = std::log(lat.alpha());
    const double centre = std::log(std::abs(x.a)) / la;
    const double half = 0.5 * std::log(u.alpha) / la;
    const int jlo = std::max(lat.j_min(), static_cast<int>(std::floor(centre - half - 1e-9)));
    const int jhi = std::min(lat.j_max(), static_cast<int>(std::ceil(centre + half + 1e-9)));
    for (int j = jlo; j <= jhi; ++j) {
        const double s = eps * x.b / std::pow(lat.alpha(), j);
        const auto [kr_lo, kr_hi] = lat.k_range(j);
        const int klo = std::max(kr_lo, static_cast<int>(std::floor((s - u.beta / 2) / lat.beta() - 1e-9)));
        const int khi = std::min(kr_hi, static_cast<int>(std::ceil((s + u.beta / 2) / lat.beta() + 1e-9)));
        for (int k = klo; k <= khi; ++k) {
            const LatticeTag t{j, k, eps};
            if (in_tile(lat.point(t), u, x)) out.push_back(*lat.flat(t));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<std::size_t> covering_tiles(const TFLattice& lat, const TFNeighborhood& u, const TFPoint& x) {
    std::vector<std::size_t> out;
    const auto box = lat.index_box(x.x - u.beta_x / 2, x.x + u.beta_x / 2, x.omega - u.beta_omega / 2, x.omega + u.beta_omega / 2);
    for (int k1 = std::max(lat.k1_min, box[0]); k1 <= std::min(lat.k1_max, box[1]); ++k1)
        for (int k2 = std::max(lat.k2_min, box[2]); k2 <= std::min(lat.k2_max, box[3]); ++k2)
            if (in_tile(lat.point(k1, k2), u, x)) out.push_back(*lat.flat({k1, k2, 0}));
    std::sort(out.begin(), out.end());
    return out;
}

// ---------------------------------------------------------------------------
// Density
// ---------------------------------------------------------------------------

template <class P>
struct DensityReport {
    bool dense = false;
    std::optional<P> witness;  // first uncovered probe point
    std::size_t probes = 0;
};

template <class Lattice, class Nbhd, class P>
DensityReport<P> is_U_dense(const Lattice& lat, const Nbhd& u, const std::vector<P>& probe) {
    DensityReport<P> rep;
    rep.probes = probe.size();
    for (const auto& x : probe) {
        if (covering_tiles(lat, u, x).empty()) {
            rep.witness = x;
            return rep;
        }
    }
    rep.dense = true;
    return rep;
}

/// Scale window where a finite index window can claim full coverage:
/// alpha^{j_min + 1/2} <= |a| <= alpha^{j_max - 1/2}, and |b| within the
/// k-window at the smallest scale.
struct AffineProbeRegion {
    double a_lo = 1, a_hi = 1, b_reach = 0;
};

inline AffineProbeRegion claimable_region(const AffineLattice& lat) {
    AffineProbeRegion r;
    r.a_lo = std::pow(lat.alpha(), lat.j_min() + 0.5);
    r.a_hi = std::pow(lat.alpha(), lat.j_max() - 0.5);
    const double kreach = std::min(std::abs(static_cast<double>(lat.k_min())), std::abs(static_cast<double>(lat.k_max())));
    r.b_reach = lat.beta() * kreach * std::pow(lat.alpha(), lat.j_min());
    if (lat.bounded()) r.b_reach = std::min(r.b_reach, lat.b_reach() - lat.beta() * std::pow(lat.alpha(), lat.j_max()));
    return r;
}

inline bool in_region(const AffineProbeRegion& r, const AffinePoint& x) {
    const double a = std::abs(x.a);
    return a >= r.a_lo * (1 - 1e-12) && a <= r.a_hi * (1 + 1e-12) && std::abs(x.b) <= r.b_reach;
}

/// Quadrature nodes inside the claimable region, in node order.
inline std::vector<AffinePoint> density_probe(const AffineLattice& lat, const AffineQuadrature& q) {
    const auto region = claimable_region(lat);
    std::vector<AffinePoint> out;
    for (std::size_t i = 0; i < q.size(); ++i) {
        const auto x = q.node(i);
        if (std::find(lat.signs().begin(), lat.signs().end(), x.a > 0 ? 1 : -1) == lat.signs().end()) continue;
        if (in_region(region, x)) out.push_back(x);
    }
    return out;
}

/// Grid over the claimable region with `per_cell` samples per lattice cell
/// in b and in log-scale, sign-major then scale ascending then b ascending.
inline std::vector<AffinePoint> density_probe(const AffineLattice& lat, int per_cell = 8) {
    const auto region = claimable_region(lat);
    std::vector<AffinePoint> out;
    if (region.a_hi < region.a_lo) return out;
    const double u_lo = std::log(region.a_lo), u_hi = std::log(region.a_hi);
    const int nu = std::max(2, static_cast<int>(std::ceil((u_hi - u_lo) / std::log(lat.alpha()) * per_cell)) + 1);
    for (int s : lat.signs())
        for (int iu = 0; iu < nu; ++iu) {
            const double a = std::exp(u_lo + (u_hi - u_lo) * iu / (nu - 1));
            const double db = lat.beta() * a / per_cell;
            const int nb = static_cast<int>(std::floor(region.b_reach / db));
            for (int ib = -nb; ib <= nb; ++ib) out.emplace_back(ib * db, s * a);
        }
    return out;
}

/// Grid over the inner part of the lattice window (one step in from each edge).
inline std::vector<TFPoint> density_probe(const TFLattice& lat, int per_cell = 8) {
    std::vector<TFPoint> out;
    const int n1 = (lat.n1() - 3) * per_cell, n2 = (lat.n2() - 3) * per_cell;
    if (n1 < 0 || n2 < 0) return out;
    for (int i = 0; i <= n1; ++i)
        for (int j = 0; j <= n2; ++j) {
            const double k1 = lat.k1_min + 1.5 + static_cast<double>(i) / per_cell;
            const double k2 = lat.k2_min + 1.5 + static_cast<double>(j) / per_cell;
            out.push_back({lat.c * (lat.a[0] * k1 + lat.a[1] * k2), lat.c * (lat.a[2] * k1 + lat.a[3] * k2)});
        }
    return out;
}

// ---------------------------------------------------------------------------
// Relative separation
// ---------------------------------------------------------------------------

struct SeparationReport {
    bool separated = false;
    int count = 0;    // max_i |{j : x_i K meets x_j K}|
    long bound = 0;   // analytic cap for the infinite lattice (family size for plain families)
};

/// x_i K meets x_j K iff x_j^{-1} x_i lies in K K^{-1}
/// = {(b, r) : r in [1/alpha, alpha], |b| <= (1 + r) beta / 2}.
inline bool overlaps(const AffinePoint& xi, const AffinePoint& xj, const AffineNeighborhood& k) {
    const AffinePoint d = affine_mul(affine_inv(xj), xi);
    if (d.a <= 0) return false;
    const double la = std::log(k.alpha);
    if (std::abs(std::log(d.a)) > la + kTileTolerance) return false;
    return std::abs(d.b) <= (1 + d.a) * k.beta / 2 + kTileTolerance;
}

inline bool overlaps(const TFPoint& xi, const TFPoint& xj, const TFNeighborhood& k) {
    return std::abs(xi.x - xj.x) <= k.beta_x + kTileTolerance && std::abs(xi.omega - xj.omega) <= k.beta_omega + kTileTolerance;
}

/// Brute-force overlap count over an arbitrary family; duplicates are
/// distinct indices.
template <class P, class Nbhd>
SeparationReport is_relatively_separated(const std::vector<P>& family, const Nbhd& k) {
    SeparationReport rep;
    for (std::size_t i = 0; i < family.size(); ++i) {
        int c = 0;
        for (std::size_t j = 0; j < family.size(); ++j) c += overlaps(family[i], family[j], k) ? 1 : 0;
        rep.count = std::max(rep.count, c);
    }
    rep.bound = static_cast<long>(family.size());
    rep.separated = true;
    return rep;
}

/// 2 (2N + 1)(2M + 1) with N = ceil(log_alpha alpha_K), M = ceil((1 + alpha_K) beta_K / (2 beta)).
inline long separation_bound(const AffineLattice& lat, const AffineNeighborhood& k) {
    const long n = static_cast<long>(std::ceil(std::log(k.alpha) / std::log(lat.alpha()) - 1e-12));
    const long m = static_cast<long>(std::ceil((1 + k.alpha) * k.beta / (2 * lat.beta()) - 1e-12));
    return 2 * (2 * n + 1) * (2 * m + 1);
}

/// Number of points of the infinite lattice in [-beta_x, beta_x] x [-beta_w, beta_w].
inline long separation_bound(const TFLattice& lat, const TFNeighborhood& k) {
    const auto box = lat.index_box(-k.beta_x, k.beta_x, -k.beta_omega, k.beta_omega);
    long n = 0;
    for (int k1 = box[0]; k1 <= box[1]; ++k1)
        for (int k2 = box[2]; k2 <= box[3]; ++k2) n += overlaps(lat.point(k1, k2), TFPoint{}, k) ? 1 : 0;
    return n;
}

template <class Lattice, class Nbhd>
SeparationReport is_relatively_separated(const Lattice& lat, const Nbhd& k) {
    std::vector<decltype(lat.point(LatticeTag{}))> pts;
    pts.reserve(lat.size());
    for (std::size_t i = 0; i < lat.size(); ++i) pts.push_back(lat.point(lat.tag(i)));
    SeparationReport rep = is_relatively_separated(pts, k);
    rep.bound = separation_bound(lat, k);
    rep.separated = rep.count <= rep.bound;
    return rep;
}

// ---------------------------------------------------------------------------
// Sequences
// ---------------------------------------------------------------------------

template <class P>
struct CoefficientSequence {
    std::vector<LatticeTag> tags;
    std::vector<P> points;
    std::vector<cplx> values;
    std::vector<bool> in_chart;
    double in_chart_fraction = 1.0;

    std::size_t size() const { return values.size(); }
};

using AffineSequence = CoefficientSequence<AffinePoint>;
using TFSequence = CoefficientSequence<TFPoint>;

template <class Lattice>
auto empty_sequence(const Lattice& lat) {
    CoefficientSequence<decltype(lat.point(LatticeTag{}))> c;
    for (std::size_t i = 0; i < lat.size(); ++i) {
        c.tags.push_back(lat.tag(i));
        c.points.push_back(lat.point(c.tags.back()));
    }
    c.values.assign(lat.size(), cplx{});
    c.in_chart.assign(lat.size(), true);
    return c;
}

/// F(x_i) by chart interpolation; off-chart points read zero and are flagged.
template <Field F, class Lattice>
auto sample_field(const F& f, const Lattice& lat) {
    auto c = empty_sequence(lat);
    std::size_t inside = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (auto v = interpolate(f, c.points[i])) {
            c.values[i] = *v;
            ++inside;
        } else {
            c.in_chart[i] = false;
        }
    }
    c.in_chart_fraction = c.size() ? static_cast<double>(inside) / static_cast<double>(c.size()) : 1.0;
    return c;
}

/// (sum |c_i|^p m(x_i)^p)^{1/p}; max for p = inf.
template <class P>
double seq_lpm_norm(const CoefficientSequence<P>& c, double p, const WeightSpec& m) {
    if (!(p >= 1)) throw std::invalid_argument("seq_lpm_norm: p must be in [1, inf]");
    if (std::isinf(p)) {
        double mx = 0;
        for (std::size_t i = 0; i < c.size(); ++i) mx = std::max(mx, std::abs(c.values[i]) * m(c.points[i]));
        return mx;
    }
    double s = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double v = std::abs(c.values[i]) * m(c.points[i]);
        s += p == 2 ? v * v : std::pow(v, p);
    }
    return std::pow(s, 1.0 / p);
}

template <class P, class Lattice>
double seq_lpm_norm(const CoefficientSequence<P>& c, double p, const WeightSpec& m, const Lattice& lat) {
    if (c.size() != lat.size()) throw std::invalid_argument("seq_lpm_norm: sequence does not match lattice");
    return seq_lpm_norm(c, p, m);
}

// ---------------------------------------------------------------------------
// Norm equivalence
// ---------------------------------------------------------------------------

/// Bounds a2 <= m(x u) / m(x) <= b2 for u in U.
struct ModerationBounds {
    double lower = 1;
    double upper = 1;
    bool heuristic = false;
};

inline ModerationBounds moderation_bounds(const WeightSpec& m, const AffineNeighborhood& u,
                                          const std::vector<AffinePoint>& anchors = {}) {
    const double r = std::sqrt(u.alpha);
    if (auto* ps = std::get_if<PowerScale>(&m.variant())) return {std::pow(r, -std::abs(ps->s)), std::pow(r, std::abs(ps->s)), false};
    if (auto* sp = std::get_if<SymmetricPower>(&m.variant())) return {std::pow(r, -sp->rho), std::pow(r, sp->rho), false};
    ModerationBounds b{std::numeric_limits<double>::infinity(), 0.0, true};
    for (const auto& x : anchors)
        for (const auto& o : u.samples()) {
            const double ratio = m(affine_mul(x, o)) / m(x);
            b.lower = std::min(b.lower, ratio);
            b.upper = std::max(b.upper, ratio);
        }
    if (anchors.empty()) b = {1, 1, true};
    return b;
}

inline ModerationBounds moderation_bounds(const WeightSpec& m, const TFNeighborhood& u,
                                          const std::vector<TFPoint>& anchors = {}) {
    if (auto* pt = std::get_if<PolyTF>(&m.variant())) {
        const double f = std::pow(1 + u.beta_x / 2, pt->r) * std::pow(1 + u.beta_omega / 2, pt->s);
        return {1.0 / f, f, false};
    }
    ModerationBounds b{std::numeric_limits<double>::infinity(), 0.0, true};
    for (const auto& x : anchors)
        for (const auto& o : u.samples()) {
            const double ratio = m(tf_mul(x, o)) / m(x);
            b.lower = std::min(b.lower, ratio);
            b.upper = std::max(b.upper, ratio);
        }
    if (anchors.empty()) b = {1, 1, true};
    return b;
}

struct NormEquivalenceReport {
    double field_norm = 0;     // ||sum |c_i| chi_{x_i U}||_{L^p_m}
    double sequence_norm = 0;  // ||c||_{l^p_m~}
    double ratio = 0;
    double lower = 0;          // a2 E^{1/p}
    double upper = 0;          // N^{1-1/p} b2 E^{1/p} (N b2 for p = inf)
    int overlap = 0;           // N
    bool heuristic = false;
    bool pass = false;
};

inline constexpr int kTileQuadrature = 16;

namespace detail {
// Midpoint cells of U with exact Haar masses: (offset, mass).
inline std::vector<std::pair<AffinePoint, double>> tile_cells(const AffineNeighborhood& u, int n) {
    std::vector<std::pair<AffinePoint, double>> out;
    const double h = 0.5 * std::log(u.alpha);
    const double db = u.beta / n, du = 2 * h / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double u0 = -h + j * du, u1 = u0 + du;
            out.emplace_back(AffinePoint{-u.beta / 2 + (i + 0.5) * db, std::exp(0.5 * (u0 + u1))},
                             db * (std::exp(-u0) - std::exp(-u1)));
        }
    return out;
}

inline std::vector<std::pair<TFPoint, double>> tile_cells(const TFNeighborhood& u, int n) {
    std::vector<std::pair<TFPoint, double>> out;
    const double dx = u.beta_x / n, dw = u.beta_omega / n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out.emplace_back(TFPoint{-u.beta_x / 2 + (i + 0.5) * dx, -u.beta_omega / 2 + (j + 0.5) * dw}, dx * dw);
    return out;
}

inline AffinePoint group_mul(const AffinePoint& x, const AffinePoint& y) { return affine_mul(x, y); }
inline TFPoint group_mul(const TFPoint& x, const TFPoint& y) { return tf_mul(x, y); }
}  // namespace detail

/// Compares ||sum |c_i| chi_{x_i U}||_{L^p_m} with ||c||_{l^p_m~}. The field
/// norm is integrated tile by tile (left-invariant midpoint cells), each
/// point shared equally among the tiles that contain it.
template <class Lattice, class Nbhd, class P>
NormEquivalenceReport norm_equivalence_check(const CoefficientSequence<P>& c, double p, const WeightSpec& m,
                                             const Lattice& lat, const Nbhd& u, int cells = kTileQuadrature) {
    if (c.size() != lat.size()) throw std::invalid_argument("norm_equivalence_check: sequence does not match lattice");
    if (!(p >= 1)) throw std::invalid_argument("norm_equivalence_check: p must be in [1, inf]");
    NormEquivalenceReport rep;
    const auto sep = is_relatively_separated(lat, u);
    rep.overlap = sep.count;
    const auto mb = moderation_bounds(m, u, c.points);
    rep.heuristic = mb.heuristic;
    const double e = u.haar_mass();
    const bool inf = std::isinf(p);
    const double ep = inf ? 1.0 : std::pow(e, 1.0 / p);
    rep.lower = mb.lower * ep;
    rep.upper = (inf ? rep.overlap : std::pow(rep.overlap, 1.0 - 1.0 / p)) * mb.upper * ep;
    rep.sequence_norm = seq_lpm_norm(c, p, m);
    const auto tiles = detail::tile_cells(u, cells);
    double acc = 0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        if (c.values[i] == cplx{}) continue;
        for (const auto& [off, mass] : tiles) {
            const auto x = detail::group_mul(c.points[i], off);
            const auto cover = covering_tiles(lat, u, x);
            double s = 0;
            std::size_t live = 0;
            for (auto j : cover) {
                s += std::abs(c.values[j]);
                live += c.values[j] != cplx{} ? 1 : 0;
            }
            const double v = s * m(x);
            if (inf) acc = std::max(acc, v);
            else acc += std::pow(v, p) * mass / static_cast<double>(live);
        }
    }
    rep.field_norm = inf ? acc : std::pow(acc, 1.0 / p);
    if (rep.sequence_norm == 0) {
        rep.ratio = 0;
        rep.pass = rep.field_norm == 0;
        return rep;
    }
    rep.ratio = rep.field_norm / rep.sequence_norm;
    rep.pass = rep.ratio >= rep.lower * (1 - 1e-9) && rep.ratio <= rep.upper * (1 + 1e-9);
    return rep;
}

// ---------------------------------------------------------------------------
// Bounded uniform partitions of unity
// ---------------------------------------------------------------------------

/// phi_i = chi_{x_i U} / sum_j chi_{x_j U}, evaluated on demand.
template <class Lattice, class Nbhd>
struct BUPU {
    Lattice lattice;
    Nbhd u;

    using Point = decltype(std::declval<Lattice>().point(LatticeTag{}));

    /// (flat index, phi_i(x)) for every i with phi_i(x) > 0.
    std::vector<std::pair<std::size_t, double>> weights(const Point& x) const {
        const auto cover = covering_tiles(lattice, u, x);
        std::vector<std::pair<std::size_t, double>> out;
        out.reserve(cover.size());
        for (auto i : cover) out.emplace_back(i, 1.0 / static_cast<double>(cover.size()));
        return out;
    }

    double phi(std::size_t i, const Point& x) const {
        for (const auto& [j, w] : weights(x))
            if (j == i) return w;
        return 0.0;
    }
};

using AffineBUPU = BUPU<AffineLattice, AffineNeighborhood>;
using TFBUPU = BUPU<TFLattice, TFNeighborhood>;

template <class P>
class DensityError : public CoorbitError {
public:
    DensityError(const std::string& what, P w) : CoorbitError(what), witness(w) {}
    P witness;
};

/// Verifies density on `probe` (the claimable region by default).
inline AffineBUPU build_bupu(const AffineLattice& lat, const AffineNeighborhood& u, std::optional<std::vector<AffinePoint>> probe = std::nullopt) {
    const auto pts = probe ? *probe : density_probe(lat);
    const auto rep = is_U_dense(lat, u, pts);
    if (!rep.dense)
        throw DensityError<AffinePoint>("build_bupu: tiles do not cover (" + std::to_string(rep.witness->b) + ", " +
                                            std::to_string(rep.witness->a) + ")",
                                        *rep.witness);
    return {lat, u};
}

inline TFBUPU build_bupu(const TFLattice& lat, const TFNeighborhood& u, std::optional<std::vector<TFPoint>> probe = std::nullopt) {
    const auto pts = probe ? *probe : density_probe(lat);
    const auto rep = is_U_dense(lat, u, pts);
    if (!rep.dense)
        throw DensityError<TFPoint>("build_bupu: tiles do not cover (" + std::to_string(rep.witness->x) + ", " +
                                        std::to_string(rep.witness->omega) + ")",
                                    *rep.witness);
    return {lat, u};
}

/// Field with value sum_i c_i phi_i(x) at every node.
template <class Lattice, class Nbhd, class Quad>
auto bupu_synthesize(const CoefficientSequence<decltype(std::declval<Lattice>().point(LatticeTag{}))>& c,
                     const BUPU<Lattice, Nbhd>& bupu, const Quad& quad) {
    if (c.size() != bupu.lattice.size()) throw std::invalid_argument("bupu_synthesize: sequence does not match lattice");
    using F = std::conditional_t<std::is_same_v<Quad, AffineQuadrature>, GroupField, TFField>;
    F out(quad);
    for (std::size_t idx = 0; idx < out.size(); ++idx) {
        cplx s{};
        for (const auto& [i, w] : bupu.weights(quad.node(idx))) s += c.values[i] * w;
        out.values[idx] = s;
    }
    return out;
}

/// Per-node BUPU weights, precomputed for repeated synthesis on one chart.
template <class Quad>
struct SynthesisTable {
    Quad quad;
    std::vector<std::size_t> offsets;  // node -> range in entries
    std::vector<std::pair<std::size_t, double>> entries;

    template <class Lattice, class Nbhd>
    SynthesisTable(const BUPU<Lattice, Nbhd>& bupu, Quad q) : quad(std::move(q)) {
        offsets.reserve(quad.size() + 1);
        offsets.push_back(0);
        for (std::size_t idx = 0; idx < quad.size(); ++idx) {
            for (const auto& e : bupu.weights(quad.node(idx))) entries.push_back(e);
            offsets.push_back(entries.size());
        }
        for (const auto& e : entries) referenced.push_back(e.first);
        std::sort(referenced.begin(), referenced.end());
        referenced.erase(std::unique(referenced.begin(), referenced.end()), referenced.end());
    }

    /// Lattice indices with a nonzero weight at some node, ascending.
    std::vector<std::size_t> referenced;

    template <class P>
    auto synthesize(const CoefficientSequence<P>& c) const {
        return synthesize(c.values);
    }

    /// Same, from a value vector indexed by lattice position; only the
    /// referenced entries are read.
    auto synthesize(const std::vector<cplx>& values) const {
        using F = std::conditional_t<std::is_same_v<Quad, AffineQuadrature>, GroupField, TFField>;
        F out(quad);
        for (std::size_t idx = 0; idx < quad.size(); ++idx) {
            cplx s{};
            for (std::size_t e = offsets[idx]; e < offsets[idx + 1]; ++e) s += values[entries[e].first] * entries[e].second;
            out.values[idx] = s;
        }
        return out;
    }

    /// F at the referenced lattice points, zero elsewhere and off-chart.
    template <Field F, class Lattice>
    std::vector<cplx> sample(const F& f, const Lattice& lat) const {
        std::vector<cplx> v(lat.size());
        for (auto i : referenced)
            if (auto x = interpolate(f, lat.point(lat.tag(i)))) v[i] = *x;
        return v;
    }
};

}  // namespace coorbit
