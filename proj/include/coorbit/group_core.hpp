#pragma once

// Group arithmetic for the affine group and the reduced Heisenberg group,
// plus Haar quadratures on truncated charts of the affine group and of the
// time-frequency plane.

#include "coorbit/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coorbit {

class CoorbitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class GroupKind { affine, tf_plane };

inline const char* to_string(GroupKind g) { return g == GroupKind::affine ? "affine" : "tf_plane"; }

// ---------------------------------------------------------------------------
// Affine group  Aff = R x R*,  (b1,a1)(b2,a2) = (b1 + a1 b2, a1 a2)
// ---------------------------------------------------------------------------

struct AffinePoint {
    double b = 0.0;
    double a = 1.0;

    AffinePoint() = default;
    AffinePoint(double shift, double scale) : b(shift), a(scale) {
        if (scale == 0.0 || !std::isfinite(scale)) throw std::invalid_argument("AffinePoint: scale must be nonzero");
    }

    static AffinePoint identity() { return {0.0, 1.0}; }
    friend bool operator==(const AffinePoint&, const AffinePoint&) = default;
};

inline AffinePoint affine_mul(const AffinePoint& p, const AffinePoint& q) {
    return {p.b + p.a * q.b, p.a * q.a};
}

inline AffinePoint affine_inv(const AffinePoint& p) { return {-p.b / p.a, 1.0 / p.a}; }

/// Modular function of the affine group (left Haar measure db da / a^2).
inline double affine_modular(const AffinePoint& p) { return std::abs(p.a); }

// ---------------------------------------------------------------------------
// Reduced Heisenberg group  R^d x R^d x S^1
// ---------------------------------------------------------------------------

struct HeisenbergPoint {
    std::vector<double> x;
    std::vector<double> omega;
    cplx tau{1.0, 0.0};

    HeisenbergPoint() = default;
    HeisenbergPoint(std::vector<double> shift, std::vector<double> freq, cplx phase)
        : x(std::move(shift)), omega(std::move(freq)), tau(phase) {
        if (x.size() != omega.size()) throw std::invalid_argument("HeisenbergPoint: x and omega dimension differ");
        if (std::abs(std::abs(tau) - 1.0) > 1e-12) throw std::invalid_argument("HeisenbergPoint: |tau| must be 1");
    }

    std::size_t dim() const { return x.size(); }

    static HeisenbergPoint identity(std::size_t d) {
        return {std::vector<double>(d, 0.0), std::vector<double>(d, 0.0), cplx{1.0, 0.0}};
    }
};

namespace detail {
inline double dot(const std::vector<double>& u, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += u[i] * v[i];
    return s;
}
}  // namespace detail

inline HeisenbergPoint heis_mul(const HeisenbergPoint& p, const HeisenbergPoint& q) {
    if (p.dim() != q.dim()) throw std::invalid_argument("heis_mul: dimension mismatch");
    HeisenbergPoint r;
    r.x.resize(p.dim());
    r.omega.resize(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) {
        r.x[i] = p.x[i] + q.x[i];
        r.omega[i] = p.omega[i] + q.omega[i];
    }
    const double cross = detail::dot(q.x, p.omega) - detail::dot(p.x, q.omega);
    r.tau = p.tau * q.tau * std::polar(1.0, std::numbers::pi * cross);
    r.tau /= std::abs(r.tau);
    return r;
}

inline HeisenbergPoint heis_inv(const HeisenbergPoint& p) {
    HeisenbergPoint r;
    r.x.resize(p.dim());
    r.omega.resize(p.dim());
    for (std::size_t i = 0; i < p.dim(); ++i) {
        r.x[i] = -p.x[i];
        r.omega[i] = -p.omega[i];
    }
    r.tau = std::conj(p.tau);
    return r;
}

/// Point of the time-frequency plane R x R (Heisenberg group with the phase dropped).
struct TFPoint {
    double x = 0.0;
    double omega = 0.0;
    friend bool operator==(const TFPoint&, const TFPoint&) = default;
};

inline TFPoint tf_mul(const TFPoint& p, const TFPoint& q) { return {p.x + q.x, p.omega + q.omega}; }
inline TFPoint tf_inv(const TFPoint& p) { return {-p.x, -p.omega}; }

// ---------------------------------------------------------------------------
// Quadratures
// ---------------------------------------------------------------------------

struct UniformGrid {
    double origin = 0.0;
    double step = 1.0;
    int count = 0;

    double at(int i) const { return origin + step * i; }
    friend bool operator==(const UniformGrid&, const UniformGrid&) = default;
};

/// Haar quadrature on [b_lo, b_hi) x {a_min <= |a| <= a_max}. Scales are
/// log-uniform, a = eps * exp(u); node weight db * du / |a|.
///
/// Node order: sign branch (in the order of `signs`), then u ascending, then
/// b ascending.
class AffineQuadrature {
public:
    AffineQuadrature() = default;

    AffineQuadrature(double b_lo, double b_hi, int n_b, double a_min, double a_max, int n_scales,
                     std::vector<int> signs)
        : b_lo_(b_lo), b_hi_(b_hi), n_b_(n_b), a_min_(a_min), a_max_(a_max), n_scales_(n_scales),
          signs_(std::move(signs)) {
        if (!(b_hi > b_lo) || !std::isfinite(b_lo) || !std::isfinite(b_hi))
            throw std::invalid_argument("affine quadrature: need b_lo < b_hi");
        if (n_b < 2) throw std::invalid_argument("affine quadrature: need n_b >= 2");
        if (!(a_min > 0.0) || !(a_max > a_min)) throw std::invalid_argument("affine quadrature: need 0 < a_min < a_max");
        if (n_scales < 2) throw std::invalid_argument("affine quadrature: need n_scales >= 2");
        if (signs_.empty() || signs_.size() > 2) throw std::invalid_argument("affine quadrature: signs must be {1}, {-1} or {1,-1}");
        for (int s : signs_)
            if (s != 1 && s != -1) throw std::invalid_argument("affine quadrature: signs must be +1 or -1");
        if (signs_.size() == 2 && signs_[0] == signs_[1]) throw std::invalid_argument("affine quadrature: duplicate sign");
        db_ = (b_hi - b_lo) / n_b;
        u_lo_ = std::log(a_min);
        du_ = (std::log(a_max) - u_lo_) / (n_scales - 1);
    }

    double b_lo() const { return b_lo_; }
    double b_hi() const { return b_hi_; }
    int n_b() const { return n_b_; }
    double a_min() const { return a_min_; }
    double a_max() const { return a_max_; }
    int n_scales() const { return n_scales_; }
    const std::vector<int>& signs() const { return signs_; }
    double db() const { return db_; }
    double du() const { return du_; }
    double u_lo() const { return u_lo_; }

    int branches() const { return static_cast<int>(signs_.size()); }
    int rows() const { return branches() * n_scales_; }
    std::size_t size() const { return static_cast<std::size_t>(rows()) * n_b_; }

    double b_at(int i) const { return b_lo_ + db_ * i; }
    double u_at(int k) const { return u_lo_ + du_ * k; }
    /// Signed scale of row r = branch * n_scales + k.
    double row_scale(int r) const { return signs_[r / n_scales_] * std::exp(u_at(r % n_scales_)); }
    double row_weight(int r) const { return db_ * du_ / std::abs(row_scale(r)); }

    std::size_t index(int branch, int k, int i) const {
        return (static_cast<std::size_t>(branch) * n_scales_ + k) * n_b_ + i;
    }
    AffinePoint node(std::size_t idx) const {
        const int r = static_cast<int>(idx / n_b_);
        const int i = static_cast<int>(idx % n_b_);
        return {b_at(i), row_scale(r)};
    }
    double weight(std::size_t idx) const { return row_weight(static_cast<int>(idx / n_b_)); }

    std::optional<int> branch_of(double a) const {
        const int s = a > 0 ? 1 : -1;
        for (int j = 0; j < branches(); ++j)
            if (signs_[j] == s) return j;
        return std::nullopt;
    }

    double total_weight() const {
        double s = 0.0;
        for (int r = 0; r < rows(); ++r) s += row_weight(r) * n_b_;
        return s;
    }

    bool same_chart(const AffineQuadrature& o) const {
        return b_lo_ == o.b_lo_ && b_hi_ == o.b_hi_ && n_b_ == o.n_b_ && a_min_ == o.a_min_ && a_max_ == o.a_max_ &&
               n_scales_ == o.n_scales_ && signs_ == o.signs_;
    }

    static constexpr GroupKind group() { return GroupKind::affine; }

private:
    double b_lo_ = 0.0, b_hi_ = 1.0;
    int n_b_ = 2;
    double a_min_ = 0.5, a_max_ = 2.0;
    int n_scales_ = 2;
    std::vector<int> signs_{1};
    double db_ = 0.5, du_ = 1.0, u_lo_ = 0.0;
};

inline AffineQuadrature build_affine_quadrature(double b_lo, double b_hi, int n_b, double a_min, double a_max,
                                                int n_scales, std::vector<int> signs) {
    return AffineQuadrature(b_lo, b_hi, n_b, a_min, a_max, n_scales, std::move(signs));
}

/// Lebesgue quadrature on a uniform x-by-omega grid of the time-frequency
/// plane. Node order: x-major, then omega.
class TFQuadrature {
public:
    TFQuadrature() = default;
    TFQuadrature(UniformGrid x, UniformGrid omega) : x_(x), omega_(omega) {
        if (x.count < 1 || omega.count < 1) throw std::invalid_argument("tf quadrature: empty grid");
        if (!(x.step > 0) || !(omega.step > 0)) throw std::invalid_argument("tf quadrature: steps must be positive");
    }

    const UniformGrid& x() const { return x_; }
    const UniformGrid& omega() const { return omega_; }
    std::size_t size() const { return static_cast<std::size_t>(x_.count) * omega_.count; }
    std::size_t index(int ix, int iw) const { return static_cast<std::size_t>(ix) * omega_.count + iw; }
    TFPoint node(std::size_t idx) const {
        return {x_.at(static_cast<int>(idx / omega_.count)), omega_.at(static_cast<int>(idx % omega_.count))};
    }
    double weight(std::size_t) const { return x_.step * omega_.step; }
    double cell() const { return x_.step * omega_.step; }
    double total_weight() const { return cell() * static_cast<double>(size()); }
    bool same_chart(const TFQuadrature& o) const { return x_ == o.x_ && omega_ == o.omega_; }

    static constexpr GroupKind group() { return GroupKind::tf_plane; }

private:
    UniformGrid x_;
    UniformGrid omega_;
};

// ---------------------------------------------------------------------------
// Fields attached to quadratures
// ---------------------------------------------------------------------------

/// Complex samples of F: Aff -> C on an affine quadrature.
struct GroupField {
    AffineQuadrature quad;
    std::vector<cplx> values;
    /// Fraction of nodes whose value came from inside the chart.
    double coverage = 1.0;
    /// Bound on neglected mass from chart truncation (set by convolution).
    double tail_bound = 0.0;

    GroupField() = default;
    explicit GroupField(AffineQuadrature q) : quad(std::move(q)), values(quad.size(), cplx{}) {}
    GroupField(AffineQuadrature q, std::vector<cplx> v) : quad(std::move(q)), values(std::move(v)) {
        if (values.size() != quad.size()) throw std::invalid_argument("GroupField: value count does not match quadrature");
    }

    std::size_t size() const { return values.size(); }
    cplx& at(int row, int i) { return values[static_cast<std::size_t>(row) * quad.n_b() + i]; }
    const cplx& at(int row, int i) const { return values[static_cast<std::size_t>(row) * quad.n_b() + i]; }
};

/// Complex samples of F on the time-frequency plane (x-major, then omega).
struct TFField {
    TFQuadrature quad;
    std::vector<cplx> values;
    double coverage = 1.0;

    TFField() = default;
    explicit TFField(TFQuadrature q) : quad(q), values(quad.size(), cplx{}) {}
    TFField(TFQuadrature q, std::vector<cplx> v) : quad(q), values(std::move(v)) {
        if (values.size() != quad.size()) throw std::invalid_argument("TFField: value count does not match grid");
    }

    std::size_t size() const { return values.size(); }
    cplx& at(int ix, int iw) { return values[quad.index(ix, iw)]; }
    const cplx& at(int ix, int iw) const { return values[quad.index(ix, iw)]; }
};

template <class F>
concept Field = requires(const F& f, std::size_t i) {
    { f.quad.node(i) };
    { f.quad.weight(i) } -> std::convertible_to<double>;
    { f.values[i] } -> std::convertible_to<cplx>;
};

// ---------------------------------------------------------------------------
// Chart interpolation
// ---------------------------------------------------------------------------

namespace detail {
// Fractional indices closer than this to the chart edge count as inside.
inline constexpr double kEdgeSlack = 1e-9;

struct LinearStencil {
    int i0 = 0;
    double t = 0.0;  // weight of i0+1
    bool inside = false;
};

inline LinearStencil linear_stencil(double frac, int n) {
    LinearStencil s;
    if (frac < -kEdgeSlack || frac > (n - 1) + kEdgeSlack) return s;
    frac = std::clamp(frac, 0.0, static_cast<double>(n - 1));
    int i0 = static_cast<int>(std::floor(frac));
    if (i0 >= n - 1) i0 = n - 2;
    s.i0 = i0;
    s.t = frac - i0;
    if (s.t < kEdgeSlack) s.t = 0.0;
    if (s.t > 1.0 - kEdgeSlack) s.t = 1.0;
    s.inside = true;
    return s;
}
}  // namespace detail

/// Bilinear interpolation in (b, u = ln|a|) on the matching sign branch.
/// Returns nullopt outside the chart.
inline std::optional<cplx> interpolate(const GroupField& f, const AffinePoint& p) {
    const auto& q = f.quad;
    const auto branch = q.branch_of(p.a);
    if (!branch) return std::nullopt;
    const auto sb = detail::linear_stencil((p.b - q.b_lo()) / q.db(), q.n_b());
    if (!sb.inside) return std::nullopt;
    const auto su = detail::linear_stencil((std::log(std::abs(p.a)) - q.u_lo()) / q.du(), q.n_scales());
    if (!su.inside) return std::nullopt;
    const int r0 = *branch * q.n_scales() + su.i0;
    auto row = [&](int r) { return (1.0 - sb.t) * f.at(r, sb.i0) + sb.t * f.at(r, sb.i0 + 1); };
    cplx v = (1.0 - su.t) * row(r0);
    if (su.t != 0.0) v += su.t * row(r0 + 1);
    return v;
}

inline std::optional<cplx> interpolate(const TFField& f, const TFPoint& p) {
    const auto& q = f.quad;
    const auto sx = detail::linear_stencil((p.x - q.x().origin) / q.x().step, q.x().count);
    const auto sw = detail::linear_stencil((p.omega - q.omega().origin) / q.omega().step, q.omega().count);
    if (!sx.inside || !sw.inside) return std::nullopt;
    auto val = [&](int ix, int iw) {
        if (ix >= q.x().count || iw >= q.omega().count) return cplx{};
        return f.at(ix, iw);
    };
    const int nx = q.x().count, nw = q.omega().count;
    // single-point axes have no neighbour
    const double tx = nx > 1 ? sx.t : 0.0;
    const double tw = nw > 1 ? sw.t : 0.0;
    const int ix = nx > 1 ? sx.i0 : 0;
    const int iw = nw > 1 ? sw.i0 : 0;
    return (1 - tx) * ((1 - tw) * val(ix, iw) + tw * val(ix, iw + 1)) +
           tx * ((1 - tw) * val(ix + 1, iw) + tw * val(ix + 1, iw + 1));
}

inline cplx interpolate_or_zero(const GroupField& f, const AffinePoint& p) { return interpolate(f, p).value_or(cplx{}); }
inline cplx interpolate_or_zero(const TFField& f, const TFPoint& p) { return interpolate(f, p).value_or(cplx{}); }

/// Sum of value * weight over the nodes, in ascending node order.
template <Field F>
cplx haar_integral(const F& f) {
    cplx s{};
    for (std::size_t i = 0; i < f.values.size(); ++i) s += f.values[i] * f.quad.weight(i);
    return s;
}

/// (L_y F)(x) = F(y^{-1} x). Nodes mapped outside the chart read as zero;
/// the fraction that stayed inside is stored in `coverage`.
inline GroupField left_translate_field(const GroupField& f, const AffinePoint& y) {
    GroupField out(f.quad);
    const AffinePoint yinv = affine_inv(y);
    std::size_t inside = 0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        if (auto v = interpolate(f, affine_mul(yinv, f.quad.node(idx)))) {
            out.values[idx] = *v;
            ++inside;
        }
    }
    out.coverage = static_cast<double>(inside) / static_cast<double>(f.size());
    return out;
}

inline TFField left_translate_field(const TFField& f, const TFPoint& y) {
    TFField out(f.quad);
    const TFPoint yinv = tf_inv(y);
    std::size_t inside = 0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        if (auto v = interpolate(f, tf_mul(yinv, f.quad.node(idx)))) {
            out.values[idx] = *v;
            ++inside;
        }
    }
    out.coverage = static_cast<double>(inside) / static_cast<double>(f.size());
    return out;
}

template <Field F, class Fn>
F field_from_function(const decltype(F::quad)& q, Fn&& fn) {
    F out(q);
    for (std::size_t i = 0; i < out.size(); ++i) out.values[i] = fn(q.node(i));
    return out;
}

inline GroupField make_field(const AffineQuadrature& q, auto&& fn) { return field_from_function<GroupField>(q, fn); }
inline TFField make_field(const TFQuadrature& q, auto&& fn) { return field_from_function<TFField>(q, fn); }

}  // namespace coorbit
