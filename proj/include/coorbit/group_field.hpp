#pragma once

// Weighted L^p norms, involutions, convolution, oscillation and Young
// inequality checks for fields on the affine group and the time-frequency
// plane.

#include "coorbit/group_core.hpp"
#include "coorbit/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace coorbit {

// ---------------------------------------------------------------------------
// Norms
// ---------------------------------------------------------------------------

/// (sum |F|^p m^p weight)^{1/p}; the grid max of |F| m for p = inf.
template <Field F>
double lpm_norm(const F& f, double p, const WeightSpec& m) {
    if (!(p >= 1)) throw std::invalid_argument("lpm_norm: p must be in [1, inf]");
    if (m.group() != f.quad.group()) throw std::invalid_argument("lpm_norm: weight is defined on another group");
    if (std::isinf(p)) {
        double mx = 0;
        for (std::size_t i = 0; i < f.values.size(); ++i) mx = std::max(mx, std::abs(f.values[i]) * m(f.quad.node(i)));
        return mx;
    }
    double s = 0;
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        const double v = std::abs(f.values[i]) * m(f.quad.node(i));
        if (v == 0) continue;
        s += (p == 1 ? v : p == 2 ? v * v : std::pow(v, p)) * f.quad.weight(i);
    }
    return p == 1 ? s : p == 2 ? std::sqrt(s) : std::pow(s, 1.0 / p);
}

template <Field F>
double l2_norm(const F& f) {
    return lpm_norm(f, 2.0, f.quad.group() == GroupKind::affine ? WeightSpec::unit_affine() : WeightSpec::unit_tf());
}

/// 1/m as a weight. Power weights stay in closed form.
inline WeightSpec inverse_weight(const WeightSpec& m) {
    if (auto* ps = std::get_if<PowerScale>(&m.variant())) return PowerScale{-ps->s};
    return CustomWeight{m.group(), [m](double c1, double c2) { return 1.0 / m(c1, c2); }, "1/" + m.describe()};
}

template <Field F>
F operator*(cplx c, F f) {
    for (auto& v : f.values) v *= c;
    return f;
}

template <Field F>
F field_difference(const F& a, const F& b) {
    if (!a.quad.same_chart(b.quad)) throw std::invalid_argument("field difference: quadrature mismatch");
    F out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] -= b.values[i];
    return out;
}

template <Field F>
F field_sum(const F& a, const F& b) {
    if (!a.quad.same_chart(b.quad)) throw std::invalid_argument("field sum: quadrature mismatch");
    F out = a;
    for (std::size_t i = 0; i < out.values.size(); ++i) out.values[i] += b.values[i];
    return out;
}

// ---------------------------------------------------------------------------
// Involutions
// ---------------------------------------------------------------------------

enum class Involution {
    vee,    // F(x^{-1})
    nabla,  // conj F(x^{-1})
};

inline GroupField involute(const GroupField& f, Involution kind) {
    GroupField out(f.quad);
    std::size_t inside = 0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        if (auto v = interpolate(f, affine_inv(f.quad.node(idx)))) {
            out.values[idx] = kind == Involution::nabla ? std::conj(*v) : *v;
            ++inside;
        }
    }
    out.coverage = static_cast<double>(inside) / static_cast<double>(f.size());
    return out;
}

inline TFField involute(const TFField& f, Involution kind) {
    TFField out(f.quad);
    std::size_t inside = 0;
    for (std::size_t idx = 0; idx < f.size(); ++idx) {
        if (auto v = interpolate(f, tf_inv(f.quad.node(idx)))) {
            out.values[idx] = kind == Involution::nabla ? std::conj(*v) : *v;
            ++inside;
        }
    }
    out.coverage = static_cast<double>(inside) / static_cast<double>(f.size());
    return out;
}

// ---------------------------------------------------------------------------
// Affine convolution
// ---------------------------------------------------------------------------

/// Right convolution F -> F * G with a fixed G on one affine chart.
///
/// For source row a' and target row a, the values G(y^{-1}x) depend on
/// b - b' only, so each (a', a) pair is a linear correlation in b that is
/// done with one zero-padded FFT. With `cache_spectra` the pair spectra are
/// kept, so repeated applications cost one multiply-add per pair.
class ConvolutionPlan {
public:
    explicit ConvolutionPlan(GroupField g, bool cache_spectra = false) : g_(std::move(g)), cache_(cache_spectra) {
        const auto& q = g_.quad;
        len_ = 1;
        while (len_ < 2 * q.n_b()) len_ *= 2;
        double peak = 0;
        for (const auto& v : g_.values) peak = std::max(peak, std::abs(v));
        // Largest |G| on the chart boundary, used for the truncation indicator.
        for (int r = 0; r < q.rows(); ++r) {
            edge_ = std::max({edge_, std::abs(g_.at(r, 0)), std::abs(g_.at(r, q.n_b() - 1))});
            if (r % q.n_scales() == 0 || r % q.n_scales() == q.n_scales() - 1)
                for (int i = 0; i < q.n_b(); ++i) edge_ = std::max(edge_, std::abs(g_.at(r, i)));
        }
        row_nonzero_.assign(q.rows(), false);
        for (int r = 0; r < q.rows(); ++r)
            for (int i = 0; i < q.n_b() && !row_nonzero_[r]; ++i) row_nonzero_[r] = g_.at(r, i) != cplx{};
        if (cache_) {
            spectra_.resize(static_cast<std::size_t>(q.rows()) * q.rows());
            std::vector<cplx> h(len_);
            for (int dst = 0; dst < q.rows(); ++dst)
                for (int src = 0; src < q.rows(); ++src)
                    if (pair_kernel(src, dst, h)) spectra_[pair_index(src, dst)] = fft(h);
        }
    }

    const GroupField& kernel() const { return g_; }

    GroupField apply(const GroupField& f) const {
        const auto& q = g_.quad;
        if (!q.same_chart(f.quad)) throw std::invalid_argument("convolve: quadrature mismatch");
        const int rows = q.rows(), nb = q.n_b();
        // Spectra of the zero-padded source rows, pre-weighted by the Haar weight.
        std::vector<std::vector<cplx>> fh(rows);
        std::vector<cplx> buf(len_);
        for (int r = 0; r < rows; ++r) {
            bool any = false;
            for (int i = 0; i < nb; ++i) any = any || f.at(r, i) != cplx{};
            if (!any) continue;
            std::fill(buf.begin(), buf.end(), cplx{});
            const double w = q.row_weight(r);
            for (int i = 0; i < nb; ++i) buf[i] = f.at(r, i) * w;
            fh[r] = fft(buf);
        }
        GroupField out(q);
        std::vector<cplx> acc(len_), h(len_), hs(len_), res(len_);
        for (int dst = 0; dst < rows; ++dst) {
            std::fill(acc.begin(), acc.end(), cplx{});
            bool any = false;
            for (int src = 0; src < rows; ++src) {
                if (fh[src].empty()) continue;
                const std::vector<cplx>* spec = nullptr;
                if (cache_) {
                    spec = &spectra_[pair_index(src, dst)];
                    if (spec->empty()) continue;
                } else {
                    if (!pair_kernel(src, dst, h)) continue;
                    fft(h, hs);
                    spec = &hs;
                }
                const auto& s = *spec;
                const auto& a = fh[src];
                for (int k = 0; k < len_; ++k) acc[k] += a[k] * s[k];
                any = true;
            }
            if (!any) continue;
            ifft(acc, res);
            const double inv = 1.0 / len_;
            for (int i = 0; i < nb; ++i) out.at(dst, i) = res[i] * inv;
        }
        double l1 = 0;
        for (std::size_t i = 0; i < f.size(); ++i) l1 += std::abs(f.values[i]) * q.weight(i);
        out.tail_bound = l1 * edge_;
        out.coverage = std::min(f.coverage, g_.coverage);
        return out;
    }

private:
    std::size_t pair_index(int src, int dst) const { return static_cast<std::size_t>(dst) * g_.quad.rows() + src; }

    // h[m mod len] = G((m db) / a', a / a') for |m| < n_b. Returns false when
    // the pair contributes nothing.
    bool pair_kernel(int src, int dst, std::vector<cplx>& h) const {
        const auto& q = g_.quad;
        const double a_src = q.row_scale(src), a_dst = q.row_scale(dst);
        const auto branch = q.branch_of(a_dst / a_src);
        if (!branch) return false;
        const int k_src = src % q.n_scales(), k_dst = dst % q.n_scales();
        const double target_u = (q.u_at(k_dst) - q.u_at(k_src));
        const auto su = detail::linear_stencil((target_u - q.u_lo()) / q.du(), q.n_scales());
        if (!su.inside) return false;
        const int r0 = *branch * q.n_scales() + su.i0;
        const bool use1 = su.t != 0.0;
        if (!row_nonzero_[r0] && !(use1 && row_nonzero_[r0 + 1])) return false;
        std::fill(h.begin(), h.end(), cplx{});
        const int nb = q.n_b();
        const double step = 1.0 / a_src;             // index advance per unit m
        const double base = -q.b_lo() / q.db();      // index of beta = 0
        for (int m = -(nb - 1); m <= nb - 1; ++m) {
            const auto sb = detail::linear_stencil(base + m * step, nb);
            if (!sb.inside) continue;
            auto row = [&](int r) { return (1.0 - sb.t) * g_.at(r, sb.i0) + (sb.t != 0.0 ? sb.t * g_.at(r, sb.i0 + 1) : cplx{}); };
            cplx v = (1.0 - su.t) * row(r0);
            if (use1) v += su.t * row(r0 + 1);
            h[m >= 0 ? m : len_ + m] = v;
        }
        return true;
    }

    GroupField g_;
    bool cache_ = false;
    int len_ = 0;
    double edge_ = 0;
    std::vector<bool> row_nonzero_;
    std::vector<std::vector<cplx>> spectra_;
};

/// (F * G)(x) = int F(y) G(y^{-1} x) dy on the chart, with G read by chart
/// interpolation and taken as zero off the chart. `tail_bound` holds
/// ||F||_{L^1} times the largest |G| on the chart boundary.
inline GroupField convolve(const GroupField& f, const GroupField& g) {
    if (!f.quad.same_chart(g.quad)) throw std::invalid_argument("convolve: quadrature mismatch");
    return ConvolutionPlan(g).apply(f);
}

// ---------------------------------------------------------------------------
// Time-frequency plane convolution
// ---------------------------------------------------------------------------

namespace detail {
struct AxisOffset {
    int whole = 0;
    double frac = 0.0;
};
// Index offset -origin/step split into integer and fractional parts.
inline AxisOffset axis_offset(const UniformGrid& g) {
    const double o = -g.origin / g.step;
    AxisOffset a;
    a.whole = static_cast<int>(std::floor(o + 1e-9));
    a.frac = o - a.whole;
    if (std::abs(a.frac) < 1e-9) a.frac = 0.0;
    return a;
}
}  // namespace detail

/// (F * G)(z) = sum_{z'} F(z') G(z - z') dx dw with bilinear reading of G.
inline TFField tf_convolve(const TFField& f, const TFField& g) {
    if (!f.quad.same_chart(g.quad)) throw std::invalid_argument("tf_convolve: grid mismatch");
    const auto& xg = f.quad.x();
    const auto& wg = f.quad.omega();
    const int nx = xg.count, nw = wg.count;
    int px = 1, pw = 1;
    while (px < 2 * nx) px *= 2;
    while (pw < 2 * nw) pw *= 2;
    std::vector<cplx> a(static_cast<std::size_t>(px) * pw), b(a.size());
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nw; ++j) {
            a[static_cast<std::size_t>(i) * pw + j] = f.at(i, j);
            b[static_cast<std::size_t>(i) * pw + j] = g.at(i, j);
        }
    auto fa = fft2(a, px, pw);
    const auto fb = fft2(b, px, pw);
    for (std::size_t k = 0; k < fa.size(); ++k) fa[k] *= fb[k];
    const auto c = ifft2(fa, px, pw);
    const double scale = xg.step * wg.step / (static_cast<double>(px) * pw);
    auto lin = [&](int m, int n) -> cplx {
        if (m < 0 || n < 0 || m > 2 * nx - 2 || n > 2 * nw - 2) return {};
        return c[static_cast<std::size_t>(m) * pw + n];
    };
    const auto ox = detail::axis_offset(xg), ow = detail::axis_offset(wg);
    TFField out(f.quad);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nw; ++j) {
            const int m = i + ox.whole, n = j + ow.whole;
            cplx v = (1 - ox.frac) * (1 - ow.frac) * lin(m, n);
            if (ow.frac != 0) v += (1 - ox.frac) * ow.frac * lin(m, n + 1);
            if (ox.frac != 0) v += ox.frac * (1 - ow.frac) * lin(m + 1, n);
            if (ox.frac != 0 && ow.frac != 0) v += ox.frac * ow.frac * lin(m + 1, n + 1);
            out.at(i, j) = v * scale;
        }
    return out;
}

inline TFField convolve(const TFField& f, const TFField& g) { return tf_convolve(f, g); }

// ---------------------------------------------------------------------------
// Neighbourhoods and oscillation
// ---------------------------------------------------------------------------

inline constexpr int kDefaultNeighborhoodDensity = 7;

/// A_{beta,alpha} = [-beta/2, beta/2] x [alpha^{-1/2}, alpha^{1/2}].
struct AffineNeighborhood {
    double beta = 1.0;
    double alpha = 2.0;
    int density = kDefaultNeighborhoodDensity;

    AffineNeighborhood() = default;
    AffineNeighborhood(double b, double a, int d = kDefaultNeighborhoodDensity) : beta(b), alpha(a), density(d) {
        if (!(beta > 0)) throw std::invalid_argument("neighbourhood: beta must be positive");
        if (!(alpha > 1)) throw std::invalid_argument("neighbourhood: alpha must exceed 1");
        if (density < 2) throw std::invalid_argument("neighbourhood: density must be >= 2");
    }

    bool contains(const AffinePoint& u, double tol = 1e-12) const {
        const double h = 0.5 * std::log(alpha);
        return u.a > 0 && std::abs(u.b) <= beta / 2 + tol && std::abs(std::log(u.a)) <= h + tol;
    }
    /// Haar mass beta (alpha^{1/2} - alpha^{-1/2}).
    double haar_mass() const { return beta * (std::sqrt(alpha) - 1.0 / std::sqrt(alpha)); }

    std::vector<AffinePoint> samples() const {
        std::vector<AffinePoint> out;
        const double h = 0.5 * std::log(alpha);
        for (int i = 0; i < density; ++i)
            for (int j = 0; j < density; ++j) {
                const double b = -beta / 2 + beta * i / (density - 1);
                const double u = -h + 2 * h * j / (density - 1);
                out.emplace_back(b, std::exp(u));
            }
        return out;
    }
};

/// [-beta_x/2, beta_x/2] x [-beta_omega/2, beta_omega/2].
struct TFNeighborhood {
    double beta_x = 1.0;
    double beta_omega = 1.0;
    int density = kDefaultNeighborhoodDensity;

    TFNeighborhood() = default;
    TFNeighborhood(double bx, double bw, int d = kDefaultNeighborhoodDensity) : beta_x(bx), beta_omega(bw), density(d) {
        if (!(beta_x > 0) || !(beta_omega > 0)) throw std::invalid_argument("neighbourhood: box sides must be positive");
        if (density < 2) throw std::invalid_argument("neighbourhood: density must be >= 2");
    }

    bool contains(const TFPoint& u, double tol = 1e-12) const {
        return std::abs(u.x) <= beta_x / 2 + tol && std::abs(u.omega) <= beta_omega / 2 + tol;
    }
    double haar_mass() const { return beta_x * beta_omega; }

    std::vector<TFPoint> samples() const {
        std::vector<TFPoint> out;
        for (int i = 0; i < density; ++i)
            for (int j = 0; j < density; ++j)
                out.push_back({-beta_x / 2 + beta_x * i / (density - 1), -beta_omega / 2 + beta_omega * j / (density - 1)});
        return out;
    }
};

using NeighborhoodSpec = std::variant<AffineNeighborhood, TFNeighborhood>;

/// osc_U(G)(x) = max_u |G(ux) - G(x)| over the U sample. Samples with ux off
/// the chart are skipped; reading them as zero would charge the chart edge
/// with |G| itself.
inline GroupField oscillation(const GroupField& g, const AffineNeighborhood& u) {
    GroupField out(g.quad);
    const auto offs = u.samples();
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const AffinePoint x = g.quad.node(idx);
        const cplx gx = g.values[idx];
        double mx = 0;
        for (const auto& o : offs)
            if (auto v = interpolate(g, affine_mul(o, x))) mx = std::max(mx, std::abs(*v - gx));
        out.values[idx] = mx;
    }
    return out;
}

inline TFField oscillation(const TFField& g, const TFNeighborhood& u) {
    TFField out(g.quad);
    const auto offs = u.samples();
    for (std::size_t idx = 0; idx < g.size(); ++idx) {
        const TFPoint x = g.quad.node(idx);
        const cplx gx = g.values[idx];
        double mx = 0;
        for (const auto& o : offs)
            if (auto v = interpolate(g, tf_mul(o, x))) mx = std::max(mx, std::abs(*v - gx));
        out.values[idx] = mx;
    }
    return out;
}

template <Field F>
F oscillation(const F& g, const NeighborhoodSpec& u) {
    return std::visit(
        [&](const auto& nb) -> F {
            using N = std::decay_t<decltype(nb)>;
            if constexpr (std::is_same_v<F, GroupField> && std::is_same_v<N, AffineNeighborhood>) return oscillation(g, nb);
            else if constexpr (std::is_same_v<F, TFField> && std::is_same_v<N, TFNeighborhood>) return oscillation(g, nb);
            else throw std::invalid_argument("oscillation: neighbourhood belongs to another group");
        },
        u);
}

// ---------------------------------------------------------------------------
// Young inequalities
// ---------------------------------------------------------------------------

inline constexpr double kYoungSlack = 0.05;

struct InequalityCheck {
    std::string name;
    double lhs = 0;
    double rhs = 0;
    bool pass = false;
};

struct YoungReport {
    std::vector<InequalityCheck> checks;
    double slack = kYoungSlack;
    bool pass = false;
};

/// Evaluates, for F in L^p_m and G in L^1_w (G doubling as H in L^q_{1/m}):
///   ||F * G||_{L^1_w}        <= ||F||_{L^1_w} ||G||_{L^1_w}
///   ||G * F||_{L^p_m}        <= ||G||_{L^1_w} ||F||_{L^p_m}
///   ||F * G^v||_{L^p_m}      <= ||F||_{L^p_m} ||G||_{L^1_w}
///   ||F * G^v||_{L^inf_{1/w}} <= ||F||_{L^p_m} ||G||_{L^q_{1/m}}
template <Field F>
YoungReport young_check(const F& f, const F& g, double p, const WeightSpec& m, const WeightSpec& w) {
    if (!is_p_control(w, m, p)) throw std::invalid_argument("young_check: " + w.describe() + " is not a p-control weight of " + m.describe());
    const double q = conjugate_exponent(p);
    const WeightSpec inv_m = inverse_weight(m), inv_w = inverse_weight(w);
    YoungReport rep;
    auto add = [&](std::string name, double lhs, double rhs) {
        rep.checks.push_back({std::move(name), lhs, rhs, lhs <= rhs * (1.0 + rep.slack)});
    };
    const F gv = involute(g, Involution::vee);
    const F fg = convolve(f, g);
    const F gf = convolve(g, f);
    const F fgv = convolve(f, gv);
    const double f_l1w = lpm_norm(f, 1, w), g_l1w = lpm_norm(g, 1, w), f_pm = lpm_norm(f, p, m);
    add("algebra", lpm_norm(fg, 1, w), f_l1w * g_l1w);
    add("left_module", lpm_norm(gf, p, m), g_l1w * f_pm);
    add("right_module", lpm_norm(fgv, p, m), f_pm * g_l1w);
    add("duality", lpm_norm(fgv, std::numeric_limits<double>::infinity(), inv_w), f_pm * lpm_norm(g, q, inv_m));
    rep.pass = std::all_of(rep.checks.begin(), rep.checks.end(), [](const auto& c) { return c.pass; });
    return rep;
}

}  // namespace coorbit
