#pragma once

// Weight families on the affine group and the time-frequency plane:
//   m_s(b,a)      = |a|^{-s}
//   w_rho(b,a)    = |a|^rho + |a|^{-rho}
//   v_{r,s}(x,w)  = (1+|x|)^r (1+|w|)^s
// with closed-form control-weight tests and randomized falsifiers for
// submultiplicativity and moderateness.

#include "coorbit/group_core.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>

namespace coorbit {

struct PowerScale {
    double s = 0.0;
};
struct SymmetricPower {
    double rho = 0.0;
};
struct PolyTF {
    double r = 0.0;
    double s = 0.0;
};
/// User-supplied weight evaluated on chart coordinates: (b, a) for the
/// affine group, (x, omega) for the time-frequency plane.
struct CustomWeight {
    GroupKind group = GroupKind::affine;
    std::function<double(double, double)> eval;
    std::string name = "custom";
};

class WeightSpec {
public:
    using Variant = std::variant<PowerScale, SymmetricPower, PolyTF, CustomWeight>;

    WeightSpec() : v_(PowerScale{0.0}) {}
    WeightSpec(PowerScale w) : v_(w) {}
    WeightSpec(SymmetricPower w) : v_(w) {
        if (w.rho < 0) throw std::invalid_argument("w_rho needs rho >= 0");
    }
    WeightSpec(PolyTF w) : v_(w) {
        if (w.r < 0 || w.s < 0) throw std::invalid_argument("v_{r,s} needs r, s >= 0");
    }
    WeightSpec(CustomWeight w) : v_(std::move(w)) {
        if (!std::get<CustomWeight>(v_).eval) throw std::invalid_argument("custom weight needs an evaluator");
    }

    static WeightSpec power_scale(double s) { return PowerScale{s}; }
    static WeightSpec symmetric_power(double rho) { return SymmetricPower{rho}; }
    static WeightSpec poly_tf(double r, double s) { return PolyTF{r, s}; }
    static WeightSpec unit_affine() { return PowerScale{0.0}; }
    static WeightSpec unit_tf() { return PolyTF{0.0, 0.0}; }

    const Variant& variant() const { return v_; }
    bool is_custom() const { return std::holds_alternative<CustomWeight>(v_); }

    GroupKind group() const {
        return std::visit(
            [](const auto& w) -> GroupKind {
                using T = std::decay_t<decltype(w)>;
                if constexpr (std::is_same_v<T, PolyTF>) return GroupKind::tf_plane;
                else if constexpr (std::is_same_v<T, CustomWeight>) return w.group;
                else return GroupKind::affine;
            },
            v_);
    }

    /// Evaluate on chart coordinates (b, a) or (x, omega) without a group check.
    double operator()(double c1, double c2) const {
        return std::visit(
            [&](const auto& w) -> double {
                using T = std::decay_t<decltype(w)>;
                if constexpr (std::is_same_v<T, PowerScale>) {
                    return std::pow(std::abs(c2), -w.s);
                } else if constexpr (std::is_same_v<T, SymmetricPower>) {
                    const double a = std::abs(c2);
                    return std::pow(a, w.rho) + std::pow(a, -w.rho);
                } else if constexpr (std::is_same_v<T, PolyTF>) {
                    return std::pow(1.0 + std::abs(c1), w.r) * std::pow(1.0 + std::abs(c2), w.s);
                } else {
                    return w.eval(c1, c2);
                }
            },
            v_);
    }

    double operator()(const AffinePoint& p) const { return (*this)(p.b, p.a); }
    double operator()(const TFPoint& p) const { return (*this)(p.x, p.omega); }

    std::string describe() const {
        return std::visit(
            [](const auto& w) -> std::string {
                using T = std::decay_t<decltype(w)>;
                if constexpr (std::is_same_v<T, PowerScale>) return "m_" + std::to_string(w.s);
                else if constexpr (std::is_same_v<T, SymmetricPower>) return "w_" + std::to_string(w.rho);
                else if constexpr (std::is_same_v<T, PolyTF>)
                    return "v_{" + std::to_string(w.r) + "," + std::to_string(w.s) + "}";
                else return w.name;
            },
            v_);
    }

private:
    Variant v_;
};

inline double eval_weight(const WeightSpec& w, const AffinePoint& p) {
    if (w.group() != GroupKind::affine) throw std::invalid_argument("eval_weight: weight is not defined on the affine group");
    return w(p);
}

inline double eval_weight(const WeightSpec& w, const TFPoint& p) {
    if (w.group() != GroupKind::tf_plane) throw std::invalid_argument("eval_weight: weight is not defined on the time-frequency plane");
    return w(p);
}

/// v_{r,s} ignores the phase; |x| and |omega| are Euclidean norms in R^d.
inline double eval_weight(const WeightSpec& w, const HeisenbergPoint& p) {
    if (w.group() != GroupKind::tf_plane) throw std::invalid_argument("eval_weight: weight is not defined on the Heisenberg group");
    double nx = 0, nw = 0;
    for (std::size_t i = 0; i < p.dim(); ++i) {
        nx += p.x[i] * p.x[i];
        nw += p.omega[i] * p.omega[i];
    }
    return w(std::sqrt(nx), std::sqrt(nw));
}

/// Conjugate exponent with 1/inf = 0.
inline double conjugate_exponent(double p) {
    if (p < 1) throw std::invalid_argument("exponent must be >= 1");
    if (std::isinf(p)) return 1.0;
    if (p == 1.0) return std::numeric_limits<double>::infinity();
    return p / (p - 1.0);
}

inline double reciprocal(double p) { return std::isinf(p) ? 0.0 : 1.0 / p; }

/// Closed-form p-control-weight test for the known families.
inline bool is_p_control(const WeightSpec& w, const WeightSpec& m, double p) {
    if (w.is_custom() || m.is_custom()) throw std::invalid_argument("is_p_control: no closed form for custom weights");
    if (p < 1) throw std::invalid_argument("is_p_control: p must be in [1, inf]");
    const auto& wv = w.variant();
    const auto& mv = m.variant();
    if (auto* ws = std::get_if<SymmetricPower>(&wv)) {
        if (auto* ms = std::get_if<PowerScale>(&mv)) {
            const double q = conjugate_exponent(p);
            return ws->rho >= std::abs(ms->s) + std::max(reciprocal(p), reciprocal(q));
        }
    }
    if (auto* wt = std::get_if<PolyTF>(&wv)) {
        if (auto* mt = std::get_if<PolyTF>(&mv)) return wt->r >= mt->r && wt->s >= mt->s;
    }
    throw std::invalid_argument("is_p_control: unsupported weight pair " + w.describe() + " / " + m.describe());
}

struct ProbeReport {
    double max_ratio = 0.0;
    bool pass = false;
    int samples = 0;
};

inline constexpr double kProbeSlack = 1e-12;

namespace detail {
// Chart box: b in [-10,10], u in [-3,3] with random sign (affine);
// x, omega in [-10,10] (time-frequency plane).
struct ProbeSampler {
    GroupKind group;
    std::mt19937_64 rng;
    std::uniform_real_distribution<double> coord{-10.0, 10.0};
    std::uniform_real_distribution<double> logscale{-3.0, 3.0};
    std::bernoulli_distribution sign{0.5};

    ProbeSampler(GroupKind g, std::uint64_t seed) : group(g), rng(seed) {}

    template <class Fn>
    void pair(Fn&& fn) {
        if (group == GroupKind::affine) {
            AffinePoint x{coord(rng), (sign(rng) ? 1.0 : -1.0) * std::exp(logscale(rng))};
            AffinePoint y{coord(rng), (sign(rng) ? 1.0 : -1.0) * std::exp(logscale(rng))};
            fn(x, y, affine_mul(x, y));
        } else {
            TFPoint x{coord(rng), coord(rng)};
            TFPoint y{coord(rng), coord(rng)};
            fn(x, y, tf_mul(x, y));
        }
    }
};
}  // namespace detail

/// Falsifier for w(xy) <= w(x) w(y): reports the largest observed ratio.
inline ProbeReport submultiplicativity_probe(const WeightSpec& w, int samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("probe: samples must be >= 1");
    detail::ProbeSampler sampler(w.group(), seed);
    ProbeReport rep;
    rep.samples = samples;
    for (int n = 0; n < samples; ++n) {
        sampler.pair([&](const auto& x, const auto& y, const auto& xy) {
            rep.max_ratio = std::max(rep.max_ratio, w(xy) / (w(x) * w(y)));
        });
    }
    rep.pass = rep.max_ratio <= 1.0 + kProbeSlack;
    return rep;
}

/// Falsifier for m(xy) <= w(x) m(y) and m(xy) <= m(x) w(y).
inline ProbeReport moderateness_probe(const WeightSpec& m, const WeightSpec& w, int samples, std::uint64_t seed) {
    if (samples < 1) throw std::invalid_argument("probe: samples must be >= 1");
    if (m.group() != w.group()) throw std::invalid_argument("moderateness_probe: weights live on different groups");
    detail::ProbeSampler sampler(m.group(), seed);
    ProbeReport rep;
    rep.samples = samples;
    for (int n = 0; n < samples; ++n) {
        sampler.pair([&](const auto& x, const auto& y, const auto& xy) {
            const double mxy = m(xy);
            rep.max_ratio = std::max({rep.max_ratio, mxy / (w(x) * m(y)), mxy / (m(x) * w(y))});
        });
    }
    rep.pass = rep.max_ratio <= 1.0 + kProbeSlack;
    return rep;
}

}  // namespace coorbit
