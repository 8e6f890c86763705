#pragma once

// Frame certificates, atom sufficiency tests, empirical frame bounds,
// Neumann reconstruction from lattice samples, lattice design, the Gabor
// frame operator and the Besov exponent map.

#include "coorbit/discretization.hpp"
#include "coorbit/group_field.hpp"
#include "coorbit/signal.hpp"
#include "coorbit/voice.hpp"
#include "coorbit/weights.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace coorbit {

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

using ChartSpec = std::variant<AffineQuadrature, TFQuadrature>;

inline constexpr const char* kTruncationCaveat =
    "norms are computed on a truncated chart; mass of the kernel and its oscillation outside the chart is not included";

struct FrameCertificate {
    double kernel_l1w = 0;
    double osc_l1w = 0;
    double q = 0;
    NeighborhoodSpec u;
    WeightSpec w;
    ChartSpec chart;
    bool pass = false;
    std::string caveat = kTruncationCaveat;
};

template <Field F, class Nbhd>
FrameCertificate atom_certificate(const F& kernel, const WeightSpec& w, const Nbhd& u) {
    FrameCertificate c;
    c.kernel_l1w = lpm_norm(kernel, 1, w);
    c.osc_l1w = lpm_norm(oscillation(kernel, u), 1, w);
    c.q = c.kernel_l1w * c.osc_l1w;
    c.u = u;
    c.w = w;
    c.chart = kernel.quad;
    c.pass = c.q < 1;
    return c;
}

inline constexpr double kNormalizationTolerance = 1e-6;

/// Builds K = W_psi psi on `quad` and certifies it for U.
inline FrameCertificate atom_certificate(const SampledSignal& psi, const AffineQuadrature& quad, const WeightSpec& w,
                                         const AffineNeighborhood& u) {
    const double c = require_admissible(psi);
    if (std::abs(c - 1) > kNormalizationTolerance) throw std::invalid_argument("atom_certificate: wavelet must be normalized");
    return atom_certificate(reproducing_kernel(psi, quad), w, u);
}

// ---------------------------------------------------------------------------
// Atom sufficiency
// ---------------------------------------------------------------------------

struct WaveletSufficiencyReport {
    int vanishing_moments = 0;        // L
    double rho = 0;
    double threshold = 0;             // L - 1/2
    double next_abs_moment = 0;       // int |t|^{L+1} |psi|
    std::vector<double> derivative_l1;  // windowed ||psi^{(k)}||_1, k = 1..L
    bool finite = false;
    bool pass = false;
};

inline double l1_norm(const SampledSignal& f) {
    double s = 0;
    for (const auto& v : f.values) s += std::abs(v);
    return s * f.dt;
}

/// Passes iff rho < L - 1/2 with all measured quantities finite.
inline WaveletSufficiencyReport wavelet_atom_sufficient(const SampledSignal& psi, double rho, double tol) {
    if (rho < 0) throw std::invalid_argument("wavelet_atom_sufficient: rho must be >= 0");
    WaveletSufficiencyReport rep;
    rep.rho = rho;
    rep.vanishing_moments = vanishing_moment_count(psi, tol);
    rep.threshold = rep.vanishing_moments - 0.5;
    const int L = rep.vanishing_moments;
    rep.next_abs_moment = moments(psi, L + 1).abs_moments[L + 1];
    rep.finite = std::isfinite(rep.next_abs_moment);
    for (int k = 1; k <= L; ++k) {
        rep.derivative_l1.push_back(l1_norm(derivative(psi, k)));
        rep.finite = rep.finite && std::isfinite(rep.derivative_l1.back());
    }
    rep.pass = rep.finite && rho < rep.threshold;
    return rep;
}

struct WindowSufficiencyReport {
    double alpha = 0, beta = 0;        // exponents of the time and frequency weights
    double time_norm = 0;              // ||g||_{L^1_{v_alpha}}
    double freq_norm = 0;              // ||g^||_{L^1_{v_beta}}
    double time_tail = 0;              // share of the norm from the outer 10% of the grid
    double freq_tail = 0;
    bool pass = false;
};

inline constexpr double kWindowMargin = 1.0;
inline constexpr double kTailShare = 0.01;

namespace detail {
// Weighted L1 norm with (1+|t|)^e and the share contributed by the outer
// 5% of samples on each side.
template <class Coord>
std::pair<double, double> weighted_l1_tail(const std::vector<cplx>& v, Coord coord, double step, double e) {
    const int n = static_cast<int>(v.size());
    const int band = std::max(1, n / 20);
    double total = 0, tail = 0;
    for (int i = 0; i < n; ++i) {
        const double c = std::abs(v[i]) * std::pow(1 + std::abs(coord(i)), e) * step;
        total += c;
        if (i < band || i >= n - band) tail += c;
    }
    return {total, total > 0 ? tail / total : 0.0};
}
}  // namespace detail

/// g in the window class for v_{r,s} when its time and frequency decay at
/// exponents 2r + 1 + margin and 2s + 1 + margin is resolved on the grid.
inline WindowSufficiencyReport stft_window_sufficient(const SampledSignal& g, double r, double s) {
    if (r < 0 || s < 0) throw std::invalid_argument("stft_window_sufficient: r, s must be >= 0");
    WindowSufficiencyReport rep;
    rep.alpha = 2 * r + 1 + kWindowMargin;
    rep.beta = 2 * s + 1 + kWindowMargin;
    std::tie(rep.time_norm, rep.time_tail) = detail::weighted_l1_tail(g.values, [&](int i) { return g.t(i); }, g.dt, rep.alpha);
    const Spectrum gh = fourier(g);
    std::tie(rep.freq_norm, rep.freq_tail) = detail::weighted_l1_tail(gh.values, [&](int k) { return gh.omega(k); }, gh.domega, rep.beta);
    rep.pass = rep.time_norm > 0 && rep.freq_norm > 0 && std::isfinite(rep.time_norm) && std::isfinite(rep.freq_norm) &&
               rep.time_tail < kTailShare && rep.freq_tail < kTailShare;
    return rep;
}

// ---------------------------------------------------------------------------
// Empirical frame bounds
// ---------------------------------------------------------------------------

struct FrameBoundsReport {
    double a_hat = 0;
    double b_hat = 0;
    std::vector<double> ratios;
    int redraws = 0;
};

inline constexpr int kMaxRedraws = 10;

namespace detail {
template <class Transform, class Lattice>
FrameBoundsReport empirical_bounds(const SignalGrid& grid, Transform&& transform, const Lattice& lat, double p,
                                   const WeightSpec& m, int ensemble, std::uint64_t seed, const WavePacketBand& band) {
    if (ensemble < 1) throw std::invalid_argument("frame_bounds_empirical: ensemble must be >= 1");
    std::mt19937_64 rng(seed);
    FrameBoundsReport rep;
    for (int e = 0; e < ensemble; ++e) {
        for (int attempt = 0;; ++attempt) {
            const auto f = random_wave_packets(grid, rng, band);
            const auto field = transform(f);
            const double fn = lpm_norm(field, p, m);
            if (fn > 0 && std::isfinite(fn)) {
                rep.ratios.push_back(seq_lpm_norm(sample_field(field, lat), p, m) / fn);
                break;
            }
            if (attempt >= kMaxRedraws) throw CoorbitError("frame_bounds_empirical: could not draw a signal with nonzero transform");
            ++rep.redraws;
        }
    }
    rep.a_hat = *std::min_element(rep.ratios.begin(), rep.ratios.end());
    rep.b_hat = *std::max_element(rep.ratios.begin(), rep.ratios.end());
    return rep;
}
}  // namespace detail

/// Wavelet route: ratios ||(W f(x_i))||_{l^p_m~} / ||W f||_{L^p_m} over random
/// wave packets. The lattice must be U-dense on its claimable region.
inline FrameBoundsReport frame_bounds_empirical(const SampledSignal& psi, const AffineQuadrature& quad,
                                                const AffineLattice& lat, const AffineNeighborhood& u, double p,
                                                const WeightSpec& m, int ensemble, std::uint64_t seed,
                                                const WavePacketBand& band = {}) {
    if (!is_U_dense(lat, u, density_probe(lat)).dense) throw CoorbitError("frame_bounds_empirical: lattice is not U-dense");
    return detail::empirical_bounds(psi.grid(), [&](const SampledSignal& f) { return cwt(f, psi, quad); }, lat, p, m,
                                    ensemble, seed, band);
}

/// Gabor route on the given (x, omega) grid.
inline FrameBoundsReport frame_bounds_empirical(const SampledSignal& g, const UniformGrid& x_grid,
                                                const UniformGrid& w_grid, const TFLattice& lat,
                                                const TFNeighborhood& u, double p, const WeightSpec& m, int ensemble,
                                                std::uint64_t seed, const WavePacketBand& band = {}) {
    if (!is_U_dense(lat, u, density_probe(lat)).dense) throw CoorbitError("frame_bounds_empirical: lattice is not U-dense");
    return detail::empirical_bounds(g.grid(), [&](const SampledSignal& f) { return stft(f, g, x_grid, w_grid); }, lat, p,
                                    m, ensemble, seed, band);
}

// ---------------------------------------------------------------------------
// Neumann reconstruction
// ---------------------------------------------------------------------------

struct ReconstructionReport {
    int iterations = 0;
    std::vector<double> residual_history;  // ||F_{n+1} - F_n|| / ||Y||
    std::optional<double> final_relative_error;
    double asymptotic_ratio = 0;           // mean of the last three residual ratios
    bool converged = false;
};

class DivergenceError : public CoorbitError {
public:
    DivergenceError(const std::string& what, ReconstructionReport r) : CoorbitError(what), report(std::move(r)) {}
    ReconstructionReport report;
};

struct NeumannOptions {
    double tol = 1e-3;
    int max_iter = 100;
    bool override_certificate = false;
    const GroupField* truth = nullptr;
};

inline constexpr int kDivergenceRun = 3;

namespace detail {
inline double asymptotic_ratio(const std::vector<double>& r) {
    std::vector<double> ratios;
    for (std::size_t i = 1; i < r.size(); ++i)
        if (r[i - 1] > 0) ratios.push_back(r[i] / r[i - 1]);
    if (ratios.empty()) return 0;
    const std::size_t n = std::min<std::size_t>(3, ratios.size());
    return std::accumulate(ratios.end() - static_cast<std::ptrdiff_t>(n), ratios.end(), 0.0) / static_cast<double>(n);
}
}  // namespace detail

/// Iterates F_{n+1} = Y + F_n - T F_n with T F = (sum F(x_i) phi_i) * K and
/// Y = (sum c_i phi_i) * K, starting from F_0 = Y.
inline std::pair<GroupField, ReconstructionReport> neumann_reconstruct(const AffineSequence& samples,
                                                                       const AffineBUPU& bupu,
                                                                       const ConvolutionPlan& kernel,
                                                                       const FrameCertificate& cert,
                                                                       const NeumannOptions& opt = {}) {
    if (!cert.pass && !opt.override_certificate)
        throw CoorbitError("neumann_reconstruct: certificate does not pass (q = " + std::to_string(cert.q) + ")");
    if (opt.max_iter < 1) throw std::invalid_argument("neumann_reconstruct: max_iter must be >= 1");
    const auto& quad = kernel.kernel().quad;
    const SynthesisTable<AffineQuadrature> table(bupu, quad);
    if (samples.size() != bupu.lattice.size()) throw std::invalid_argument("neumann_reconstruct: samples do not match lattice");
    auto apply_t = [&](const GroupField& f) { return kernel.apply(table.synthesize(table.sample(f, bupu.lattice))); };

    const GroupField y = kernel.apply(table.synthesize(samples));
    const double ny = l2_norm(y);
    ReconstructionReport rep;
    GroupField f = y;
    int rising = 0;
    for (int n = 0; n < opt.max_iter; ++n) {
        GroupField next = field_sum(y, field_difference(f, apply_t(f)));
        const double step = l2_norm(field_difference(next, f));
        const double rel = ny > 0 ? step / ny : step;
        f = std::move(next);
        rep.iterations = n + 1;
        if (!rep.residual_history.empty() && rel > rep.residual_history.back()) ++rising;
        else rising = 0;
        rep.residual_history.push_back(rel);
        if (rel <= opt.tol || step == 0) {
            rep.converged = true;
            break;
        }
        if (rising >= kDivergenceRun) {
            rep.asymptotic_ratio = detail::asymptotic_ratio(rep.residual_history);
            throw DivergenceError("neumann_reconstruct: residual grew for " + std::to_string(kDivergenceRun) + " consecutive steps",
                                  rep);
        }
    }
    rep.asymptotic_ratio = detail::asymptotic_ratio(rep.residual_history);
    if (opt.truth) rep.final_relative_error = l2_norm(field_difference(f, *opt.truth)) / l2_norm(*opt.truth);
    return {std::move(f), rep};
}

// ---------------------------------------------------------------------------
// Lattice design
// ---------------------------------------------------------------------------

struct DesignSchedule {
    double alpha0 = 2.0;
    double beta0 = 1.0;
    double gamma = 0.7;
    int cap = 32;
};

struct DesignStep {
    double alpha = 0, beta = 0, q = 0, osc_l1w = 0;
};

struct DesignResult {
    double alpha = 0;
    double beta = 0;
    AffineLattice lattice;
    FrameCertificate certificate;
    std::vector<DesignStep> history;
};

class DesignError : public CoorbitError {
public:
    DesignError(const std::string& what, double q, std::vector<DesignStep> h)
        : CoorbitError(what), best_q(q), history(std::move(h)) {}
    double best_q;
    std::vector<DesignStep> history;
};

inline constexpr double kMomentTolerance = 1e-6;

/// Shrinks U = A_{beta_n, alpha_n}, (alpha_n, beta_n) = (1 + (alpha0 - 1) gamma^n,
/// beta0 gamma^n), n = 0, 1, ..., until the certificate passes.
inline DesignResult design_lattice(const GroupField& kernel, const WeightSpec& w, const DesignSchedule& sched = {}) {
    if (!(sched.alpha0 > 1) || !(sched.beta0 > 0) || !(sched.gamma > 0 && sched.gamma < 1))
        throw std::invalid_argument("design_lattice: need alpha0 > 1, beta0 > 0, 0 < gamma < 1");
    std::vector<DesignStep> hist;
    double best = std::numeric_limits<double>::infinity();
    for (int n = 0; n < sched.cap; ++n) {
        const double g = std::pow(sched.gamma, n);
        const double alpha = 1 + (sched.alpha0 - 1) * g, beta = sched.beta0 * g;
        const auto cert = atom_certificate(kernel, w, AffineNeighborhood(beta, alpha));
        hist.push_back({alpha, beta, cert.q, cert.osc_l1w});
        best = std::min(best, cert.q);
        if (cert.pass) return {alpha, beta, AffineLattice::covering(alpha, beta, kernel.quad), cert, hist};
    }
    throw DesignError("design_lattice: no passing neighbourhood within " + std::to_string(sched.cap) + " steps (best q = " +
                          std::to_string(best) + ")",
                      best, hist);
}

inline DesignResult design_lattice(const SampledSignal& psi, const AffineQuadrature& quad, const WeightSpec& w,
                                   const DesignSchedule& sched = {}) {
    if (auto* sp = std::get_if<SymmetricPower>(&w.variant())) {
        const auto suff = wavelet_atom_sufficient(psi, sp->rho, kMomentTolerance);
        if (!suff.pass)
            throw CoorbitError("design_lattice: wavelet has " + std::to_string(suff.vanishing_moments) +
                               " vanishing moments, too few for the weight " + w.describe());
    }
    if (sched.cap < 1) throw DesignError("design_lattice: iteration cap is zero", std::numeric_limits<double>::infinity(), {});
    const double c = require_admissible(psi);
    if (std::abs(c - 1) > kNormalizationTolerance) throw std::invalid_argument("design_lattice: wavelet must be normalized");
    return design_lattice(reproducing_kernel(psi, quad), w, sched);
}

// ---------------------------------------------------------------------------
// Gabor frame operator
// ---------------------------------------------------------------------------

/// <f, M_w T_x g> on f's grid.
inline cplx gabor_coefficient(const SampledSignal& f, const SampledSignal& g, const TFPoint& z) {
    cplx acc{};
    for (int n = 0; n < f.size(); ++n)
        acc += f.values[n] * std::conj(sample_at(g, f.t(n) - z.x) * std::polar(1.0, kTwoPi * f.t(n) * z.omega));
    return acc * f.dt;
}

/// S f = sum_lambda <f, M_w T_x g> M_w T_x g over the lattice window.
inline SampledSignal gabor_frame_operator(const SampledSignal& f, const SampledSignal& g, const TFLattice& lat) {
    if (!(l2_norm(g) > 0)) throw std::invalid_argument("gabor_frame_operator: zero window");
    lat.validate();
    SampledSignal out(f.grid());
    std::vector<cplx> atom(f.size());
    for (std::size_t i = 0; i < lat.size(); ++i) {
        const TFPoint z = lat.point(lat.tag(i));
        cplx c{};
        for (int n = 0; n < f.size(); ++n) {
            atom[n] = sample_at(g, f.t(n) - z.x) * std::polar(1.0, kTwoPi * f.t(n) * z.omega);
            c += f.values[n] * std::conj(atom[n]);
        }
        c *= f.dt;
        if (c == cplx{}) continue;
        for (int n = 0; n < f.size(); ++n) out.values[n] += c * atom[n];
    }
    return out;
}

struct GaborInversionReport {
    int iterations = 0;
    std::vector<double> residual_history;  // ||h - S f_n|| / ||h||
    bool converged = false;
};

/// Solves S f = h with f_{n+1} = f_n + lambda (h - S f_n), f_0 = lambda h.
/// lambda = 2 / (A + B) for frame bounds A <= B.
inline std::pair<SampledSignal, GaborInversionReport> gabor_neumann_inverse(const SampledSignal& h, const SampledSignal& g,
                                                                            const TFLattice& lat, double lambda,
                                                                            double tol, int max_iter) {
    if (!(lambda > 0)) throw std::invalid_argument("gabor_neumann_inverse: relaxation must be positive");
    GaborInversionReport rep;
    const double nh = l2_norm(h);
    SampledSignal f = cplx{lambda} * h;
    if (nh == 0) {
        rep.converged = true;
        return {f, rep};
    }
    for (int n = 0; n < max_iter; ++n) {
        const SampledSignal r = h - gabor_frame_operator(f, g, lat);
        const double rel = l2_norm(r) / nh;
        rep.residual_history.push_back(rel);
        rep.iterations = n;
        if (rel <= tol) {
            rep.converged = true;
            break;
        }
        f = f + cplx{lambda} * r;
        rep.iterations = n + 1;
    }
    return {f, rep};
}

/// Rayleigh quotients <S f, f> / ||f||^2 over the given signals: (min, max).
inline std::pair<double, double> gabor_rayleigh_bounds(const std::vector<SampledSignal>& fs, const SampledSignal& g,
                                                       const TFLattice& lat) {
    double lo = std::numeric_limits<double>::infinity(), hi = 0;
    for (const auto& f : fs) {
        const double n2 = std::pow(l2_norm(f), 2);
        if (n2 == 0) continue;
        const double r = inner(gabor_frame_operator(f, g, lat), f).real() / n2;
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return {lo, hi};
}

// ---------------------------------------------------------------------------
// Besov exponent
// ---------------------------------------------------------------------------

struct BesovExponent {
    double sigma = 0;
    double p = 0;
    double q = 0;
};

/// sigma = s - 1/2 + 1/p with 1/inf = 0; the space has q = p.
inline BesovExponent besov_exponent(double p, double s) {
    if (!(p >= 1)) throw std::invalid_argument("besov_exponent: p must be in [1, inf]");
    return {s - 0.5 + reciprocal(p), p, p};
}

/// Exact rational arithmetic; den == 0 encodes infinity for p.
struct Rational {
    long num = 0;
    long den = 1;

    static Rational make(long n, long d) {
        if (d == 0) return {n == 0 ? 0 : 1, 0};
        if (d < 0) n = -n, d = -d;
        const long g = std::gcd(n < 0 ? -n : n, d);
        return {n / (g ? g : 1), d / (g ? g : 1)};
    }
    bool infinite() const { return den == 0; }
    friend Rational operator+(Rational a, Rational b) { return make(a.num * b.den + b.num * a.den, a.den * b.den); }
    friend Rational operator-(Rational a, Rational b) { return make(a.num * b.den - b.num * a.den, a.den * b.den); }
    friend bool operator==(const Rational&, const Rational&) = default;
};

struct RationalBesovExponent {
    Rational sigma;
    Rational p;
    Rational q;
};

inline RationalBesovExponent besov_exponent(Rational p, Rational s) {
    p = Rational::make(p.num, p.den);
    s = Rational::make(s.num, s.den);
    if (s.infinite()) throw std::invalid_argument("besov_exponent: s must be finite");
    if (!p.infinite() && p.num < p.den) throw std::invalid_argument("besov_exponent: p must be in [1, inf]");
    const Rational inv_p = p.infinite() ? Rational{0, 1} : Rational::make(p.den, p.num);
    return {s - Rational{1, 2} + inv_p, p, p};
}

}  // namespace coorbit
