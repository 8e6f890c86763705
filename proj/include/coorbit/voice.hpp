#pragma once

// Voice transforms: the continuous wavelet transform on the affine group and
// the short-time Fourier transform on the time-frequency plane, with
// admissibility, inversion, reproducing kernels and the wavelet
// Duflo-Moore multiplier.

#include "coorbit/group_core.hpp"
#include "coorbit/signal.hpp"

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace coorbit {

// ---------------------------------------------------------------------------
// Periodization diagnostics
// ---------------------------------------------------------------------------

/// Largest |f| over the outermost 1% of samples (at least one per side),
/// relative to max |f|.
inline double edge_ratio(const SampledSignal& f) {
    double peak = 0;
    for (const auto& v : f.values) peak = std::max(peak, std::abs(v));
    if (peak == 0) return 0;
    const int band = std::max(1, f.size() / 100);
    double edge = 0;
    for (int i = 0; i < band; ++i) {
        edge = std::max(edge, std::abs(f.values[i]));
        edge = std::max(edge, std::abs(f.values[f.size() - 1 - i]));
    }
    return edge / peak;
}

inline constexpr double kEdgeDecay = 1e-8;

struct TransformDiagnostics {
    double edge_ratio_signal = 0;
    double edge_ratio_window = 0;
    std::vector<std::string> warnings;
};

namespace detail {
inline void check_edges(const SampledSignal& f, const SampledSignal& g, TransformDiagnostics* diag) {
    if (!diag) return;
    diag->edge_ratio_signal = edge_ratio(f);
    diag->edge_ratio_window = edge_ratio(g);
    if (diag->edge_ratio_signal > kEdgeDecay)
        diag->warnings.push_back("signal does not decay at the grid edges; circular wrap-around may contaminate the transform");
    if (diag->edge_ratio_window > kEdgeDecay)
        diag->warnings.push_back("window does not decay at the grid edges; circular wrap-around may contaminate the transform");
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Admissibility and normalization
// ---------------------------------------------------------------------------

/// Relative DC level above which C_psi is treated as divergent.
inline constexpr double kDcTolerance = 1e-6;

struct Admissibility {
    bool admissible = false;
    double constant = 0.0;   // C_psi, valid when admissible
    double dc_ratio = 0.0;   // |psi^(0)| / max |psi^|
};

/// C_psi = (sum_{w != 0} |psi^(w)|^2 / |w| dw)^{1/2} over the spectrum grid.
inline Admissibility admissibility_constant(const SampledSignal& psi) {
    const Spectrum s = fourier(psi);
    Admissibility out;
    double peak = 0;
    for (const auto& v : s.values) peak = std::max(peak, std::abs(v));
    const int zero = s.size() / 2;
    out.dc_ratio = peak > 0 ? std::abs(s.values[zero]) / peak : 0.0;
    if (peak == 0 || out.dc_ratio > kDcTolerance) return out;
    double sum = 0;
    for (int k = 0; k < s.size(); ++k) {
        if (k == zero) continue;
        sum += std::norm(s.values[k]) / std::abs(s.omega(k));
    }
    out.constant = std::sqrt(sum * s.domega);
    out.admissible = true;
    return out;
}

inline double require_admissible(const SampledSignal& psi) {
    const auto adm = admissibility_constant(psi);
    if (!adm.admissible) throw CoorbitError("wavelet is not admissible (nonzero mean, dc ratio " + std::to_string(adm.dc_ratio) + ")");
    if (!(adm.constant > 0)) throw CoorbitError("wavelet is not admissible (zero admissibility constant)");
    return adm.constant;
}

/// psi / C_psi, so that the wavelet transform becomes an isometry.
inline SampledSignal normalize_admissible(const SampledSignal& psi) {
    const double c = require_admissible(psi);
    return cplx{1.0 / c} * psi;
}

/// D psi = F^{-1}[F psi / sqrt|w|]; the w = 0 bin is set to zero.
inline SampledSignal duflo_moore_wavelet(const SampledSignal& psi) {
    Spectrum s = fourier(psi);
    double peak = 0;
    for (const auto& v : s.values) peak = std::max(peak, std::abs(v));
    const int zero = s.size() / 2;
    if (peak > 0 && std::abs(s.values[zero]) > kDcTolerance * peak)
        throw CoorbitError("duflo_moore_wavelet: spectrum does not vanish at zero frequency");
    for (int k = 0; k < s.size(); ++k) s.values[k] = k == zero ? cplx{} : s.values[k] / std::sqrt(std::abs(s.omega(k)));
    return inverse_fourier(s);
}

// ---------------------------------------------------------------------------
// Continuous wavelet transform
// ---------------------------------------------------------------------------

namespace detail {
// Linear interpolation of a time-grid row at b-grid positions (zero outside).
inline void resample_row(const SampledSignal& row, const AffineQuadrature& q, std::span<cplx> out) {
    for (int i = 0; i < q.n_b(); ++i) out[i] = sample_at(row, q.b_at(i));
}
}  // namespace detail

/// W_psi f(b,a) = <f, pi(b,a) psi>, computed per scale as
/// |a|^{1/2} F^{-1}[f^ conj(psi^(a .))](b).
inline GroupField cwt(const SampledSignal& f, const SampledSignal& psi, const AffineQuadrature& quad,
                      TransformDiagnostics* diag = nullptr) {
    if (!same_grid(f, psi)) throw std::invalid_argument("cwt: signal and wavelet must share a grid");
    detail::check_edges(f, psi, diag);
    const Spectrum fh = fourier(f);
    const SpectrumInterpolator psih(psi);
    GroupField out(quad);
    Spectrum work = fh;
    for (int r = 0; r < quad.rows(); ++r) {
        const double a = quad.row_scale(r);
        for (int k = 0; k < fh.size(); ++k) work.values[k] = fh.values[k] * std::conj(psih(a * fh.omega(k)));
        SampledSignal row = inverse_fourier(work);
        row *= cplx{std::sqrt(std::abs(a))};
        detail::resample_row(row, quad, std::span<cplx>(out.values).subspan(static_cast<std::size_t>(r) * quad.n_b(), quad.n_b()));
    }
    return out;
}

/// f = C^{-2} sum_nodes W(b,a) pi(b,a) psi * weight, assembled per scale in
/// the Fourier domain. The result lives on psi's grid.
inline SampledSignal icwt(const GroupField& w, const SampledSignal& psi, std::optional<double> c_psi = std::nullopt) {
    const double c = c_psi ? *c_psi : require_admissible(psi);
    if (!(c > 0)) throw CoorbitError("icwt: admissibility constant must be positive");
    const auto& q = w.quad;
    const SignalGrid g = psi.grid();
    const SpectrumInterpolator psih(psi);
    Spectrum acc;
    acc.domega = g.domega();
    acc.omega0 = -(g.n / 2) * acc.domega;
    acc.t0 = g.t0;
    acc.values.assign(g.n, cplx{});
    SampledSignal rowsig(g);
    for (int r = 0; r < q.rows(); ++r) {
        const double a = q.row_scale(r);
        // Row as a function of b, resampled onto the signal's time grid.
        const SampledSignal brow(q.b_lo(), q.db(),
                                 std::vector<cplx>(w.values.begin() + static_cast<std::ptrdiff_t>(r) * q.n_b(),
                                                   w.values.begin() + static_cast<std::ptrdiff_t>(r + 1) * q.n_b()));
        for (int n = 0; n < g.n; ++n) rowsig.values[n] = sample_at(brow, g.t(n));
        const Spectrum rh = fourier(rowsig);
        const double scale = std::sqrt(std::abs(a)) * q.du() / std::abs(a) / (c * c);
        for (int k = 0; k < g.n; ++k) acc.values[k] += scale * rh.values[k] * psih(a * acc.omega(k));
    }
    return inverse_fourier(acc);
}

inline GroupField reproducing_kernel(const SampledSignal& psi, const AffineQuadrature& quad) {
    require_admissible(psi);
    return cwt(psi, psi, quad);
}

// ---------------------------------------------------------------------------
// Short-time Fourier transform
// ---------------------------------------------------------------------------

namespace detail {

// Maps a requested frequency grid onto bins of the natural DFT grid of `g`
// when every requested frequency is a natural bin; otherwise empty.
inline std::vector<int> natural_bins(const SignalGrid& g, const UniformGrid& w) {
    const double dw = g.domega();
    const double ratio = w.step / dw;
    const double start = (w.origin + (g.n / 2) * dw) / dw;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::abs(start - std::round(start)) > 1e-9) return {};
    std::vector<int> bins(w.count);
    const long r = std::lround(ratio), s = std::lround(start);
    for (int j = 0; j < w.count; ++j) {
        const long k = s + r * j;
        if (k < 0 || k >= g.n) return {};
        bins[j] = static_cast<int>(k);
    }
    return bins;
}

// sum_n p_n exp(-2 pi i t_n w_j) dt for all requested w_j.
inline void windowed_spectrum(const SampledSignal& p, const UniformGrid& w, const std::vector<int>& bins,
                              std::span<cplx> out) {
    if (!bins.empty()) {
        const Spectrum s = fourier(p);
        for (int j = 0; j < w.count; ++j) out[j] = s.values[bins[j]];
        return;
    }
    for (int j = 0; j < w.count; ++j) {
        cplx acc{};
        const double om = w.at(j);
        for (int n = 0; n < p.size(); ++n) acc += p.values[n] * std::polar(1.0, -kTwoPi * p.t(n) * om);
        out[j] = acc * p.dt;
    }
}

// sum_j V_j exp(2 pi i t_n w_j) dw on the grid of `g`.
inline SampledSignal windowed_synthesis(const SignalGrid& g, const UniformGrid& w, const std::vector<int>& bins,
                                        std::span<const cplx> v) {
    if (!bins.empty()) {
        Spectrum s;
        s.domega = g.domega();
        s.omega0 = -(g.n / 2) * s.domega;
        s.t0 = g.t0;
        s.values.assign(g.n, cplx{});
        for (int j = 0; j < w.count; ++j) s.values[bins[j]] += v[j];
        SampledSignal out = inverse_fourier(s);
        out *= cplx{w.step / s.domega};
        return out;
    }
    SampledSignal out(g);
    for (int n = 0; n < g.n; ++n) {
        cplx acc{};
        for (int j = 0; j < w.count; ++j) acc += v[j] * std::polar(1.0, kTwoPi * g.t(n) * w.at(j));
        out.values[n] = acc * w.step;
    }
    return out;
}

}  // namespace detail

/// V_g f(x, w) = <f, M_w T_x g> = sum_t f(t) conj(g(t - x)) exp(-2 pi i t w) dt.
inline TFField stft(const SampledSignal& f, const SampledSignal& g, const UniformGrid& x_grid, const UniformGrid& w_grid,
                    TransformDiagnostics* diag = nullptr) {
    if (std::abs(f.dt - g.dt) > 1e-12 * f.dt) throw std::invalid_argument("stft: window must share the signal's grid step");
    detail::check_edges(f, g, diag);
    TFField out(TFQuadrature(x_grid, w_grid));
    const auto bins = detail::natural_bins(f.grid(), w_grid);
    SampledSignal p(f.grid());
    for (int ix = 0; ix < x_grid.count; ++ix) {
        const double x = x_grid.at(ix);
        for (int n = 0; n < f.size(); ++n) p.values[n] = f.values[n] * std::conj(sample_at(g, f.t(n) - x));
        detail::windowed_spectrum(p, w_grid, bins, std::span<cplx>(out.values).subspan(out.quad.index(ix, 0), w_grid.count));
    }
    return out;
}

/// Adjoint synthesis f = ||g||^{-2} sum V(x,w) M_w T_x g dx dw, evaluated on
/// `grid` (defaults to the window's grid).
inline SampledSignal istft(const TFField& v, const SampledSignal& g, std::optional<SignalGrid> grid = std::nullopt) {
    const double gn = l2_norm(g);
    if (!(gn > 0)) throw std::invalid_argument("istft: zero window");
    const SignalGrid out_grid = grid ? *grid : g.grid();
    const auto& xg = v.quad.x();
    const auto& wg = v.quad.omega();
    const auto bins = detail::natural_bins(out_grid, wg);
    SampledSignal out(out_grid);
    for (int ix = 0; ix < xg.count; ++ix) {
        const double x = xg.at(ix);
        const auto s = detail::windowed_synthesis(out_grid, wg, bins,
                                                  std::span<const cplx>(v.values).subspan(v.quad.index(ix, 0), wg.count));
        for (int n = 0; n < out_grid.n; ++n) out.values[n] += s.values[n] * sample_at(g, out_grid.t(n) - x);
    }
    out *= cplx{xg.step / (gn * gn)};
    return out;
}

/// K = V_g g on the given time-frequency grid.
inline TFField tf_reproducing_kernel(const SampledSignal& g, const UniformGrid& x_grid, const UniformGrid& w_grid) {
    return stft(g, g, x_grid, w_grid);
}

/// <f, rho(x, w, tau) g> for the Schroedinger representation
/// rho(x, w, tau) = tau exp(-pi i x w) M_w T_x.
inline cplx schroedinger_coefficient(const SampledSignal& f, const SampledSignal& g, double x, double w, cplx tau) {
    cplx acc{};
    for (int n = 0; n < f.size(); ++n)
        acc += f.values[n] * std::conj(sample_at(g, f.t(n) - x)) * std::polar(1.0, -kTwoPi * f.t(n) * w);
    acc *= f.dt;
    return acc * std::conj(tau * std::polar(1.0, -std::numbers::pi * x * w));
}

}  // namespace coorbit
