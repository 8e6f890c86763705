#pragma once

// Uniformly sampled signals on the real line with the Fourier convention
//   f^(w) = int f(t) exp(-2 pi i t w) dt,
// elementary operators (translation, modulation, dilation), moments,
// antiderivatives and spectral derivatives.

#include "coorbit/fft.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace coorbit {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SignalGrid {
    double t0 = 0.0;
    double dt = 1.0;
    int n = 0;

    double t(int i) const { return t0 + dt * i; }
    double length() const { return dt * n; }
    /// Frequency step of the matching spectrum grid.
    double domega() const { return 1.0 / (dt * n); }
    double nyquist() const { return 0.5 / dt; }

    friend bool operator==(const SignalGrid&, const SignalGrid&) = default;
};

/// Samples f(t0 + n dt), n = 0..N-1; zero outside [t0, t0 + N dt).
struct SampledSignal {
    double t0 = 0.0;
    double dt = 1.0;
    std::vector<cplx> values;

    SampledSignal() = default;
    SampledSignal(double origin, double step, std::vector<cplx> v) : t0(origin), dt(step), values(std::move(v)) {
        if (!(dt > 0)) throw std::invalid_argument("SampledSignal: dt must be positive");
        if (values.size() < 2) throw std::invalid_argument("SampledSignal: need at least two samples");
    }
    explicit SampledSignal(const SignalGrid& g) : SampledSignal(g.t0, g.dt, std::vector<cplx>(g.n, cplx{})) {}

    int size() const { return static_cast<int>(values.size()); }
    double t(int i) const { return t0 + dt * i; }
    SignalGrid grid() const { return {t0, dt, size()}; }

    template <class Fn>
    static SampledSignal from_function(const SignalGrid& g, Fn&& fn) {
        SampledSignal s(g);
        for (int i = 0; i < g.n; ++i) s.values[i] = fn(g.t(i));
        return s;
    }

    SampledSignal& operator*=(cplx c) {
        for (auto& v : values) v *= c;
        return *this;
    }
    friend SampledSignal operator*(cplx c, SampledSignal s) { return s *= c; }
};

/// Spectrum samples at omega0 + k domega. `t0` records the time origin of
/// the signal it came from so the inverse lands on the same grid.
struct Spectrum {
    double omega0 = 0.0;
    double domega = 1.0;
    std::vector<cplx> values;
    double t0 = 0.0;

    int size() const { return static_cast<int>(values.size()); }
    double omega(int k) const { return omega0 + domega * k; }
};

inline bool same_grid(const SampledSignal& a, const SampledSignal& b, double tol = 1e-12) {
    return a.size() == b.size() && std::abs(a.dt - b.dt) <= tol * a.dt && std::abs(a.t0 - b.t0) <= tol * std::max(1.0, std::abs(a.t0));
}

// ---------------------------------------------------------------------------
// Norms and inner products (rectangle rule, consistent with DFT Plancherel)
// ---------------------------------------------------------------------------

inline double l2_norm(const SampledSignal& f) {
    double s = 0;
    for (const auto& v : f.values) s += std::norm(v);
    return std::sqrt(s * f.dt);
}

inline double l2_norm(const Spectrum& f) {
    double s = 0;
    for (const auto& v : f.values) s += std::norm(v);
    return std::sqrt(s * f.domega);
}

/// <f, g> = int f conj(g) dt on a shared grid.
inline cplx inner(const SampledSignal& f, const SampledSignal& g) {
    if (!same_grid(f, g)) throw std::invalid_argument("inner: grid mismatch");
    cplx s{};
    for (int i = 0; i < f.size(); ++i) s += f.values[i] * std::conj(g.values[i]);
    return s * f.dt;
}

inline SampledSignal operator+(SampledSignal a, const SampledSignal& b) {
    if (!same_grid(a, b)) throw std::invalid_argument("signal +: grid mismatch");
    for (int i = 0; i < a.size(); ++i) a.values[i] += b.values[i];
    return a;
}

inline SampledSignal operator-(SampledSignal a, const SampledSignal& b) {
    if (!same_grid(a, b)) throw std::invalid_argument("signal -: grid mismatch");
    for (int i = 0; i < a.size(); ++i) a.values[i] -= b.values[i];
    return a;
}

inline double relative_l2_error(const SampledSignal& approx, const SampledSignal& truth) {
    return l2_norm(approx - truth) / l2_norm(truth);
}

// ---------------------------------------------------------------------------
// Fourier transform
// ---------------------------------------------------------------------------

/// dt-scaled DFT with centred frequencies w_k = (k - floor(N/2)) / (N dt).
inline Spectrum fourier(const SampledSignal& f) {
    const int n = f.size();
    const int c = n / 2;
    Spectrum out;
    out.domega = 1.0 / (n * f.dt);
    out.omega0 = -c * out.domega;
    out.t0 = f.t0;
    std::vector<cplx> buf(n);
    for (int i = 0; i < n; ++i) buf[i] = f.values[i] * std::polar(1.0, kTwoPi * static_cast<double>(i) * c / n);
    out.values = fft(buf);
    for (int k = 0; k < n; ++k) out.values[k] *= f.dt * std::polar(1.0, -kTwoPi * f.t0 * out.omega(k));
    return out;
}

inline SampledSignal inverse_fourier(const Spectrum& s) {
    const int n = s.size();
    const int c = n / 2;
    const double dt = 1.0 / (n * s.domega);
    std::vector<cplx> buf(n);
    for (int k = 0; k < n; ++k) buf[k] = s.values[k] * std::polar(1.0, kTwoPi * s.t0 * s.omega(k));
    auto out = ifft(buf);
    for (int i = 0; i < n; ++i) out[i] *= s.domega * std::polar(1.0, -kTwoPi * static_cast<double>(i) * c / n);
    return SampledSignal(s.t0, dt, std::move(out));
}

/// Signal whose spectrum on the grid's natural frequency lattice is `hat(w)`.
template <class Fn>
SampledSignal signal_from_spectrum(const SignalGrid& g, Fn&& hat) {
    Spectrum s;
    s.domega = g.domega();
    s.omega0 = -(g.n / 2) * s.domega;
    s.t0 = g.t0;
    s.values.resize(g.n);
    for (int k = 0; k < g.n; ++k) s.values[k] = hat(s.omega(k));
    return inverse_fourier(s);
}

/// Evaluates the spectrum of a sampled signal at arbitrary frequencies by
/// linear interpolation on a zero-padded (oversampled) DFT. The phase of the
/// signal's energy centre is factored out before interpolating so that
/// off-centre signals do not alias the interpolant. Frequencies beyond the
/// Nyquist band evaluate to zero.
class SpectrumInterpolator {
public:
    explicit SpectrumInterpolator(const SampledSignal& f, int oversample = 16) : nyquist_(0.5 / f.dt) {
        const int n = f.size();
        double e = 0, m = 0;
        for (int i = 0; i < n; ++i) {
            e += std::norm(f.values[i]);
            m += std::norm(f.values[i]) * f.t(i);
        }
        centre_ = e > 0 ? m / e : 0.0;
        const int big = n * std::max(1, oversample);
        SampledSignal padded(f.t0, f.dt, std::vector<cplx>(big, cplx{}));
        std::copy(f.values.begin(), f.values.end(), padded.values.begin());
        spec_ = fourier(padded);
        for (int k = 0; k < spec_.size(); ++k) spec_.values[k] *= std::polar(1.0, kTwoPi * centre_ * spec_.omega(k));
    }

    cplx operator()(double w) const {
        if (std::abs(w) > nyquist_) return {};
        const double frac = (w - spec_.omega0) / spec_.domega;
        int k = static_cast<int>(std::floor(frac));
        if (k < 0 || k >= spec_.size()) return {};
        const double t = frac - k;
        const cplx lo = spec_.values[k];
        const cplx hi = k + 1 < spec_.size() ? spec_.values[k + 1] : cplx{};
        return ((1.0 - t) * lo + t * hi) * std::polar(1.0, -kTwoPi * centre_ * w);
    }

private:
    Spectrum spec_;
    double centre_ = 0.0;
    double nyquist_ = 0.0;
};

// ---------------------------------------------------------------------------
// Elementary operators
// ---------------------------------------------------------------------------

/// Piecewise-linear reading of the samples with zero extension.
inline cplx sample_at(const SampledSignal& f, double t) {
    const double s = (t - f.t0) / f.dt;
    const double fl = std::floor(s);
    if (fl < -1.0 || fl > f.size() - 1) return {};
    const int i = static_cast<int>(fl);
    double w = s - fl;
    if (w < 1e-12) w = 0.0;
    if (w > 1.0 - 1e-12) {
        w = 0.0;
        const int j = i + 1;
        return (j >= 0 && j < f.size()) ? f.values[j] : cplx{};
    }
    const cplx lo = (i >= 0 && i < f.size()) ? f.values[i] : cplx{};
    const cplx hi = (i + 1 >= 0 && i + 1 < f.size()) ? f.values[i + 1] : cplx{};
    return (1.0 - w) * lo + w * hi;
}

/// Resample onto another grid with piecewise-linear interpolation.
inline SampledSignal resample(const SampledSignal& f, const SignalGrid& g) {
    return SampledSignal::from_function(g, [&](double t) { return sample_at(f, t); });
}

/// T_x f(t) = f(t - x).
inline SampledSignal translate(const SampledSignal& f, double x) {
    SampledSignal out(f.grid());
    for (int i = 0; i < f.size(); ++i) out.values[i] = sample_at(f, f.t(i) - x);
    return out;
}

/// M_w f(t) = exp(2 pi i t w) f(t).
inline SampledSignal modulate(const SampledSignal& f, double w) {
    SampledSignal out = f;
    for (int i = 0; i < f.size(); ++i) out.values[i] *= std::polar(1.0, kTwoPi * f.t(i) * w);
    return out;
}

/// D_a f(t) = |a|^{-1/2} f(t / a).
inline SampledSignal dilate(const SampledSignal& f, double a) {
    if (a == 0.0) throw std::invalid_argument("dilate: scale must be nonzero");
    SampledSignal out(f.grid());
    const double c = 1.0 / std::sqrt(std::abs(a));
    for (int i = 0; i < f.size(); ++i) out.values[i] = c * sample_at(f, f.t(i) / a);
    return out;
}

/// Wavelet representation pi(b,a) = T_b D_a.
inline SampledSignal wavelet_shift(const SampledSignal& f, double b, double a) { return translate(dilate(f, a), b); }

// ---------------------------------------------------------------------------
// Moments, antiderivative, derivative
// ---------------------------------------------------------------------------

struct Moments {
    std::vector<cplx> moments;          // int t^k f(t) dt
    std::vector<double> abs_moments;    // int |t|^k |f(t)| dt
    double window_lo = 0.0;
    double window_hi = 0.0;
};

namespace detail {
inline double trapezoid_weight(int i, int n, double dt) { return (i == 0 || i == n - 1) ? 0.5 * dt : dt; }
}  // namespace detail

inline Moments moments(const SampledSignal& f, int k_max) {
    if (k_max < 0) throw std::invalid_argument("moments: k_max must be >= 0");
    Moments m;
    m.moments.assign(k_max + 1, cplx{});
    m.abs_moments.assign(k_max + 1, 0.0);
    m.window_lo = f.t0;
    m.window_hi = f.t(f.size() - 1);
    const int n = f.size();
    for (int i = 0; i < n; ++i) {
        const double w = detail::trapezoid_weight(i, n, f.dt);
        const double t = f.t(i);
        const double at = std::abs(t);
        const double af = std::abs(f.values[i]);
        double tk = 1.0, atk = 1.0;
        for (int k = 0; k <= k_max; ++k) {
            m.moments[k] += w * tk * f.values[i];
            m.abs_moments[k] += w * atk * af;
            tk *= t;
            atk *= at;
        }
    }
    return m;
}

inline constexpr int kDefaultMomentOrder = 10;

/// Largest L with |moment_k| <= tol * abs_moment_k for all k < L (capped at
/// k_max + 1).
inline int vanishing_moment_count(const SampledSignal& f, double tol, int k_max = kDefaultMomentOrder) {
    if (!(tol > 0)) throw std::invalid_argument("vanishing_moment_count: tol must be positive");
    const auto m = moments(f, k_max);
    int L = 0;
    while (L <= k_max && std::abs(m.moments[L]) <= tol * m.abs_moments[L] && m.abs_moments[L] > 0) ++L;
    return L;
}

/// Cumulative trapezoid integral from the left edge of the grid.
inline SampledSignal antiderivative(const SampledSignal& f) {
    SampledSignal out(f.grid());
    cplx acc{};
    for (int i = 1; i < f.size(); ++i) {
        acc += 0.5 * f.dt * (f.values[i - 1] + f.values[i]);
        out.values[i] = acc;
    }
    return out;
}

/// Fraction of the band kept by spectral differentiation; the top 10% of
/// frequencies are zeroed to suppress ringing.
inline constexpr double kDerivativeBandKeep = 0.9;

/// Spectral derivative: multiply the spectrum by (2 pi i w)^order.
inline SampledSignal derivative(const SampledSignal& f, int order) {
    if (order < 1) throw std::invalid_argument("derivative: order must be >= 1");
    Spectrum s = fourier(f);
    const double cut = kDerivativeBandKeep * 0.5 / f.dt;
    for (int k = 0; k < s.size(); ++k) {
        const double w = s.omega(k);
        if (std::abs(w) > cut) {
            s.values[k] = {};
            continue;
        }
        s.values[k] *= std::pow(cplx{0.0, kTwoPi * w}, order);
    }
    return inverse_fourier(s);
}

// ---------------------------------------------------------------------------
// Standard test signals
// ---------------------------------------------------------------------------

inline SampledSignal mexican_hat(const SignalGrid& g) {
    return SampledSignal::from_function(g, [](double t) { return cplx{(1.0 - t * t) * std::exp(-0.5 * t * t)}; });
}

/// exp(-pi t^2 / s^2), self-dual under this Fourier convention for s = 1.
inline SampledSignal gaussian(const SignalGrid& g, double width = 1.0) {
    return SampledSignal::from_function(g, [&](double t) { return cplx{std::exp(-std::numbers::pi * t * t / (width * width))}; });
}

inline SampledSignal haar_wavelet(const SignalGrid& g) {
    return SampledSignal::from_function(g, [](double t) {
        if (t >= 0.0 && t < 0.5) return cplx{1.0};
        if (t >= 0.5 && t < 1.0) return cplx{-1.0};
        return cplx{};
    });
}

/// Spectrum exp(-(w^2 + w^-2)), zero at w = 0: smooth, all moments vanish.
inline double smooth_bandpass_hat(double w) { return w == 0.0 ? 0.0 : std::exp(-(w * w + 1.0 / (w * w))); }

inline SampledSignal smooth_bandpass_atom(const SignalGrid& g) { return signal_from_spectrum(g, smooth_bandpass_hat); }

struct WavePacketBand {
    double centre_lo = -8.0;   // time centres
    double centre_hi = 8.0;
    double freq_lo = 0.1;      // |frequency| range
    double freq_hi = 1.0;
    double width_lo = 0.5;     // Gaussian envelope widths
    double width_hi = 2.0;
    int packets = 3;
};

/// Sum of random Gaussian wave packets; effectively band-limited and
/// compactly supported when the band parameters sit inside the grid.
inline SampledSignal random_wave_packets(const SignalGrid& g, std::mt19937_64& rng, const WavePacketBand& band = {}) {
    std::uniform_real_distribution<double> centre(band.centre_lo, band.centre_hi);
    std::uniform_real_distribution<double> freq(band.freq_lo, band.freq_hi);
    std::uniform_real_distribution<double> width(band.width_lo, band.width_hi);
    std::uniform_real_distribution<double> phase(0.0, kTwoPi);
    std::bernoulli_distribution sign(0.5);
    SampledSignal out(g);
    for (int p = 0; p < band.packets; ++p) {
        const double c = centre(rng), w = (sign(rng) ? 1.0 : -1.0) * freq(rng), s = width(rng), ph = phase(rng);
        for (int i = 0; i < g.n; ++i) {
            const double t = g.t(i) - c;
            out.values[i] += std::exp(-std::numbers::pi * t * t / (s * s)) * std::polar(1.0, kTwoPi * w * t + ph);
        }
    }
    return out;
}

}  // namespace coorbit
