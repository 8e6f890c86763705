#include "coorbit/signal.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace coorbit;

namespace {
const SignalGrid kGrid{-16.0, 1.0 / 64, 2048};

double sup_error(const SampledSignal& a, const SampledSignal& b, double lo, double hi) {
    double e = 0;
    for (int i = 0; i < a.size(); ++i)
        if (a.t(i) >= lo && a.t(i) <= hi) e = std::max(e, std::abs(a.values[i] - b.values[i]));
    return e;
}
}  // namespace

TEST(Fourier, RoundTrip) {
    std::mt19937_64 rng(1);
    const auto f = random_wave_packets(kGrid, rng);
    const auto g = inverse_fourier(fourier(f));
    EXPECT_LT(relative_l2_error(g, f), 1e-10);
    EXPECT_DOUBLE_EQ(g.t0, f.t0);
}

TEST(Fourier, GaussianIsSelfDual) {
    const auto s = fourier(gaussian(kGrid));
    double err = 0;
    for (int k = 0; k < s.size(); ++k) err = std::max(err, std::abs(s.values[k] - std::exp(-std::numbers::pi * s.omega(k) * s.omega(k))));
    EXPECT_LT(err, 1e-6);
    EXPECT_NEAR(s.domega, 1.0 / (kGrid.n * kGrid.dt), 1e-15);
    EXPECT_NEAR(s.omega(0), -0.5 / kGrid.dt, 1e-12);
}

TEST(Fourier, Plancherel) {
    std::mt19937_64 rng(2);
    for (int i = 0; i < 5; ++i) {
        const auto f = random_wave_packets(kGrid, rng);
        EXPECT_NEAR(l2_norm(fourier(f)) / l2_norm(f), 1.0, 1e-10);
    }
    const auto h = haar_wavelet(kGrid);
    EXPECT_NEAR(l2_norm(fourier(h)) / l2_norm(h), 1.0, 1e-10);
}

TEST(Operators, TranslateByZero) {
    const auto f = mexican_hat(kGrid);
    EXPECT_EQ(relative_l2_error(translate(f, 0), f), 0.0);
}

TEST(Operators, NormPreservation) {
    const auto f = gaussian(kGrid, 1.5);
    EXPECT_NEAR(l2_norm(dilate(f, 2)) / l2_norm(f), 1.0, 1e-3);
    EXPECT_NEAR(l2_norm(dilate(f, -0.5)) / l2_norm(f), 1.0, 1e-3);
    EXPECT_NEAR(l2_norm(translate(f, 1.2345)) / l2_norm(f), 1.0, 1e-3);
    EXPECT_NEAR(l2_norm(modulate(f, 0.7)) / l2_norm(f), 1.0, 1e-12);
    EXPECT_THROW(dilate(f, 0), std::invalid_argument);
}

TEST(Operators, DilationFormula) {
    const auto f = mexican_hat(kGrid);
    const auto d = dilate(f, 2);
    const auto oracle = SampledSignal::from_function(kGrid, [](double t) {
        const double s = t / 2;
        return cplx{(1 - s * s) * std::exp(-0.5 * s * s) / std::sqrt(2.0)};
    });
    EXPECT_LT(sup_error(d, oracle, -16, 16), 1e-4);
}

TEST(Operators, ModulationTranslationCommutation) {
    const auto f = mexican_hat(kGrid);
    const double x = 40 * kGrid.dt, w = 0.37;
    const auto lhs = modulate(translate(f, x), w);
    auto rhs = translate(modulate(f, w), x);
    rhs *= std::polar(1.0, kTwoPi * x * w);
    EXPECT_LT(sup_error(lhs, rhs, -16, 16), 1e-10);
}

TEST(Moments, OddSignalHasZeroMean) {
    const auto f = SampledSignal::from_function({-8, 1.0 / 32, 512}, [](double t) { return cplx{t * std::exp(-t * t)}; });
    EXPECT_NEAR(std::abs(moments(f, 0).moments[0]), 0, 1e-12);
}

TEST(Moments, MexicanHatOracle) {
    const auto f = mexican_hat({-20, 40.0 / 4096, 4096});
    const auto m = moments(f, 3);
    EXPECT_LT(std::abs(m.moments[0]), 1e-8);
    EXPECT_LT(std::abs(m.moments[1]), 1e-8);
    const double oracle = -2 * std::sqrt(2 * std::numbers::pi);
    EXPECT_NEAR(m.moments[2].real() / oracle, 1.0, 1e-6);
    EXPECT_EQ(vanishing_moment_count(f, 1e-6), 2);
    EXPECT_DOUBLE_EQ(m.window_lo, -20);
}

TEST(Moments, HaarOracle) {
    const auto h = haar_wavelet({-2, 1.0 / 1024, 4096});
    const auto m = moments(h, 1);
    EXPECT_NEAR(std::abs(m.moments[0]), 0, 1e-12);
    EXPECT_NEAR(m.moments[1].real(), -0.25, 1e-10);
    EXPECT_EQ(vanishing_moment_count(h, 1e-6), 1);
}

TEST(Moments, GaussianHasNone) {
    EXPECT_EQ(vanishing_moment_count(gaussian(kGrid), 1e-6), 0);
    EXPECT_THROW(vanishing_moment_count(gaussian(kGrid), 0), std::invalid_argument);
    EXPECT_THROW(moments(gaussian(kGrid), -1), std::invalid_argument);
}

TEST(Antiderivative, DropsOneMoment) {
    const SignalGrid g{-20, 40.0 / 4096, 4096};
    const auto f = mexican_hat(g);
    const int L = vanishing_moment_count(f, 1e-6);
    EXPECT_EQ(vanishing_moment_count(antiderivative(f), 1e-6), L - 1);
    const auto h = antiderivative(antiderivative(f));
    EXPECT_EQ(vanishing_moment_count(h, 1e-6), L - 2);
}

TEST(Antiderivative, ZeroAndRoundTrip) {
    const SampledSignal z(kGrid);
    EXPECT_EQ(l2_norm(antiderivative(z)), 0.0);
    const auto f = mexican_hat(kGrid);
    const auto back = derivative(antiderivative(f), 1);
    EXPECT_LT(sup_error(back, f, -12, 12), 10 * kGrid.dt * kGrid.dt);
}

TEST(Derivative, GaussianOracle) {
    const auto d = derivative(gaussian(kGrid), 1);
    const auto oracle = SampledSignal::from_function(
        kGrid, [](double t) { return cplx{-2 * std::numbers::pi * t * std::exp(-std::numbers::pi * t * t)}; });
    EXPECT_LT(sup_error(d, oracle, -0.8 * 16, 0.8 * 16), 1e-5);
}

TEST(Derivative, SineSecondDerivative) {
    const auto s = SampledSignal::from_function(kGrid, [](double t) { return cplx{std::sin(kTwoPi * t)}; });
    const auto d = derivative(s, 2);
    auto oracle = s;
    oracle *= cplx{-kTwoPi * kTwoPi};
    EXPECT_LT(sup_error(d, oracle, -16, 16), 1e-4);
}

TEST(Derivative, ZeroAndInvalidOrder) {
    const SampledSignal z(kGrid);
    EXPECT_EQ(l2_norm(derivative(z, 2)), 0.0);
    EXPECT_THROW(derivative(z, 0), std::invalid_argument);
}
