// Gaussian Gabor frame on the lattice (Z/2)^2: empirical frame bounds and
// recovery of a signal from its frame operator image by Neumann iteration.

#include "coorbit/coorbit.hpp"

#include <cstdio>
#include <random>

using namespace coorbit;

int main() {
    const SignalGrid grid{-8, 1.0 / 16, 256};
    const auto g = gaussian(grid);
    WavePacketBand band;
    band.centre_lo = -4, band.centre_hi = 4, band.freq_hi = 1.5;

    const auto lat = TFLattice::separable_lattice(0.5, 0.5, -20, 20, -8, 8);
    const auto rep = frame_bounds_empirical(g, {-10, 0.125, 161}, {-4, 0.125, 65}, lat, TFNeighborhood(0.5, 0.5), 2,
                                            WeightSpec::unit_tf(), 20, 1, band);
    std::printf("sampled/continuous norm ratios over 20 signals: [%.4f, %.4f], a/b = %.4f\n", rep.a_hat, rep.b_hat,
                rep.a_hat / rep.b_hat);

    std::mt19937_64 rng(4);
    std::vector<SampledSignal> fs;
    for (int i = 0; i < 8; ++i) fs.push_back(random_wave_packets(grid, rng, band));
    const auto wide = TFLattice::separable_lattice(0.5, 0.5, -20, 20, -14, 14);
    const auto [lo, hi] = gabor_rayleigh_bounds(fs, g, wide);
    std::printf("Rayleigh quotients of S: [%.5f, %.5f]\n", lo, hi);
    const auto [f, inv] = gabor_neumann_inverse(gabor_frame_operator(fs[0], g, wide), g, wide, 2 / (lo + hi), 1e-8, 50);
    for (std::size_t i = 0; i < inv.residual_history.size(); ++i) std::printf("  iter %2zu  residual %.3e\n", i + 1, inv.residual_history[i]);
    std::printf("relative L2 error of the recovered signal: %.3e\n", relative_l2_error(f, fs[0]));
}
