// Lattice design for the band-pass atom psi^(w) = exp(-(w^2 + w^-2)) and
// reconstruction of a reproducing-space field from its lattice samples.

#include "coorbit/coorbit.hpp"

#include <cstdio>
#include <random>

using namespace coorbit;

int main() {
    const auto wide = wavelet_atom_sufficient(smooth_bandpass_atom({-32, 1.0 / 64, 4096}), 1, kMomentTolerance);
    std::printf("vanishing moments (wide grid): %d, sufficient for w_1: %s\n", wide.vanishing_moments, wide.pass ? "yes" : "no");

    const SignalGrid grid{-6, 1.0 / 16, 192};
    const AffineQuadrature quad(-6, 6, 192, 0.25, 4, 25, {1, -1});
    const auto psi = normalize_admissible(smooth_bandpass_atom(grid));
    const auto k = reproducing_kernel(psi, quad);
    const auto d = design_lattice(k, WeightSpec::symmetric_power(1));
    std::printf("\n%4s %10s %10s %10s\n", "n", "alpha", "beta", "q");
    for (std::size_t n = 0; n < d.history.size(); ++n)
        std::printf("%4zu %10.5f %10.5f %10.4f\n", n, d.history[n].alpha, d.history[n].beta, d.history[n].q);
    std::printf("lattice: j in [%d, %d], k in [%d, %d], %zu points\n", d.lattice.j_min(), d.lattice.j_max(), d.lattice.k_min(),
                d.lattice.k_max(), d.lattice.size());

    const AffineNeighborhood u(d.beta, d.alpha);
    const auto bupu = build_bupu(d.lattice, u, density_probe(d.lattice, quad));
    const ConvolutionPlan plan(k, true);
    std::mt19937_64 rng(2);
    WavePacketBand band;
    band.centre_lo = -3, band.centre_hi = 3, band.freq_lo = 0.4, band.freq_hi = 2;
    const auto truth = plan.apply(cwt(random_wave_packets(grid, rng, band), psi, quad));
    NeumannOptions opt;
    opt.truth = &truth;
    const auto [f, rep] = neumann_reconstruct(sample_field(truth, d.lattice), bupu, plan, d.certificate, opt);
    std::printf("\nNeumann iterations %d, last residual %.3e, ratio %.3f, relative error %.3e\n", rep.iterations,
                rep.residual_history.back(), rep.asymptotic_ratio, *rep.final_relative_error);
}
