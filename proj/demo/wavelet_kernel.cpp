// Reproducing kernel of the normalized Mexican hat: value at the identity,
// idempotence residual, and the certificate q for shrinking neighbourhoods.

#include "coorbit/coorbit.hpp"

#include <cstdio>

using namespace coorbit;

int main() {
    const SignalGrid grid{-16, 1.0 / 32, 1024};
    const AffineQuadrature quad(-16, 16, 1024, 1.0 / 8, 8, 25, {1, -1});
    const auto psi = normalize_admissible(mexican_hat(grid));
    const auto k = reproducing_kernel(psi, quad);
    const double n = l2_norm(psi);
    std::printf("K(0, 1)            = %.6f\n", interpolate(k, {0, 1})->real());
    std::printf("||psi||^2          = %.6f\n", n * n);
    std::printf("|K*K - K| / |K|    = %.3e\n", l2_norm(field_difference(convolve(k, k), k)) / l2_norm(k));

    const auto w = WeightSpec::symmetric_power(1);
    std::printf("\n%8s %8s %12s %10s\n", "beta", "alpha", "osc_L1w", "q");
    for (double s : {0.5, 0.2, 0.1, 0.05, 0.02, 0.01}) {
        const auto c = atom_certificate(k, w, AffineNeighborhood(s, 1 + s));
        std::printf("%8.3f %8.3f %12.5f %10.4f%s\n", s, 1 + s, c.osc_l1w, c.q, c.pass ? "  pass" : "");
    }
}
