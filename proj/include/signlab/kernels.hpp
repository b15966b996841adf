#pragma once

// Covariance (reproducing) kernels of band-limited random waves on S^d:
// exact values through the Christoffel-Darboux closed form, spectral counts,
// the off-diagonal cosine asymptotics with explicit envelope, uniform decay
// scans, crossover radii, and the inclusion operator norm on geodesic caps.

#include <cstdint>
#include <vector>

#include "signlab/specfun.hpp"

namespace signlab {

// Identifies the kernel K_{ell,eta} on S^d: degree ell (playing the role of
// the spectral parameter T), integer band width eta, energy window
// [ell-eta+1, ell].
struct KernelSpec {
    int d = 2;
    int ell = 1;
    int eta = 1;

    KernelSpec(int d_, int ell_, int eta_) : d(d_), ell(ell_), eta(eta_) {
        if (d < 2) throw std::invalid_argument("KernelSpec: d must be >= 2");
        if (ell < 1) throw std::invalid_argument("KernelSpec: ell must be >= 1");
        if (eta < 1 || eta > ell)
            throw std::invalid_argument("KernelSpec: eta must lie in [1, ell]");
    }
};

struct SpectralCounts {
    std::int64_t n_ell = 0;   // multiplicity of degree ell
    std::int64_t n_band = 0;  // N(ell, eta), window [ell-eta+1, ell]
    std::int64_t n_full = 0;  // N(ell) = N(ell, ell), window [1, ell]
};

struct CriticalRadii {
    double r_bar = 0.0;    // upper crossover scale
    double r_under = 0.0;  // lower crossover scale
    double residual_bar = 0.0;    // (r_bar T)^(d-1) max{1, r_bar eta}, should equal log T
    double residual_under = 0.0;  // (r_under T)^(2(d-1)) max{1, r_under eta}
};

struct KernelAsymptotic {
    double main = 0.0;      // c_d (theta ell)^(-(d-1)/2) cos(theta ell + gamma_d)
    double envelope = 0.0;  // c_d (theta ell)^(-(d-1)/2) (1/(ell theta) + eta theta)
};

// Exact multiplicity n_ell = binom(ell+d-1, d-1) + binom(ell+d-2, d-1).
// Throws std::overflow_error if the count exceeds 64-bit range.
std::int64_t n_dim(int d, int ell);

SpectralCounts band_count(const KernelSpec& spec);

// Fully banded kernel K_{<=ell}(theta), normalized so K_{<=ell}(0) = 1.
// Evaluated through a single Jacobi polynomial (Christoffel-Darboux); the
// window [1, ell] excludes the constant mode, which the closed form includes,
// hence the explicit -1 correction inside.
double kernel_full_band(int d, int ell, double theta);

// Band kernel K_{ell,eta}(theta) via the telescoping identity
// N(ell,eta) K_{ell,eta} = N(ell) K_{<=ell} - N(ell-eta) K_{<=ell-eta}.
// For eta = 1 this reduces to gegenbauer_normalized(d, ell, cos theta).
double kernel_band(const KernelSpec& spec, double theta);

// Leading cosine asymptotics of K_{ell,eta}(theta) for theta in (0, pi/2],
// with the magnitude of the error term (sans its unknown constant).
KernelAsymptotic kernel_asymptotic(const KernelSpec& spec, double theta);

// Main term of the general-manifold (Weyl-law) asymptotics evaluated with
// |M| = |S^d|; used as a cross-check against the exact sphere kernel. The
// envelope is the proposition's own: amplitude * (1/(rT) + eta r + (rT)^((d-1)/2)/eta).
KernelAsymptotic kernel_asymptotic_general(const KernelSpec& spec, double theta);

// Worst case of |K_{ell,eta}| over a dense theta-grid of
// [T^-(1-delta1), pi/2]; grid_points controls the scan resolution.
struct DecayBound {
    double max_abs = 0.0;
    double theta_at_max = 0.0;
    double reference = 0.0;  // C1 / T^delta1 with C1 = 1 (caller rescales)
};
DecayBound kernel_decay_bound(const KernelSpec& spec, double delta1, int grid_points = 4000);

// Crossover radii r_bar, r_under of the min-formula, with the implicit-law
// residuals evaluated for verification.
CriticalRadii critical_radii(int d, int T, int eta);

// Monochromatic Euclidean covariance gamma_d(t): value 1 at t = 0,
// gamma_2 = J_0. General d: 2^((d-2)/2) Gamma(d/2) J_{(d-2)/2}(t) / t^((d-2)/2).
double euclidean_kernel(int d, double t);

// Inclusion operator norm I_B^2 on a geodesic cap of S^2: the largest
// eigenvalue of the Gram matrix (|S^2|/N) \int_B Y_j Y_k over the band basis.
struct InclusionNorm {
    double i_squared = 0.0;
    double zeta = 0.0;            // comparison bound zeta(T, eta; r) with c = 1
    bool resolution_ok = true;    // false if doubling the quadrature moved the
                                  // eigenvalue by more than 1e-6
    double resolution_shift = 0.0;
};
InclusionNorm inclusion_norm(const KernelSpec& spec, double cap_radius, int radial_nodes);

}  // namespace signlab
