#pragma once

// Special functions shared by every kernel and barrier construction:
// Legendre / Jacobi / normalized Gegenbauer polynomials, Bessel J of
// integer and half-integer order, zeros of J1, and the Gaussian cdf.
// All functions here are pure and thread-safe.

#include <cstdint>
#include <stdexcept>

namespace signlab {

// Degree and parameters of a Jacobi polynomial P_ell^(alpha,beta).
struct PolyOrder {
    int ell = 0;
    double alpha = 0.0;
    double beta = 0.0;

    PolyOrder(int ell_, double alpha_, double beta_) : ell(ell_), alpha(alpha_), beta(beta_) {
        if (ell < 0) throw std::invalid_argument("PolyOrder: ell must be >= 0");
        if (alpha <= -1.0 || beta <= -1.0)
            throw std::invalid_argument("PolyOrder: alpha and beta must be > -1");
    }
};

// Bessel order nu = p/2 with integer p >= -2, stored exactly.
struct BesselOrder {
    int twice_nu = 0;  // p = 2*nu

    explicit BesselOrder(int twice_nu_) : twice_nu(twice_nu_) {
        if (twice_nu < -2) throw std::invalid_argument("BesselOrder: 2*nu must be >= -2");
    }
    static BesselOrder half_integer(int p) { return BesselOrder(p); }
    static BesselOrder integer(int n) { return BesselOrder(2 * n); }
    double nu() const { return 0.5 * twice_nu; }
    bool is_integer() const { return twice_nu % 2 == 0; }
};

// Dimensional constants for S^d and the d-ball.
struct DimConstants {
    int d;
    double ball_volume;     // V_d = pi^(d/2) / Gamma(d/2 + 1)
    double sphere_volume;   // |S^d| = 2 pi^((d+1)/2) / Gamma((d+1)/2)
    double gamma_phase;     // gamma_d = (1-d) pi / 4
    double cosine_amplitude;  // sqrt(2/pi) (2pi)^(d/2) / (d V_d), see note below

    explicit DimConstants(int dim);
};
// Note on cosine_amplitude: the planar-wave covariance amplitude as it
// appears in the off-diagonal kernel asymptotics. The value carries a 1/d
// relative to the naive sqrt(2/pi)(2pi)^(d/2)/V_d; only the 1/d version is
// consistent with the exact sphere kernel at d=2 (both routes are checked
// in the test suite).

// Legendre polynomial P_ell(t), |t| <= 1, by upward three-term recurrence.
double legendre(int ell, double t);

// Jacobi polynomial P_ell^(alpha,beta)(t) by upward three-term recurrence.
// Stable for the parameter ranges used here (ell <= ~2000, small alpha/beta).
double jacobi(const PolyOrder& order, double t);

// Value of the degree-ell Jacobi polynomial at t = 1, via log-gamma:
// P_ell^(a,b)(1) = binom(ell + a, ell).
double jacobi_at_one(int ell, double alpha);

// Normalized Gegenbauer polynomial G_{alpha;ell}(t) with alpha = (d-1)/2:
// P_ell^(d/2-1, d/2-1)(t) / binom(ell + d/2 - 1, ell). Equals legendre(ell, t)
// at d = 2, and G(1) = 1 for every d, ell.
double gegenbauer_normalized(int d, int ell, double t);

// Bessel function J_nu(t) for t >= 0 and nu = p/2, p >= -2.
// Power series below the switch point t = max(12, 2 nu), large-argument
// asymptotic (P/Q cosine form) above it; the series terminates exactly for
// half-integer orders. Relative accuracy ~1e-10 through t = 1e4.
double bessel_j(BesselOrder order, double t);

// k-th positive zero of J1 (k >= 1), bracketed by the McMahon asymptotic
// expansion and refined by bisection to 1e-12.
double bessel_j1_zero(int k);

// Standard Gaussian cdf and the mean sign tau(u) = 1 - 2 Phi(u) = E[H(Z-u)].
double gaussian_cdf(double u);
double tau(double u);

}  // namespace signlab
