#include "signlab/kernels.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>

#include "signlab/sph_basis.hpp"

namespace signlab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kFourPi = 4.0 * kPi;

std::int64_t binom_int(std::int64_t n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    unsigned __int128 acc = 1;
    for (int i = 1; i <= k; ++i) {
        acc = acc * (unsigned __int128)(n - k + i) / (unsigned __int128)i;
        if (acc > (unsigned __int128)std::numeric_limits<std::int64_t>::max())
            throw std::overflow_error("n_dim: multiplicity exceeds 64-bit range");
    }
    return (std::int64_t)acc;
}

// Normalized Christoffel-Darboux polynomial: the closed form for the window
// [0, ell] including the constant mode, scaled to 1 at theta = 0.
double cd_normalized(int d, int ell, double theta) {
    const PolyOrder order(ell, 0.5 * d, 0.5 * d - 1.0);
    return jacobi(order, std::cos(theta)) / jacobi_at_one(ell, 0.5 * d);
}

// sum over [1, ell] of n_l' G_l'(cos theta); zero for ell = 0.
double window_sum(int d, int ell, double theta) {
    if (ell == 0) return 0.0;
    const double total = (double)band_count(KernelSpec(d, ell, ell)).n_full;
    return (total + 1.0) * cd_normalized(d, ell, theta) - 1.0;
}

double asymptotic_amplitude(int d) {
    const DimConstants dc(d);
    // (d-1)! |S^d| / (2 pi)^((d+1)/2); agrees with dc.cosine_amplitude
    return std::tgamma((double)d) * dc.sphere_volume / std::pow(2.0 * kPi, 0.5 * (d + 1));
}

// Largest Gram eigenvalue for the cap B_r(north pole) at the given radial
// (Gauss-Legendre in cos theta) resolution.
double gram_largest_eigenvalue(const KernelSpec& spec, double cap_radius, int radial_nodes) {
    const int l0 = spec.ell - spec.eta + 1, l1 = spec.ell;
    const int nb = basis_size(l0, l1);
    const int n_phi = 4 * spec.ell + 2;  // exact for products of degree-ell harmonics

    // Gauss-Legendre nodes on [cos r, 1]
    Eigen::VectorXd gl_x(radial_nodes), gl_w(radial_nodes);
    {
        // Golub-Welsch via the symmetric tridiagonal Jacobi matrix
        Eigen::MatrixXd J = Eigen::MatrixXd::Zero(radial_nodes, radial_nodes);
        for (int i = 1; i < radial_nodes; ++i) {
            const double b = i / std::sqrt(4.0 * i * i - 1.0);
            J(i, i - 1) = J(i - 1, i) = b;
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
        const double a = std::cos(cap_radius), b = 1.0;
        for (int i = 0; i < radial_nodes; ++i) {
            gl_x(i) = 0.5 * (b - a) * es.eigenvalues()(i) + 0.5 * (a + b);
            const double v0 = es.eigenvectors()(0, i);
            gl_w(i) = (b - a) * v0 * v0;
        }
    }

    Eigen::MatrixXd B(radial_nodes * n_phi, nb);
    std::vector<double> packed, row((size_t)nb);
    const double dphi = 2.0 * kPi / n_phi;
    for (int i = 0; i < radial_nodes; ++i) {
        const double ct = gl_x(i);
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        const double w = gl_w(i) * dphi;
        const double sw = std::sqrt(w);
        for (int j = 0; j < n_phi; ++j) {
            fill_basis_row(l0, l1, ct, st, (j + 0.5) * dphi, nullptr, packed, row.data());
            for (int k = 0; k < nb; ++k) B(i * n_phi + j, k) = sw * row[k];
        }
    }
    const double scale = kFourPi / (double)band_count(spec).n_band;
    Eigen::MatrixXd gram = scale * (B.transpose() * B);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

}  // namespace

std::int64_t n_dim(int d, int ell) {
    if (d < 2) throw std::invalid_argument("n_dim: d must be >= 2");
    if (ell < 0) throw std::invalid_argument("n_dim: ell must be >= 0");
    std::int64_t a = binom_int((std::int64_t)ell + d - 1, d - 1);
    std::int64_t b = binom_int((std::int64_t)ell + d - 2, d - 1);
    if (a > std::numeric_limits<std::int64_t>::max() - b)
        throw std::overflow_error("n_dim: multiplicity exceeds 64-bit range");
    return a + b;
}

SpectralCounts band_count(const KernelSpec& spec) {
    SpectralCounts out;
    out.n_ell = n_dim(spec.d, spec.ell);
    std::int64_t band = 0, full = 0;
    for (int l = 1; l <= spec.ell; ++l) {
        const std::int64_t n = n_dim(spec.d, l);
        if (full > std::numeric_limits<std::int64_t>::max() - n)
            throw std::overflow_error("band_count: N(ell) exceeds 64-bit range");
        full += n;
        if (l >= spec.ell - spec.eta + 1) band += n;
    }
    out.n_band = band;
    out.n_full = full;
    return out;
}

double kernel_full_band(int d, int ell, double theta) {
    const double n_full = (double)band_count(KernelSpec(d, ell, ell)).n_full;
    return window_sum(d, ell, theta) / n_full;
}

double kernel_band(const KernelSpec& spec, double theta) {
    const double hi = window_sum(spec.d, spec.ell, theta);
    const double lo = window_sum(spec.d, spec.ell - spec.eta, theta);
    const double n_band = (double)band_count(spec).n_band;
    return (hi - lo) / n_band;
}

KernelAsymptotic kernel_asymptotic(const KernelSpec& spec, double theta) {
    if (theta <= 0.0) throw std::domain_error("kernel_asymptotic: theta must be > 0");
    const DimConstants dc(spec.d);
    const double x = theta * spec.ell;
    const double amp = asymptotic_amplitude(spec.d) * std::pow(x, -0.5 * (spec.d - 1));
    KernelAsymptotic out;
    out.main = amp * std::cos(x + dc.gamma_phase);
    out.envelope = amp * (1.0 / x + spec.eta * theta);
    return out;
}

KernelAsymptotic kernel_asymptotic_general(const KernelSpec& spec, double theta) {
    if (theta <= 0.0) throw std::domain_error("kernel_asymptotic_general: theta must be > 0");
    const DimConstants dc(spec.d);
    const double x = theta * spec.ell;
    const double amp = dc.cosine_amplitude * std::pow(x, -0.5 * (spec.d - 1));
    KernelAsymptotic out;
    out.main = amp * std::cos(x + dc.gamma_phase);
    out.envelope =
        amp * (1.0 / x + spec.eta * theta + std::pow(x, 0.5 * (spec.d - 1)) / spec.eta);
    return out;
}

DecayBound kernel_decay_bound(const KernelSpec& spec, double delta1, int grid_points) {
    if (delta1 <= 0.0 || delta1 >= 1.0)
        throw std::invalid_argument("kernel_decay_bound: delta1 must lie in (0, 1)");
    DecayBound out;
    const double theta_min = std::pow((double)spec.ell, -(1.0 - delta1));
    const double theta_max = 0.5 * kPi;
    for (int i = 0; i < grid_points; ++i) {
        const double theta =
            theta_min + (theta_max - theta_min) * i / (double)(grid_points - 1);
        const double v = std::abs(kernel_band(spec, theta));
        if (v > out.max_abs) {
            out.max_abs = v;
            out.theta_at_max = theta;
        }
    }
    out.reference = std::pow((double)spec.ell, -delta1);
    return out;
}

CriticalRadii critical_radii(int d, int T, int eta) {
    if (T < 3) throw std::invalid_argument("critical_radii: T must be >= 3");
    if (eta < 1 || eta > T) throw std::invalid_argument("critical_radii: eta in [1, T]");
    const double logT = std::log((double)T);
    CriticalRadii out;
    const double bar_mono = std::pow(logT, 1.0 / (d - 1));
    const double bar_band = std::pow((double)T * logT / eta, 1.0 / d);
    out.r_bar = std::min(bar_mono, bar_band) / T;
    const double under_mono = std::pow(logT, 1.0 / (2.0 * (d - 1)));
    const double under_band = std::pow((double)T * logT / eta, 1.0 / (2.0 * d - 1.0));
    out.r_under = std::min(under_mono, under_band) / T;
    out.residual_bar =
        std::pow(out.r_bar * T, d - 1.0) * std::max(1.0, out.r_bar * eta);
    out.residual_under =
        std::pow(out.r_under * T, 2.0 * (d - 1.0)) * std::max(1.0, out.r_under * eta);
    return out;
}

double euclidean_kernel(int d, double t) {
    if (d < 2) throw std::invalid_argument("euclidean_kernel: d must be >= 2");
    if (t < 0.0) throw std::domain_error("euclidean_kernel: t must be >= 0");
    if (d == 2) return bessel_j(BesselOrder(0), t);
    if (t == 0.0) return 1.0;
    const double half = 0.5 * (d - 2);
    return std::pow(2.0, half) * std::tgamma(0.5 * d) * bessel_j(BesselOrder(d - 2), t) /
           std::pow(t, half);
}

InclusionNorm inclusion_norm(const KernelSpec& spec, double cap_radius, int radial_nodes) {
    if (spec.d != 2)
        throw std::invalid_argument("inclusion_norm: only d = 2 has a computable basis here");
    if (cap_radius <= 0.0 || cap_radius > kPi)
        throw std::invalid_argument("inclusion_norm: cap radius must lie in (0, pi]");
    if (radial_nodes < 4) throw std::invalid_argument("inclusion_norm: too few radial nodes");

    InclusionNorm out;
    out.i_squared = gram_largest_eigenvalue(spec, cap_radius, radial_nodes);
    const double refined = gram_largest_eigenvalue(spec, cap_radius, 2 * radial_nodes);
    out.resolution_shift = std::abs(refined - out.i_squared);
    out.resolution_ok = out.resolution_shift <= 1e-6;
    const double n_band = (double)band_count(spec).n_band;
    const double s2 = kFourPi;
    out.zeta = (cap_radius <= 1.0 / spec.eta) ? cap_radius * spec.eta * s2 / n_band
                                              : s2 / n_band;
    return out;
}

}  // namespace signlab
