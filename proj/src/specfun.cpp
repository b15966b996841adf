#include "signlab/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace signlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double domain_checked(double t) {
    if (std::abs(t) > 1.0 + 1e-12)
        throw std::domain_error("polynomial argument outside [-1, 1]");
    return std::clamp(t, -1.0, 1.0);
}

// Large-argument asymptotic of J_nu via the P/Q cosine expansion:
//   J_nu(t) ~ sqrt(2/(pi t)) [ P(t) cos(chi) - Q(t) sin(chi) ],
//   chi = t - nu pi/2 - pi/4.
// Terms decrease until k ~ 2t, far past the target accuracy for t >= 12;
// for half-integer nu the series terminates and the result is exact.
double bessel_asymptotic(double nu, double t) {
    const double mu = 4.0 * nu * nu;
    double p_sum = 1.0, q_sum = 0.0;
    double term = 1.0;
    double prev_mag = std::numeric_limits<double>::max();
    for (int k = 1; k <= 40; ++k) {
        const double num = mu - (2.0 * k - 1.0) * (2.0 * k - 1.0);
        if (num == 0.0) break;  // terminating (half-integer) series
        term *= num / (8.0 * t * k);
        const double mag = std::abs(term);
        if (mag > prev_mag) break;  // asymptotic series started diverging
        prev_mag = mag;
        if (k % 2 == 1) {
            q_sum += (k % 4 == 1) ? term : -term;
        } else {
            p_sum += (k % 4 == 2) ? -term : term;
        }
        if (mag < 1e-18) break;
    }
    const double chi = t - (0.5 * nu + 0.25) * kPi;
    return std::sqrt(2.0 / (kPi * t)) * (p_sum * std::cos(chi) - q_sum * std::sin(chi));
}

// Power series J_nu(t) = sum_k (-1)^k (t/2)^(nu+2k) / (k! Gamma(nu+k+1)),
// accumulated in extended precision; used for t below the switch point where
// the largest term stays modest and cancellation is harmless. Requires
// nu > -1 (the nu = -1 case is redirected through J_{-1} = -J_1).
double bessel_series(double nu, double t) {
    if (t == 0.0) return nu == 0.0 ? 1.0 : 0.0;
    const double x = 0.5 * t;
    const long double xsq = (long double)x * x;
    long double term =
        std::exp((long double)(nu * std::log(x)) - (long double)std::lgamma(nu + 1.0));
    long double sum = term;
    for (int k = 1; k <= 200; ++k) {
        term *= -xsq / ((long double)k * (nu + k));
        sum += term;
        if (std::abs((double)term) < 1e-20 * (1.0 + std::abs((double)sum))) break;
    }
    return (double)sum;
}

}  // namespace

DimConstants::DimConstants(int dim) : d(dim) {
    if (dim < 0) throw std::invalid_argument("DimConstants: d must be >= 0");
    ball_volume = std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0);
    sphere_volume = 2.0 * std::pow(kPi, 0.5 * (dim + 1)) / std::tgamma(0.5 * (dim + 1));
    gamma_phase = 0.25 * (1.0 - dim) * kPi;
    cosine_amplitude = dim > 0 ? std::sqrt(2.0 / kPi) * std::pow(2.0 * kPi, 0.5 * dim) /
                                     (dim * ball_volume)
                               : 0.0;
}

double legendre(int ell, double t) {
    if (ell < 0) throw std::invalid_argument("legendre: ell must be >= 0");
    t = domain_checked(t);
    if (ell == 0) return 1.0;
    double pm1 = 1.0, p = t;
    for (int k = 1; k < ell; ++k) {
        const double pn = ((2.0 * k + 1.0) * t * p - k * pm1) / (k + 1.0);
        pm1 = p;
        p = pn;
    }
    return p;
}

double jacobi(const PolyOrder& order, double t) {
    t = domain_checked(t);
    const int n = order.ell;
    const double a = order.alpha, b = order.beta;
    if (n == 0) return 1.0;
    double pm1 = 1.0;
    double p = 0.5 * (a - b + (a + b + 2.0) * t);
    for (int k = 1; k < n; ++k) {
        const double k2ab = 2.0 * k + a + b;
        const double c1 = 2.0 * (k + 1.0) * (k + a + b + 1.0) * k2ab;
        const double c2 = (k2ab + 1.0) * (a * a - b * b);
        const double c3 = k2ab * (k2ab + 1.0) * (k2ab + 2.0);
        const double c4 = 2.0 * (k + a) * (k + b) * (k2ab + 2.0);
        const double pn = ((c2 + c3 * t) * p - c4 * pm1) / c1;
        pm1 = p;
        p = pn;
    }
    return p;
}

double jacobi_at_one(int ell, double alpha) {
    return std::exp(std::lgamma(ell + alpha + 1.0) - std::lgamma(ell + 1.0) -
                    std::lgamma(alpha + 1.0));
}

double gegenbauer_normalized(int d, int ell, double t) {
    if (d < 2) throw std::invalid_argument("gegenbauer_normalized: d must be >= 2");
    const double a = 0.5 * d - 1.0;
    if (d == 2) return legendre(ell, t);
    return jacobi(PolyOrder(ell, a, a), t) / jacobi_at_one(ell, a);
}

double bessel_j(BesselOrder order, double t) {
    if (t < 0.0) throw std::domain_error("bessel_j: t must be >= 0");
    const double nu = order.nu();
    if (order.twice_nu == -2) return -bessel_j(BesselOrder(2), t);  // J_{-1} = -J_1
    const double switch_point = std::max(12.0, 2.0 * nu);
    if (t < switch_point) return bessel_series(nu, t);
    return bessel_asymptotic(nu, t);
}

double bessel_j1_zero(int k) {
    if (k < 1) throw std::invalid_argument("bessel_j1_zero: k must be >= 1");
    // McMahon expansion gives the center; zeros of J1 are separated by ~pi,
    // so a +-0.6 bracket always isolates exactly one.
    const double kk = k + 0.25;
    const double guess = kk * kPi - 3.0 / (8.0 * kPi * kk);
    double lo = guess - 0.6, hi = guess + 0.6;
    const BesselOrder one(2);
    double flo = bessel_j(one, lo);
    double fhi = bessel_j(one, hi);
    if (flo == 0.0) return lo;
    if (fhi == 0.0) return hi;
    if (flo * fhi > 0.0) throw std::runtime_error("bessel_j1_zero: bracket failed");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = bessel_j(one, mid);
        if (fm == 0.0) return mid;
        if (flo * fm < 0.0) {
            hi = mid;
        } else {
            lo = mid;
            flo = fm;
        }
        if (hi - lo < 1e-13) break;
    }
    return 0.5 * (lo + hi);
}

double gaussian_cdf(double u) { return 0.5 * std::erfc(-u / std::sqrt(2.0)); }

double tau(double u) { return 1.0 - 2.0 * gaussian_cdf(u); }

}  // namespace signlab
