#include "signlab/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "signlab/quadrature.hpp"

namespace signlab {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt3 = 1.7320508075688772;

// roots of unity directions used by both the planar and spherical barriers
constexpr double kV2x = -0.5, kV2y = kSqrt3 / 2.0;
constexpr double kV3x = -0.5, kV3y = -kSqrt3 / 2.0;

double asymptotic_amplitude_d(int d) {
    const DimConstants dc(d);
    return std::tgamma((double)d) * dc.sphere_volume / std::pow(2.0 * kPi, 0.5 * (d + 1));
}

void tangent_frame_of(const Vec3& c, Vec3& e1, Vec3& e2) {
    Vec3 a = std::abs(c[2]) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
    const double proj = dot(a, c);
    e1 = normalized(Vec3{a[0] - proj * c[0], a[1] - proj * c[1], a[2] - proj * c[2]});
    e2 = Vec3{c[1] * e1[2] - c[2] * e1[1], c[2] * e1[0] - c[0] * e1[2],
              c[0] * e1[1] - c[1] * e1[0]};
}

Vec3 exp_map(const Vec3& x, const Vec3& e1, const Vec3& e2, double vx, double vy, double rho) {
    const double n = std::hypot(vx, vy);
    const double ux = vx / n, uy = vy / n;
    Vec3 out;
    for (int k = 0; k < 3; ++k)
        out[(size_t)k] = std::cos(rho) * x[(size_t)k] +
                         std::sin(rho) * (ux * e1[(size_t)k] + uy * e2[(size_t)k]);
    return out;
}

// negative-measure of x1 in [0, a] for the slice value c = 2 t cos(sqrt3 pi x2)
// at level u: w_t - u < 0 <=> 2 y^2 + c y - (1 - u) > 0 with y = cos(pi x1).
double slice_negative_measure(double c, double a, double u) {
    // roots of 2 y^2 + c y - (1 - u) = 0
    const double disc = c * c + 8.0 * (1.0 - u);
    if (disc <= 0.0) return a;  // no real roots: the quadratic is positive everywhere
    const double sq = std::sqrt(disc);
    const double y_hi = 0.25 * (-c + sq);
    const double y_lo = 0.25 * (-c - sq);
    const double y_min = std::cos(kPi * a);  // smallest y on the slice (a <= 2/3)
    double measure = 0.0;
    // y > y_hi <=> x1 < acos(y_hi)/pi
    if (y_hi < 1.0) {
        const double x_hi = std::acos(std::max(y_hi, y_min)) / kPi;
        measure += std::min(x_hi, a);
    }
    // y < y_lo <=> x1 > acos(y_lo)/pi
    if (y_lo > y_min) {
        const double x_lo = std::acos(std::min(y_lo, 1.0)) / kPi;
        measure += std::max(0.0, a - x_lo);
    }
    return measure;
}
}  // namespace

double HexBarrier::w0(double x1) { return -std::cos(2.0 * kPi * x1); }

double HexBarrier::p(double x1, double x2) {
    return -std::cos(2.0 * kPi * (kV2x * x1 + kV2y * x2)) -
           std::cos(2.0 * kPi * (kV3x * x1 + kV3y * x2));
}

double HexBarrier::operator()(double x1, double x2) const { return w0(x1) + t * p(x1, x2); }

void HexBarrier::grad_w0(double x1, double /*x2*/, double& g1, double& g2) {
    g1 = 2.0 * kPi * std::sin(2.0 * kPi * x1);
    g2 = 0.0;
}

void HexBarrier::grad_p(double x1, double x2, double& g1, double& g2) {
    const double s2 = std::sin(2.0 * kPi * (kV2x * x1 + kV2y * x2));
    const double s3 = std::sin(2.0 * kPi * (kV3x * x1 + kV3y * x2));
    g1 = 2.0 * kPi * (s2 * kV2x + s3 * kV3x);
    g2 = 2.0 * kPi * (s2 * kV2y + s3 * kV3y);
}

double hex_area() { return 2.0 / kSqrt3; }

double hex_slice_halfwidth(double x2) {
    const double h = 1.0 / kSqrt3;
    if (std::abs(x2) > h) return 0.0;
    return 2.0 / 3.0 - std::abs(x2) / kSqrt3;
}

double hex_defect_level(double t, double u, int refinement) {
    if (refinement < 4) throw std::invalid_argument("hex_defect: refinement must be >= 4");
    if (t < 0.0) throw std::invalid_argument("hex_defect: t must be >= 0");
    const double h = 1.0 / kSqrt3;
    // slice in x1 is closed-form; integrate x2 over [0, h] and double (even)
    const double integral = integrate_panels(
        [&](double x2) {
            const double a = hex_slice_halfwidth(x2);
            const double c = 2.0 * t * std::cos(kSqrt3 * kPi * x2);
            const double neg_half = slice_negative_measure(c, a, u);
            return 2.0 * a - 4.0 * neg_half;  // (pos - neg) for the full slice
        },
        0.0, h, refinement, 10);
    return 2.0 * integral / hex_area();
}

double hex_defect(double t, int refinement) { return hex_defect_level(t, 0.0, refinement); }

HexDerivatives hex_defect_derivatives(int nodes) {
    // nodal set of w_0 inside the hexagon: the segments x1 = +-1/4,
    // x2 in [-1/sqrt3, 1/sqrt3]; straight lines, so the curvature term of the
    // second-derivative formula drops, and d|grad w0|/d(grad dir) = 0 there.
    const double h = 1.0 / kSqrt3;
    HexDerivatives out;
    for (double x1 : {0.25, -0.25}) {
        auto gl = gauss_legendre(nodes, -h, h);
        for (int i = 0; i < nodes; ++i) {
            const double x2 = gl.nodes[(size_t)i];
            const double w = gl.weights[(size_t)i];
            double g1, g2, q1, q2;
            HexBarrier::grad_w0(x1, x2, g1, g2);
            HexBarrier::grad_p(x1, x2, q1, q2);
            const double gn = std::hypot(g1, g2);
            const double pv = HexBarrier::p(x1, x2);
            out.d1 += w * pv / gn;
            out.d2 += w * (-2.0 * pv * (g1 * q1 + g2 * q2) / (gn * gn * gn));
        }
    }
    out.d1 *= 2.0 / hex_area();
    out.d2 *= 2.0 / hex_area();
    return out;
}

double BarrierFunction::evaluate(const Vec3& y) const {
    const KernelSpec spec(2, ell, eta_prime);
    double acc = 0.0;
    for (size_t j = 0; j < centers.size(); ++j)
        acc += weights[j] * kernel_band(spec, geodesic_angle(centers[j], y));
    return acc;
}

double rkhs_norm(const BarrierFunction& b) {
    const KernelSpec inner(2, b.ell, b.eta_prime);
    const double n_amb = (double)band_count(KernelSpec(2, b.ell, b.eta)).n_band;
    const double n_inn = (double)band_count(inner).n_band;
    double quad = 0.0;
    for (size_t i = 0; i < b.centers.size(); ++i)
        for (size_t j = 0; j < b.centers.size(); ++j) {
            const double theta = geodesic_angle(b.centers[i], b.centers[j]);
            quad += b.weights[i] * b.weights[j] * kernel_band(inner, theta);
        }
    const double norm2 = (n_amb / n_inn) * quad;
    if (norm2 < -1e-10 * (n_amb / n_inn))
        throw std::runtime_error("rkhs_norm: Gram quadratic form is negative beyond tolerance");
    return std::sqrt(std::max(0.0, norm2));
}

namespace detail {
BarrierFunction sphere_sign_barrier_with(const Vec3& x, double r, int ell, int eta, double C,
                                         double t0, double eps0);
}

BarrierFunction sphere_sign_barrier(const Vec3& x, double r, int ell, int eta, double C) {
    const auto& bc = frozen_barrier_constants();
    return detail::sphere_sign_barrier_with(x, r, ell, eta, C, bc.t0, bc.eps0);
}

BarrierFunction detail::sphere_sign_barrier_with(const Vec3& x, double r, int ell, int eta,
                                                 double C, double t0, double eps0) {
    const double T = (double)ell;
    if (!(C / T < r)) {
        std::ostringstream os;
        os << "sphere_sign_barrier: regime violated: need C/T < r, got C/T = " << C / T
           << ", r = " << r;
        throw std::domain_error(os.str());
    }
    if (!(r < 1.0 / (C * std::sqrt(T)))) {
        std::ostringstream os;
        os << "sphere_sign_barrier: regime violated: need r < 1/(C sqrt(T)) = "
           << 1.0 / (C * std::sqrt(T)) << ", got r = " << r;
        throw std::domain_error(os.str());
    }
    const DimConstants dc(2);
    const int eta_prime =
        std::max(1, (int)std::floor((1.0 / C) * std::min((double)eta, 1.0 / r)));

    // smallest r' >= C r^2 T whose phase r' T_osc + gamma_d lies in 2 pi Z.
    // The lock uses the constituent band's actual oscillation rate: degree
    // ell' waves oscillate like sqrt(ell'(ell'+1)) ~ ell' + 1/2, and the band
    // [ell-eta'+1, ell] is centred at ell - (eta'-1)/2.
    const double t_osc = T - 0.5 * (eta_prime - 1) + 0.5;
    const double target = C * r * r * T * t_osc;  // in units of r' t_osc
    long long k = (long long)std::ceil((target + dc.gamma_phase) / (2.0 * kPi));
    if (k < 1) k = 1;
    const double r_tilde = (2.0 * kPi * k - dc.gamma_phase) / t_osc;

    const double s = 2.0 / (asymptotic_amplitude_d(2) * eps0) * std::sqrt(r_tilde * T);

    Vec3 e1, e2;
    tangent_frame_of(normalized(x), e1, e2);
    const Vec3 xc = normalized(x);

    BarrierFunction b;
    b.ell = ell;
    b.eta = eta;
    b.eta_prime = eta_prime;
    b.scale = s;
    b.r_tilde = r_tilde;
    b.centers = {exp_map(xc, e1, e2, 1.0, 0.0, r_tilde), exp_map(xc, e1, e2, kV2x, kV2y, r_tilde),
                 exp_map(xc, e1, e2, kV3x, kV3y, r_tilde)};
    b.weights = {-s, -s * t0, -s * t0};
    return b;
}

BarrierFunction level_barrier(const Vec3& x, double r, int ell, int eta_prime) {
    const double T = (double)ell;
    const double C = frozen_barrier_constants().c_construct;
    if (!(C / T < r && r < 1.0 / C)) {
        std::ostringstream os;
        os << "level_barrier: regime violated: need C/T < r < 1/C with C = " << C
           << ", got r = " << r;
        throw std::domain_error(os.str());
    }
    BarrierFunction b;
    b.ell = ell;
    b.eta = eta_prime;  // ambient band equals the constituent band here
    b.eta_prime = eta_prime;
    b.scale = std::sqrt(r * T) / asymptotic_amplitude_d(2);
    b.r_tilde = 0.0;
    b.centers = {normalized(x)};
    b.weights = {b.scale};
    return b;
}

double level_barrier_limit_bias(double u) {
    if (u < -1.0 || u > 1.0)
        throw std::domain_error("level_barrier_limit_bias: u must lie in [-1, 1]");
    return 2.0 * (std::acos(u) / kPi) - 1.0;
}

double XiProfile::xi(double rho) const { return sign * bessel_j(BesselOrder(0), s * rho); }

XiProfile xi_profile(double r, double separation_tol, int k_max) {
    if (r <= 1.0) throw std::invalid_argument("xi_profile: r must be > 1");
    std::ostringstream scanned;
    for (int k = 1; k <= k_max; ++k) {
        const double zk = bessel_j1_zero(k);
        const double target = r * zk;
        double min_dist = target;  // distance to z_0 "=0" exceeds everything real
        for (int m = 1;; ++m) {
            const double zm = bessel_j1_zero(m);
            min_dist = std::min(min_dist, std::abs(target - zm));
            if (zm > target + 1.0) break;
        }
        if (min_dist > separation_tol) {
            XiProfile prof;
            prof.r = r;
            prof.k = k;
            prof.s = zk;
            prof.sign = bessel_j(BesselOrder(2), r * zk) < 0.0 ? -1 : 1;
            return prof;
        }
        scanned << (k > 1 ? ", " : "") << "k=" << k << ":" << min_dist;
    }
    throw std::runtime_error("xi_profile: no admissible k <= " + std::to_string(k_max) +
                             " (separations: " + scanned.str() + ")");
}

double xi_integral(const XiProfile& profile, double center_x, double center_y, double rho) {
    const double c = std::hypot(center_x, center_y);
    if (c < 1e-14) {
        const int panels = (int)std::ceil(rho * profile.s / 2.0) + 16;
        return integrate_panels([&](double t) { return profile.xi(t) * 2.0 * kPi * t; }, 0.0,
                                rho, panels, 10);
    }
    // polar coordinates around the disc center: the integrand is smooth in
    // (t, phi) and periodic in phi, so trapezoid in phi converges fast
    const int n_phi = 32 + 8 * (int)std::ceil(profile.s * std::min(rho, c));
    const double dphi = 2.0 * kPi / n_phi;
    const int panels = (int)std::ceil(rho * profile.s / 2.0) + 16;
    return integrate_panels(
        [&](double t) {
            double ring = 0.0;
            for (int j = 0; j < n_phi; ++j) {
                const double phi = j * dphi;
                const double dist = std::hypot(center_x + t * std::cos(phi),
                                               center_y + t * std::sin(phi));
                ring += profile.xi(dist);
            }
            return ring * dphi * t;
        },
        0.0, rho, panels, 10);
}

double xi_integral_centered_exact(const XiProfile& profile, double rho) {
    // d/dt [ t J1(s t) ] = s t J0(s t)  =>  int_{B_rho} xi = sign 2 pi rho J1(s rho)/s
    return profile.sign * 2.0 * kPi * rho * bessel_j(BesselOrder(2), profile.s * rho) / profile.s;
}

DensityField::DensityField(const XiProfile& profile, double rj) : profile_(profile), rj_(rj) {
    if (rj < 4.0) throw std::invalid_argument("DensityField: Rj must be >= 4");
}

double DensityField::cell_area(long long i1, long long i2) const {
    const double cell = 1.0 / (rj_ * rj_);
    const double rad = std::sqrt((double)i1 * i1 + (double)i2 * i2) / rj_;
    const double raw = 0.5 * cell * (1.0 + profile_.xi(rad));
    return std::clamp(raw, 1e-9, cell - 1e-9);
}

bool DensityField::indicator(double x, double y) const {
    const double limit = rj_ * rj_;
    const double fx = std::floor(x * rj_), fy = std::floor(y * rj_);
    if (std::abs(fx) > limit || std::abs(fy) > limit) return false;
    const long long i1 = (long long)fx, i2 = (long long)fy;
    const double half = 0.5 * std::sqrt(cell_area(i1, i2));
    const double cx = (i1 + 0.5) / rj_, cy = (i2 + 0.5) / rj_;
    return std::abs(x - cx) <= half && std::abs(y - cy) <= half;
}

double DensityField::defect_on_disc(double cx, double cy, double r) const {
    const long long lo1 = (long long)std::floor((cx - r) * rj_) - 1;
    const long long hi1 = (long long)std::floor((cx + r) * rj_) + 1;
    const long long lo2 = (long long)std::floor((cy - r) * rj_) - 1;
    const long long hi2 = (long long)std::floor((cy + r) * rj_) + 1;
    const double cell = 1.0 / rj_;
    double inside_area = 0.0;
    const double r2 = r * r;
    for (long long i1 = lo1; i1 <= hi1; ++i1) {
        for (long long i2 = lo2; i2 <= hi2; ++i2) {
            // cell corner distances to the disc center
            const double x0 = i1 * cell, y0 = i2 * cell;
            double dmin = 0.0, dmax = 0.0;
            {
                const double ax0 = x0 - cx, ax1 = x0 + cell - cx;
                const double ay0 = y0 - cy, ay1 = y0 + cell - cy;
                const double mx = (ax0 <= 0.0 && ax1 >= 0.0) ? 0.0 : std::min(std::abs(ax0), std::abs(ax1));
                const double my = (ay0 <= 0.0 && ay1 >= 0.0) ? 0.0 : std::min(std::abs(ay0), std::abs(ay1));
                dmin = mx * mx + my * my;
                const double Mx = std::max(std::abs(ax0), std::abs(ax1));
                const double My = std::max(std::abs(ay0), std::abs(ay1));
                dmax = Mx * Mx + My * My;
            }
            if (dmin > r2) continue;  // cell outside the disc
            const double half = 0.5 * std::sqrt(cell_area(i1, i2));
            const double bx = (i1 + 0.5) * cell, by = (i2 + 0.5) * cell;
            if (std::abs(i1) > rj_ * rj_ || std::abs(i2) > rj_ * rj_) continue;
            if (dmax <= r2) {
                inside_area += 4.0 * half * half;  // sub-box fully inside the disc
                continue;
            }
            // boundary cell: subsample the sub-box
            const int ns = 12;
            int cnt = 0;
            for (int a = 0; a < ns; ++a)
                for (int b = 0; b < ns; ++b) {
                    const double px = bx - half + (2.0 * half) * (a + 0.5) / ns;
                    const double py = by - half + (2.0 * half) * (b + 0.5) / ns;
                    const double dx = px - cx, dy = py - cy;
                    if (dx * dx + dy * dy <= r2) ++cnt;
                }
            inside_area += 4.0 * half * half * cnt / (ns * ns);
        }
    }
    const double disc = kPi * r2;
    return (2.0 * inside_area - disc) / disc;
}

double DensityField::total_area_within(double radius) const {
    const long long lim = (long long)std::ceil(radius * rj_) + 1;
    double acc = 0.0;
    for (long long i1 = -lim; i1 <= lim; ++i1)
        for (long long i2 = -lim; i2 <= lim; ++i2) {
            const double cxr = std::sqrt((double)i1 * i1 + (double)i2 * i2) / rj_;
            if (cxr <= radius) acc += cell_area(i1, i2);
        }
    return acc;
}

}  // namespace signlab
