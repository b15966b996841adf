#include <algorithm>
#include <cmath>
#include <cstdio>

#include "signlab/barriers.hpp"

// Frozen calibration of the barrier constants. The values below were produced
// by calibrate_barrier_constants() (reachable through `signlab barrier
// --calibrate`), which records the derivation:
//   t0:   argmax of hex_defect(t, 256) over t in {0.05, 0.10, ..., 1.00}
//   eps0: hex_defect(t0) / 2
//   c_construct: smallest C in {4, 8, 16} whose sphere regime at ell = 600 is
//                nonempty and whose barrier passes the bias check
//                D~_{h;eps0}(x; r) > eps0 at r = 0.8 / (C sqrt(T))
//   c_norm: max over the calibration sweep (ell in {300, 600}, eta in
//           {1, floor(sqrt(ell))}, in-regime r) of
//           ||h||^2 / (max{1, r eta} (r T)^2), times a 1.25 margin
// Rerunning the calibration must reproduce these within the tolerances
// asserted in the test suite.

namespace signlab {

namespace {
// set by the first calibration run and then frozen here
constexpr BarrierConstants kFrozen = {
    /* t0 */ 1.00,
    /* eps0 */ 0.1013670,
    /* c_construct */ 4.0,
    /* c_norm */ 3.88e4,
};
}  // namespace

const BarrierConstants& frozen_barrier_constants() { return kFrozen; }

namespace detail {
BarrierFunction sphere_sign_barrier_with(const Vec3& x, double r, int ell, int eta, double C,
                                         double t0, double eps0);
}

BarrierConstants calibrate_barrier_constants(bool verbose) {
    BarrierConstants out = kFrozen;

    double best_t = 0.05, best_d = -2.0;
    for (int i = 1; i <= 20; ++i) {
        const double t = 0.05 * i;
        const double d = hex_defect(t, 256);
        if (verbose) std::printf("hex_defect(%.2f) = %.7f\n", t, d);
        if (d > best_d) {
            best_d = d;
            best_t = t;
        }
    }
    out.t0 = best_t;
    out.eps0 = 0.5 * best_d;

    const Vec3 pole{0.0, 0.0, 1.0};
    const int ell = 600;
    out.c_construct = 0.0;
    for (double C : {4.0, 8.0, 16.0}) {
        const double T = (double)ell;
        const double r_hi = 1.0 / (C * std::sqrt(T));
        const double r = 0.8 * r_hi;
        if (!(C / T < r)) continue;  // empty regime at this C
        const BarrierFunction h =
            detail::sphere_sign_barrier_with(pole, r, ell, 1, C, out.t0, out.eps0);
        const Cap cap = make_cap(pole, r, 48);
        const BiasReport rep =
            volume_bias([&](const Vec3& y) { return h.evaluate(y); }, cap, out.eps0);
        if (verbose)
            std::printf("C = %.0f: r = %.5f, bias = %.4f vs eps0 = %.4f\n", C, r, rep.d_tilde,
                        out.eps0);
        if (rep.d_tilde > out.eps0) {
            out.c_construct = C;
            break;
        }
    }
    if (out.c_construct == 0.0) out.c_construct = 4.0;  // reported by the failing check itself

    double worst = 0.0;
    for (int l : {300, 600}) {
        for (int eta : {1, (int)std::floor(std::sqrt((double)l))}) {
            const double T = (double)l;
            const double r_hi = 1.0 / (out.c_construct * std::sqrt(T));
            for (double f : {0.5, 0.8}) {
                const double r = f * r_hi;
                if (!(out.c_construct / T < r)) continue;
                const BarrierFunction h = detail::sphere_sign_barrier_with(
                    pole, r, l, eta, out.c_construct, out.t0, out.eps0);
                const double n2 = rkhs_norm(h);
                const double denom = std::max(1.0, r * eta) * (r * T) * (r * T);
                worst = std::max(worst, n2 * n2 / denom);
            }
        }
    }
    out.c_norm = 1.25 * worst;
    if (verbose)
        std::printf("t0 = %.2f, eps0 = %.7f, c_construct = %.0f, c_norm = %.4e\n", out.t0,
                    out.eps0, out.c_construct, out.c_norm);
    return out;
}

}  // namespace signlab
