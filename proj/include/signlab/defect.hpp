#pragma once

// Volume-bias and defect functionals on geodesic caps, sign-imbalance via
// net suprema, cap quadrature, covering nets, and the symmetric-difference
// stability bound.

#include <functional>
#include <vector>

#include "signlab/sampler.hpp"

namespace signlab {

// Sign convention throughout: H(t) = +1 for t >= 0, -1 for t < 0.
inline double sign_h(double t) { return t >= 0.0 ? 1.0 : -1.0; }

// Geodesic cap with its quadrature rule. d = 2 caps carry a Gauss-Legendre
// (radial, in cos theta) x uniform (azimuthal) product rule; d = 3 caps carry
// seeded Monte Carlo nodes and are flagged stochastic.
struct Cap {
    int d = 2;
    Vec3 center{0.0, 0.0, 1.0};
    std::vector<double> center_d3;  // ambient coords for d = 3 (size 4)
    double radius = 0.0;
    int refinement = 0;  // radial node count (d = 2) or MC node count (d = 3)
    bool stochastic = false;
    std::vector<Vec3> nodes;          // d = 2
    std::vector<double> nodes_d3;     // d = 3, flat stride 4
    std::vector<double> weights;      // sums to the cap volume
    double volume = 0.0;
};

struct BiasReport {
    double u = 0.0;
    double d_tilde = 0.0;    // uncentred bias, in [-1, 1]
    double d_centred = 0.0;  // d_tilde - tau(u), in [-2, 2]
    double radius = 0.0;
    int resolution = 0;
    bool stochastic = false;
};

// Covering net on S^2 (Fibonacci spiral) or S^3 (greedy packing).
struct SphereNet {
    int d = 2;
    double spacing = 0.0;
    std::vector<Vec3> points;        // d = 2
    std::vector<double> points_d3;   // d = 3, flat stride 4
    int count() const { return d == 2 ? (int)points.size() : (int)(points_d3.size() / 4); }
};

struct ImbalanceResult {
    double b = 0.0;  // max over the net of |d_centred|, in [0, 2]
    Vec3 argmax{0.0, 0.0, 1.0};
    double stability = 0.0;  // bound on the sup lost to the net spacing
};

// Exact cap volume on S^2: 2 pi (1 - cos r). For d = 3: 2 pi (r - sin r cos r).
double cap_volume(int d, double r);

// Product quadrature cap. `radial_nodes` >= 4 for d = 2; for d = 3 it is the
// Monte Carlo node count (default 10^4 when <= 0).
Cap make_cap(const Vec3& center, double r, int radial_nodes, int azimuthal_nodes = 0);
Cap make_cap_d3(const std::vector<double>& center, double r, int mc_nodes = 0,
                std::uint64_t seed = 12345);

// Volume-bias of a pointwise-evaluable field over a cap.
BiasReport volume_bias(const std::function<double(const Vec3&)>& field, const Cap& cap, double u);

// Same, with the field already evaluated at the cap's nodes.
BiasReport volume_bias_values(const std::vector<double>& values, const Cap& cap, double u);

// Fibonacci-spiral net (d = 2) with covering radius <= spacing; point count
// stays below 20 spacing^-2. Throws if the count would exceed max_points.
SphereNet make_net(double spacing, int max_points = 4'000'000);
SphereNet make_net_d3(double spacing, int max_points = 400'000, std::uint64_t seed = 5150);

// Stability bound 4 |B_r(x) sym-diff B_r'(y)| / min(|B_r(x)|, |B_r'(y)|)
// for caps on S^2, via the exact two-cap intersection area.
double stability_bound(const Vec3& x, double r, const Vec3& y, double r_prime);
double cap_intersection_area(double r1, double r2, double center_angle);

// Net-approximated sign-imbalance sup_x |D_u(x; r)| with the attaining point
// and the stability slack of the delta r net.
ImbalanceResult imbalance(const std::function<double(const Vec3&)>& field, double u, double r,
                          double delta, int cap_radial_nodes);

// CSV row "seed,d,ell,eta,u,r,d_tilde,d_centred,resolution".
std::string bias_report_csv_row(const BiasReport& rep, std::uint64_t seed, const KernelSpec& spec);

}  // namespace signlab
