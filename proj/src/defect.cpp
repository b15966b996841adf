#include "signlab/defect.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "signlab/quadrature.hpp"
#include "signlab/rng.hpp"

namespace signlab {

namespace {
constexpr double kPi = 3.14159265358979323846;

// orthonormal frame completing the unit vector c
void tangent_frame(const Vec3& c, Vec3& e1, Vec3& e2) {
    // Gram-Schmidt against the coordinate axis least aligned with c,
    // with a fixed convention at the poles.
    Vec3 a = std::abs(c[2]) < 0.9 ? Vec3{0.0, 0.0, 1.0} : Vec3{1.0, 0.0, 0.0};
    const double proj = dot(a, c);
    Vec3 t{a[0] - proj * c[0], a[1] - proj * c[1], a[2] - proj * c[2]};
    e1 = normalized(t);
    e2 = Vec3{c[1] * e1[2] - c[2] * e1[1], c[2] * e1[0] - c[0] * e1[2],
              c[0] * e1[1] - c[1] * e1[0]};
}
}  // namespace

double cap_volume(int d, double r) {
    if (d == 2) return 2.0 * kPi * (1.0 - std::cos(r));
    if (d == 3) return 2.0 * kPi * (r - std::sin(r) * std::cos(r));
    throw std::invalid_argument("cap_volume: d must be 2 or 3");
}

Cap make_cap(const Vec3& center, double r, int radial_nodes, int azimuthal_nodes) {
    if (r <= 0.0 || r >= kPi) throw std::invalid_argument("make_cap: radius must lie in (0, pi)");
    if (radial_nodes < 4) throw std::invalid_argument("make_cap: need at least 4 radial nodes");
    if (azimuthal_nodes <= 0) azimuthal_nodes = 2 * radial_nodes;

    Cap cap;
    cap.d = 2;
    cap.center = normalized(center);
    cap.radius = r;
    cap.refinement = radial_nodes;

    Vec3 e1, e2;
    tangent_frame(cap.center, e1, e2);

    // Gauss-Legendre in t = cos(theta) over [cos r, 1]; uniform in azimuth.
    auto gl = gauss_legendre(radial_nodes, std::cos(r), 1.0);
    const double dphi = 2.0 * kPi / azimuthal_nodes;
    cap.nodes.reserve((size_t)radial_nodes * azimuthal_nodes);
    cap.weights.reserve(cap.nodes.capacity());
    for (int i = 0; i < radial_nodes; ++i) {
        const double ct = gl.nodes[(size_t)i];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        const double w = gl.weights[(size_t)i] * dphi;
        for (int j = 0; j < azimuthal_nodes; ++j) {
            const double phi = (j + 0.5) * dphi;
            const double cp = std::cos(phi), sp = std::sin(phi);
            Vec3 p;
            for (int k = 0; k < 3; ++k)
                p[(size_t)k] = ct * cap.center[(size_t)k] + st * (cp * e1[(size_t)k] + sp * e2[(size_t)k]);
            cap.nodes.push_back(p);
            cap.weights.push_back(w);
        }
    }
    cap.volume = cap_volume(2, r);
    return cap;
}

Cap make_cap_d3(const std::vector<double>& center, double r, int mc_nodes, std::uint64_t seed) {
    if (center.size() != 4) throw std::invalid_argument("make_cap_d3: center must be a 4-vector");
    if (r <= 0.0 || r >= kPi) throw std::invalid_argument("make_cap_d3: radius in (0, pi)");
    if (mc_nodes <= 0) mc_nodes = 10000;

    Cap cap;
    cap.d = 3;
    cap.center_d3 = center;
    {
        double n = 0.0;
        for (double c : cap.center_d3) n += c * c;
        n = std::sqrt(n);
        for (double& c : cap.center_d3) c /= n;
    }
    cap.radius = r;
    cap.refinement = mc_nodes;
    cap.stochastic = true;
    cap.volume = cap_volume(3, r);

    // frame on S^3: complete center to an orthonormal basis by Gram-Schmidt
    double frame[3][4];
    {
        int axis = 0;
        double best = std::abs(cap.center_d3[0]);
        for (int k = 1; k < 4; ++k)
            if (std::abs(cap.center_d3[(size_t)k]) < best) {
                best = std::abs(cap.center_d3[(size_t)k]);
                axis = k;
            }
        double basis[3][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
        int bi = 0;
        for (int k = 0; k < 4 && bi < 3; ++k) {
            if (k == axis) continue;
            basis[bi][k] = 1.0;
            ++bi;
        }
        basis[2][axis] = 1.0;
        // orthonormalize against center and previous rows
        for (int rset = 0; rset < 3; ++rset) {
            double* v = basis[rset];
            double pc = 0.0;
            for (int k = 0; k < 4; ++k) pc += v[k] * cap.center_d3[(size_t)k];
            for (int k = 0; k < 4; ++k) v[k] -= pc * cap.center_d3[(size_t)k];
            for (int prev = 0; prev < rset; ++prev) {
                double pp = 0.0;
                for (int k = 0; k < 4; ++k) pp += v[k] * frame[prev][k];
                for (int k = 0; k < 4; ++k) v[k] -= pp * frame[prev][k];
            }
            double n = 0.0;
            for (int k = 0; k < 4; ++k) n += v[k] * v[k];
            n = std::sqrt(n);
            for (int k = 0; k < 4; ++k) frame[rset][k] = v[k] / n;
        }
    }

    // uniform nodes in the cap: colatitude density ~ sin^2, inverted by bisection
    PhiloxRng rng(seed, 0xd3ca9u);
    const double total = cap.volume / (2.0 * kPi);  // integral of sin^2 over [0, r]
    cap.nodes_d3.reserve((size_t)mc_nodes * 4);
    for (int i = 0; i < mc_nodes; ++i) {
        const double target = rng.uniform() * total;
        double lo = 0.0, hi = r;
        for (int it = 0; it < 60; ++it) {
            const double mid = 0.5 * (lo + hi);
            ((mid - std::sin(mid) * std::cos(mid)) * 0.5 < target ? lo : hi) = mid;
        }
        const double theta = 0.5 * (lo + hi);
        // uniform direction on the S^2 fiber
        const double z = 2.0 * rng.uniform() - 1.0;
        const double az = 2.0 * kPi * rng.uniform();
        const double sz = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double dir[3] = {sz * std::cos(az), sz * std::sin(az), z};
        for (int k = 0; k < 4; ++k) {
            double p = std::cos(theta) * cap.center_d3[(size_t)k];
            for (int f = 0; f < 3; ++f) p += std::sin(theta) * dir[f] * frame[f][k];
            cap.nodes_d3.push_back(p);
        }
    }
    cap.weights.assign((size_t)mc_nodes, cap.volume / mc_nodes);
    return cap;
}

BiasReport volume_bias(const std::function<double(const Vec3&)>& field, const Cap& cap, double u) {
    if (cap.d != 2) throw std::invalid_argument("volume_bias: callable form requires d = 2 caps");
    std::vector<double> vals(cap.nodes.size());
    for (size_t i = 0; i < cap.nodes.size(); ++i) vals[i] = field(cap.nodes[i]);
    return volume_bias_values(vals, cap, u);
}

BiasReport volume_bias_values(const std::vector<double>& values, const Cap& cap, double u) {
    if (values.size() != cap.weights.size())
        throw std::invalid_argument("volume_bias_values: value/node count mismatch");
    double acc = 0.0, wsum = 0.0;
    for (size_t i = 0; i < values.size(); ++i) {
        acc += cap.weights[i] * sign_h(values[i] - u);
        wsum += cap.weights[i];
    }
    BiasReport rep;
    rep.u = u;
    rep.d_tilde = std::clamp(acc / wsum, -1.0, 1.0);
    rep.d_centred = rep.d_tilde - tau(u);
    rep.radius = cap.radius;
    rep.resolution = cap.refinement;
    rep.stochastic = cap.stochastic;
    return rep;
}

SphereNet make_net(double spacing, int max_points) {
    if (spacing <= 0.0) throw std::invalid_argument("make_net: spacing must be > 0");
    SphereNet net;
    net.d = 2;
    net.spacing = spacing;
    // 16 / spacing^2 points keep the Fibonacci covering radius below the
    // spacing with margin (verified empirically in the tests), while staying
    // under the 20 spacing^-2 budget.
    const double want = std::min(16.0 / (spacing * spacing) + 2.0, 1e9);
    if (want > (double)max_points)
        throw std::invalid_argument("make_net: spacing needs more points than the configured cap");
    const int n = std::max(2, (int)want);
    net.points.reserve((size_t)n);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / n;
        const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * i;
        net.points.push_back({rho * std::cos(phi), rho * std::sin(phi), z});
    }
    return net;
}

SphereNet make_net_d3(double spacing, int max_points, std::uint64_t seed) {
    if (spacing <= 0.0) throw std::invalid_argument("make_net_d3: spacing must be > 0");
    SphereNet net;
    net.d = 3;
    net.spacing = spacing;
    // greedy packing at spacing/2 separation: packing saturation implies a
    // covering radius at most the separation distance
    const double sep = 0.5 * spacing;
    const double want = 48.0 / (sep * sep * sep);
    if (want > (double)max_points)
        throw std::invalid_argument("make_net_d3: spacing needs more points than the cap");
    PhiloxRng rng(seed, 0x4e54e3u);
    const double cos_sep = std::cos(sep);
    const int candidates = (int)(40.0 * want) + 64;
    for (int c = 0; c < candidates; ++c) {
        double v[4];
        double n2 = 0.0;
        for (double& x : v) {
            // Box-Muller pairs give an isotropic 4-vector
            x = rng.normal();
        }
        for (double x : v) n2 += x * x;
        const double inv = 1.0 / std::sqrt(n2);
        for (double& x : v) x *= inv;
        bool far = true;
        for (size_t i = 0; i < net.points_d3.size(); i += 4) {
            double d = 0.0;
            for (int k = 0; k < 4; ++k) d += v[k] * net.points_d3[i + (size_t)k];
            if (d > cos_sep) {
                far = false;
                break;
            }
        }
        if (far) {
            net.points_d3.insert(net.points_d3.end(), v, v + 4);
            if ((int)(net.points_d3.size() / 4) >= max_points)
                throw std::invalid_argument("make_net_d3: point cap exceeded");
        }
    }
    return net;
}

double cap_intersection_area(double r1, double r2, double center_angle) {
    if (r1 < 0.0 || r2 < 0.0) throw std::invalid_argument("cap_intersection_area: radii >= 0");
    const double rho = std::clamp(center_angle, 0.0, kPi);
    if (rho >= r1 + r2) return 0.0;
    if (rho <= std::abs(r1 - r2)) return cap_volume(2, std::min(r1, r2));
    // integrate the overlap wedge angle over colatitude from the first center
    const int n = 600;
    auto gl = gauss_legendre(n, std::max(0.0, rho - r2), std::min(r1, rho + r2));
    double area = 0.0;
    for (int i = 0; i < n; ++i) {
        const double t = gl.nodes[(size_t)i];
        const double st = std::sin(t);
        if (st < 1e-15 || std::sin(rho) < 1e-15) {
            area += gl.weights[(size_t)i] * st * kPi;
            continue;
        }
        const double c = (std::cos(r2) - std::cos(t) * std::cos(rho)) / (st * std::sin(rho));
        const double wedge = std::acos(std::clamp(c, -1.0, 1.0));
        area += gl.weights[(size_t)i] * st * 2.0 * wedge;
    }
    return area;
}

double stability_bound(const Vec3& x, double r, const Vec3& y, double r_prime) {
    if (r <= 0.0 || r_prime <= 0.0) throw std::invalid_argument("stability_bound: radii > 0");
    const double rho = geodesic_angle(normalized(x), normalized(y));
    const double v1 = cap_volume(2, r);
    const double v2 = cap_volume(2, r_prime);
    const double inter = cap_intersection_area(r, r_prime, rho);
    const double sym = v1 + v2 - 2.0 * inter;
    return 4.0 * sym / std::min(v1, v2);
}

ImbalanceResult imbalance(const std::function<double(const Vec3&)>& field, double u, double r,
                          double delta, int cap_radial_nodes) {
    if (delta <= 0.0 || delta > 0.5)
        throw std::invalid_argument("imbalance: delta must lie in (0, 0.5]");
    const SphereNet net = make_net(delta * r);
    ImbalanceResult out;
    for (const Vec3& c : net.points) {
        const Cap cap = make_cap(c, r, cap_radial_nodes);
        const BiasReport rep = volume_bias(field, cap, u);
        const double v = std::abs(rep.d_centred);
        if (v > out.b) {
            out.b = v;
            out.argmax = c;
        }
    }
    // worst case over centre shifts within the net spacing at equal radii
    out.stability = stability_bound(Vec3{0, 0, 1},
                                    r,
                                    normalized(Vec3{std::sin(delta * r), 0.0, std::cos(delta * r)}),
                                    r);
    return out;
}

std::string bias_report_csv_row(const BiasReport& rep, std::uint64_t seed,
                                const KernelSpec& spec) {
    std::ostringstream os;
    os.precision(17);
    os << seed << "," << spec.d << "," << spec.ell << "," << spec.eta << "," << rep.u << ","
       << rep.radius << "," << rep.d_tilde << "," << rep.d_centred << "," << rep.resolution;
    return os.str();
}

}  // namespace signlab
