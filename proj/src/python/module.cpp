// Python bindings for the main operations: special functions, kernels,
// sampling, cap biases, and the barrier constructions.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "signlab/barriers.hpp"
#include "signlab/experiments.hpp"

namespace py = pybind11;
using namespace signlab;

PYBIND11_MODULE(_core, m) {
    m.doc() = "sign-balance laboratory for band-limited random waves on the sphere";

    // special functions
    m.def("legendre", &legendre, py::arg("ell"), py::arg("t"));
    m.def(
        "jacobi",
        [](int ell, double alpha, double beta, double t) {
            return jacobi(PolyOrder(ell, alpha, beta), t);
        },
        py::arg("ell"), py::arg("alpha"), py::arg("beta"), py::arg("t"));
    m.def("gegenbauer_normalized", &gegenbauer_normalized, py::arg("d"), py::arg("ell"),
          py::arg("t"));
    m.def(
        "bessel_j", [](double nu, double t) {
            const int tw = (int)std::lround(2.0 * nu);
            if (std::abs(2.0 * nu - tw) > 1e-12)
                throw std::invalid_argument("bessel_j: order must be a half-integer");
            return bessel_j(BesselOrder(tw), t);
        },
        py::arg("nu"), py::arg("t"));
    m.def("bessel_j1_zero", &bessel_j1_zero, py::arg("k"));
    m.def("gaussian_cdf", &gaussian_cdf, py::arg("u"));
    m.def("tau", &tau, py::arg("u"));

    // kernels
    py::class_<KernelSpec>(m, "KernelSpec")
        .def(py::init<int, int, int>(), py::arg("d"), py::arg("ell"), py::arg("eta"))
        .def_readonly("d", &KernelSpec::d)
        .def_readonly("ell", &KernelSpec::ell)
        .def_readonly("eta", &KernelSpec::eta);
    m.def("n_dim", &n_dim, py::arg("d"), py::arg("ell"));
    m.def(
        "band_count",
        [](const KernelSpec& spec) {
            const SpectralCounts c = band_count(spec);
            return py::make_tuple(c.n_ell, c.n_band, c.n_full);
        },
        py::arg("spec"));
    m.def("kernel_full_band", &kernel_full_band, py::arg("d"), py::arg("ell"), py::arg("theta"));
    m.def("kernel_band", &kernel_band, py::arg("spec"), py::arg("theta"));
    m.def(
        "kernel_asymptotic",
        [](const KernelSpec& spec, double theta) {
            const KernelAsymptotic a = kernel_asymptotic(spec, theta);
            return py::make_tuple(a.main, a.envelope);
        },
        py::arg("spec"), py::arg("theta"));
    m.def(
        "critical_radii",
        [](int d, int T, int eta) {
            const CriticalRadii cr = critical_radii(d, T, eta);
            return py::make_tuple(cr.r_bar, cr.r_under);
        },
        py::arg("d"), py::arg("T"), py::arg("eta"));
    m.def("euclidean_kernel", &euclidean_kernel, py::arg("d"), py::arg("t"));
    m.def(
        "inclusion_norm",
        [](const KernelSpec& spec, double cap_radius, int radial_nodes) {
            const InclusionNorm n = inclusion_norm(spec, cap_radius, radial_nodes);
            return py::make_tuple(n.i_squared, n.zeta, n.resolution_ok);
        },
        py::arg("spec"), py::arg("cap_radius"), py::arg("radial_nodes") = 80);

    // sampling and biases
    m.def(
        "sample_band_values",
        [](int ell, int eta, std::uint64_t seed, const std::vector<std::array<double, 3>>& pts) {
            const FieldSample s = sample_band(ell, eta, seed);
            std::vector<Vec3> vpts(pts.begin(), pts.end());
            const BandEvaluator eval(s.spec, vpts);
            std::vector<double> out((size_t)eval.point_count());
            eval.evaluate_all(s.coeffs.data(), out.data());
            return out;
        },
        py::arg("ell"), py::arg("eta"), py::arg("seed"), py::arg("points"),
        "values of one band-limited sample at the given unit vectors");
    m.def(
        "volume_bias",
        [](int ell, int eta, std::uint64_t seed, std::array<double, 3> center, double r, double u,
           int radial_nodes) {
            const KernelSpec spec(2, ell, eta);
            const Cap cap = make_cap(Vec3{center[0], center[1], center[2]}, r, radial_nodes);
            const FieldSample s = sample_band(ell, eta, seed);
            const BandEvaluator eval(spec, cap.nodes);
            std::vector<double> values((size_t)eval.point_count());
            eval.evaluate_all(s.coeffs.data(), values.data());
            const BiasReport rep = volume_bias_values(values, cap, u);
            return py::make_tuple(rep.d_tilde, rep.d_centred);
        },
        py::arg("ell"), py::arg("eta"), py::arg("seed"), py::arg("center"), py::arg("r"),
        py::arg("u") = 0.0, py::arg("radial_nodes") = 48);

    // barriers
    m.def("hex_defect", &hex_defect, py::arg("t"), py::arg("refinement") = 128);
    m.def("hex_defect_derivatives", [](int nodes) {
        const HexDerivatives d = hex_defect_derivatives(nodes);
        return py::make_tuple(d.d1, d.d2);
    },
          py::arg("nodes") = 400);
    m.def("level_barrier_limit_bias", &level_barrier_limit_bias, py::arg("u"));
    m.def(
        "sphere_sign_barrier",
        [](std::array<double, 3> x, double r, int ell, int eta, double C) {
            const BarrierFunction b = sphere_sign_barrier(Vec3{x[0], x[1], x[2]}, r, ell, eta, C);
            py::dict out;
            std::vector<std::array<double, 3>> centers;
            for (const Vec3& c : b.centers) centers.push_back({c[0], c[1], c[2]});
            out["centers"] = centers;
            out["weights"] = b.weights;
            out["ell"] = b.ell;
            out["eta"] = b.eta;
            out["eta_prime"] = b.eta_prime;
            out["s"] = b.scale;
            out["r_tilde"] = b.r_tilde;
            out["rkhs_norm"] = rkhs_norm(b);
            return out;
        },
        py::arg("x"), py::arg("r"), py::arg("ell"), py::arg("eta"), py::arg("C"));
    m.def(
        "xi_profile",
        [](double r) {
            const XiProfile p = xi_profile(r);
            return py::make_tuple(p.k, p.s, p.sign);
        },
        py::arg("r"));
    m.def(
        "xi_integral",
        [](double r, double cx, double cy, double rho) {
            return xi_integral(xi_profile(r), cx, cy, rho);
        },
        py::arg("r"), py::arg("cx"), py::arg("cy"), py::arg("rho"));

    py::dict constants;
    const BarrierConstants& bc = frozen_barrier_constants();
    constants["t0"] = bc.t0;
    constants["eps0"] = bc.eps0;
    constants["c_construct"] = bc.c_construct;
    constants["c_norm"] = bc.c_norm;
    m.attr("barrier_constants") = constants;
    m.attr("__version__") = "0.1.0";
}
