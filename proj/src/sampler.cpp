#include "signlab/sampler.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <fstream>

#include "signlab/rng.hpp"
#include "signlab/sph_basis.hpp"

#include <json.hpp>

namespace signlab {

namespace {
constexpr double kFourPi = 4.0 * 3.14159265358979323846;

void draw_gaussians(std::uint64_t seed, std::uint64_t stream, std::vector<double>& out) {
    PhiloxRng rng(seed, stream);
    for (auto& v : out) v = rng.normal();
}
}  // namespace

double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

double geodesic_angle(const Vec3& a, const Vec3& b) {
    const double c = std::clamp(dot(a, b), -1.0, 1.0);
    return std::acos(c);
}

Vec3 normalized(const Vec3& v) {
    const double n = std::sqrt(dot(v, v));
    if (n == 0.0) throw std::invalid_argument("normalized: zero vector");
    return {v[0] / n, v[1] / n, v[2] / n};
}

double PointSet::angle(int i, int j) const {
    const int stride = d + 1;
    double c = 0.0, ni = 0.0, nj = 0.0;
    for (int k = 0; k < stride; ++k) {
        const double a = coords[(size_t)i * stride + k];
        const double b = coords[(size_t)j * stride + k];
        c += a * b;
        ni += a * a;
        nj += b * b;
    }
    c /= std::sqrt(ni * nj);
    return std::acos(std::clamp(c, -1.0, 1.0));
}

PointSet PointSet::from_vec3(const std::vector<Vec3>& pts) {
    PointSet ps;
    ps.d = 2;
    ps.coords.reserve(pts.size() * 3);
    for (const auto& p : pts) {
        const Vec3 u = normalized(p);
        ps.coords.insert(ps.coords.end(), u.begin(), u.end());
    }
    return ps;
}

std::vector<double> band_degree_scales(const KernelSpec& spec) {
    const double n_band = (double)band_count(spec).n_band;
    std::vector<double> scales((size_t)spec.eta);
    for (int l = spec.ell - spec.eta + 1; l <= spec.ell; ++l) {
        const double nl = (double)n_dim(spec.d, l);
        // H_l carries sqrt(4pi / (2l+1)); the band adds sqrt(n_l / N).
        scales[(size_t)(l - (spec.ell - spec.eta + 1))] =
            std::sqrt(kFourPi / (2.0 * l + 1.0)) * std::sqrt(nl / n_band);
    }
    return scales;
}

FieldSample sample_harmonic(int ell, std::uint64_t seed, std::uint64_t stream) {
    return sample_band(ell, 1, seed, stream);
}

FieldSample sample_band(int ell, int eta, std::uint64_t seed, std::uint64_t stream) {
    FieldSample s;
    s.spec = KernelSpec(2, ell, eta);
    s.mode = SampleMode::Basis;
    s.seed = seed;
    s.coeffs.resize((size_t)band_count(s.spec).n_band);
    draw_gaussians(seed, stream, s.coeffs);
    return s;
}

FieldSample sample_factorized(const PointSet& points, const KernelSpec& spec, double jitter,
                              std::uint64_t seed, std::uint64_t stream) {
    const int n = points.count();
    if (n == 0) throw std::invalid_argument("sample_factorized: empty point set");
    if (jitter < 0.0) throw std::invalid_argument("sample_factorized: jitter must be >= 0");

    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i) {
        K(i, i) = 1.0;
        for (int j = i + 1; j < n; ++j) {
            const double theta = points.angle(i, j);
            if (theta == 0.0)
                throw std::invalid_argument("sample_factorized: points must be pairwise distinct");
            K(i, j) = K(j, i) = kernel_band(spec, theta);
        }
    }

    double eps = jitter > 0.0 ? jitter : 1e-10;
    Eigen::LLT<Eigen::MatrixXd> llt;
    bool ok = false;
    double applied = 0.0;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        applied = eps * K.trace() / n;
        Eigen::MatrixXd Kj = K + applied * Eigen::MatrixXd::Identity(n, n);
        llt.compute(Kj);
        if (llt.info() == Eigen::Success) {
            ok = true;
            break;
        }
        eps *= 10.0;
    }
    if (!ok)
        throw std::runtime_error(
            "sample_factorized: kernel matrix not numerically PSD (jitter too small)");

    Eigen::VectorXd g(n);
    {
        std::vector<double> buf((size_t)n);
        draw_gaussians(seed, stream, buf);
        for (int i = 0; i < n; ++i) g(i) = buf[(size_t)i];
    }

    FieldSample s;
    s.spec = spec;
    s.mode = SampleMode::Factorized;
    s.seed = seed;
    s.points = points;
    s.values.resize((size_t)n);
    Eigen::VectorXd v = llt.matrixL() * g;
    for (int i = 0; i < n; ++i) s.values[(size_t)i] = v(i);
    return s;
}

double evaluate(const FieldSample& sample, const Vec3& x) {
    if (sample.mode != SampleMode::Basis)
        throw std::invalid_argument("evaluate: factorization-mode samples are only defined on "
                                    "their own point set");
    const Vec3 u = normalized(x);
    const KernelSpec& spec = sample.spec;
    const int l0 = spec.ell - spec.eta + 1, l1 = spec.ell;
    const auto scales = band_degree_scales(spec);
    const double ct = u[2];
    const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
    const double phi = std::atan2(u[1], u[0]);
    std::vector<double> packed, row((size_t)basis_size(l0, l1));
    fill_basis_row(l0, l1, ct, st, phi, scales.data(), packed, row.data());
    double acc = 0.0;
    for (size_t k = 0; k < row.size(); ++k) acc += row[k] * sample.coeffs[k];
    return acc;
}

BandEvaluator::BandEvaluator(const KernelSpec& spec, const std::vector<Vec3>& points) {
    if (spec.d != 2) throw std::invalid_argument("BandEvaluator: basis mode requires d = 2");
    const int l0 = spec.ell - spec.eta + 1, l1 = spec.ell;
    n_points_ = (int)points.size();
    n_basis_ = basis_size(l0, l1);
    const auto scales = band_degree_scales(spec);
    phi_.resize((size_t)n_points_ * n_basis_);
    std::vector<double> packed;
    for (int i = 0; i < n_points_; ++i) {
        const Vec3 u = normalized(points[(size_t)i]);
        const double ct = u[2];
        const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
        const double phi = std::atan2(u[1], u[0]);
        fill_basis_row(l0, l1, ct, st, phi, scales.data(), packed,
                       phi_.data() + (size_t)i * n_basis_);
    }
}

void BandEvaluator::evaluate_all(const double* coeffs, double* values_out) const {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(
        phi_.data(), n_points_, n_basis_);
    Eigen::Map<const Eigen::VectorXd> c(coeffs, n_basis_);
    Eigen::Map<Eigen::VectorXd> v(values_out, n_points_);
    v.noalias() = M * c;
}

void BandEvaluator::evaluate_batch(const double* coeffs, int n_cols, double* values_out) const {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> M(
        phi_.data(), n_points_, n_basis_);
    Eigen::Map<const Eigen::MatrixXd> C(coeffs, n_basis_, n_cols);
    Eigen::Map<Eigen::MatrixXd> V(values_out, n_points_, n_cols);
    V.noalias() = M * C;
}

void export_sample(const FieldSample& sample, const std::string& path,
                   const std::string& format) {
    nlohmann::json header = {
        {"d", sample.spec.d},          {"ell", sample.spec.ell},
        {"eta", sample.spec.eta},      {"seed", sample.seed},
        {"mode", sample.mode == SampleMode::Basis ? "basis" : "factorized"},
    };
    const auto& data = sample.mode == SampleMode::Basis ? sample.coeffs : sample.values;
    if (format == "json") {
        header["data"] = data;
        std::ofstream out(path);
        if (!out) throw std::runtime_error("export_sample: cannot open " + path);
        out << header.dump(2) << "\n";
    } else if (format == "csv") {
        std::ofstream out(path);
        if (!out) throw std::runtime_error("export_sample: cannot open " + path);
        out << "index,value\n";
        out.precision(17);
        for (size_t i = 0; i < data.size(); ++i) out << i << "," << data[i] << "\n";
        std::ofstream hdr(path + ".json");
        if (!hdr) throw std::runtime_error("export_sample: cannot open " + path + ".json");
        hdr << header.dump(2) << "\n";
    } else {
        throw std::invalid_argument("export_sample: format must be csv or json");
    }
}

}  // namespace signlab
