#pragma once

// Gaussian random spherical harmonics and band-limited waves on S^2 in basis
// mode, plus a kernel-factorization sampler on finite point sets for any d.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "signlab/kernels.hpp"

namespace signlab {

using Vec3 = std::array<double, 3>;

double dot(const Vec3& a, const Vec3& b);
double geodesic_angle(const Vec3& a, const Vec3& b);
Vec3 normalized(const Vec3& v);

// Points on S^d. For d = 2 entries are unit 3-vectors; for general d the
// ambient coordinates are stored flat with stride d+1.
struct PointSet {
    int d = 2;
    std::vector<double> coords;  // size() = count * (d + 1)

    int count() const { return d >= 0 ? (int)(coords.size() / (d + 1)) : 0; }
    double angle(int i, int j) const;
    static PointSet from_vec3(const std::vector<Vec3>& pts);
};

enum class SampleMode { Basis, Factorized };

// One realization of the Gaussian field. Basis mode stores i.i.d. N(0,1)
// coefficients over the window (per-degree weights are applied at evaluation
// time); factorized mode stores values on its generating PointSet.
struct FieldSample {
    KernelSpec spec{2, 1, 1};
    SampleMode mode = SampleMode::Basis;
    std::uint64_t seed = 0;
    std::vector<double> coeffs;  // basis mode: N(ell,eta) Gaussian coefficients
    std::vector<double> values;  // factorized mode: one value per point
    PointSet points;             // factorized mode only
};

// Random degree-ell spherical harmonic H_ell on S^2 (2 ell + 1 coefficients).
FieldSample sample_harmonic(int ell, std::uint64_t seed, std::uint64_t stream = 0);

// Band-limited wave f_{ell,eta} on S^2; eta = 1 coincides with
// sample_harmonic (same seed, same coefficients).
FieldSample sample_band(int ell, int eta, std::uint64_t seed, std::uint64_t stream = 0);

// Exact finite-dimensional Gaussian vector with covariance
// K_{ell,eta}(d(x_i, x_j)) on the given points, via a Cholesky factor of the
// kernel matrix plus jitter * I. The jitter is relative to the mean diagonal
// and is raised x10 up to 3 times before failing.
FieldSample sample_factorized(const PointSet& points, const KernelSpec& spec, double jitter,
                              std::uint64_t seed, std::uint64_t stream = 0);

// Field value of a basis-mode sample at a point of S^2.
double evaluate(const FieldSample& sample, const Vec3& x);

// Precomputed evaluation operator for a fixed point set: one row of basis
// values (with the band weights folded in) per point, so that a realization
// is values = Phi * coeffs. Rows are built once and reused across replicates.
class BandEvaluator {
public:
    BandEvaluator(const KernelSpec& spec, const std::vector<Vec3>& points);

    int point_count() const { return n_points_; }
    int coeff_count() const { return n_basis_; }

    // values[i] = sum_k Phi(i, k) coeffs[k]
    void evaluate_all(const double* coeffs, double* values_out) const;

    // column-major batch: coeffs (n_basis x n_cols), values (n_points x n_cols)
    void evaluate_batch(const double* coeffs, int n_cols, double* values_out) const;

private:
    int n_points_ = 0;
    int n_basis_ = 0;
    std::vector<double> phi_;  // row-major n_points x n_basis
};

// Per-degree evaluation weights sqrt(4 pi n_l' / ((2 l' + 1) N(ell,eta)))
// turning i.i.d. coefficients into the unit-variance band field.
std::vector<double> band_degree_scales(const KernelSpec& spec);

// Writes coefficients as CSV plus a JSON sidecar header, or a single JSON
// document, per `format` ("csv" or "json").
void export_sample(const FieldSample& sample, const std::string& path, const std::string& format);

}  // namespace signlab
