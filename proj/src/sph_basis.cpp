#include "signlab/sph_basis.hpp"

#include <cmath>

namespace signlab {

void normalized_legendre_table(int ell_max, double cos_theta, double sin_theta,
                               std::vector<double>& packed) {
    const int n = (ell_max + 1) * (ell_max + 2) / 2;
    if ((int)packed.size() < n) packed.resize(n);
    constexpr double inv_sqrt_4pi = 0.28209479177387814;  // 1/sqrt(4 pi)
    packed[0] = inv_sqrt_4pi;
    // diagonal: Pbar_{m,m} = sqrt((2m+1)/(2m)) sin(theta) Pbar_{m-1,m-1}
    for (int m = 1; m <= ell_max; ++m) {
        packed[packed_index(m, m)] =
            std::sqrt((2.0 * m + 1.0) / (2.0 * m)) * sin_theta * packed[packed_index(m - 1, m - 1)];
    }
    // first off-diagonal and the column recurrence upward in l
    for (int m = 0; m < ell_max; ++m) {
        packed[packed_index(m + 1, m)] =
            std::sqrt(2.0 * m + 3.0) * cos_theta * packed[packed_index(m, m)];
        for (int l = m + 2; l <= ell_max; ++l) {
            const double ll = (double)l, mm = (double)m;
            const double a = std::sqrt((4.0 * ll * ll - 1.0) / (ll * ll - mm * mm));
            const double b =
                std::sqrt(((ll - 1.0) * (ll - 1.0) - mm * mm) / (4.0 * (ll - 1.0) * (ll - 1.0) - 1.0));
            packed[packed_index(l, m)] =
                a * (cos_theta * packed[packed_index(l - 1, m)] - b * packed[packed_index(l - 2, m)]);
        }
    }
}

void fill_basis_row(int l0, int l1, double cos_theta, double sin_theta, double phi,
                    const double* degree_scale, std::vector<double>& packed, double* out) {
    normalized_legendre_table(l1, cos_theta, sin_theta, packed);
    constexpr double sqrt2 = 1.4142135623730951;
    int idx = 0;
    for (int l = l0; l <= l1; ++l) {
        const double s = degree_scale ? degree_scale[l - l0] : 1.0;
        out[idx++] = s * packed[packed_index(l, 0)];
        for (int m = 1; m <= l; ++m) {
            const double p = sqrt2 * s * packed[packed_index(l, m)];
            out[idx++] = p * std::cos(m * phi);
            out[idx++] = p * std::sin(m * phi);
        }
    }
}

}  // namespace signlab
