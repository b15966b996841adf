#pragma once

// Real orthonormal spherical harmonics on S^2, built from fully normalized
// associated Legendre functions (the 1/sqrt(4pi) factor is folded in).
// Basis ordering for a degree window [l0, l1]:
//   for l = l0..l1:  m = 0 term, then (cos, sin) pairs for m = 1..l,
// giving sum over the window of (2l+1) functions in total.

#include <vector>

namespace signlab {

// Fills pbar[m*(stride)+... ] no: computes Pbar_{l,m}(cos_theta) for all
// 0 <= m <= l <= ell_max into a packed lower-triangular array, index
// l*(l+1)/2 + m. Stable column recurrence; values stay O(1) by construction.
void normalized_legendre_table(int ell_max, double cos_theta, double sin_theta,
                               std::vector<double>& packed);

inline int packed_index(int l, int m) { return l * (l + 1) / 2 + m; }

// Number of real basis functions in the window [l0, l1].
inline int basis_size(int l0, int l1) {
    int n = 0;
    for (int l = l0; l <= l1; ++l) n += 2 * l + 1;
    return n;
}

// Writes the real basis values at (theta, phi) for the window [l0, l1] into
// out (length basis_size(l0, l1)), scaled per degree by degree_scale[l - l0]
// (pass nullptr for unit scaling). `packed` is scratch for the Legendre table.
void fill_basis_row(int l0, int l1, double cos_theta, double sin_theta, double phi,
                    const double* degree_scale, std::vector<double>& packed, double* out);

}  // namespace signlab
