#pragma once

// Internal extended-precision (binary128) LU kernel shared by solve,
// determinant, and the spectral transition oracle. Row equilibration plus
// scaled partial pivoting keeps the pivot test meaningful for matrices
// whose rows differ in scale by many orders of magnitude (Vandermonde
// matrices of a stiff spectrum being the motivating case).

#include <quadmath.h>

#include <cmath>
#include <vector>

namespace gaincert::detail {

using f128 = __float128;

inline double to_double(f128 x) { return static_cast<double>(x); }

struct LuF128 {
    int n = 0;
    std::vector<f128> lu;       // row-major factors of the equilibrated matrix
    std::vector<f128> scale;    // original row infinity-norms
    std::vector<int> perm;      // perm[k] = original row stored in position k
    int sign = 1;
    double min_scaled_pivot = 0.0;  // smallest |pivot| of the equilibrated matrix
    bool singular = false;          // scaled pivot below threshold (or zero row)
};

// Pivot threshold on the row-equilibrated matrix, i.e. relative to the
// norm scale of the input. 1e-14 leaves two decades of headroom above
// double roundoff while still rejecting rank-deficient inputs.
inline constexpr double kPivotTol = 1e-14;

inline LuF128 lu_factor(const f128* a, int n) {
    LuF128 f;
    f.n = n;
    f.lu.assign(a, a + static_cast<size_t>(n) * n);
    f.scale.assign(n, f128(0));
    f.perm.resize(n);
    f.min_scaled_pivot = 1.0 / 0.0;

    auto at = [&](int i, int j) -> f128& { return f.lu[static_cast<size_t>(i) * n + j]; };

    for (int i = 0; i < n; ++i) {
        f.perm[i] = i;
        f128 s = 0;
        for (int j = 0; j < n; ++j) {
            f128 v = fabsq(at(i, j));
            if (v > s) s = v;
        }
        if (s == 0) {  // zero row: rank deficient, determinant exactly 0
            f.singular = true;
            f.min_scaled_pivot = 0.0;
            return f;
        }
        f.scale[i] = s;
        for (int j = 0; j < n; ++j) at(i, j) /= s;
    }

    for (int k = 0; k < n; ++k) {
        int piv = k;
        f128 best = fabsq(at(k, k));
        for (int r = k + 1; r < n; ++r) {
            f128 v = fabsq(at(r, k));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (piv != k) {
            for (int j = 0; j < n; ++j) std::swap(at(k, j), at(piv, j));
            std::swap(f.perm[k], f.perm[piv]);
            std::swap(f.scale[k], f.scale[piv]);
            f.sign = -f.sign;
        }
        double p = to_double(fabsq(at(k, k)));
        if (p < f.min_scaled_pivot) f.min_scaled_pivot = p;
        if (p < kPivotTol) {
            f.singular = true;
            if (p == 0.0) return f;  // cannot eliminate further
        }
        f128 inv = f128(1) / at(k, k);
        for (int r = k + 1; r < n; ++r) {
            f128 m = at(r, k) * inv;
            at(r, k) = m;
            for (int j = k + 1; j < n; ++j) at(r, j) -= m * at(k, j);
        }
    }
    return f;
}

// Solve a*x = b for one right-hand side given the factorization of the
// equilibrated matrix: P D^{-1} a = L U, so x = U^{-1} L^{-1} P D^{-1} b.
// b and x have length n; aliasing is fine.
inline void lu_solve(const LuF128& f, const f128* b, f128* x) {
    const int n = f.n;
    std::vector<f128> y(n);
    for (int k = 0; k < n; ++k) y[k] = b[f.perm[k]] / f.scale[k];
    for (int k = 0; k < n; ++k)
        for (int j = 0; j < k; ++j) y[k] -= f.lu[static_cast<size_t>(k) * n + j] * y[j];
    for (int k = n - 1; k >= 0; --k) {
        for (int j = k + 1; j < n; ++j) y[k] -= f.lu[static_cast<size_t>(k) * n + j] * y[j];
        y[k] /= f.lu[static_cast<size_t>(k) * n + k];
    }
    for (int k = 0; k < n; ++k) x[k] = y[k];
}

// det(a) = sign * prod(U_kk) * prod(row scales). Returns 0 for inputs the
// factorization flags as exactly rank deficient.
inline f128 lu_determinant(const LuF128& f) {
    if (f.singular && f.min_scaled_pivot == 0.0) return 0;
    f128 det = f.sign;
    for (int k = 0; k < f.n; ++k) det *= f.lu[static_cast<size_t>(k) * f.n + k];
    for (int k = 0; k < f.n; ++k) det *= f.scale[k];
    return det;
}

}  // namespace gaincert::detail
