#pragma once

#include "gaincert/matcore.hpp"

namespace gaincert {

// Open-loop pair (a, b) with state dimension n and input dimension m.
struct Plant {
    Mat a;  // n x n
    Mat b;  // n x m, m >= 1

    Plant(Mat a_, Mat b_);
    int n() const { return static_cast<int>(a.rows()); }
    int m() const { return static_cast<int>(b.cols()); }
};

// Similarity transform into the single-input canonical form (superdiagonal
// ones, input entering the last state): t_inv * a * t = a_c, t_inv * b = b_c.
struct CanonicalForm {
    Mat t;
    Mat t_inv;
    Mat a_c;                   // constructed canonical matrix
    Mat b_c;                   // last standard basis vector
    CharPoly open_loop_coeffs; // characteristic polynomial of the original a
};

// Output of the constructive single-input reduction: v picks a nonzero
// input combination, k0 pre-closes the loop so (a + b*k0, b*v) is
// controllable from the single column b*v.
struct HeymannReduction {
    Vec v;         // length m
    Mat k0;        // m x n
    Mat b_single;  // n x 1, equals b*v
    Mat basis;     // n x n, columns x_1..x_n built greedily
    Mat controls;  // m x n, columns u_1..u_n with u_n = 0
};

// [B, AB, ..., A^{n-1}B], horizontally concatenated.
Mat controllability_matrix(const Plant& p);

bool is_controllable(const Plant& p, double tol = 1e-9);

// T = [b, Ab, ..., A^{n-1}b] * H with H the upper-anti-triangular Toeplitz
// of the characteristic coefficients (H(i,j) = c_{n-1-i-j}, c_0 = 1).
// Throws NotControllableError when the rank test fails at tol.
CanonicalForm brunovsky_transform(const Mat& a, const Mat& b, double tol = 1e-9);

// Greedy constructive reduction: v is the first standard basis vector whose
// image under b is nonzero; the basis grows by x_{i+1} = a*x_i + b*u_i where
// u_i is the first candidate in (0, e_1, ..., e_m) keeping the set
// independent; k0 maps x_i to u_i (u_n = 0). Single-input plants pass
// through with v = (1), k0 = 0.
HeymannReduction heymann_reduce(const Plant& p, double tol = 1e-9);

} // namespace gaincert
