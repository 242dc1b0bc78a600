#pragma once

#include <Eigen/Dense>
#include <vector>

namespace gaincert {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Monic characteristic polynomial x^n + c_1 x^{n-1} + ... + c_n.
// coeffs holds (c_1, ..., c_n); the leading 1 is implicit.
struct CharPoly {
    int degree = 0;
    std::vector<double> coeffs;
};

// Largest singular value (spectral norm). Deterministic; accurate to
// ~1e-12 relative for well-scaled inputs.
double operator_norm(const Mat& m);

// e^{f*t} by scaling-and-squaring with diagonal Pade approximants
// (orders 3/5/7/9/13, switching on the 1-norm of f*t).
// Throws std::overflow_error if the result overflows doubles.
Mat matrix_exponential(const Mat& f, double t);

// Faddeev-LeVerrier recurrence; exact in the absence of rounding.
// Throws std::invalid_argument for non-square input or degree > 64.
CharPoly char_poly(const Mat& m);

// Numerical rank: number of singular values above tol * sigma_max.
int rank(const Mat& m, double tol = 1e-10);

// Solve a * x = rhs by LU with row equilibration and scaled partial
// pivoting, carried out in extended (128-bit) precision and rounded to
// double on output. Throws SingularMatrixError when an equilibrated
// pivot falls below 1e-14 (i.e. 1e-14 x the norm scale of a).
Mat solve(const Mat& a, const Mat& rhs);

// Determinant via the same equilibrated LU factorization.
double determinant(const Mat& a);

// Vandermonde matrix of the given nodes: row i holds nodes[j]^i
// (row 0 is all ones). Throws DuplicateNodeError on coincident nodes.
Mat vandermonde(const std::vector<double>& nodes);

} // namespace gaincert
