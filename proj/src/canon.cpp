#include "gaincert/canon.hpp"

#include <cstdio>
#include <stdexcept>

#include "gaincert/errors.hpp"

namespace gaincert {

Plant::Plant(Mat a_, Mat b_) : a(std::move(a_)), b(std::move(b_)) {
    if (a.rows() == 0 || a.rows() != a.cols())
        throw std::invalid_argument("Plant: a must be square and non-empty");
    if (b.rows() != a.rows() || b.cols() < 1)
        throw std::invalid_argument("Plant: b must have n rows and at least one column");
    if (!a.allFinite() || !b.allFinite())
        throw std::invalid_argument("Plant: non-finite entries");
}

Mat controllability_matrix(const Plant& p) {
    const int n = p.n();
    const int m = p.m();
    Mat c(n, static_cast<Eigen::Index>(n) * m);
    Mat block = p.b;
    for (int i = 0; i < n; ++i) {
        c.middleCols(static_cast<Eigen::Index>(i) * m, m) = block;
        if (i + 1 < n) block = p.a * block;
    }
    return c;
}

bool is_controllable(const Plant& p, double tol) {
    return rank(controllability_matrix(p), tol) == p.n();
}

CanonicalForm brunovsky_transform(const Mat& a, const Mat& b, double tol) {
    if (b.cols() != 1) throw std::invalid_argument("brunovsky_transform: b must be a column");
    Plant p(a, b);
    const int n = p.n();
    if (!is_controllable(p, tol))
        throw NotControllableError("brunovsky_transform: (a, b) fails the rank test");

    CanonicalForm cf;
    cf.open_loop_coeffs = char_poly(a);
    const std::vector<double>& c = cf.open_loop_coeffs.coeffs;

    // Upper-anti-triangular Toeplitz of the characteristic coefficients:
    // first row (c_{n-1} ... c_1 1), constant along anti-diagonals.
    Mat h = Mat::Zero(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n - i; ++j) {
            const int k = n - 1 - i - j;  // coefficient index, 0 meaning the leading 1
            h(i, j) = (k == 0) ? 1.0 : c[k - 1];
        }

    cf.t = controllability_matrix(p) * h;
    cf.t_inv = solve(cf.t, Mat::Identity(n, n));

    // Canonical pair built from the characteristic coefficients directly:
    // bottom row entry i is a_{i+1} = -c_{n-i} so that the last state obeys
    // x_n' = sum_i a_i x_i + u.
    cf.a_c = Mat::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) cf.a_c(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) cf.a_c(n - 1, j) = -c[n - 1 - j];
    cf.b_c = Mat::Zero(n, 1);
    cf.b_c(n - 1, 0) = 1.0;
    return cf;
}

HeymannReduction heymann_reduce(const Plant& p, double tol) {
    const int n = p.n();
    const int m = p.m();
    if (!is_controllable(p, tol))
        throw NotControllableError("heymann_reduce: (a, b) fails the rank test");

    HeymannReduction red;
    red.v = Vec::Zero(m);
    const double bnorm = operator_norm(p.b);
    int picked = -1;
    for (int j = 0; j < m; ++j)
        if (p.b.col(j).norm() > tol * bnorm) {
            picked = j;
            break;
        }
    if (picked < 0)
        throw NotControllableError("heymann_reduce: b has no usable column");
    red.v(picked) = 1.0;
    red.b_single = p.b.col(picked);

    red.basis = Mat::Zero(n, n);
    red.controls = Mat::Zero(m, n);
    red.basis.col(0) = red.b_single;

    // Grow the basis greedily; candidate controls are tried in the fixed
    // order (0, e_1, ..., e_m) and the first one keeping the columns
    // independent wins, which makes the output deterministic.
    for (int i = 0; i + 1 < n; ++i) {
        bool placed = false;
        for (int cand = 0; cand <= m && !placed; ++cand) {
            Vec u = Vec::Zero(m);
            if (cand > 0) u(cand - 1) = 1.0;
            Vec x_next = p.a * red.basis.col(i) + p.b * u;
            Mat trial(n, i + 2);
            trial.leftCols(i + 1) = red.basis.leftCols(i + 1);
            trial.col(i + 1) = x_next;
            if (rank(trial, tol) == i + 2) {
                red.basis.col(i + 1) = x_next;
                red.controls.col(i) = u;
                placed = true;
            }
        }
        if (!placed) {
            char msg[128];
            std::snprintf(msg, sizeof msg,
                          "heymann_reduce: no candidate control extends the basis at step %d "
                          "(tolerance trouble)",
                          i + 1);
            throw ReductionFailureError(msg);
        }
    }
    // u_n = 0 (already zero); k0 solves k0 * basis = controls.
    red.k0 = solve(red.basis.transpose(), red.controls.transpose()).transpose();
    return red;
}

}  // namespace gaincert
