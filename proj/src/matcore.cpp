#include "gaincert/matcore.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "f128_lu.hpp"
#include "gaincert/errors.hpp"

namespace gaincert {

double operator_norm(const Mat& m) {
    if (m.size() == 0) throw std::invalid_argument("operator_norm: empty matrix");
    if (!m.allFinite()) throw std::invalid_argument("operator_norm: non-finite entries");
    // Jacobi SVD: slower than bidiagonalization but fully deterministic and
    // accurate to ~1e-12 relative at the dimensions this library handles.
    Eigen::JacobiSVD<Mat> svd(m);
    return svd.singularValues()(0);
}

namespace {

// Diagonal Pade approximant p/q of e^x of order `deg`, evaluated at a
// matrix argument using the even/odd splitting: p(A) = V + U, q(A) = V - U
// with U odd and V even in A.
struct PadeUV {
    Mat u;
    Mat v;
};

PadeUV pade_uv(const Mat& a, int deg) {
    static const double b3[] = {120, 60, 12, 1};
    static const double b5[] = {30240, 15120, 3360, 420, 30, 1};
    static const double b7[] = {17297280, 8648640, 1995840, 277200, 25200, 1512, 56, 1};
    static const double b9[] = {17643225600, 8821612800, 2075673600, 302702400, 30270240,
                                2162160,     110880,     3960,       90,        1};
    static const double b13[] = {64764752532480000,
                                 32382376266240000,
                                 7771770303897600,
                                 1187353796428800,
                                 129060195264000,
                                 10559470521600,
                                 670442572800,
                                 33522128640,
                                 1323241920,
                                 40840800,
                                 960960,
                                 16380,
                                 182,
                                 1};

    const auto n = a.rows();
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a;

    if (deg == 3) {
        const double* b = b3;
        return {a * (b[3] * a2 + b[1] * id), b[2] * a2 + b[0] * id};
    }
    const Mat a4 = a2 * a2;
    if (deg == 5) {
        const double* b = b5;
        return {a * (b[5] * a4 + b[3] * a2 + b[1] * id), b[4] * a4 + b[2] * a2 + b[0] * id};
    }
    const Mat a6 = a4 * a2;
    if (deg == 7) {
        const double* b = b7;
        return {a * (b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id),
                b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id};
    }
    if (deg == 9) {
        const Mat a8 = a6 * a2;
        const double* b = b9;
        return {a * (b[9] * a8 + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id),
                b[8] * a8 + b[6] * a6 + b[4] * a4 + b[2] * a2 + b[0] * id};
    }
    const double* b = b13;
    const Mat w = a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2);
    const Mat u = a * (w + b[7] * a6 + b[5] * a4 + b[3] * a2 + b[1] * id);
    const Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 +
                  b[2] * a2 + b[0] * id;
    return {u, v};
}

// Parlett-Reinsch balancing, radix-2 scaling phase only. Rescales `a` in
// place to d^{-1} a d with comparable row/column 1-norms, where d(i) = 2^e_i,
// and returns the exponents. Companion-form closed loops arrive here with
// entries spanning ~12 orders of magnitude; without balancing the squaring
// phase runs 30+ rounds through a transient hump and loses every significant
// digit. Powers of two keep the similarity exact in floating point, and
// carrying exponents as integers lets the caller undo it with ldexp even
// when a ratio d(i)/d(j) alone would overflow a double.
std::vector<int> balance_scales(Mat& a) {
    const Eigen::Index n = a.rows();
    std::vector<int> e(static_cast<size_t>(n), 0);
    for (int sweep = 0; sweep < 100; ++sweep) {
        bool converged = true;
        for (Eigen::Index i = 0; i < n; ++i) {
            double c = 0.0;
            double r = 0.0;
            for (Eigen::Index j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;
            const double s = c + r;
            int k = 0;
            while (c < r / 2.0) {
                c *= 2.0;
                r /= 2.0;
                ++k;
            }
            while (c >= r * 2.0) {
                c /= 2.0;
                r *= 2.0;
                --k;
            }
            if (c + r < 0.95 * s) {
                converged = false;
                e[static_cast<size_t>(i)] += k;
                for (Eigen::Index j = 0; j < n; ++j) {
                    a(j, i) = std::ldexp(a(j, i), k);
                    a(i, j) = std::ldexp(a(i, j), -k);
                }
            }
        }
        if (converged) break;
    }
    return e;
}

}  // namespace

Mat matrix_exponential(const Mat& f, double t) {
    if (f.rows() != f.cols()) throw std::invalid_argument("matrix_exponential: matrix not square");
    if (!f.allFinite() || !std::isfinite(t))
        throw std::invalid_argument("matrix_exponential: non-finite input");

    Mat a = f * t;
    const std::vector<int> bal = balance_scales(a);
    // 1-norm switching thresholds for Pade orders 3/5/7/9/13 (the standard
    // scaling-and-squaring order selection).
    const double theta3 = 1.495585217958292e-2;
    const double theta5 = 2.539398330063230e-1;
    const double theta7 = 9.504178996162932e-1;
    const double theta9 = 2.097847961257068e0;
    const double theta13 = 5.371920351148152e0;

    const double norm1 = a.cwiseAbs().colwise().sum().maxCoeff();
    if (!std::isfinite(norm1)) throw std::overflow_error("matrix_exponential: f*t overflows");

    int squarings = 0;
    int deg = 13;
    if (norm1 <= theta3) {
        deg = 3;
    } else if (norm1 <= theta5) {
        deg = 5;
    } else if (norm1 <= theta7) {
        deg = 7;
    } else if (norm1 <= theta9) {
        deg = 9;
    } else if (norm1 > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm1 / theta13)));
        a /= std::ldexp(1.0, squarings);
    }

    PadeUV p = pade_uv(a, deg);
    Mat num = p.v + p.u;
    Mat den = p.v - p.u;
    Mat r = Eigen::PartialPivLU<Mat>(den).solve(num);
    for (int i = 0; i < squarings; ++i) {
        r = r * r;
        if (!r.allFinite())
            throw std::overflow_error("matrix_exponential: result exceeds double range");
    }
    // Undo the balancing similarity: e^{f t} = d e^{d^{-1} f t d} d^{-1}.
    // ldexp applies the exact power-of-two ratio without forming it.
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j)
            r(i, j) = std::ldexp(r(i, j), bal[static_cast<size_t>(i)] - bal[static_cast<size_t>(j)]);
    if (!r.allFinite()) throw std::overflow_error("matrix_exponential: result exceeds double range");
    return r;
}

CharPoly char_poly(const Mat& m) {
    if (m.rows() != m.cols()) throw std::invalid_argument("char_poly: matrix not square");
    const int n = static_cast<int>(m.rows());
    if (n > 64) throw std::invalid_argument("char_poly: dimension above the supported cap of 64");
    if (!m.allFinite()) throw std::invalid_argument("char_poly: non-finite entries");

    // Faddeev-LeVerrier: N_0 = I; M_k = A N_{k-1}; c_k = -tr(M_k)/k;
    // N_k = M_k + c_k I. Division-light and exact for integer matrices
    // whose intermediates stay below 2^53.
    CharPoly cp;
    cp.degree = n;
    cp.coeffs.resize(n);
    Mat nmat = Mat::Identity(n, n);
    for (int k = 1; k <= n; ++k) {
        Mat mk = m * nmat;
        double ck = -mk.trace() / k;
        cp.coeffs[k - 1] = ck;
        nmat = mk + ck * Mat::Identity(n, n);
    }
    return cp;
}

int rank(const Mat& m, double tol) {
    if (tol <= 0) throw std::invalid_argument("rank: tolerance must be positive");
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    const double cut = tol * sv(0);
    int r = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cut) ++r;
    return r;
}

Mat solve(const Mat& a, const Mat& rhs) {
    if (a.rows() != a.cols()) throw std::invalid_argument("solve: matrix not square");
    if (rhs.rows() != a.rows()) throw std::invalid_argument("solve: dimension mismatch");
    const int n = static_cast<int>(a.rows());

    std::vector<detail::f128> aq(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) aq[static_cast<size_t>(i) * n + j] = a(i, j);

    detail::LuF128 f = detail::lu_factor(aq.data(), n);
    if (f.singular) {
        char msg[160];
        std::snprintf(msg, sizeof msg,
                      "solve: matrix numerically singular (equilibrated pivot %.3e below %.0e)",
                      f.min_scaled_pivot, detail::kPivotTol);
        throw SingularMatrixError(msg);
    }

    Mat x(n, rhs.cols());
    std::vector<detail::f128> col(n), sol(n);
    for (Eigen::Index c = 0; c < rhs.cols(); ++c) {
        for (int i = 0; i < n; ++i) col[i] = rhs(i, c);
        detail::lu_solve(f, col.data(), sol.data());
        for (int i = 0; i < n; ++i) x(i, c) = detail::to_double(sol[i]);
    }
    return x;
}

double determinant(const Mat& a) {
    if (a.rows() != a.cols()) throw std::invalid_argument("determinant: matrix not square");
    const int n = static_cast<int>(a.rows());
    std::vector<detail::f128> aq(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) aq[static_cast<size_t>(i) * n + j] = a(i, j);
    detail::LuF128 f = detail::lu_factor(aq.data(), n);
    return detail::to_double(detail::lu_determinant(f));
}

Mat vandermonde(const std::vector<double>& nodes) {
    const int n = static_cast<int>(nodes.size());
    if (n == 0) throw std::invalid_argument("vandermonde: empty node list");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (nodes[i] == nodes[j]) {
                char msg[96];
                std::snprintf(msg, sizeof msg, "vandermonde: nodes %d and %d coincide (%.17g)", i,
                              j, nodes[i]);
                throw DuplicateNodeError(msg);
            }
    Mat v(n, n);
    for (int j = 0; j < n; ++j) {
        double p = 1.0;
        for (int i = 0; i < n; ++i) {
            v(i, j) = p;
            p *= nodes[j];
        }
    }
    return v;
}

}  // namespace gaincert
