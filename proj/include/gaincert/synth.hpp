#pragma once

#include <utility>
#include <vector>

#include "gaincert/canon.hpp"
#include "gaincert/matcore.hpp"

namespace gaincert {

// Placed spectrum: values[0] = -lambda, unit spacing downward, all real.
struct EigenvalueLadder {
    std::vector<double> values;
    double lambda_min = 0;  // |values.front()|
    double lambda_max = 0;  // |values.back()|
    double rho = 1;         // spread bound: n, or 1 when n = 1
};

// Everything needed to audit the synthesized gain and its overshoot
// envelope |e^{(a+b*k_gain)t}| <= m_total * lambda^l_exponent * e^{-lambda*t}.
struct GainCertificate {
    Mat k_gain;                      // m x n
    Eigen::RowVectorXd k_canonical;  // single-input canonical gain k~
    Vec beta;                        // closed-loop canonical bottom row
    EigenvalueLadder ladder;
    int l_exponent = 0;
    double m_constant = 1;  // n * n! * rho^L
    double m_total = 1;     // m_constant * |T| * |T^-1|
    std::pair<double, double> transform_norms{1, 1};
    double lambda_request = 1;
    // Intermediate artifacts, retained for audit.
    HeymannReduction reduction;
    CanonicalForm canonical;
};

struct SquashingParams {
    double tau0 = 0;
    double delta = 0;
};

struct CertificateConstants {
    int l = 0;
    double m = 1;
    double m_total = 1;
};

struct PlacedGain {
    Eigen::RowVectorXd k_canonical;
    Vec beta;
};

// values[0] = -lambda, values[i+1] = values[i] - 1 (exact in doubles for
// the magnitudes involved). Throws std::domain_error when lambda < 1.
EigenvalueLadder eigenvalue_ladder(double lambda, int n);

// Monic coefficients of prod (s - r_i), convolved in extended precision.
CharPoly poly_from_roots(const std::vector<double>& roots);

// Coefficient matching in canonical coordinates: with the open-loop bottom
// row (a_1..a_n) implied by open_loop and the target bottom row beta from
// the ladder polynomial, k~_i = beta_i - a_i.
PlacedGain place_canonical(const CharPoly& open_loop, const EigenvalueLadder& ladder);

// L = (n-1)(n+2)/2, M = n * n! * rho^L (exact integer arithmetic when rho
// is integral and the value fits), M_total = M * t_norm * t_inv_norm.
// Throws std::overflow_error when M exceeds the double range.
CertificateConstants certificate_constants(int n, double rho, double t_norm,
                                           double t_inv_norm);

// Full pipeline: single-input reduction, canonical transform of the
// pre-closed pair, ladder placement, and pull-back k_gain = k0 + v*(k~ T^-1).
GainCertificate synthesize_gain(const Plant& p, double lambda, double tol = 1e-9);

// Smallest delta with m_total * lambda^l * e^{-lambda*t} <= delta *
// e^{-lambda*(t - tau0)} for all t >= 0.
SquashingParams squashing_form(const GainCertificate& cert, double tau0);

}  // namespace gaincert
