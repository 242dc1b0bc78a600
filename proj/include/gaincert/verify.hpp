#pragma once

#include <string>
#include <vector>

#include "gaincert/canon.hpp"
#include "gaincert/matcore.hpp"
#include "gaincert/synth.hpp"

namespace gaincert {

// Spectral factorization of the placed canonical closed loop:
// e^{A_c t} = lambda0 * diag(e^{d_i t}) * lambda0^{-1}.
struct SpectralFactors {
    Mat lambda0;            // Vandermonde of d
    std::vector<double> d;  // distinct negative eigenvalues
};

SpectralFactors make_spectral_factors(const std::vector<double>& d);

// One evaluated point of the envelope check.
struct EnvelopeSample {
    double t = 0;
    double norm = 0;      // |e^{Ft}|
    double envelope = 0;  // certified bound * e^{-lambda t}
};

struct EnvelopeReport {
    double sup_ratio = 0;        // max over samples of |e^{Ft}| * e^{lambda t}
    double peak_time = 0;
    double certified_bound = 0;  // m_total * lambda^l
    bool pass = false;
    std::vector<EnvelopeSample> samples;  // sorted by t
    std::string step_control;             // grid/refinement description
};

struct VandermondeBounds {
    double norm_measured = 0, norm_bound = 0, norm_margin = 0;
    double inv_norm_measured = 0, inv_norm_bound = 0, inv_norm_margin = 0;
    double det_measured = 0, det_bound = 1, det_margin = 0;
    bool norm_ok = false, inv_norm_ok = false, det_ok = false;
    bool all_ok() const { return norm_ok && inv_norm_ok && det_ok; }
};

// lambda0 * diag(e^{d_i t}) * lambda0^{-1} via factor-and-solve (never an
// explicit inverse), carried in extended precision end to end. Throws
// SingularMatrixError for numerically coincident nodes.
Mat spectral_transition(const SpectralFactors& f, double t);

// Samples |e^{Ft}| * e^{lambda t} against the certified constant
// m_total * lambda^l: half the base grid linear on [0, 5/lambda] to resolve
// the early peak, half log-spaced out to t_end, then local refinement around
// the running maximum until step <= 1e-3 / (|F| * peak norm). Pass t_end <= 0
// for the default (ln(m_total * lambda^l) + 20) / lambda. A failed check is
// a pass = false report, not an error.
EnvelopeReport envelope_check(const Mat& f, double lambda, int l, double m_total,
                              double t_end = 0, int base_samples = 10000);

// Checks the measured |lambda0|, |lambda0^{-1}|, |det lambda0| of the
// ladder's Vandermonde against their closed-form bounds
// n * lmax^{n-1}, n * (n-1)! * lmax^{n(n-1)/2}, and det >= 1.
VandermondeBounds vandermonde_bounds_check(const EigenvalueLadder& ladder);

// Worst elementwise discrepancy over `times` between the direct transition
// matrix of a + b * (k_canonical * t_inv) and the pulled-back spectral route
// t * lambda0 e^{Dt} lambda0^{-1} * t_inv.
double cross_oracle_check(const Mat& a, const Mat& b,
                          const Eigen::RowVectorXd& k_canonical, const CanonicalForm& cf,
                          const EigenvalueLadder& ladder, const std::vector<double>& times);

}  // namespace gaincert
