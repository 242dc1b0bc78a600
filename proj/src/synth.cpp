#include "gaincert/synth.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace gaincert {

EigenvalueLadder eigenvalue_ladder(double lambda, int n) {
    if (!(lambda >= 1.0))
        throw std::domain_error(
            "eigenvalue_ladder: decay rate must satisfy lambda >= 1 (the overshoot "
            "constants are only valid in that regime)");
    if (n < 1) throw std::invalid_argument("eigenvalue_ladder: n must be positive");

    EigenvalueLadder lad;
    lad.values.resize(n);
    lad.values[0] = -lambda;
    // Unit steps are exact: subtracting 1 from a double of magnitude < 2^52
    // does not round when the exponents already align.
    for (int i = 1; i < n; ++i) lad.values[i] = lad.values[i - 1] - 1.0;
    lad.lambda_min = -lad.values.front();
    lad.lambda_max = -lad.values.back();
    lad.rho = (n == 1) ? 1.0 : static_cast<double>(n);
    return lad;
}

CharPoly poly_from_roots(const std::vector<double>& roots) {
    for (double r : roots)
        if (!std::isfinite(r)) throw std::invalid_argument("poly_from_roots: non-finite root");
    // Sequential convolution with (s - r), carried in long double because the
    // coefficients grow like lambda^n and feed a cancellation-prone
    // subtraction downstream.
    std::vector<long double> c;  // non-leading coefficients, highest power first
    for (double r : roots) {
        c.push_back(0.0L);
        for (size_t k = c.size(); k-- > 0;) {
            long double lower = (k == 0) ? 1.0L : c[k - 1];
            c[k] -= static_cast<long double>(r) * lower;
        }
    }
    CharPoly p;
    p.degree = static_cast<int>(roots.size());
    p.coeffs.assign(c.begin(), c.end());
    return p;
}

PlacedGain place_canonical(const CharPoly& open_loop, const EigenvalueLadder& ladder) {
    const int n = static_cast<int>(ladder.values.size());
    if (open_loop.degree != n || static_cast<int>(open_loop.coeffs.size()) != n)
        throw std::invalid_argument("place_canonical: polynomial degree does not match ladder length");

    // Bottom row of the canonical matrix: a_i = -c_{n+1-i} (x_n' = sum a_i x_i + u);
    // target bottom row: beta_i = -p_{n+1-i} for the ladder polynomial p.
    CharPoly target = poly_from_roots(ladder.values);
    PlacedGain out;
    out.k_canonical.resize(n);
    out.beta.resize(n);
    for (int i = 1; i <= n; ++i) {
        const double a_i = -open_loop.coeffs[n - i];
        const double beta_i = -target.coeffs[n - i];
        out.beta(i - 1) = beta_i;
        out.k_canonical(i - 1) = beta_i - a_i;
    }
    return out;
}

CertificateConstants certificate_constants(int n, double rho, double t_norm,
                                           double t_inv_norm) {
    if (n < 1) throw std::invalid_argument("certificate_constants: n must be positive");
    if (!(rho >= 1.0)) throw std::invalid_argument("certificate_constants: rho must be >= 1");
    if (t_norm < 0 || t_inv_norm < 0)
        throw std::invalid_argument("certificate_constants: norms must be nonnegative");

    CertificateConstants out;
    out.l = (n - 1) * (n + 2) / 2;

    // Exact integer path when rho is integral and the product fits 128 bits;
    // otherwise extended precision with an explicit overflow gate.
    bool exact_done = false;
    const double rho_floor = std::floor(rho);
    if (rho == rho_floor && rho_floor <= 1e6) {
        unsigned __int128 acc = static_cast<unsigned __int128>(n);
        bool overflow = false;
        for (int k = 2; k <= n && !overflow; ++k)
            overflow = __builtin_mul_overflow(acc, static_cast<unsigned __int128>(k), &acc);
        const auto rho_i = static_cast<unsigned __int128>(rho_floor);
        for (int k = 0; k < out.l && !overflow; ++k)
            overflow = __builtin_mul_overflow(acc, rho_i, &acc);
        if (!overflow) {
            out.m = static_cast<double>(acc);
            exact_done = true;
        }
    }
    if (!exact_done) {
        long double acc = n;
        for (int k = 2; k <= n; ++k) acc *= k;
        acc *= powl(static_cast<long double>(rho), static_cast<long double>(out.l));
        out.m = static_cast<double>(acc);
    }
    if (!std::isfinite(out.m)) {
        char msg[96];
        std::snprintf(msg, sizeof msg,
                      "certificate_constants: overshoot constant overflows doubles at n=%d", n);
        throw std::overflow_error(msg);
    }
    out.m_total = out.m * t_norm * t_inv_norm;
    if (!std::isfinite(out.m_total)) {
        char msg[96];
        std::snprintf(msg, sizeof msg,
                      "certificate_constants: transform-scaled constant overflows at n=%d", n);
        throw std::overflow_error(msg);
    }
    return out;
}

GainCertificate synthesize_gain(const Plant& p, double lambda, double tol) {
    GainCertificate cert;
    cert.lambda_request = lambda;
    cert.ladder = eigenvalue_ladder(lambda, p.n());

    cert.reduction = heymann_reduce(p, tol);
    const Mat a_closed = p.a + p.b * cert.reduction.k0;
    cert.canonical = brunovsky_transform(a_closed, cert.reduction.b_single, tol);

    PlacedGain placed = place_canonical(cert.canonical.open_loop_coeffs, cert.ladder);
    cert.k_canonical = placed.k_canonical;
    cert.beta = placed.beta;

    const Eigen::RowVectorXd k = placed.k_canonical * cert.canonical.t_inv;
    cert.k_gain = cert.reduction.k0 + cert.reduction.v * k;

    cert.transform_norms = {operator_norm(cert.canonical.t),
                            operator_norm(cert.canonical.t_inv)};
    CertificateConstants cc = certificate_constants(
        p.n(), cert.ladder.rho, cert.transform_norms.first, cert.transform_norms.second);
    cert.l_exponent = cc.l;
    cert.m_constant = cc.m;
    cert.m_total = cc.m_total;
    return cert;
}

SquashingParams squashing_form(const GainCertificate& cert, double tau0) {
    if (!(tau0 > 0)) throw std::invalid_argument("squashing_form: tau0 must be positive");
    SquashingParams out;
    out.tau0 = tau0;
    // delta = m_total * lambda^l * e^{-lambda*tau0}, evaluated in log form so
    // the two exponential factors cannot overflow separately.
    const double lg = std::log(cert.m_total) +
                      cert.l_exponent * std::log(cert.lambda_request) -
                      cert.lambda_request * tau0;
    out.delta = std::exp(lg);
    return out;
}

}  // namespace gaincert
