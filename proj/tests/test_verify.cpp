#include <doctest.h>

#include <Eigen/QR>
#include <algorithm>
#include <cmath>
#include <vector>

#include "gaincert/canon.hpp"
#include "gaincert/errors.hpp"
#include "gaincert/matcore.hpp"
#include "gaincert/synth.hpp"
#include "gaincert/verify.hpp"
#include "oracles.hpp"

using gaincert::Mat;
using gaincert::Plant;
using oracles::Rng;

namespace {

Plant random_controllable(Rng& rng, int n, int m) {
    for (;;) {
        Plant p(rng.matrix(n, n, -2, 2), rng.matrix(n, m, -2, 2));
        if (gaincert::is_controllable(p, 1e-9)) return p;
    }
}

// Companion matrix whose characteristic polynomial is `poly` (monic, coeffs
// highest first): superdiagonal ones, bottom row -c reversed.
Mat companion_of(const gaincert::CharPoly& poly) {
    const int n = poly.degree;
    Mat a = Mat::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 1.0;
    for (int j = 0; j < n; ++j) a(n - 1, j) = -poly.coeffs[n - 1 - j];
    return a;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    for (int i = 0; i < count; ++i)
        out.push_back(lo + (hi - lo) * static_cast<double>(i) / (count - 1));
    return out;
}

}  // namespace

TEST_CASE("make_spectral_factors: examples and rejection") {
    const gaincert::SpectralFactors f = gaincert::make_spectral_factors({-1.0, -2.0});
    CHECK(f.d.size() == 2);
    const Mat v = gaincert::vandermonde({-1.0, -2.0});
    CHECK((f.lambda0 - v).cwiseAbs().maxCoeff() == 0.0);
    CHECK(f.lambda0(0, 0) == 1.0);
    CHECK(f.lambda0(0, 1) == 1.0);
    CHECK(f.lambda0(1, 0) == -1.0);
    CHECK(f.lambda0(1, 1) == -2.0);

    CHECK_THROWS_AS(gaincert::make_spectral_factors({-1.0, 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(gaincert::make_spectral_factors({-1.0, -1.0}), gaincert::DuplicateNodeError);
}

TEST_CASE("spectral_transition: identity at t = 0 and scalar decay") {
    const gaincert::SpectralFactors f = gaincert::make_spectral_factors({-1.0, -2.0, -3.5});
    const Mat e0 = gaincert::spectral_transition(f, 0.0);
    CHECK((e0 - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() <= 1e-14);

    const gaincert::SpectralFactors f1 = gaincert::make_spectral_factors({-3.0});
    for (double t : {0.1, 1.0, 2.5}) {
        const double want = std::exp(-3.0 * t);
        CHECK(std::abs(gaincert::spectral_transition(f1, t)(0, 0) - want) <= 1e-15 * want);
    }
}

TEST_CASE("spectral_transition: matches the dense exponential on the stiff canonical loop") {
    // Canonical closed loop for the reference plant: companion matrix of the
    // degree-3 target with roots -49.894, -50.894, -51.894.
    const gaincert::EigenvalueLadder lad = gaincert::eigenvalue_ladder(49.894, 3);
    const Mat a_cl = companion_of(gaincert::poly_from_roots(lad.values));
    const gaincert::SpectralFactors f = gaincert::make_spectral_factors(lad.values);
    const Mat direct = gaincert::matrix_exponential(a_cl, 0.1);
    const Mat routed = gaincert::spectral_transition(f, 0.1);
    CHECK((direct - routed).cwiseAbs().maxCoeff() <= 1e-7);
}

TEST_CASE("spectral_transition: agrees with the exponential across decay rates") {
    for (double lambda : {1.0, 10.0, 100.0}) {
        for (int n = 1; n <= 6; ++n) {
            const gaincert::EigenvalueLadder lad = gaincert::eigenvalue_ladder(lambda, n);
            const Mat a_cl = companion_of(gaincert::poly_from_roots(lad.values));
            const gaincert::SpectralFactors f = gaincert::make_spectral_factors(lad.values);
            for (double t : linspace(0.0, 5.0 / lambda, 20)) {
                const Mat e1 = gaincert::matrix_exponential(a_cl, t);
                const Mat e2 = gaincert::spectral_transition(f, t);
                const double scale =
                    std::max({1.0, e1.cwiseAbs().maxCoeff(), e2.cwiseAbs().maxCoeff()});
                CHECK((e1 - e2).cwiseAbs().maxCoeff() <= 1e-9 * scale);
            }
        }
    }
}

TEST_CASE("envelope_check: flat ratio for a pure decay block") {
    const double lambda = 2.0;
    const Mat f = -lambda * Mat::Identity(3, 3);
    const gaincert::EnvelopeReport report = gaincert::envelope_check(f, lambda, 0, 1.0);
    CHECK(report.pass);
    CHECK(std::abs(report.sup_ratio - 1.0) <= 1e-12);
    CHECK(report.certified_bound == 1.0);
    CHECK(report.sup_ratio >= 1.0);
}

TEST_CASE("envelope_check: an undersized constant is reported, not thrown") {
    Mat f(1, 1);
    f << -1.0;
    const gaincert::EnvelopeReport report = gaincert::envelope_check(f, 1.0, 0, 0.5);
    CHECK_FALSE(report.pass);
    // At t = 0 the transition has norm one against a claimed bound of 0.5.
    CHECK(report.sup_ratio >= 1.0 - 1e-12);
    CHECK(report.certified_bound == 0.5);
}

TEST_CASE("envelope_check: reference closed loop passes with pinned statistics") {
    const Plant p(oracles::example_a(), oracles::example_b());
    const gaincert::GainCertificate cert = gaincert::synthesize_gain(p, 49.894, 1e-9);
    const Mat f = p.a + p.b * cert.k_gain;
    const gaincert::EnvelopeReport report =
        gaincert::envelope_check(f, cert.lambda_request, cert.l_exponent, cert.m_total);

    CHECK(report.pass);
    // Regression pins from the frozen pipeline output.
    CHECK(std::abs(report.sup_ratio - 2434888.27951711) <= 1e-9 * report.sup_ratio);
    CHECK(std::abs(report.peak_time - 0.98872382447345) <= 1e-6);
    const double bound_want =
        cert.m_total * std::pow(cert.lambda_request, cert.l_exponent);
    CHECK(std::abs(report.certified_bound - bound_want) <= 1e-12 * bound_want);
    CHECK(report.sup_ratio <= report.certified_bound * (1.0 + 1e-9));

    // Samples arrive sorted, starting at zero and ending at the default
    // horizon (ln(m_total * lambda^l) + 20) / lambda.
    REQUIRE(report.samples.size() >= 2);
    CHECK(report.samples.front().t == 0.0);
    CHECK(std::is_sorted(report.samples.begin(), report.samples.end(),
                         [](const gaincert::EnvelopeSample& a, const gaincert::EnvelopeSample& b) {
                             return a.t < b.t;
                         }));
    const double t_end_want = (std::log(bound_want) + 20.0) / cert.lambda_request;
    CHECK(std::abs(report.samples.back().t - t_end_want) <= 1e-9 * t_end_want);
    CHECK_FALSE(report.step_control.empty());

    // The verdict is exactly the recorded inequality.
    CHECK(report.pass == (report.sup_ratio <= report.certified_bound * (1.0 + 1e-9)));
}

TEST_CASE("envelope_check: rejects decay rates below one") {
    Mat f(1, 1);
    f << -1.0;
    CHECK_THROWS_AS(gaincert::envelope_check(f, 0.5, 0, 1.0), std::domain_error);
}

TEST_CASE("vandermonde_bounds_check: closed-form cases") {
    const gaincert::VandermondeBounds one =
        gaincert::vandermonde_bounds_check(gaincert::eigenvalue_ladder(3.0, 1));
    CHECK(one.norm_measured == 1.0);
    CHECK(one.norm_bound == 1.0);
    CHECK(one.norm_margin == 0.0);
    CHECK(one.inv_norm_margin == 0.0);
    CHECK(one.det_margin == 0.0);
    CHECK(one.all_ok());

    // Ladder at lambda = 1, n = 2: nodes -1, -2, so |det| = 1 and the norm
    // bounds are 2 * 2 and 2 * 1! * 2.
    const gaincert::VandermondeBounds two =
        gaincert::vandermonde_bounds_check(gaincert::eigenvalue_ladder(1.0, 2));
    CHECK(two.norm_bound == 4.0);
    CHECK(two.inv_norm_bound == 4.0);
    CHECK(std::abs(two.det_measured - 1.0) <= 1e-12);
    CHECK(two.all_ok());

    // Reference ladder: unit-spaced nodes give |det| = 1! * 2! = 2 exactly.
    const gaincert::VandermondeBounds ref =
        gaincert::vandermonde_bounds_check(gaincert::eigenvalue_ladder(49.894, 3));
    CHECK(std::abs(ref.det_measured - 2.0) <= 1e-9);
    CHECK(std::abs(ref.det_margin - 1.0) <= 1e-9);
    CHECK(std::abs(ref.norm_bound - 3.0 * 51.894 * 51.894) <= 1e-9 * ref.norm_bound);
    CHECK(ref.all_ok());
}

TEST_CASE("vandermonde_bounds_check: bounds hold across the sampled family") {
    Rng rng(909);
    for (int trial = 0; trial < 100; ++trial) {
        const double lambda = rng.uniform(1.0, 100.0);
        const int n = rng.uniform_int(1, 6);
        const gaincert::VandermondeBounds b =
            gaincert::vandermonde_bounds_check(gaincert::eigenvalue_ladder(lambda, n));
        CHECK(b.all_ok());
        CHECK(b.norm_margin >= 0.0);
        CHECK(b.inv_norm_margin >= 0.0);
        CHECK(b.det_margin >= 0.0);
    }
}

TEST_CASE("cross_oracle_check: canonical routes coincide") {
    // Scalar: both routes are e^{(a + b k) t}.
    Mat a1(1, 1), b1(1, 1);
    a1 << -2.0;
    b1 << 1.0;
    const gaincert::CanonicalForm cf1 = gaincert::brunovsky_transform(a1, b1, 1e-9);
    const gaincert::EigenvalueLadder lad1 = gaincert::eigenvalue_ladder(1.0, 1);
    const gaincert::PlacedGain g1 = gaincert::place_canonical(cf1.open_loop_coeffs, lad1);
    const double zero_gap =
        gaincert::cross_oracle_check(a1, b1, g1.k_canonical, cf1, lad1, {0.0});
    CHECK(zero_gap <= 1e-12);
    const double scalar_gap =
        gaincert::cross_oracle_check(a1, b1, g1.k_canonical, cf1, lad1, {0.25, 1.0, 3.0});
    CHECK(scalar_gap <= 1e-14);

    // Reference plant over a short grid; budget scaled by the largest
    // transition entry seen on the grid.
    const Plant p(oracles::example_a(), oracles::example_b());
    const gaincert::GainCertificate cert = gaincert::synthesize_gain(p, 49.894, 1e-9);
    const std::vector<double> times = linspace(0.0, 0.5, 20);
    double peak = 1.0;
    for (double t : times) {
        const Mat e = gaincert::matrix_exponential(p.a + p.b * cert.k_gain, t);
        peak = std::max(peak, e.cwiseAbs().maxCoeff());
    }
    const double gap = gaincert::cross_oracle_check(p.a, p.b, cert.k_canonical,
                                                    cert.canonical, cert.ladder, times);
    CHECK(gap <= 1e-6 * peak);
}

TEST_CASE("envelope_check: verdict is invariant under orthogonal change of basis") {
    Rng rng(1010);
    for (int trial = 0; trial < 20; ++trial) {
        const int n = rng.uniform_int(1, 4);
        const int m = rng.uniform_int(1, 2);
        const double lambda = (trial % 2 == 0) ? 1.0 : 5.0;
        const Plant p = random_controllable(rng, n, m);
        const gaincert::GainCertificate cert = gaincert::synthesize_gain(p, lambda, 1e-9);
        const Mat f = p.a + p.b * cert.k_gain;

        const Mat q = Eigen::HouseholderQR<Mat>(rng.matrix(n, n, -1, 1)).householderQ();
        const Mat f_rot = q.transpose() * f * q;

        const gaincert::EnvelopeReport r1 = gaincert::envelope_check(
            f, lambda, cert.l_exponent, cert.m_total, 0.0, 2000);
        const gaincert::EnvelopeReport r2 = gaincert::envelope_check(
            f_rot, lambda, cert.l_exponent, cert.m_total, 0.0, 2000);
        CHECK(r1.pass == r2.pass);
        CHECK(std::abs(r1.sup_ratio - r2.sup_ratio) <= 5e-6 * r1.sup_ratio);
    }
}

TEST_CASE("envelope_check: synthesized loops always sit under their certificate") {
    Rng rng(1111);
    const double lambdas[] = {1.0, 5.0, 25.0};
    for (int trial = 0; trial < 60; ++trial) {
        const int n = rng.uniform_int(1, 5);
        const int m = rng.uniform_int(1, 3);
        const double lambda = lambdas[trial % 3];
        const Plant p = random_controllable(rng, n, m);
        const gaincert::GainCertificate cert = gaincert::synthesize_gain(p, lambda, 1e-9);
        const Mat f = p.a + p.b * cert.k_gain;
        const gaincert::EnvelopeReport report = gaincert::envelope_check(
            f, lambda, cert.l_exponent, cert.m_total, 0.0, 2000);
        CHECK(report.pass);
        CHECK(report.sup_ratio >= 1.0);
    }
}
