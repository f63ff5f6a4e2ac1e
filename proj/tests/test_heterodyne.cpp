/*
 * Copyright 2025 The cvkit authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <functional>

#include <catch2/catch_amalgamated.hpp>

#include "cvkit/heterodyne.hpp"

using namespace cvkit;
using namespace cvkit::heterodyne;
using fock::FockVector;

namespace {

// 2-D quadrature in polar form: composite Simpson radially (the estimator
// functions spike near the origin), trapezoid over the angle (spectrally
// accurate for the finite harmonic content).
double quadrature(const std::function<double(cplx)>& integrand, double rmax = 6.0,
                  int nr = 3000, int ntheta = 32) {
    double total = 0.0;
    double h = rmax / (2 * nr);
    auto ring = [&](double r) {
        if (r == 0.0) return 0.0;
        double s = 0.0;
        for (int j = 0; j < ntheta; ++j)
            s += integrand(std::polar(r, 2.0 * pi * (j + 0.5) / ntheta));
        return s * r * (2.0 * pi / ntheta);
    };
    for (int i = 0; i < nr; ++i) {
        double a = 2 * i * h;
        total += h / 3.0 * (ring(a) + 4.0 * ring(a + h) + ring(a + 2 * h));
    }
    return total;
}

double q_density(const std::vector<cplx>& psi, cplx z) {
    cplx overlap = 0.0;
    for (size_t n = 0; n < psi.size(); ++n)
        overlap += psi[n] * std::pow(std::conj(z), n) / std::sqrt(factorial(int(n)));
    return std::exp(-std::norm(z)) * std::norm(overlap) / pi;
}

}  // namespace

TEST_CASE("husimi sampling statistics") {
    // vacuum: E|alpha|^2 = 1
    auto vac = sample_husimi(FockVector::vacuum(1, 4), 100000, 11);
    double mean_sq = 0.0;
    for (size_t i = 0; i < vac.count(); ++i) mean_sq += std::norm(vac.at(i, 0));
    REQUIRE(mean_sq / vac.count() == Catch::Approx(1.0).margin(0.02));

    // coherent state: sample mean approaches alpha0
    cplx alpha0(0.8, -0.5);
    auto coh_state = gaussian::evolve_covariance(gaussian::GaussianState::vacuum(1),
                                                 gaussian::Displace{{alpha0}});
    auto coh = sample_husimi(coh_state, 100000, 13);
    cplx mean = 0.0;
    for (size_t i = 0; i < coh.count(); ++i) mean += coh.at(i, 0);
    mean /= double(coh.count());
    REQUIRE(std::abs(mean - alpha0) < 0.02);

    // Fock |1>: radial histogram chi^2 against the analytic density
    auto one = sample_husimi(FockVector::basis_state({1}, {4}), 100000, 17);
    // CDF of |alpha| for Q_1: 1 - e^{-r^2}(1 + r^2); 20 equiprobable bins
    auto cdf = [](double r) { return 1.0 - std::exp(-r * r) * (1.0 + r * r); };
    const int bins = 20;
    std::vector<double> edges{0.0};
    for (int b = 1; b < bins; ++b) {
        double lo = 0.0, hi = 8.0;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            (cdf(mid) < double(b) / bins ? lo : hi) = mid;
        }
        edges.push_back(lo);
    }
    edges.push_back(1e9);
    std::vector<double> counts(bins, 0.0);
    for (size_t i = 0; i < one.count(); ++i) {
        double r = std::abs(one.at(i, 0));
        int b = int(std::upper_bound(edges.begin(), edges.end(), r) - edges.begin()) - 1;
        counts[b] += 1.0;
    }
    double expected = double(one.count()) / bins;
    double chi2 = 0.0;
    for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
    REQUIRE(chi2 < 36.19);  // chi^2_{19} critical value at p = 0.01

    // determinism per seed
    auto again = sample_husimi(FockVector::vacuum(1, 4), 100, 11);
    REQUIRE(again.data[7] == vac.data[7]);
}

TEST_CASE("laguerre 2d polynomials") {
    REQUIRE(laguerre2d(0, 0, cplx(1.4, -2.0)) == cplx(1.0));
    cplx z(0.6, 0.3);
    REQUIRE(laguerre2d(1, 0, z) == std::conj(z));
    for (int k = 0; k <= 4; ++k)
        for (int l = 0; l <= 4; ++l)
            REQUIRE(std::abs(std::conj(laguerre2d(k, l, z)) - laguerre2d(l, k, z)) < 1e-12);
}

TEST_CASE("estimator function and constants") {
    // f_{|0><0|}(z, eta) = (1/eta) exp((1 - 1/eta)|z|^2)
    auto f00 = OperatorCoefficients::ket_bra(0, 0, 0);
    double eta = 0.2;
    cplx z(0.5, -0.7);
    REQUIRE(std::abs(estimator_f(f00, eta, z) -
                     std::exp((1.0 - 1.0 / eta) * std::norm(z)) / eta) < 1e-12);

    // K for |1><1| and C_00
    auto p11 = OperatorCoefficients::ket_bra(1, 1, 1);
    REQUIRE(k_constant(p11) == Catch::Approx(2.0));
    REQUIRE(c_constant(0, 0) == Catch::Approx(1.0));

    // E over rho = |1><1| of f_{|0><0|} equals eta: closed form and quadrature
    Matrix rho(2, 2);
    rho(1, 1) = 1.0;
    REQUIRE(eflk_expectation(rho, 0, 0, eta).real() == Catch::Approx(eta));
    std::vector<cplx> one{cplx(0.0), cplx(1.0)};
    double quad = quadrature([&](cplx a) {
        return q_density(one, a) * estimator_f(f00, eta, a).real();
    });
    REQUIRE(quad == Catch::Approx(eta).margin(1e-6));

    // |f_{|k><l|}| never exceeds M_kl / eta^{1 + (k+l)/2}
    Rng rng(23);
    for (int trial = 0; trial < 2000; ++trial) {
        int k = int(rng.integer() % 4), l = int(rng.integer() % 4);
        cplx w = std::polar(rng.uniform(0.0, 5.0), rng.uniform(0.0, 2 * pi));
        auto op = OperatorCoefficients::ket_bra(k, l, 3);
        double bound = m_constant(k, l) / std::pow(0.15, 1.0 + 0.5 * (k + l));
        REQUIRE(std::abs(estimator_f(op, 0.15, w)) <= bound * (1.0 + 1e-9));
    }
}

TEST_CASE("expectation closed form vs quadrature") {
    // a rank-one rho with support up to 3
    std::vector<cplx> psi{cplx(0.5), cplx(0.3, 0.2), cplx(0.0), cplx(0.6, -0.4)};
    double norm = 0.0;
    for (auto& c : psi) norm += std::norm(c);
    for (auto& c : psi) c /= std::sqrt(norm);
    Matrix rho(4, 4);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) rho(i, j) = psi[i] * std::conj(psi[j]);

    double eta = 0.1;
    for (int k = 0; k <= 3; ++k)
        for (int l = 0; l <= 3; ++l) {
            auto op = OperatorCoefficients::ket_bra(l, k, 3);
            cplx closed = eflk_expectation(rho, k, l, eta);
            cplx numeric = 0.0;
            {
                double re = quadrature([&](cplx a) {
                    return q_density(psi, a) * estimator_f(op, eta, a).real();
                });
                double im = quadrature([&](cplx a) {
                    return q_density(psi, a) * estimator_f(op, eta, a).imag();
                });
                numeric = cplx(re, im);
            }
            REQUIRE(std::abs(closed - numeric) < 1e-6);
        }
}

TEST_CASE("reliable tomography") {
    // true state |0>
    auto vac_batch = sample_husimi(FockVector::vacuum(1, 2), 100000, 31);
    auto rho_vac = tomo_estimate(vac_batch, 1, 0.05, 0.05);
    REQUIRE(std::abs(rho_vac[0][0].value - cplx(1.0)) <= 0.1);
    // the (1,1) estimator fluctuates an order of magnitude more at this eta
    REQUIRE(std::abs(rho_vac[1][1].value) <= 1.0);

    // Fock state: off-diagonals vanish by phase symmetry
    auto one_batch = sample_husimi(FockVector::basis_state({1}, {3}), 100000, 37);
    auto rho_one = tomo_estimate(one_batch, 1, 0.05, 0.05);
    REQUIRE(std::abs(rho_one[0][1].value) <= 0.1);
    REQUIRE(std::abs(rho_one[1][0].value - std::conj(rho_one[0][1].value)) < 1e-14);

    // (|0> + |1>)/sqrt(2): the coherence is recovered
    FockVector plus(1, 3);
    plus.set({0}, 1.0 / std::sqrt(2.0));
    plus.set({1}, 1.0 / std::sqrt(2.0));
    auto plus_batch = sample_husimi(plus, 100000, 41);
    auto rho_plus = tomo_estimate(plus_batch, 1, 0.05, 0.05);
    REQUIRE(std::abs(rho_plus[0][1].value - cplx(0.5)) <= 0.1);
    REQUIRE(rho_plus[0][1].bound == Catch::Approx(0.1));
}

TEST_CASE("fidelity certification") {
    FockVector target(1, 2);
    target.set({0}, std::sqrt(0.7));
    target.set({1}, std::sqrt(0.3));

    auto good = sample_husimi(target, 60000, 43);
    auto res = certify_fidelity(good, target, 2, 2, 10, 0.05, 0.05);
    REQUIRE(res.fidelity.real() >= 1.0 - 0.1 - 0.05);

    // orthogonal true state
    auto bad = sample_husimi(FockVector::basis_state({1}, {2}), 60000, 47);
    FockVector zero_target = FockVector::vacuum(1, 2);
    auto res_bad = certify_fidelity(bad, zero_target, 1, 2, 10, 0.05, 0.05);
    REQUIRE(res_bad.fidelity.real() <= 0.1);

    // the support failure bound at s = 10, n = 10^4
    REQUIRE(support_failure_iid(10, 10000) == Catch::Approx(3.69e-3).epsilon(0.01));
}

TEST_CASE("verification bounds") {
    VerificationBudget b;
    b.n = 4000000;
    b.k = 4000000;
    b.q = 10000;
    b.s = 2;
    b.m = 2;
    b.E = 1;
    b.epsilon = 0.05;
    b.epsilon_prime = 0.05;
    auto bounds = verification_bounds(b, c_psi_constant({cplx(1.0)}, b.epsilon, b.m, b.E));
    REQUIRE(bounds.p_support ==
            Catch::Approx(8.0 * std::pow(4e6, 1.5) *
                          std::exp(-(4e6 / 9.0) * std::pow(b.q / 4e6 - 2.0 * b.s / 4e6, 2))));
    REQUIRE(bounds.p_choice == Catch::Approx(2.0 * (4.0 * 1e4 + 1.0) / (4e6 - 4e4)));
    REQUIRE(bounds.total_slack == Catch::Approx(0.1 + bounds.p_definetti));

    // the stated parameter family n, k = O(m^{19+8E}), q = O(m^{10+4E}),
    // eps = O(1/m) drives all four bounds to zero in m; the O-constants
    // below put m = 2..4 inside the concentration regime
    std::vector<double> worst;
    for (int m : {2, 3, 4}) {
        VerificationBudget fam;
        fam.m = m;
        fam.E = 0;
        fam.s = 1;
        fam.n = std::uint64_t(100.0 * std::pow(m, 19));
        fam.k = fam.n;
        fam.q = std::uint64_t(130.0 * std::pow(m, 10));
        fam.epsilon = 3.0 / m;
        fam.epsilon_prime = 3.0 / m;
        auto fb = verification_bounds(fam, c_psi_constant({cplx(1.0)}, fam.epsilon, m, fam.E));
        worst.push_back(std::max({fb.p_support, fb.p_definetti, fb.p_choice, fb.p_hoeffding}));
    }
    REQUIRE(worst[0] < 1.0);
    REQUIRE(worst[1] < worst[0]);
    REQUIRE(worst[2] < worst[1]);
    REQUIRE(worst[2] < 1e-3);

    VerificationBudget invalid = b;
    invalid.q = b.n;  // violates n > 8q
    REQUIRE_THROWS_AS(verification_bounds(invalid, 1.0), dimension_error);
}

TEST_CASE("wigner point estimates") {
    // vacuum at the origin: 2/pi
    auto vac = sample_husimi(FockVector::vacuum(1, 3), 80000, 53);
    auto w0 = wigner_point(vac, cplx(0.0), 0.2, 3);
    REQUIRE(std::abs(w0.real() - 2.0 / pi) <= w0.bound);

    // Fock |1>: -2/pi at the origin; with the support inside E = 1 the
    // worst-case bound is small enough to witness the negativity
    auto one = sample_husimi(FockVector::basis_state({1}, {3}), 400000, 59);
    auto w1 = wigner_point(one, cplx(0.0), 0.1, 1);
    REQUIRE(std::abs(w1.real() + 2.0 / pi) <= w1.bound);
    REQUIRE(w1.real() + w1.bound < 0.0);

    // coherent state at its own amplitude: 2/pi
    cplx alpha0(0.6, 0.4);
    auto coh = gaussian::evolve_covariance(gaussian::GaussianState::vacuum(1),
                                           gaussian::Displace{{alpha0}});
    auto cbatch = sample_husimi(coh, 80000, 61);
    auto wc = wigner_point(cbatch, alpha0, 0.2, 3);
    REQUIRE(std::abs(wc.real() - 2.0 / pi) <= wc.bound);
}

TEST_CASE("stellar rank witness") {
    double r1 = std::sqrt(1.0 - 3.0 * std::sqrt(3.0) / (4.0 * std::exp(1.0)));
    std::vector<double> profile{r1};  // profile of |1>

    ConfidenceValue perfect{cplx(1.0), 0.0, 0.0, false};
    REQUIRE(rank_witness(perfect, profile) == 1);

    ConfidenceValue weak{cplx(0.4), 0.05, 0.0, false};
    REQUIRE(rank_witness(weak, profile) == 0);

    ConfidenceValue mid{cplx(0.6), 0.05, 0.0, false};
    REQUIRE(rank_witness(mid, profile) == 1);  // 0.55 > 1 - R1^2 = 0.4782

    std::vector<double> bad_profile{0.3, 0.5};
    REQUIRE_THROWS_AS(rank_witness(perfect, bad_profile), dimension_error);
}
