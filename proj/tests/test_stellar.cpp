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

#include <catch2/catch_amalgamated.hpp>

#include "cvkit/stellar.hpp"

using namespace cvkit;
using namespace cvkit::stellar;

namespace {

// explicit-sum oracle for the probabilists' Hermite polynomials
cplx hermite_sum(int m, cplx z) {
    cplx total = 0.0;
    for (int p = 0; 2 * p <= m; ++p) {
        double coeff = factorial(m) * ((p % 2) ? -1.0 : 1.0) /
                       (std::pow(2.0, p) * factorial(p) * factorial(m - 2 * p));
        total += coeff * std::pow(z, m - 2 * p);
    }
    return total;
}

CoreState fock_core(int n) {
    CoreState c;
    c.amplitudes.assign(n + 1, cplx(0.0));
    c.amplitudes[n] = 1.0;
    return c;
}

}  // namespace

TEST_CASE("hermite recurrence") {
    REQUIRE(hermite(0, cplx(1.3, 0.4)) == cplx(1.0));
    cplx z(0.7, -0.2);
    REQUIRE(hermite(1, z) == z);
    REQUIRE(std::abs(hermite(3, z) - (z * z * z - 3.0 * z)) < 1e-13);

    Rng rng(2);
    for (int n = 0; n <= 50; ++n) {
        cplx w(rng.uniform(-2, 2), rng.uniform(-2, 2));
        cplx rec = hermite(n, w);
        cplx sum = hermite_sum(n, w);
        REQUIRE(std::abs(rec - sum) <= 1e-9 * std::max(1.0, std::abs(sum)));
        REQUIRE(std::abs(hermite(n, cplx(w.real(), 0.0)).imag()) < 1e-12);
    }
}

TEST_CASE("stellar function values") {
    // vacuum: F = 1 everywhere
    StellarSpec vac = CoreSpec{fock_core(0)};
    REQUIRE(stellar_eval(vac, cplx(2.0, -1.0)) == cplx(1.0));

    // Fock n: z^n / sqrt(n!)
    for (int n : {1, 2, 5}) {
        StellarSpec spec = CoreSpec{fock_core(n)};
        cplx z(0.8, 0.3);
        REQUIRE(std::abs(stellar_eval(spec, z) - std::pow(z, n) / std::sqrt(factorial(n))) <
                1e-12);
    }

    // cat+ with real alpha vanishes exactly at i pi (2k+1) / (2 alpha)
    double alpha = 1.3;
    StellarSpec cat = CatSpec{cplx(alpha, 0.0), +1};
    for (int k : {0, 1, 2}) {
        cplx zero(0.0, pi * (2 * k + 1) / (2 * alpha));
        REQUIRE(std::abs(stellar_eval(cat, zero)) < 1e-12);
    }

    // Gaussian spec agrees with the displaced-squeezed core form on |0>
    cplx xi = std::polar(0.4, 0.9), disp(0.3, -0.5);
    StellarSpec g = GaussianSpec{xi, disp};
    StellarSpec gc = GaussianCoreSpec{xi, disp, fock_core(0)};
    for (double t : {-1.0, 0.2, 0.9}) {
        cplx z(t, 0.3 * t);
        REQUIRE(std::abs(stellar_eval(g, z) - stellar_eval(gc, z)) < 1e-10);
        REQUIRE(std::abs(stellar_derivative(g, z) - stellar_derivative(gc, z)) < 1e-9);
    }
}

TEST_CASE("gaussian-times-core matches the truncated Fock expansion") {
    cplx xi = std::polar(0.3, -0.7), alpha(0.4, 0.2);
    CoreState core;
    core.amplitudes = {cplx(0.5), cplx(0.0), cplx(0.6, -0.2), cplx(0.3, 0.1)};
    core.normalize();
    StellarSpec spec = GaussianCoreSpec{xi, alpha, core};

    // state amplitudes via truncated operators, then the defining series
    int E = 42;
    auto S = fock::truncated_gaussian(fock::GaussianKind::squeeze, xi, E);
    auto D = fock::truncated_gaussian(fock::GaussianKind::displacement, alpha, E);
    Matrix SD = S.entries * D.entries;
    std::vector<cplx> psi(E + 1, cplx(0.0));
    for (int n = 0; n <= E; ++n)
        for (size_t j = 0; j < core.amplitudes.size(); ++j)
            psi[n] += SD(n, j) * core.amplitudes[j];

    for (double t : {0.1, 0.7, -1.2}) {
        cplx z(t, -0.4 * t);
        cplx series = 0.0, zn = 1.0;
        for (int n = 0; n <= E; ++n) {
            series += psi[n] * zn / std::sqrt(factorial(n));
            zn *= z;
        }
        REQUIRE(std::abs(stellar_eval(spec, z) - series) < 1e-8);
    }
}

TEST_CASE("zero counting") {
    // constant stellar function: no zeros anywhere
    REQUIRE(count_zeros(CoreSpec{fock_core(0)}, CircleContour{cplx(0.0), 3.0}) == 0);
    // Gaussian states have no zeros
    REQUIRE(count_zeros(GaussianSpec{cplx(0.3), cplx(0.4, 0.1)},
                        RectangleContour{cplx(-3.0, -3.0), 6.0, 6.0}) == 0);

    // a core state of degree N has N zeros inside a large enough circle
    Rng rng(9);
    for (int deg : {1, 2, 3, 4}) {
        CoreState c;
        c.amplitudes.resize(deg + 1);
        for (int n = 0; n <= deg; ++n)
            c.amplitudes[n] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
        c.amplitudes[deg] += cplx(1.5);  // keep the leading coefficient away from 0
        c.normalize();
        // Cauchy bound on polynomial roots
        double lead = std::abs(c.amplitudes[deg] / std::sqrt(factorial(deg)));
        double bound = 1.0;
        for (int n = 0; n < deg; ++n)
            bound = std::max(bound,
                             1.0 + std::abs(c.amplitudes[n] / std::sqrt(factorial(n))) / lead);
        REQUIRE(count_zeros(CoreSpec{c}, CircleContour{cplx(0.0), bound + 1.0}) == deg);

        // stellar rank is invariant under small Gaussian operations
        StellarSpec dressed = GaussianCoreSpec{std::polar(0.3, rng.uniform(0.0, 2 * pi)),
                                               cplx(rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)),
                                               c};
        REQUIRE(count_zeros(dressed, CircleContour{cplx(0.0), 3.0 * (bound + 2.0)}) == deg);
    }

    // one cat zero in a small box around i pi / (2 alpha)
    double alpha = 1.1;
    StellarSpec cat = CatSpec{cplx(alpha, 0.0), +1};
    cplx z0(0.0, pi / (2 * alpha));
    REQUIRE(count_zeros(cat, RectangleContour{z0 - cplx(0.5, 0.5), 1.0, 1.0}) == 1);

    // GKP: 16 zeros in a 4 sqrt(pi) x 4 sqrt(pi) square
    double period = 4.0 * std::sqrt(pi);
    REQUIRE(count_zeros(GkpSpec{5}, RectangleContour{cplx(0.37, 0.21), period, period}) == 16);
}

TEST_CASE("core extraction") {
    // xi = alpha = 0 leaves the input unchanged up to normalization
    CoreState c;
    c.amplitudes = {cplx(0.6), cplx(0.0), cplx(0.8)};
    CoreState same = extract_core(c, cplx(0.0), cplx(0.0));
    REQUIRE(std::abs(same.amplitudes[0] - cplx(0.6)) < 1e-12);
    REQUIRE(std::abs(same.amplitudes[2] - cplx(0.8)) < 1e-12);

    // P(z) = z / cosh(xi) with matching real xi gives the single photon
    double xi = 0.45;
    CoreState p;
    p.amplitudes = {cplx(0.0), cplx(1.0 / std::cosh(xi))};
    CoreState extracted = extract_core(p, cplx(xi, 0.0), cplx(0.0));
    REQUIRE(std::abs(extracted.amplitudes[0]) < 1e-12);
    REQUIRE(std::abs(extracted.amplitudes[1] - cplx(1.0)) < 1e-12);

    // round trip: S(xi) D(alpha) |C> reproduces P(a^dag) S(xi) D(alpha) |0>
    Rng rng(21);
    CoreState poly;
    poly.amplitudes.resize(4);
    for (int n = 0; n <= 3; ++n)
        poly.amplitudes[n] = cplx(rng.uniform(-1, 1), rng.uniform(-1, 1));
    cplx rxi = std::polar(0.35, 1.2), ralpha(0.3, -0.4);
    CoreState corestate = extract_core(poly, rxi, ralpha);

    int E = 25;
    auto S = fock::truncated_gaussian(fock::GaussianKind::squeeze, rxi, E);
    auto D = fock::truncated_gaussian(fock::GaussianKind::displacement, ralpha, E);
    Matrix SD = S.entries * D.entries;

    // |psi> = P(a^dag) S D |0>
    fock::FockVector psi(1, E);
    {
        std::vector<cplx> g(E + 1);
        for (int n = 0; n <= E; ++n) g[n] = SD(n, 0);
        fock::FockVector gvec(1, E);
        for (int n = 0; n <= E; ++n) gvec.set({n}, g[n]);
        fock::FockVector acc(1, E);
        fock::FockVector power = gvec;  // (a^dag)^k g built incrementally
        for (size_t k = 0; k < poly.amplitudes.size(); ++k) {
            cplx pk = poly.amplitudes[k] / std::sqrt(factorial(static_cast<int>(k)));
            for (const auto& [occ, amp] : power.amplitudes()) acc.add(occ, pk * amp);
            power = fock::apply_ladder(power, 0, fock::Ladder::creation);
        }
        psi = acc;
        psi.normalize();
    }
    // |phi> = S D |C>
    fock::FockVector phi(1, E);
    for (int n = 0; n <= E; ++n) {
        cplx amp = 0.0;
        for (size_t j = 0; j < corestate.amplitudes.size(); ++j)
            amp += SD(n, j) * corestate.amplitudes[j];
        phi.set({n}, amp);
    }
    phi.normalize();
    cplx overlap = fock::inner_product(psi, phi);
    REQUIRE(std::abs(overlap) == Catch::Approx(1.0).margin(1e-6));
}

TEST_CASE("robustness of low-rank states") {
    // k above the stellar rank: the state approximates itself
    auto trivial = robustness({fock_core(1), 2, {}});
    REQUIRE(trivial.r_k == 0.0);
    REQUIRE(trivial.max_fidelity == 1.0);

    // single photon: max fidelity 3 sqrt(3) / (4 e)
    OptimizerBudget budget;
    budget.restarts = 12;
    auto single = robustness({fock_core(1), 1, budget});
    double expected = 3.0 * std::sqrt(3.0) / (4.0 * std::exp(1.0));
    REQUIRE(single.max_fidelity == Catch::Approx(expected).margin(1e-4));
    REQUIRE(single.r_k == Catch::Approx(std::sqrt(1.0 - expected)).margin(1e-4));

    // the reported optimum re-evaluates to the reported value
    double re_eval = robustness_objective(fock_core(1), 1, single.xi, single.alpha);
    REQUIRE(re_eval == Catch::Approx(single.max_fidelity).margin(1e-10));

    // cos(phi)|0> + sin(phi)|1>: robustness is largest at the single photon
    double best_phi = 0.0, best_rk = -1.0;
    for (double phi : {pi / 6, pi / 3, pi / 2}) {
        CoreState c;
        c.amplitudes = {cplx(std::cos(phi)), cplx(std::sin(phi))};
        auto res = robustness({c, 1, budget});
        if (res.r_k > best_rk + 1e-9) {
            best_rk = res.r_k;
            best_phi = phi;
        }
    }
    REQUIRE(best_phi == Catch::Approx(pi / 2));
}

TEST_CASE("cat robustness") {
    OptimizerBudget budget;
    budget.restarts = 10;

    // alpha -> 0: cat+ approaches the vacuum, all robustness vanishes
    for (int k : {1, 2}) {
        auto tiny = cat_robustness(cplx(1e-4, 0.0), +1, k, budget);
        REQUIRE(tiny.r_k < 1e-3);
    }

    // phase invariance of the profile
    auto a = cat_robustness(cplx(1.5, 0.0), +1, 2, budget);
    auto b = cat_robustness(1.5 * std::polar(1.0, 1.1), +1, 2, budget);
    REQUIRE(a.r_k == Catch::Approx(b.r_k).margin(1e-6));

    // nonincreasing profile at alpha = 3
    double prev = 2.0;
    for (int k = 1; k <= 3; ++k) {
        auto res = cat_robustness(cplx(3.0, 0.0), +1, k, budget);
        REQUIRE(res.r_k <= prev + 1e-6);
        prev = res.r_k;
    }

    REQUIRE_THROWS_AS(cat_robustness(cplx(0.0), -1, 1, budget), numeric_error);
}
