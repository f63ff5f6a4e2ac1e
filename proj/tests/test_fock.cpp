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

#include "cvkit/fock.hpp"

using namespace cvkit;
using fock::FockVector;
using fock::OccupationTuple;

TEST_CASE("sector enumeration") {
    auto s22 = fock::enumerate_sector(2, 2);
    REQUIRE(s22 == std::vector<OccupationTuple>{{2, 0}, {1, 1}, {0, 2}});

    auto empty = fock::enumerate_sector(4, 0);
    REQUIRE(empty == std::vector<OccupationTuple>{{0, 0, 0, 0}});

    REQUIRE(fock::enumerate_sector(3, 2).size() == 6);

    for (int m = 1; m <= 6; ++m)
        for (int n = 0; n <= 6; ++n)
            REQUIRE(fock::enumerate_sector(m, n).size() == binomial_exact(m + n - 1, n));
}

TEST_CASE("state distance") {
    FockVector zero = FockVector::basis_state({0}, {3});
    FockVector one = FockVector::basis_state({1}, {3});

    auto same = fock::state_distance(zero, zero);
    REQUIRE(same.fidelity == Catch::Approx(1.0));
    REQUIRE(same.trace_distance == Catch::Approx(0.0));

    auto orth = fock::state_distance(zero, one);
    REQUIRE(orth.fidelity == Catch::Approx(0.0));
    REQUIRE(orth.trace_distance == Catch::Approx(1.0));

    FockVector plus(1, 3);
    plus.set({0}, 1.0 / std::sqrt(2.0));
    plus.set({1}, 1.0 / std::sqrt(2.0));
    auto mixed = fock::state_distance(plus, zero);
    REQUIRE(mixed.fidelity == Catch::Approx(0.5));
    REQUIRE(mixed.trace_distance == Catch::Approx(std::sqrt(0.5)));

    FockVector two_modes = FockVector::vacuum(2, 2);
    REQUIRE_THROWS_AS(fock::state_distance(zero, two_modes), dimension_error);
    FockVector unnormalized(1, 3);
    unnormalized.set({0}, 0.5);
    REQUIRE_THROWS_AS(fock::state_distance(unnormalized, zero), numeric_error);
}

TEST_CASE("ladder operators") {
    FockVector vac = FockVector::vacuum(1, 4);
    auto killed = fock::apply_ladder(vac, 0, fock::Ladder::annihilation);
    REQUIRE(killed.norm2() == Catch::Approx(0.0));

    FockVector one = FockVector::basis_state({1}, {4});
    auto raised = fock::apply_ladder(one, 0, fock::Ladder::creation);
    REQUIRE(raised.at({2}) == cplx(std::sqrt(2.0)));

    // [a, a^dag] = 1 on components below the cutoff
    for (int n = 0; n <= 3; ++n) {
        FockVector fn = FockVector::basis_state({n}, {8});
        auto ad_a = fock::apply_ladder(fock::apply_ladder(fn, 0, fock::Ladder::creation), 0,
                                       fock::Ladder::annihilation);
        auto a_ad = fock::apply_ladder(fock::apply_ladder(fn, 0, fock::Ladder::annihilation), 0,
                                       fock::Ladder::creation);
        REQUIRE(std::abs(ad_a.at({n}) - a_ad.at({n}) - 1.0 * double(1)) < 1e-12);
    }

    // creation at the cutoff flags truncation and reports the lost weight
    FockVector top = FockVector::basis_state({4}, {4});
    auto over = fock::apply_ladder(top, 0, fock::Ladder::creation);
    REQUIRE(over.truncated());
    REQUIRE(over.lost_weight() == Catch::Approx(5.0));
}

TEST_CASE("truncated displacement") {
    auto id = fock::truncated_gaussian(fock::GaussianKind::displacement, 0.0, 6);
    REQUIRE((id.entries - Matrix::identity(7)).max_abs() < 1e-14);

    cplx alpha(0.4, -0.3);
    auto d = fock::truncated_gaussian(fock::GaussianKind::displacement, alpha, 12);
    for (int n = 0; n <= 12; ++n) {
        cplx expected = std::exp(-0.5 * std::norm(alpha)) * std::pow(alpha, n) /
                        std::sqrt(factorial(n));
        REQUIRE(std::abs(d.entries(n, 0) - expected) < 1e-12);
    }

    // column norms below 1 + 1e-9, approaching 1 as E grows
    for (int E : {8, 16, 24}) {
        auto dd = fock::truncated_gaussian(fock::GaussianKind::displacement, cplx(0.9, 0.2), E);
        for (int m = 0; m <= E / 2; ++m) {
            double col = 0.0;
            for (int n = 0; n <= E; ++n) col += std::norm(dd.entries(n, m));
            REQUIRE(col <= 1.0 + 1e-9);
        }
    }
    // D^dag D approaches I entrywise: the defect on a fixed window at least
    // halves with each cutoff increase
    double prev = 1.0;
    for (int E : {6, 8, 10, 12}) {
        auto dd = fock::truncated_gaussian(fock::GaussianKind::displacement, cplx(1.0, 0.0), E);
        Matrix gram = dd.entries.adjoint() * dd.entries;
        double defect = 0.0;
        for (size_t i = 0; i < 5; ++i)
            for (size_t j = 0; j < 5; ++j)
                defect = std::max(defect,
                                  std::abs(gram(i, j) - (i == j ? cplx(1.0) : cplx(0.0))));
        REQUIRE(defect < prev / 2.0);
        prev = defect;
    }
}

TEST_CASE("truncated squeeze") {
    double r = 0.3;
    auto s = fock::truncated_gaussian(fock::GaussianKind::squeeze, cplx(r, 0.0), 20);
    // squeezed-vacuum series: <2n|S(r)|0> with S = exp((xi a^2 - xi* a^dag^2)/2)
    for (int n = 0; n <= 10; ++n) {
        double expected = std::pow(-std::tanh(r), n) * std::sqrt(factorial(2 * n)) /
                          (std::pow(2.0, n) * factorial(n) * std::sqrt(std::cosh(r)));
        REQUIRE(std::abs(s.entries(2 * n, 0) - expected) < 1e-12);
        if (n >= 1) REQUIRE(std::abs(s.entries(2 * n - 1, 0)) == 0.0);
    }

    // braiding: D(alpha) S(xi) = S(xi) D(gamma), gamma = alpha c_r + alpha* e^{-i theta} s_r
    cplx xi = std::polar(0.25, 0.7);
    cplx alpha(0.3, -0.2);
    cplx gamma = alpha * std::cosh(0.25) + std::conj(alpha) * std::polar(std::sinh(0.25), -0.7);
    int E = 40;
    auto D = fock::truncated_gaussian(fock::GaussianKind::displacement, alpha, E);
    auto S = fock::truncated_gaussian(fock::GaussianKind::squeeze, xi, E);
    auto Dg = fock::truncated_gaussian(fock::GaussianKind::displacement, gamma, E);
    Matrix lhs = D.entries * S.entries;
    Matrix rhs = S.entries * Dg.entries;
    double worst = 0.0;
    for (int i = 0; i <= 12; ++i)
        for (int j = 0; j <= 12; ++j) worst = std::max(worst, std::abs(lhs(i, j) - rhs(i, j)));
    REQUIRE(worst < 1e-9);
}

TEST_CASE("squeeze-displace matrix elements") {
    cplx xi = std::polar(0.35, -1.1);
    cplx alpha(0.5, 0.4);
    int E = 60;
    auto S = fock::truncated_gaussian(fock::GaussianKind::squeeze, xi, E);
    auto D = fock::truncated_gaussian(fock::GaussianKind::displacement, alpha, E);
    Matrix prod = S.entries * D.entries;
    for (int n = 0; n <= 6; ++n)
        for (int m = 0; m <= 6; ++m) {
            cplx exact = fock::squeeze_displace_element(n, m, xi, alpha);
            REQUIRE(std::abs(prod(n, m) - exact) < 1e-10);
        }
    // xi = 0 reduces to the displacement elements
    for (int n = 0; n <= 5; ++n)
        for (int m = 0; m <= 5; ++m)
            REQUIRE(std::abs(fock::squeeze_displace_element(n, m, 0.0, alpha) -
                             fock::displacement_element(n, m, alpha)) < 1e-13);
}

TEST_CASE("interferometer on Fock states") {
    // vacuum maps to vacuum
    Matrix h(2, 2,
             {cplx(1 / std::sqrt(2.0)), cplx(1 / std::sqrt(2.0)), cplx(1 / std::sqrt(2.0)),
              cplx(-1 / std::sqrt(2.0))});
    FockVector vac = FockVector::vacuum(2, 3);
    auto vout = fock::apply_interferometer(h, vac);
    REQUIRE(std::abs(vout.at({0, 0}) - 1.0) < 1e-12);

    // Hong-Ou-Mandel
    FockVector in11 = FockVector::basis_state({1, 1}, {3, 3});
    auto out = fock::apply_interferometer(h, in11);
    REQUIRE(std::abs(out.at({1, 1})) < 1e-12);
    REQUIRE(std::abs(out.at({2, 0}) - 1.0 / std::sqrt(2.0)) < 1e-12);
    REQUIRE(std::abs(out.at({0, 2}) + 1.0 / std::sqrt(2.0)) < 1e-12);

    // random 3-mode unitary preserves the norm of |110>
    Rng rng(7);
    Matrix u = random_unitary(3, rng);
    FockVector in110 = FockVector::basis_state({1, 1, 0}, {2, 2, 2});
    auto evolved = fock::apply_interferometer(u, in110);
    REQUIRE(evolved.norm2() == Catch::Approx(1.0).margin(1e-9));

    Matrix not_unitary = u;
    not_unitary(0, 0) += 0.1;
    REQUIRE_THROWS_AS(fock::apply_interferometer(not_unitary, in110), numeric_error);
}
