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

#pragma once

#include "matfun.hpp"

namespace cvkit {
namespace progmeas {

using fock::OccupationTuple;

/// Acceptance probability of the order-m swap test against overlap x:
/// 1/m + (m-1) x / m. (The circuit realisation takes m a power of two.)
inline double swap_test_stats(int m, double overlap_sq) {
    if (m < 2) throw dimension_error("swap_test_stats: need m >= 2");
    if (overlap_sq < 0.0 || overlap_sq > 1.0)
        throw dimension_error("swap_test_stats: overlap must lie in [0,1]");
    return 1.0 / m + (m - 1.0) * overlap_sq / m;
}

/// Sign matrix S = sqrt(m) U for interferometers whose rows form a group
/// under elementwise multiplication.
struct SignMatrix {
    Matrix entries;  // +-1 (Hadamard-Walsh family)

    size_t order() const { return entries.rows(); }

    Matrix unitary() const {
        return entries * cplx(1.0 / std::sqrt(double(order())));
    }
};

/// Hadamard-Walsh transform of order n as a sign matrix of size 2^n.
inline SignMatrix hadamard_walsh(int order) {
    if (order < 0 || order > 20) throw dimension_error("hadamard_walsh: need 0 <= order <= 20");
    Matrix h(1, 1, {cplx(1.0)});
    Matrix block(2, 2, {cplx(1.0), cplx(1.0), cplx(1.0), cplx(-1.0)});
    for (int k = 0; k < order; ++k) h = kronecker(block, h);
    return {h};
}

/// Interferometer of an abelian group given by its invariant factors
/// (a_i | a_{i+1}): the normalised tensor product of Fourier matrices.
inline Matrix group_interferometer(const std::vector<int>& factors) {
    if (factors.empty()) throw dimension_error("group_interferometer: empty factor list");
    for (size_t i = 0; i + 1 < factors.size(); ++i)
        if (factors[i] < 1 || factors[i + 1] % factors[i] != 0)
            throw dimension_error("group_interferometer: factors must divide in order");
    Matrix total(1, 1, {cplx(1.0)});
    std::uint64_t m = 1;
    for (int a : factors) {
        if (a < 1) throw dimension_error("group_interferometer: factors must be positive");
        Matrix fourier(a, a);
        for (int k = 0; k < a; ++k)
            for (int l = 0; l < a; ++l)
                fourier(k, l) = std::polar(1.0, 2.0 * pi * double(k) * double(l) / a);
        total = kronecker(total, fourier);
        m *= a;
    }
    return total * cplx(1.0 / std::sqrt(double(m)));
}

struct DistinguishabilityProbs {
    double indistinguishable = 0.0;  // Pr_i
    double distinguishable = 0.0;    // Pr_d
};

/// Detection-pattern probabilities for one photon per input mode, in the
/// indistinguishable case and with the first photon fully distinguishable.
inline DistinguishabilityProbs distinguishability_probs(const Matrix& u,
                                                        const OccupationTuple& d) {
    size_t m = u.rows();
    if (d.size() != m || fock::total_photons(d) != static_cast<int>(m))
        throw dimension_error("distinguishability_probs: need |d| = m");
    if (!u.is_unitary(tolerances().unitarity))
        throw numeric_error("distinguishability_probs: U must be unitary");
    double dfact = fock::tuple_factorial(d);

    std::vector<int> ones(m, 1);
    Matrix ud = u.repeat(ones, d);  // column k repeated d_k times
    double pri = std::norm(matfun::permanent_ryser(ud)) / dfact;

    double prd = 0.0;
    std::vector<int> keep_rows(m, 1);
    keep_rows[0] = 0;
    for (size_t k = 0; k < m; ++k) {
        if (d[k] == 0) continue;
        OccupationTuple reduced = d;
        reduced[k] -= 1;
        Matrix sub = u.repeat(keep_rows, reduced);
        prd += d[k] * std::norm(u(0, k) * matfun::permanent_ryser(sub));
    }
    prd /= dfact;
    return {pri, prd};
}

/// pi(d) = sum_i prod_j s_ij^{d_j}, evaluated directly.
inline double pi_value(const SignMatrix& s, const OccupationTuple& d) {
    size_t m = s.order();
    if (d.size() != m) throw dimension_error("pi_value: pattern length mismatch");
    double total = 0.0;
    for (size_t i = 0; i < m; ++i) {
        double prod = 1.0;
        for (size_t j = 0; j < m; ++j)
            if (d[j] % 2 == 1) prod *= s.entries(i, j).real();  // even powers of +-1 are 1
        total += prod;
    }
    return total;
}

/// O(m log m) parity shortcut: keep the columns with odd photon number and
/// test the rows with index 2^k + 1 (1-based) for an even count of -1.
/// Returns 0 (accept, pi(d) = m) or 1 (reject, pi(d) = 0).
inline int parity_postprocess(const SignMatrix& s, const OccupationTuple& d) {
    size_t m = s.order();
    if (d.size() != m) throw dimension_error("parity_postprocess: pattern length mismatch");
    if ((m & (m - 1)) != 0) throw dimension_error("parity_postprocess: order must be a power of two");
    for (size_t row = 1; row < m; row *= 2) {
        int minus = 0;
        for (size_t j = 0; j < m; ++j)
            if (d[j] % 2 == 1 && s.entries(row, j).real() < 0.0) ++minus;
        if (minus % 2 == 1) return 1;
    }
    return 0;
}

struct CoherentSchemeStats {
    double p_no_click = 0.0;
    double gap_single_photon = 0.0;
    double gap_coherent = 0.0;
};

/// No-click acceptance of the coherent-state comparison schemes (Hadamard
/// and merger give identical statistics) and the worst-case gaps of both
/// encodings to a perfect projective measurement.
inline CoherentSchemeStats coherent_scheme_stats(int m, double overlap_sq) {
    if (m < 2) throw dimension_error("coherent_scheme_stats: need m >= 2");
    if (overlap_sq < 0.0 || overlap_sq > 1.0)
        throw dimension_error("coherent_scheme_stats: overlap must lie in [0,1]");
    CoherentSchemeStats out;
    out.p_no_click = std::pow(overlap_sq, 1.0 - 1.0 / m);
    out.gap_single_photon = 1.0 / m;
    out.gap_coherent = std::pow(m - 1.0, m - 1.0) / std::pow(double(m), m);
    return out;
}

/// Merger interferometer U_m = H_{1, m/2+1} (U_{m/2} (+) U_{m/2}), built on
/// balanced splitters; m a power of two.
inline Matrix merger_unitary(int m) {
    if (m < 2 || (m & (m - 1)) != 0)
        throw dimension_error("merger_unitary: m must be a power of two >= 2");
    double s = 1.0 / std::sqrt(2.0);
    Matrix h(2, 2, {cplx(s), cplx(s), cplx(s), cplx(-s)});
    if (m == 2) return h;
    Matrix half = merger_unitary(m / 2);
    Matrix combined = direct_sum(half, half);
    Matrix mixer = Matrix::identity(m);
    size_t a = 0, b = m / 2;
    mixer(a, a) = s;
    mixer(a, b) = s;
    mixer(b, a) = s;
    mixer(b, b) = -s;
    return mixer * combined;
}

struct MergerImperfection {
    double c2 = 0.0;  // completeness, two-mode scheme
    double c4 = 0.0;  // completeness, four-mode scheme
    double s2 = 0.0;  // soundness, two-mode scheme
    double s4 = 0.0;  // soundness, four-mode scheme
};

/// Closed forms for the merger comparison scheme with detector/channel
/// efficiency eta and beam-splitter visibility nu; s2 <= s4 and c4 <= c2
/// hold across the parameter ranges.
inline MergerImperfection merger_imperfect(cplx alpha, cplx beta, double nu, double eta) {
    if (nu < 0.0 || nu > 1.0 || eta < 0.0 || eta > 1.0)
        throw dimension_error("merger_imperfect: nu, eta must lie in [0,1]");
    double root = std::sqrt(nu * (1.0 - nu));
    double a2 = std::norm(alpha), b2 = std::norm(beta), diff2 = std::norm(alpha - beta);
    MergerImperfection out;
    out.c2 = std::exp(-2.0 * eta * (1.0 - nu) * a2);
    out.c4 = std::exp(-2.0 * eta * (1.0 - nu) * (1.0 + 2.0 * nu) * a2);
    out.s2 = 1.0 - std::exp(-eta * ((nu - 0.5) * diff2 + (1.0 - nu + root) * a2 +
                                    (1.0 - nu - root) * b2));
    out.s4 = 1.0 - std::exp(-eta * ((nu * nu - 0.25) * diff2 +
                                    ((1.0 + 2.0 * nu) * (1.0 - nu) + 2.0 * root) * a2 +
                                    ((1.0 + 2.0 * nu) * (1.0 - nu) - 2.0 * root) * b2));
    return out;
}

}  // namespace progmeas
}  // namespace cvkit
