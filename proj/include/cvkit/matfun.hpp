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

#include <bit>
#include <numeric>

#include "fock.hpp"

namespace cvkit {
namespace matfun {

enum class PermanentMethod { naive, ryser };

/// Permanent by explicit permutation sum. O(n * n!), oracle use only.
inline cplx permanent_naive(const Matrix& a) {
    size_t n = a.rows();
    if (n == 0) return 1.0;
    if (n > 9) throw dimension_error("permanent_naive: n <= 9");
    std::vector<size_t> perm(n);
    std::iota(perm.begin(), perm.end(), size_t{0});
    cplx sum = 0.0;
    do {
        cplx prod = 1.0;
        for (size_t i = 0; i < n; ++i) prod *= a(i, perm[i]);
        sum += prod;
    } while (std::next_permutation(perm.begin(), perm.end()));
    return sum;
}

/// Ryser's inclusion-exclusion formula with Gray-code subset updates,
/// O(n 2^n).
inline cplx permanent_ryser(const Matrix& a) {
    size_t n = a.rows();
    if (n == 0) return 1.0;
    if (n > 20) throw dimension_error("permanent_ryser: n <= 20");
    std::vector<cplx> row_sum(n, cplx(0.0));
    cplx total = 0.0;
    std::uint32_t prev = 0;
    for (std::uint32_t k = 1; k < (1u << n); ++k) {
        std::uint32_t code = k ^ (k >> 1);
        std::uint32_t changed = code ^ prev;
        int j = std::countr_zero(changed);
        double sign_col = (code & changed) ? 1.0 : -1.0;
        for (size_t i = 0; i < n; ++i) row_sum[i] += sign_col * a(i, j);
        prev = code;
        cplx prod = 1.0;
        for (size_t i = 0; i < n; ++i) prod *= row_sum[i];
        int bits = std::popcount(code);
        total += (((n - bits) % 2) ? -1.0 : 1.0) * prod;
    }
    return total;
}

inline cplx permanent_exact(const Matrix& a, PermanentMethod method = PermanentMethod::ryser) {
    if (a.rows() != a.cols()) throw dimension_error("permanent: matrix must be square");
    return method == PermanentMethod::naive ? permanent_naive(a) : permanent_ryser(a);
}

/// One Glynn term: prod_k delta_k * prod_j (delta . a_j) for signs
/// delta in {-1,1}^n; its mean over all sign vectors is Per(A) and its
/// magnitude never exceeds ||A||^n (operator norm).
inline cplx glynn_term(const Matrix& a, const std::vector<double>& delta) {
    size_t n = a.rows();
    cplx prod = 1.0;
    double sign = 1.0;
    for (size_t k = 0; k < n; ++k) sign *= delta[k];
    for (size_t j = 0; j < n; ++j) {
        cplx dot = 0.0;
        for (size_t i = 0; i < n; ++i) dot += delta[i] * a(i, j);
        prod *= dot;
    }
    return sign * prod;
}

/// Unbiased randomized permanent estimate with a two-sided Hoeffding bound:
/// additive error eps * ||A||^n at the configured failure probability.
inline ConfidenceValue permanent_estimate(const Matrix& a, std::uint64_t samples,
                                          std::uint64_t seed) {
    if (a.rows() != a.cols()) throw dimension_error("permanent_estimate: matrix must be square");
    if (samples < 1) throw dimension_error("permanent_estimate: need at least one sample");
    size_t n = a.rows();
    if (n == 0) return {cplx(1.0), 0.0, 0.0, false};
    Rng rng(seed);
    std::vector<double> delta(n);
    cplx acc = 0.0;
    for (std::uint64_t s = 0; s < samples; ++s) {
        for (size_t i = 0; i < n; ++i) delta[i] = rng.uniform() < 0.5 ? -1.0 : 1.0;
        acc += glynn_term(a, delta);
    }
    cplx estimate = acc / double(samples);
    double delta_fail = tolerances().delta;
    double M = std::pow(a.operator_norm(), double(n));
    double bound = 2.0 * M * std::sqrt(std::log(4.0 / delta_fail) / double(samples));
    return {estimate, bound, delta_fail, false};
}

namespace detail {

inline Matrix checked_symmetric(const Matrix& a, const char* who) {
    if (a.rows() != a.cols()) throw dimension_error(std::string(who) + ": matrix must be square");
    double defect = a.symmetry_defect();
    if (defect > tolerances().symmetry)
        throw numeric_error(std::string(who) + ": matrix is not symmetric");
    return defect > 0.0 ? a.symmetrized() : a;
}

// Perfect-matching recursion memoized on the surviving index subset.
class HafnianTable {
public:
    HafnianTable(const Matrix& a, bool loops) : a_(a), loops_(loops) {
        value_.assign(size_t{1} << a.rows(), cplx(0.0));
        known_.assign(size_t{1} << a.rows(), false);
    }

    cplx eval(std::uint32_t mask) {
        if (mask == 0) return 1.0;
        if (known_[mask]) return value_[mask];
        int k = std::countr_zero(mask);
        std::uint32_t rest = mask & (mask - 1);  // drop index k
        cplx sum = 0.0;
        if (loops_) sum += a_(k, k) * eval(rest);
        std::uint32_t others = rest;
        while (others) {
            int j = std::countr_zero(others);
            others &= others - 1;
            sum += a_(k, j) * eval(rest & ~(1u << j));
        }
        known_[mask] = true;
        value_[mask] = sum;
        return sum;
    }

private:
    const Matrix& a_;
    bool loops_;
    std::vector<cplx> value_;
    std::vector<bool> known_;
};

}  // namespace detail

/// Hafnian: sum over perfect matchings. Odd size gives 0, Haf of the empty
/// matrix is 1 by convention.
inline cplx hafnian_exact(const Matrix& a) {
    Matrix s = detail::checked_symmetric(a, "hafnian_exact");
    size_t n = s.rows();
    if (n == 0) return 1.0;
    if (n % 2 == 1) return 0.0;
    if (n > 16) throw dimension_error("hafnian_exact: size <= 16");
    detail::HafnianTable table(s, false);
    return table.eval((1u << n) - 1u);
}

/// Loop hafnian: sum over partitions into singletons and pairs; the
/// singleton {k} contributes a_kk. Equals the hafnian when diag(A) = 0.
inline cplx loop_hafnian_exact(const Matrix& a) {
    Matrix s = detail::checked_symmetric(a, "loop_hafnian_exact");
    size_t n = s.rows();
    if (n == 0) return 1.0;
    if (n > 14) throw dimension_error("loop_hafnian_exact: size <= 14");
    detail::HafnianTable table(s, true);
    return table.eval((1u << n) - 1u);
}

/// Row/column repetition spec for the Boson Sampling submatrix U_{s,t}.
struct RepetitionSpec {
    fock::OccupationTuple row_reps;
    fock::OccupationTuple col_reps;
};

inline Matrix repeat_matrix(const Matrix& a, const RepetitionSpec& spec) {
    return a.repeat(spec.row_reps, spec.col_reps);
}

/// The matrix A_{p,q}(V, D): entries of the symmetric 2m x 2m matrix V
/// repeated according to p (indices 1..m) and q (indices m+1..2m), with the
/// diagonal replaced by the correspondingly repeated entries of D.
inline Matrix repeat_symmetric(const Matrix& v, const std::vector<cplx>& d,
                               const fock::OccupationTuple& p, const fock::OccupationTuple& q) {
    Matrix vs = detail::checked_symmetric(v, "repeat_symmetric");
    size_t two_m = vs.rows();
    if (two_m % 2 != 0) throw dimension_error("repeat_symmetric: V must have even size");
    size_t m = two_m / 2;
    if (d.size() != two_m || p.size() != m || q.size() != m)
        throw dimension_error("repeat_symmetric: dimension mismatch");
    std::vector<int> reps(two_m);
    for (size_t k = 0; k < m; ++k) {
        reps[k] = p[k];
        reps[m + k] = q[k];
    }
    Matrix out = vs.repeat(reps, reps);
    std::vector<cplx> diag;
    for (size_t k = 0; k < two_m; ++k)
        for (int r = 0; r < reps[k]; ++r) diag.push_back(d[k]);
    for (size_t k = 0; k < diag.size(); ++k) out(k, k) = diag[k];
    return out;
}

/// Minimal one-sided error probability of an identity test on the given
/// states: Per(Gram)/m!.
inline double gram_error_bound(const std::vector<fock::FockVector>& states) {
    if (states.empty()) throw dimension_error("gram_error_bound: empty input");
    size_t m = states.size();
    if (m > 8) throw dimension_error("gram_error_bound: at most 8 states");
    for (const auto& s : states)
        if (!s.is_normalized(tolerances().normalization))
            throw numeric_error("gram_error_bound: states must be normalized");
    Matrix g(m, m);
    for (size_t k = 0; k < m; ++k)
        for (size_t l = 0; l < m; ++l) g(k, l) = fock::inner_product(states[k], states[l]);
    cplx per = permanent_ryser(g);
    if (std::abs(per.imag()) > 1e-9 * std::max(1.0, std::abs(per.real())))
        throw numeric_error("gram_error_bound: permanent of the Gram matrix is not real");
    return per.real() / factorial(static_cast<int>(m));
}

}  // namespace matfun
}  // namespace cvkit
