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

#include <memory>

#include "matfun.hpp"

namespace cvkit {
namespace interf {

using fock::OccupationTuple;

/// Photon pattern transition amplitude <s|U|t> = Per(U_{s,t}) / sqrt(s! t!),
/// with rows of U repeated by the output pattern and columns by the input.
inline cplx transition_amplitude(const Matrix& u, const OccupationTuple& output,
                                 const OccupationTuple& input) {
    Matrix sub = u.repeat(output, input);
    return matfun::permanent_ryser(sub) /
           std::sqrt(fock::tuple_factorial(output) * fock::tuple_factorial(input));
}

/// Boson Sampling output probability, Pr[s|t] = |Per(U_{s,t})|^2 / (s! t!).
inline double bs_probability(const Matrix& u, const OccupationTuple& input,
                             const OccupationTuple& output) {
    if (!u.is_unitary(tolerances().unitarity))
        throw numeric_error("bs_probability: interferometer is not unitary");
    if (input.size() != u.rows() || output.size() != u.rows())
        throw dimension_error("bs_probability: tuple length must match mode count");
    if (fock::total_photons(input) != fock::total_photons(output)) return 0.0;
    return std::norm(transition_amplitude(u, output, input));
}

/// Chain-rule sampler over modes: mode j is drawn from its conditional
/// distribution given the prefix, obtained by summing the joint probability
/// over all completions. Deterministic per seed; ties resolved by
/// cumulative-sum inversion on a half-open partition.
class BsSampler {
public:
    BsSampler(Matrix u, OccupationTuple input, std::uint64_t seed)
        : u_(std::move(u)), input_(std::move(input)), rng_(seed) {
        m_ = static_cast<int>(u_.rows());
        n_ = fock::total_photons(input_);
        if (!u_.is_unitary(tolerances().unitarity))
            throw numeric_error("BsSampler: interferometer is not unitary");
        if (binomial_exact(m_ + n_ - 1, n_) > 100000)
            throw dimension_error("BsSampler: sector too large to enumerate");
    }

    OccupationTuple draw() {
        OccupationTuple prefix;
        int used = 0;
        for (int mode = 0; mode < m_; ++mode) {
            if (mode == m_ - 1) {
                prefix.push_back(n_ - used);
                break;
            }
            const std::vector<double>& weights = marginals(prefix, used);
            double total = 0.0;
            for (double w : weights) total += w;
            double target = rng_.uniform() * total;
            double cum = 0.0;
            int value = static_cast<int>(weights.size()) - 1;
            for (size_t v = 0; v < weights.size(); ++v) {
                cum += weights[v];
                if (target < cum) {
                    value = static_cast<int>(v);
                    break;
                }
            }
            prefix.push_back(value);
            used += value;
        }
        return prefix;
    }

    std::vector<OccupationTuple> draw_many(std::uint64_t count) {
        std::vector<OccupationTuple> out;
        out.reserve(count);
        for (std::uint64_t i = 0; i < count; ++i) out.push_back(draw());
        return out;
    }

private:
    // weights[v] = Pr[prefix + (v)] marginal, cached per prefix
    const std::vector<double>& marginals(const OccupationTuple& prefix, int used) {
        auto it = cache_.find(prefix);
        if (it != cache_.end()) return it->second;
        int j = static_cast<int>(prefix.size());
        int left = n_ - used;
        std::vector<double> weights(left + 1, 0.0);
        for (int v = 0; v <= left; ++v) {
            double sum = 0.0;
            if (j + 1 == m_) {
                if (v == left) {
                    OccupationTuple full = prefix;
                    full.push_back(v);
                    sum = std::norm(transition_amplitude(u_, full, input_));
                }
            } else {
                for (const auto& tail : fock::enumerate_sector(m_ - j - 1, left - v)) {
                    OccupationTuple full = prefix;
                    full.push_back(v);
                    full.insert(full.end(), tail.begin(), tail.end());
                    sum += std::norm(transition_amplitude(u_, full, input_));
                }
            }
            weights[v] = sum;
        }
        return cache_.emplace(prefix, std::move(weights)).first->second;
    }

    Matrix u_;
    OccupationTuple input_;
    Rng rng_;
    int m_ = 0, n_ = 0;
    std::map<OccupationTuple, std::vector<double>> cache_;
};

inline std::vector<OccupationTuple> bs_sample(const Matrix& u, const OccupationTuple& input,
                                              std::uint64_t count, std::uint64_t seed) {
    BsSampler sampler(u, input, seed);
    return sampler.draw_many(count);
}

/// Adaptive linear optics: base interferometer U_0 over m modes, then after
/// measuring mode j the remaining m-j modes evolve under a stage unitary
/// that may depend on the outcomes observed so far.
struct AdaptiveCircuit {
    int modes = 0;
    int photons = 0;
    int adaptive_modes = 0;
    Matrix base_unitary;
    /// prefix (p_1..p_j) -> unitary of size m-j
    std::function<Matrix(const OccupationTuple&)> stage_unitaries;

    /// Table-backed stages, convenient for tests and JSON input. Missing
    /// prefixes default to the identity.
    static AdaptiveCircuit from_table(int m, int n, int k, Matrix u0,
                                      std::map<OccupationTuple, Matrix> table) {
        AdaptiveCircuit c;
        c.modes = m;
        c.photons = n;
        c.adaptive_modes = k;
        c.base_unitary = std::move(u0);
        auto shared = std::make_shared<std::map<OccupationTuple, Matrix>>(std::move(table));
        c.stage_unitaries = [m, shared](const OccupationTuple& prefix) {
            auto it = shared->find(prefix);
            if (it != shared->end()) return it->second;
            return Matrix::identity(m - prefix.size());
        };
        return c;
    }

    /// U^p = [1_k (+) U_k(p)] ... [1_1 (+) U_1(p_1)] U_0
    Matrix assemble(const OccupationTuple& p) const {
        if (p.size() != static_cast<size_t>(adaptive_modes))
            throw dimension_error("AdaptiveCircuit: prefix length must equal adaptive modes");
        Matrix total = base_unitary;
        for (int j = 1; j <= adaptive_modes; ++j) {
            OccupationTuple prefix(p.begin(), p.begin() + j);
            Matrix stage = stage_unitaries(prefix);
            if (stage.rows() != static_cast<size_t>(modes - j))
                throw dimension_error("AdaptiveCircuit: stage unitary has the wrong size");
            if (!stage.is_unitary(tolerances().unitarity))
                throw numeric_error("AdaptiveCircuit: stage unitary is not unitary");
            total = direct_sum(Matrix::identity(j), stage) * total;
        }
        return total;
    }

    OccupationTuple input_tuple() const {
        OccupationTuple t(modes, 0);
        for (int i = 0; i < photons; ++i) t[i] = 1;
        return t;
    }
};

/// Probability of the final outcome s after k adaptive measurements:
/// (1/s!) sum over adaptive outcomes p with |p| = n - |s| of
/// (1/p!) |Per(U^p_{(p,s),t})|^2.
inline double adaptive_final_probability(const AdaptiveCircuit& c, const OccupationTuple& final) {
    int k = c.adaptive_modes;
    if (final.size() != static_cast<size_t>(c.modes - k))
        throw dimension_error("adaptive_final_probability: final outcome length mismatch");
    int detected = fock::total_photons(final);
    if (detected > c.photons) return 0.0;
    if (k == 0) return bs_probability(c.base_unitary, c.input_tuple(), final);
    int adaptive_photons = c.photons - detected;
    OccupationTuple t = c.input_tuple();
    double sum = 0.0;
    for (const auto& p : fock::enumerate_sector(k, adaptive_photons)) {
        Matrix up = c.assemble(p);
        OccupationTuple joint = p;
        joint.insert(joint.end(), final.begin(), final.end());
        cplx per = matfun::permanent_ryser(up.repeat(joint, t));
        sum += std::norm(per) / fock::tuple_factorial(p);
    }
    return sum / (fock::tuple_factorial(final) * fock::tuple_factorial(t));
}

namespace detail {

inline std::vector<OccupationTuple> bit_patterns(int n, int r) {
    std::vector<OccupationTuple> out;
    for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
        if (std::popcount(mask) != r) continue;
        OccupationTuple bits(n, 0);
        for (int i = 0; i < n; ++i) bits[i] = (mask >> i) & 1;
        out.push_back(bits);
    }
    return out;
}

}  // namespace detail

/// Inner product of the (not normalised) post-measurement states of two
/// adaptive circuits with adaptive outcomes p and q, through the Laplace
/// expansion and the permanent composition formula.
inline cplx adaptive_overlap(const AdaptiveCircuit& cp, const OccupationTuple& p,
                             const AdaptiveCircuit& cq, const OccupationTuple& q) {
    if (cp.modes != cq.modes || cp.photons != cq.photons ||
        cp.adaptive_modes != cq.adaptive_modes)
        throw dimension_error("adaptive_overlap: circuit shape mismatch");
    int m = cp.modes, n = cp.photons, k = cp.adaptive_modes;
    int r = fock::total_photons(p);
    if (r != fock::total_photons(q)) return 0.0;  // photon-number conservation
    if (r > n) return 0.0;

    Matrix updag = cp.assemble(p).adjoint();
    Matrix vq = cq.assemble(q);

    // row/column index sets on the full m-mode matrices
    std::vector<size_t> first_n(n), trailing(m - k);
    std::iota(first_n.begin(), first_n.end(), size_t{0});
    std::iota(trailing.begin(), trailing.end(), static_cast<size_t>(k));

    auto patterns = detail::bit_patterns(n, r);
    cplx total = 0.0;
    for (const auto& i_bits : patterns) {
        // A^i: rows of U^p(dag) picked by i among the first n, columns
        // repeated according to p among the first k
        std::vector<size_t> rows_i, rows_not_i;
        for (int l = 0; l < n; ++l) (i_bits[l] ? rows_i : rows_not_i).push_back(l);
        std::vector<size_t> cols_p;
        for (int l = 0; l < k; ++l)
            for (int rep = 0; rep < p[l]; ++rep) cols_p.push_back(l);
        cplx per_a = matfun::permanent_ryser(updag.select(rows_i, cols_p));

        Matrix u_tilde = updag.select(rows_not_i, trailing);  // (n-r) x (m-k)

        for (const auto& j_bits : patterns) {
            std::vector<size_t> cols_j, cols_not_j;
            for (int l = 0; l < n; ++l) (j_bits[l] ? cols_j : cols_not_j).push_back(l);
            std::vector<size_t> rows_q;
            for (int l = 0; l < k; ++l)
                for (int rep = 0; rep < q[l]; ++rep) rows_q.push_back(l);
            cplx per_b = matfun::permanent_ryser(vq.select(rows_q, cols_j));

            Matrix v_tilde = vq.select(trailing, cols_not_j);  // (m-k) x (n-r)
            cplx per_c = matfun::permanent_ryser(u_tilde * v_tilde);
            total += per_a * per_b * per_c;
        }
    }
    return total / std::sqrt(fock::tuple_factorial(p) * fock::tuple_factorial(q));
}

/// The action of U on the n-photon sector: entries <s|U|t> over the
/// lexicographically ordered sector basis.
inline Matrix lift_unitary(const Matrix& u, int n) {
    int m = static_cast<int>(u.rows());
    auto basis = fock::enumerate_sector(m, n);
    if (basis.size() > 3000) throw dimension_error("lift_unitary: sector too large");
    Matrix lifted(basis.size(), basis.size());
    for (size_t i = 0; i < basis.size(); ++i)
        for (size_t j = 0; j < basis.size(); ++j)
            lifted(i, j) = transition_amplitude(u, basis[i], basis[j]);
    return lifted;
}

}  // namespace interf
}  // namespace cvkit
