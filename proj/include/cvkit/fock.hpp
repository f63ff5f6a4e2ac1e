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

#include <map>

#include "matrix.hpp"

namespace cvkit {
namespace fock {

/// Photon counts per mode. Tuples compare lexicographically via the
/// underlying vector, which fixes the ordering used across the library.
using OccupationTuple = std::vector<int>;

inline int total_photons(const OccupationTuple& t) {
    int n = 0;
    for (int k : t) n += k;
    return n;
}

inline double tuple_factorial(const OccupationTuple& t) {
    double f = 1.0;
    for (int k : t) f *= factorial(k);
    return f;
}

inline constexpr std::uint64_t sector_size_limit = 1u << 22;

/// All m-mode occupation tuples with n photons in total, first mode counted
/// down first: (2,0), (1,1), (0,2) for m = n = 2.
inline std::vector<OccupationTuple> enumerate_sector(int m, int n) {
    if (m < 1 || n < 0) throw dimension_error("enumerate_sector: need m >= 1, n >= 0");
    std::uint64_t count = binomial_exact(m + n - 1, n);
    if (count > sector_size_limit) throw dimension_error("enumerate_sector: sector too large");
    std::vector<OccupationTuple> out;
    out.reserve(count);
    OccupationTuple cur(m, 0);
    std::function<void(int, int)> walk = [&](int mode, int left) {
        if (mode == m - 1) {
            cur[mode] = left;
            out.push_back(cur);
            return;
        }
        for (int k = left; k >= 0; --k) {
            cur[mode] = k;
            walk(mode + 1, left - k);
        }
    };
    walk(0, n);
    return out;
}

/// Truncated multimode pure state: amplitudes over occupation tuples with a
/// per-mode cutoff. Operations that push weight past the cutoff drop it and
/// record the lost squared norm, so truncation error stays observable.
class FockVector {
public:
    FockVector(int modes, std::vector<int> cutoff)
        : modes_(modes), cutoff_(std::move(cutoff)) {
        if (modes_ < 1 || cutoff_.size() != static_cast<size_t>(modes_))
            throw dimension_error("FockVector: cutoff length must equal mode count");
    }

    FockVector(int modes, int uniform_cutoff)
        : FockVector(modes, std::vector<int>(modes, uniform_cutoff)) {}

    static FockVector basis_state(const OccupationTuple& occ, const std::vector<int>& cutoff) {
        FockVector v(static_cast<int>(occ.size()), cutoff);
        v.set(occ, 1.0);
        return v;
    }

    static FockVector vacuum(int modes, int cutoff) {
        return basis_state(OccupationTuple(modes, 0), std::vector<int>(modes, cutoff));
    }

    int modes() const { return modes_; }
    const std::vector<int>& cutoff() const { return cutoff_; }
    const std::map<OccupationTuple, cplx>& amplitudes() const { return amp_; }

    bool truncated() const { return truncated_; }
    double lost_weight() const { return lost_; }

    void set(const OccupationTuple& occ, cplx value) {
        check_tuple(occ);
        if (value == cplx(0.0))
            amp_.erase(occ);
        else
            amp_[occ] = value;
    }

    /// Accumulates, dropping out-of-cutoff components into the loss account.
    void add(const OccupationTuple& occ, cplx value) {
        if (occ.size() != static_cast<size_t>(modes_))
            throw dimension_error("FockVector: tuple length mismatch");
        for (int i = 0; i < modes_; ++i) {
            if (occ[i] < 0) throw dimension_error("FockVector: negative occupation");
            if (occ[i] > cutoff_[i]) {
                truncated_ = true;
                lost_ += std::norm(value);
                return;
            }
        }
        amp_[occ] += value;
    }

    cplx at(const OccupationTuple& occ) const {
        auto it = amp_.find(occ);
        return it == amp_.end() ? cplx(0.0) : it->second;
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& [occ, a] : amp_) s += std::norm(a);
        return s;
    }

    void scale(cplx s) {
        for (auto& [occ, a] : amp_) a *= s;
    }

    void normalize() {
        double n = std::sqrt(norm2());
        if (n == 0.0) throw numeric_error("FockVector: cannot normalize the zero vector");
        scale(1.0 / n);
    }

    bool is_normalized(double tol) const { return std::abs(norm2() - 1.0) <= tol; }

private:
    void check_tuple(const OccupationTuple& occ) const {
        if (occ.size() != static_cast<size_t>(modes_))
            throw dimension_error("FockVector: tuple length mismatch");
        for (int i = 0; i < modes_; ++i)
            if (occ[i] < 0 || occ[i] > cutoff_[i])
                throw dimension_error("FockVector: occupation outside cutoff");
    }

    int modes_;
    std::vector<int> cutoff_;
    std::map<OccupationTuple, cplx> amp_;
    bool truncated_ = false;
    double lost_ = 0.0;
};

inline cplx inner_product(const FockVector& a, const FockVector& b) {
    if (a.modes() != b.modes()) throw dimension_error("inner_product: mode count mismatch");
    // Iterate over the smaller support.
    const FockVector& small = a.amplitudes().size() <= b.amplitudes().size() ? a : b;
    const FockVector& large = (&small == &a) ? b : a;
    cplx s = 0.0;
    for (const auto& [occ, amp] : small.amplitudes()) {
        cplx other = large.at(occ);
        if (&small == &a)
            s += std::conj(amp) * other;
        else
            s += std::conj(other) * amp;
    }
    return s;
}

struct StateDistance {
    double fidelity;
    double trace_distance;
};

/// Pure-state fidelity |<a|b>|^2 and the matching trace distance sqrt(1-F).
inline StateDistance state_distance(const FockVector& a, const FockVector& b) {
    if (a.modes() != b.modes()) throw dimension_error("state_distance: mode count mismatch");
    double tol = tolerances().normalization;
    if (!a.is_normalized(tol) || !b.is_normalized(tol))
        throw numeric_error("state_distance: inputs must be normalized");
    double f = std::norm(inner_product(a, b));
    f = std::clamp(f, 0.0, 1.0);
    return {f, std::sqrt(1.0 - f)};
}

enum class Ladder { creation, annihilation };

/// a or a^dag on one mode; the result is unnormalized. Creation on a
/// component at the cutoff drops it and flags truncation.
inline FockVector apply_ladder(const FockVector& state, int mode, Ladder kind) {
    if (mode < 0 || mode >= state.modes()) throw dimension_error("apply_ladder: bad mode index");
    FockVector out(state.modes(), state.cutoff());
    for (const auto& [occ, amp] : state.amplitudes()) {
        OccupationTuple t = occ;
        if (kind == Ladder::creation) {
            double factor = std::sqrt(double(t[mode] + 1));
            t[mode] += 1;
            out.add(t, amp * factor);
        } else {
            if (t[mode] == 0) continue;
            double factor = std::sqrt(double(t[mode]));
            t[mode] -= 1;
            out.add(t, amp * factor);
        }
    }
    return out;
}

/// Single-mode operator on the truncated basis 0..E.
struct TruncatedOperator {
    int dim = 0;  // E + 1
    Matrix entries;
};

/// <n|D(alpha)|m> from the normally ordered product; the sum terminates, so
/// the truncated block is exact.
inline cplx displacement_element(int n, int m, cplx alpha) {
    cplx s = 0.0;
    for (int j = std::max(0, m - n); j <= m; ++j) {
        int i = n - m + j;
        s += std::pow(-std::conj(alpha), j) * std::pow(alpha, i) /
             (factorial(j) * factorial(i) * factorial(m - j)) * std::sqrt(factorial(m) * factorial(n));
    }
    return std::exp(-0.5 * std::norm(alpha)) * s;
}

namespace detail {

// Coefficients of (c_r z + s_r e^{i theta} d/dz)^m e^{-a z^2/2} divided by
// the Gaussian: a polynomial with parity m, computed through the
// probabilists' Hermite recurrence written out in closed form.
inline std::vector<cplx> squeeze_polynomial(int m, double r, double theta) {
    double cr = std::cosh(r);
    cplx lambda = -std::polar(std::tanh(r), theta);
    std::vector<cplx> p(m + 1, cplx(0.0));
    for (int q = 0; 2 * q <= m; ++q) {
        double he = factorial(m) / (std::pow(2.0, q) * factorial(q) * factorial(m - 2 * q));
        p[m - 2 * q] = he * std::pow(-lambda, q) / std::pow(cplx(cr), m - 2 * q);
    }
    return p;
}

// Taylor coefficients of exp(-a z^2/2 + b z) up to degree nmax.
inline std::vector<cplx> gaussian_series(cplx a, cplx b, int nmax) {
    std::vector<cplx> h(nmax + 1, cplx(0.0));
    for (int i = 0; 2 * i <= nmax; ++i) {
        cplx ai = std::pow(-0.5 * a, i) / factorial(i);
        for (int k = 0; 2 * i + k <= nmax; ++k)
            h[2 * i + k] += ai * std::pow(b, k) / factorial(k);
    }
    return h;
}

}  // namespace detail

/// <n|S(xi)|m> for S(xi) = exp((xi a^2 - xi* a^dag^2)/2), xi = r e^{i theta}.
inline cplx squeeze_element(int n, int m, cplx xi) {
    double r = std::abs(xi), theta = std::arg(xi);
    if ((n - m) % 2 != 0) return 0.0;
    double cr = std::cosh(r);
    cplx a = std::polar(std::tanh(r), -theta);
    std::vector<cplx> p = detail::squeeze_polynomial(m, r, theta);
    std::vector<cplx> h = detail::gaussian_series(a, 0.0, n);
    cplx coeff = 0.0;
    for (int j = 0; j <= std::min(n, m); ++j)
        if ((m - j) % 2 == 0 && n - j >= 0) coeff += p[j] * h[n - j];
    return coeff * factorial(n) / std::sqrt(factorial(m) * factorial(n) * cr);
}

/// <n|S(xi)D(alpha)|m>, exact: the displaced-squeezed Gaussian stays a
/// polynomial times a Gaussian under (c_r z + s_r e^{i theta} d/dz - alpha*).
inline cplx squeeze_displace_element(int n, int m, cplx xi, cplx alpha) {
    double r = std::abs(xi), theta = std::arg(xi);
    double cr = std::cosh(r), sr = std::sinh(r), tr = std::tanh(r);
    cplx eith = std::polar(1.0, theta);
    cplx a = std::conj(eith) * tr;
    cplx b = alpha / cr;
    cplx c0 = 0.5 * eith * tr * alpha * alpha - 0.5 * std::norm(alpha);
    // P <- c_r z P + s_r e^{i theta} (P' + (b - a z) P) - alpha* P
    std::vector<cplx> p{1.0};
    for (int step = 0; step < m; ++step) {
        std::vector<cplx> q(p.size() + 1, cplx(0.0));
        cplx zcoef = cr - sr * eith * a;
        cplx idcoef = sr * eith * b - std::conj(alpha);
        for (size_t j = 0; j < p.size(); ++j) {
            q[j + 1] += zcoef * p[j];
            q[j] += idcoef * p[j];
            if (j >= 1) q[j - 1] += sr * eith * double(j) * p[j];
        }
        p = std::move(q);
    }
    std::vector<cplx> h = detail::gaussian_series(a, b, n);
    cplx coeff = 0.0;
    for (size_t j = 0; j < p.size() && j <= static_cast<size_t>(n); ++j)
        coeff += p[j] * h[n - j];
    return coeff * std::exp(c0) * factorial(n) / std::sqrt(factorial(m) * factorial(n) * cr);
}

enum class GaussianKind { displacement, squeeze };

/// (E+1)x(E+1) matrix of <n|O|k> for a displacement or squeeze operator.
inline TruncatedOperator truncated_gaussian(GaussianKind kind, cplx parameter, int E) {
    if (E < 0) throw dimension_error("truncated_gaussian: E must be nonnegative");
    TruncatedOperator op;
    op.dim = E + 1;
    op.entries = Matrix(op.dim, op.dim);
    for (int n = 0; n <= E; ++n)
        for (int m = 0; m <= E; ++m)
            op.entries(n, m) = (kind == GaussianKind::displacement)
                                   ? displacement_element(n, m, parameter)
                                   : squeeze_element(n, m, parameter);
    return op;
}

/// Applies a single-mode truncated operator on one mode of a multimode state.
inline FockVector apply_single_mode(const FockVector& state, int mode, const TruncatedOperator& op) {
    if (mode < 0 || mode >= state.modes()) throw dimension_error("apply_single_mode: bad mode");
    if (op.dim < state.cutoff()[mode] + 1)
        throw dimension_error("apply_single_mode: operator block smaller than cutoff");
    FockVector out(state.modes(), state.cutoff());
    for (const auto& [occ, amp] : state.amplitudes()) {
        for (int np = 0; np <= state.cutoff()[mode]; ++np) {
            cplx el = op.entries(np, occ[mode]);
            if (el == cplx(0.0)) continue;
            OccupationTuple t = occ;
            t[mode] = np;
            out.add(t, el * amp);
        }
    }
    return out;
}

/// Passive interferometer on the truncated Fock space: input mode j maps to
/// sum_i u_{ij} a_i^dag, expanded per sector with multinomial weights. Norm
/// is preserved within each sector for unitary U.
inline FockVector apply_interferometer(const Matrix& U, const FockVector& state) {
    int m = state.modes();
    if (U.rows() != static_cast<size_t>(m) || U.cols() != static_cast<size_t>(m))
        throw dimension_error("apply_interferometer: matrix size must match mode count");
    if (!U.is_unitary(tolerances().unitarity))
        throw numeric_error("apply_interferometer: matrix is not unitary");
    FockVector out(m, state.cutoff());
    for (const auto& [occ, amp] : state.amplitudes()) {
        // Expand prod_j (sum_i u_{ij} a_i^dag)^{occ_j} |0>.
        std::map<OccupationTuple, cplx> acc;
        acc[OccupationTuple(m, 0)] = amp / std::sqrt(tuple_factorial(occ));
        for (int j = 0; j < m; ++j) {
            if (occ[j] == 0) continue;
            auto splits = enumerate_sector(m, occ[j]);
            std::map<OccupationTuple, cplx> next;
            for (const auto& [partial, c] : acc) {
                for (const auto& k : splits) {
                    cplx w = factorial(occ[j]) / tuple_factorial(k);
                    for (int i = 0; i < m; ++i)
                        if (k[i] > 0) w *= std::pow(U(i, j), k[i]);
                    if (w == cplx(0.0)) continue;
                    OccupationTuple t = partial;
                    for (int i = 0; i < m; ++i) t[i] += k[i];
                    next[t] += c * w;
                }
            }
            acc = std::move(next);
        }
        for (const auto& [t, c] : acc) out.add(t, c * std::sqrt(tuple_factorial(t)));
    }
    return out;
}

/// Heterodyne (Husimi) density of a truncated pure state at a phase-space
/// point: |<alpha|psi>|^2 / pi^m.
inline double husimi_density(const FockVector& state, const std::vector<cplx>& alpha) {
    if (alpha.size() != static_cast<size_t>(state.modes()))
        throw dimension_error("husimi_density: point dimension mismatch");
    cplx overlap = 0.0;
    for (const auto& [occ, amp] : state.amplitudes()) {
        cplx mono = 1.0;
        for (int i = 0; i < state.modes(); ++i)
            mono *= std::pow(std::conj(alpha[i]), occ[i]) / std::sqrt(factorial(occ[i]));
        overlap += amp * mono;
    }
    double norm2alpha = 0.0;
    for (const auto& a : alpha) norm2alpha += std::norm(a);
    return std::exp(-norm2alpha) * std::norm(overlap) / std::pow(pi, state.modes());
}

}  // namespace fock
}  // namespace cvkit
