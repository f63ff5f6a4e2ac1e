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

#include "gaussian.hpp"

namespace cvkit {
namespace heterodyne {

/// Heterodyne outcomes: `count` shots of `modes` complex samples each,
/// stored flat, with the generating seed and a free-form detection label.
struct SampleBatch {
    int modes = 1;
    std::vector<cplx> data;
    std::uint64_t seed = 0;
    std::string descriptor;

    size_t count() const { return modes == 0 ? 0 : data.size() / modes; }
    cplx at(size_t shot, int mode) const { return data[shot * modes + mode]; }
};

namespace detail {

inline int max_occupation(const fock::FockVector& state) {
    int top = 0;
    for (const auto& [occ, amp] : state.amplitudes())
        for (int n : occ) top = std::max(top, n);
    return top;
}

}  // namespace detail

namespace detail {

// One chain-rule step: draw a sample of the first remaining mode from its
// marginal and collapse the pure state onto the outcome. The marginal is the
// mixed single-mode Q of the reduced state; the rejection proposal is an
// isotropic complex Gaussian of variance (1 + top occupation) with the
// polynomial-times-Gaussian envelope, evaluated exactly.
struct SupportTerm {
    int head;               // occupation of the mode being sampled
    std::vector<int> tail;  // remaining modes
    cplx amp;
};

inline cplx conditional_draw(std::vector<SupportTerm>& support, Rng& rng,
                             std::uint64_t* proposed, std::uint64_t* accepted) {
    int top = 0;
    for (const auto& t : support) top = std::max(top, t.head);
    double v = top + 1.0;

    // diagonal of the reduced single-mode state
    std::vector<double> diag(top + 1, 0.0);
    for (const auto& t : support) diag[t.head] += std::norm(t.amp);
    double envelope = 0.0;
    for (int n = 0; n <= top; ++n) {
        double peak = (n == 0) ? 1.0 : std::pow(n / (1.0 - 1.0 / v), 0.5 * n) * std::exp(-0.5 * n);
        envelope += std::sqrt(diag[n] / factorial(n)) * peak;
    }
    envelope = v * envelope * envelope * 1.05;

    // group the support by tail to evaluate the marginal Q = sum_tail
    // |sum_head amp <alpha|head>|^2 / pi without building the reduced matrix
    std::vector<cplx> powers(top + 1);
    while (true) {
        cplx z = std::sqrt(v) * rng.complex_normal();
        ++*proposed;
        double nz = std::norm(z);
        powers[0] = 1.0;
        cplx zc = std::conj(z);
        for (int p = 1; p <= top; ++p) powers[p] = powers[p - 1] * zc;
        // Q_1(z): sum over tails of |projected amplitude|^2
        double q1 = 0.0;
        for (size_t i = 0; i < support.size();) {
            cplx acc = 0.0;
            size_t j = i;
            for (; j < support.size() && support[j].tail == support[i].tail; ++j)
                acc += support[j].amp * powers[support[j].head] /
                       std::sqrt(factorial(support[j].head));
            q1 += std::norm(acc);
            i = j;
        }
        q1 *= std::exp(-nz) / pi;
        double proposal = std::exp(-nz / v) / (pi * v);
        if (q1 > envelope * proposal * (1.0 + 1e-12))
            throw numeric_error("sample_husimi: envelope violated");
        if (rng.uniform() * envelope * proposal <= q1) {
            ++*accepted;
            // collapse onto the outcome and renormalize
            std::vector<SupportTerm> next;
            double norm2 = 0.0;
            for (size_t i = 0; i < support.size();) {
                cplx acc = 0.0;
                size_t j = i;
                for (; j < support.size() && support[j].tail == support[i].tail; ++j)
                    acc += support[j].amp * powers[support[j].head] /
                           std::sqrt(factorial(support[j].head));
                if (acc != cplx(0.0)) {
                    SupportTerm t;
                    t.head = support[i].tail.empty() ? 0 : support[i].tail.front();
                    t.tail.assign(support[i].tail.begin() + (support[i].tail.empty() ? 0 : 1),
                                  support[i].tail.end());
                    t.amp = acc;
                    norm2 += std::norm(acc);
                    next.push_back(std::move(t));
                }
                i = j;
            }
            if (norm2 <= 0.0) throw numeric_error("sample_husimi: conditional state vanished");
            double inv = 1.0 / std::sqrt(norm2);
            for (auto& t : next) t.amp *= inv;
            support = std::move(next);
            return z;
        }
    }
}

}  // namespace detail

/// Samples the Husimi Q density of a truncated pure state exactly, by the
/// chain rule over modes: each mode is drawn from its marginal by rejection
/// from an isotropic complex Gaussian proposal of variance E+1 (E the top
/// occupied photon number of that mode), with the envelope constant from the
/// polynomial-times-Gaussian bound, and the state is collapsed onto the
/// outcome before the next mode. Deterministic per seed.
inline SampleBatch sample_husimi(const fock::FockVector& state, std::uint64_t count,
                                 std::uint64_t seed) {
    if (!state.is_normalized(tolerances().normalization))
        throw numeric_error("sample_husimi: state must be normalized");
    int m = state.modes();

    // support sorted with grouped tails (ordered map iteration gives tuples
    // sorted lexicographically, so equal tails are NOT adjacent; re-sort)
    std::vector<detail::SupportTerm> base;
    for (const auto& [occ, amp] : state.amplitudes()) {
        detail::SupportTerm t;
        t.head = occ[0];
        t.tail.assign(occ.begin() + 1, occ.end());
        t.amp = amp;
        base.push_back(std::move(t));
    }
    std::sort(base.begin(), base.end(), [](const auto& a, const auto& b) {
        return a.tail != b.tail ? a.tail < b.tail : a.head < b.head;
    });

    SampleBatch batch;
    batch.modes = m;
    batch.seed = seed;
    batch.descriptor = "husimi-fock";
    batch.data.reserve(count * m);
    Rng rng(seed);
    std::uint64_t proposed = 0, accepted = 0;
    for (std::uint64_t shot = 0; shot < count; ++shot) {
        std::vector<detail::SupportTerm> support = base;
        for (int mode = 0; mode < m; ++mode) {
            if (mode > 0)
                std::sort(support.begin(), support.end(), [](const auto& a, const auto& b) {
                    return a.tail != b.tail ? a.tail < b.tail : a.head < b.head;
                });
            batch.data.push_back(detail::conditional_draw(support, rng, &proposed, &accepted));
        }
        if (proposed > 10000 && double(accepted) / double(proposed) < 1e-4)
            throw numeric_error("sample_husimi: acceptance rate below 1e-4");
    }
    return batch;
}

/// Gaussian states have an exactly Gaussian Q density; sampling is direct
/// (a rejection step with unit acceptance).
inline SampleBatch sample_husimi(const gaussian::GaussianState& state, std::uint64_t count,
                                 std::uint64_t seed) {
    int m = state.modes;
    // quadratic form of Q in the real coordinates (Re a_1, Im a_1, ...)
    Matrix sigma = state.covariance + Matrix::identity(2 * m) * cplx(0.5);
    Matrix minv = sigma.inverse();
    // real-coordinate precision matrix: A = T^dag M T with beta~ = T x
    Matrix t(2 * m, 2 * m);
    for (int i = 0; i < m; ++i) {
        t(i, 2 * i) = 1.0;
        t(i, 2 * i + 1) = cplx(0.0, 1.0);
        t(m + i, 2 * i) = 1.0;
        t(m + i, 2 * i + 1) = cplx(0.0, -1.0);
    }
    Matrix a = t.adjoint() * minv * t;
    // covariance of the density is the inverse of Re(A)
    Matrix prec(2 * m, 2 * m);
    for (size_t i = 0; i < prec.rows(); ++i)
        for (size_t j = 0; j < prec.cols(); ++j) prec(i, j) = a(i, j).real();
    Matrix cov = prec.inverse();
    // real Cholesky cov = L L^T
    Matrix l(2 * m, 2 * m);
    for (size_t i = 0; i < cov.rows(); ++i)
        for (size_t j = 0; j <= i; ++j) {
            double s = cov(i, j).real();
            for (size_t k = 0; k < j; ++k) s -= (l(i, k) * l(j, k)).real();
            if (i == j) {
                if (s <= 0.0) throw numeric_error("sample_husimi: covariance not positive");
                l(i, j) = std::sqrt(s);
            } else {
                l(i, j) = s / l(j, j).real();
            }
        }

    SampleBatch batch;
    batch.modes = m;
    batch.seed = seed;
    batch.descriptor = "husimi-gaussian";
    batch.data.reserve(count * m);
    Rng rng(seed);
    std::vector<double> n(2 * m), x(2 * m);
    for (std::uint64_t shot = 0; shot < count; ++shot) {
        for (auto& u : n) u = rng.normal();
        for (int i = 0; i < 2 * m; ++i) {
            double s = 0.0;
            for (int k = 0; k <= i; ++k) s += l(i, k).real() * n[k];
            x[i] = s;
        }
        for (int i = 0; i < m; ++i)
            batch.data.push_back(cplx(x[2 * i] + state.displacement[i].real(),
                                      x[2 * i + 1] + state.displacement[i].imag()));
    }
    return batch;
}

/// Laguerre 2D polynomial, as the finite double sum
/// sum_p (-1)^p sqrt(k! l!) / (p! (k-p)! (l-p)!) z^{l-p} (z*)^{k-p}.
inline cplx laguerre2d(int k, int l, cplx z) {
    if (k < 0 || l < 0 || k > 60 || l > 60) throw dimension_error("laguerre2d: need 0 <= k,l <= 60");
    cplx sum = 0.0;
    for (int p = 0; p <= std::min(k, l); ++p) {
        double coeff = ((p % 2) ? -1.0 : 1.0) * std::sqrt(factorial(k) * factorial(l)) /
                       (factorial(p) * factorial(k - p) * factorial(l - p));
        sum += coeff * std::pow(z, l - p) * std::pow(std::conj(z), k - p);
    }
    return sum;
}

/// Single-mode operator coefficients A_kl over the truncated Fock basis.
struct OperatorCoefficients {
    Matrix a;  // (E+1) x (E+1)

    int cutoff() const { return static_cast<int>(a.rows()) - 1; }

    static OperatorCoefficients ket_bra(int l, int k, int E) {
        OperatorCoefficients op;
        op.a = Matrix(E + 1, E + 1);
        op.a(l, k) = 1.0;
        return op;
    }

    static OperatorCoefficients projector(const std::vector<cplx>& psi) {
        OperatorCoefficients op;
        size_t d = psi.size();
        op.a = Matrix(d, d);
        for (size_t k = 0; k < d; ++k)
            for (size_t l = 0; l < d; ++l) op.a(k, l) = psi[k] * std::conj(psi[l]);
        return op;
    }

    static OperatorCoefficients scaled_parity(int E, double scale) {
        OperatorCoefficients op;
        op.a = Matrix(E + 1, E + 1);
        for (int n = 0; n <= E; ++n) op.a(n, n) = scale * ((n % 2) ? -1.0 : 1.0);
        return op;
    }
};

inline void check_eta(double eta, int E) {
    if (!(eta > 0.0) || !(eta < 1.0) || (E >= 1 && !(eta < 2.0 / E)))
        throw dimension_error("heterodyne: eta must lie in (0, min(1, 2/E))");
}

/// The heterodyne estimator function f_A(z, eta): a bounded regularisation
/// of the Glauber-Sudarshan function of A whose mean over Q_rho samples
/// approaches Tr(A rho) within eta K_A.
inline cplx estimator_f(const OperatorCoefficients& op, double eta, cplx z) {
    int E = op.cutoff();
    check_eta(eta, E);
    cplx zs = z / std::sqrt(eta);
    cplx sum = 0.0;
    for (int k = 0; k <= E; ++k)
        for (int l = 0; l <= E; ++l) {
            if (op.a(k, l) == cplx(0.0)) continue;
            sum += op.a(k, l) * std::pow(eta, -0.5 * (k + l)) * laguerre2d(k, l, zs);
        }
    return sum * std::exp((1.0 - 1.0 / eta) * std::norm(z)) / eta;
}

/// K_A = sum |A_kl| sqrt((k+1)(l+1)); the th. approximation error is eta K_A.
inline double k_constant(const OperatorCoefficients& op) {
    double sum = 0.0;
    for (int k = 0; k <= op.cutoff(); ++k)
        for (int l = 0; l <= op.cutoff(); ++l)
            sum += std::abs(op.a(k, l)) * std::sqrt(double(k + 1) * double(l + 1));
    return sum;
}

/// sup_z |f_{|k><l|}(z, eta)| = M_kl / eta^{1 + (k+l)/2}.
inline double m_constant(int k, int l) {
    int hi = std::max(k, l), lo = std::min(k, l);
    return std::sqrt(std::pow(2.0, hi - lo) * binomial(hi, lo));
}

/// C_kl = [(k+1)(l+1)]^{1+(k+l)/2} M_kl^2.
inline double c_constant(int k, int l) {
    int hi = std::max(k, l), lo = std::min(k, l);
    return std::pow(double(k + 1) * double(l + 1), 1.0 + 0.5 * (k + l)) *
           std::pow(2.0, hi - lo) * binomial(hi, lo);
}

/// C_psi for the certification bound at precision eps over m copies.
inline double c_psi_constant(const std::vector<cplx>& psi, double eps, int m_copies, int E) {
    double kpsi = 0.0;
    for (int n = 0; n <= E && n < static_cast<int>(psi.size()); ++n)
        kpsi += std::abs(psi[n]) * std::sqrt(n + 1.0);
    kpsi *= kpsi;
    double sum = 0.0;
    for (int k = 0; k <= E; ++k)
        for (int l = 0; l <= E; ++l) {
            double ak = k < static_cast<int>(psi.size()) ? std::abs(psi[k]) : 0.0;
            double al = l < static_cast<int>(psi.size()) ? std::abs(psi[l]) : 0.0;
            if (ak == 0.0 || al == 0.0) continue;
            sum += ak * al * std::pow(eps / m_copies, E - 0.5 * (k + l)) *
                   std::pow(kpsi, 1.0 + 0.5 * (k + l)) * m_constant(k, l);
        }
    return sum;
}

/// Closed form of the Q-mean of f_{|l><k|} for a bounded-support density
/// matrix: rho_kl plus the eta-suppressed ladder of higher elements.
inline cplx eflk_expectation(const Matrix& rho, int k, int l, double eta) {
    int E = static_cast<int>(rho.rows()) - 1;
    cplx sum = 0.0;
    for (int s = 0; k + s <= E && l + s <= E; ++s) {
        double weight = (s == 0) ? 1.0
                                 : std::pow(eta, s) * std::sqrt(binomial(s + k, k) *
                                                                binomial(s + l, l));
        sum += rho(k + s, l + s) * weight;
    }
    return sum;
}

namespace detail {

inline double pairwise_mean_real(const std::vector<double>& values) {
    if (values.empty()) throw dimension_error("heterodyne: empty sample set");
    return pairwise_sum(values) / double(values.size());
}

inline cplx pairwise_mean_complex(const std::vector<cplx>& values) {
    if (values.empty()) throw dimension_error("heterodyne: empty sample set");
    return pairwise_sum(values) / double(values.size());
}

}  // namespace detail

/// Reliable tomography: every density-matrix element estimated from the one
/// heterodyne sample set, with the union-bound failure probability of the
/// slack eps + eps' attached to each entry. Hermitian by conjugate pairing.
inline std::vector<std::vector<ConfidenceValue>> tomo_estimate(const SampleBatch& batch, int E,
                                                               double eps, double eps_prime) {
    if (batch.modes != 1) throw dimension_error("tomo_estimate: single-mode batches only");
    size_t n = batch.count();
    if (n < 1) throw dimension_error("tomo_estimate: need at least one sample");

    double fail = 0.0;
    for (int k = 0; k <= E; ++k)
        for (int l = k; l <= E; ++l)
            fail += 4.0 * std::exp(-double(n) * std::pow(eps, 2.0 + k + l) *
                                   eps_prime * eps_prime / (4.0 * c_constant(k, l)));

    std::vector<std::vector<ConfidenceValue>> out(E + 1, std::vector<ConfidenceValue>(E + 1));
    for (int k = 0; k <= E; ++k)
        for (int l = k; l <= E; ++l) {
            double eta = eps / std::sqrt(double(k + 1) * double(l + 1));
            auto op = OperatorCoefficients::ket_bra(l, k, E);
            std::vector<cplx> values(n);
            for (size_t i = 0; i < n; ++i) values[i] = estimator_f(op, eta, batch.at(i, 0));
            cplx est = detail::pairwise_mean_complex(values);
            out[k][l] = {est, eps + eps_prime, fail, false};
            out[l][k] = {std::conj(est), eps + eps_prime, fail, false};
        }
    return out;
}

/// The i.i.d. support-estimation failure bound (s allowed exceedances of
/// |alpha|^2 > E among n samples).
inline double support_failure_iid(int s, std::uint64_t n) {
    return std::pow(s + 1.0, 1.5) / double(n) * std::exp((s + 1.0) * (s + 1.0) / double(n + 1));
}

struct CertificationResult {
    ConfidenceValue fidelity;
    int support_score = 0;
    double p_support = 0.0;
};

/// Fidelity certification of m copies of a bounded-support target under the
/// i.i.d. assumption: support estimation plus the clamped m-th power of the
/// f_psi sample mean.
inline CertificationResult certify_fidelity(const SampleBatch& batch,
                                            const fock::FockVector& target, int m_copies, int E,
                                            int s, double eps, double eps_prime) {
    if (batch.modes != 1 || target.modes() != 1)
        throw dimension_error("certify_fidelity: single-mode only");
    if (!target.is_normalized(tolerances().normalization))
        throw numeric_error("certify_fidelity: target must be normalized");
    std::vector<cplx> psi(E + 1, cplx(0.0));
    for (const auto& [occ, amp] : target.amplitudes()) {
        if (occ[0] > E) throw dimension_error("certify_fidelity: target support exceeds E");
        psi[occ[0]] = amp;
    }
    size_t n = batch.count();
    int r = 0;
    for (size_t i = 0; i < n; ++i)
        if (std::norm(batch.at(i, 0)) > double(E)) ++r;

    auto op = OperatorCoefficients::projector(psi);
    double kpsi = k_constant(op);
    double eta = eps / (double(m_copies) * kpsi);
    check_eta(eta, E);
    std::vector<double> values(n);
    for (size_t i = 0; i < n; ++i) values[i] = estimator_f(op, eta, batch.at(i, 0)).real();
    double mean = detail::pairwise_mean_real(values);
    bool clamped = false;
    if (mean > 1.0) {
        mean = 1.0;
        clamped = true;
    } else if (mean < 0.0) {
        mean = 0.0;
        clamped = true;
    }
    double fidelity = std::pow(mean, m_copies);

    double cpsi = c_psi_constant(psi, eps, m_copies, E);
    double p_support = support_failure_iid(s, n);
    double p_hoeffding =
        2.0 * std::exp(-double(n) * std::pow(eps, 2.0 + 2.0 * E) * eps_prime * eps_prime /
                       (2.0 * std::pow(double(m_copies), 4.0 + 2.0 * E) * cpsi * cpsi));

    CertificationResult out;
    out.fidelity = {cplx(fidelity), eps + eps_prime, p_support + p_hoeffding, clamped};
    out.support_score = r;
    out.p_support = p_support;
    return out;
}

/// Protocol budget for verification without the i.i.d. assumption.
struct VerificationBudget {
    std::uint64_t n = 0;
    std::uint64_t k = 0;
    std::uint64_t q = 0;
    int s = 0;
    int m = 1;
    int E = 0;
    double epsilon = 0.0;
    double epsilon_prime = 0.0;

    void check() const {
        if (n <= 8 * q) throw dimension_error("VerificationBudget: need n > 8q");
        if (q < static_cast<std::uint64_t>(m)) throw dimension_error("VerificationBudget: need q >= m");
        if (static_cast<std::uint64_t>(s) > k) throw dimension_error("VerificationBudget: need s <= k");
    }
};

struct VerificationBounds {
    double p_support = 0.0;
    double p_definetti = 0.0;
    double p_choice = 0.0;
    double p_hoeffding = 0.0;
    double total_slack = 0.0;  // eps + eps' + P_deFinetti
};

/// The four failure probabilities of the non-i.i.d. verification theorem,
/// with binomial factors evaluated in log space.
inline VerificationBounds verification_bounds(const VerificationBudget& b, double c_psi) {
    b.check();
    double n = double(b.n), k = double(b.k), q = double(b.q);
    double m = double(b.m), E = double(b.E);
    VerificationBounds out;
    out.p_support =
        8.0 * std::pow(k, 1.5) * std::exp(-(k / 9.0) * std::pow(q / n - 2.0 * b.s / k, 2.0));
    out.p_definetti = std::exp(0.5 * (E + 1.0) * (E + 1.0) * std::log(q) - 2.0 * q * (q + 1.0) / n);
    out.p_choice = m * (4.0 * q + m - 1.0) / (n - 4.0 * q);
    double log_binom = log_factorial(n - 4.0 * q) - log_factorial(4.0 * q) -
                       log_factorial(n - 8.0 * q);
    double inner = std::pow(b.epsilon, 1.0 + E) * b.epsilon_prime / c_psi -
                   8.0 * q * std::pow(m, 2.0 + E) / (n - 4.0 * q - m);
    double log_p = std::log(2.0) + log_binom -
                   (n - 8.0 * q) / (2.0 * std::pow(m, 4.0 + 2.0 * E)) * inner * inner;
    out.p_hoeffding = (log_p > 690.0) ? 1e300 : std::exp(log_p);
    out.total_slack = b.epsilon + b.epsilon_prime + out.p_definetti;
    return out;
}

/// Wigner function value at a point, estimated from heterodyne samples as
/// the displaced-parity mean (2/pi) Tr(Pi rho_{-alpha}); the displacement is
/// undone by translating the samples.
inline ConfidenceValue wigner_point(const SampleBatch& batch, cplx alpha, double eta, int E) {
    if (batch.modes != 1) throw dimension_error("wigner_point: single-mode batches only");
    auto op = OperatorCoefficients::scaled_parity(E, 2.0 / pi);
    check_eta(eta, E);
    size_t n = batch.count();
    std::vector<double> values(n);
    for (size_t i = 0; i < n; ++i)
        values[i] = estimator_f(op, eta, batch.at(i, 0) - alpha).real();
    double mean = detail::pairwise_mean_real(values);

    double bias = eta * k_constant(op);
    double sup_f = 0.0;
    for (int kk = 0; kk <= E; ++kk)
        sup_f += (2.0 / pi) * m_constant(kk, kk) / std::pow(eta, 1.0 + kk);
    double delta = tolerances().delta;
    double stat = sup_f * std::sqrt(2.0 * std::log(2.0 / delta) / double(n));
    return {cplx(mean), bias + stat, delta, false};
}

/// Certified lower bound on the stellar rank: the largest k whose robustness
/// margin the fidelity estimate clears.
inline int rank_witness(const ConfidenceValue& fidelity, const std::vector<double>& profile) {
    for (size_t i = 1; i < profile.size(); ++i)
        if (profile[i] > profile[i - 1] + 1e-12)
            throw dimension_error("rank_witness: profile must be nonincreasing");
    int best = 0;
    for (size_t i = 0; i < profile.size(); ++i) {
        double rk = profile[i];
        if (fidelity.real() - fidelity.bound > 1.0 - rk * rk) best = static_cast<int>(i) + 1;
    }
    return best;
}

}  // namespace heterodyne
}  // namespace cvkit
