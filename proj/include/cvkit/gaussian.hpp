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

#include <atomic>
#include <variant>

#include "interf.hpp"

namespace cvkit {
namespace gaussian {

/// Gaussian state in the complex (a_1..a_m, a_1^dag..a_m^dag) basis:
/// Hermitian covariance V (2m x 2m) with block structure [[A, B], [B*, A*]]
/// and displacement d of length m (the full first-moment vector is (d, d*)).
struct GaussianState {
    int modes = 0;
    Matrix covariance;
    std::vector<cplx> displacement;

    static GaussianState vacuum(int m) {
        GaussianState s;
        s.modes = m;
        s.covariance = Matrix::identity(2 * m) * cplx(0.5);
        s.displacement.assign(m, cplx(0.0));
        return s;
    }

    std::vector<cplx> full_displacement() const {
        std::vector<cplx> d(2 * modes);
        for (int i = 0; i < modes; ++i) {
            d[i] = displacement[i];
            d[modes + i] = std::conj(displacement[i]);
        }
        return d;
    }

    void check_invariants() const {
        size_t two_m = 2 * static_cast<size_t>(modes);
        if (covariance.rows() != two_m || covariance.cols() != two_m ||
            displacement.size() != static_cast<size_t>(modes))
            throw dimension_error("GaussianState: shape mismatch");
        if (covariance.hermiticity_defect() > tolerances().unitarity)
            throw numeric_error("GaussianState: covariance is not Hermitian");
        // block structure: A Hermitian, B symmetric, lower row mirrored
        for (int i = 0; i < modes; ++i)
            for (int j = 0; j < modes; ++j) {
                if (std::abs(covariance(i, modes + j) - covariance(j, modes + i)) > 1e-9)
                    throw numeric_error("GaussianState: B block is not symmetric");
                if (std::abs(covariance(modes + i, j) - std::conj(covariance(i, modes + j))) >
                    1e-9)
                    throw numeric_error("GaussianState: lower blocks are not conjugates");
            }
    }
};

/// Circuit elements. The squeeze element with parameter xi applies the
/// operator exp((xi a^dag^2 - xi* a^2)/2) per mode -- the sign convention
/// under which the symplectic blocks are diag(cosh) / diag(sinh e^{+-i th}).
/// This is the adjoint-parameter twin of fock::truncated_gaussian's squeeze.
struct Squeeze {
    std::vector<cplx> xi;
};
struct Passive {
    Matrix u;
};
struct Displace {
    std::vector<cplx> beta;
};
using Element = std::variant<Squeeze, Passive, Displace>;

inline Element inverse(const Element& e) {
    if (const auto* s = std::get_if<Squeeze>(&e)) {
        Squeeze inv = *s;
        for (auto& x : inv.xi) x = -x;
        return inv;
    }
    if (const auto* p = std::get_if<Passive>(&e)) return Passive{p->u.adjoint()};
    Displace inv = std::get<Displace>(e);
    for (auto& x : inv.beta) x = -x;
    return inv;
}

/// Symplectic matrix of an element in the (a, a^dag) basis.
inline Matrix symplectic_of(const Element& e, int m) {
    if (const auto* s = std::get_if<Squeeze>(&e)) {
        if (s->xi.size() != static_cast<size_t>(m))
            throw dimension_error("evolve: squeeze parameter count mismatch");
        Matrix out(2 * m, 2 * m);
        for (int i = 0; i < m; ++i) {
            double r = std::abs(s->xi[i]);
            double theta = std::arg(s->xi[i]);
            out(i, i) = std::cosh(r);
            out(m + i, m + i) = std::cosh(r);
            out(i, m + i) = std::polar(std::sinh(r), -theta);
            out(m + i, i) = std::polar(std::sinh(r), theta);
        }
        return out;
    }
    const auto* p = std::get_if<Passive>(&e);
    if (!p) throw dimension_error("symplectic_of: displacement has no symplectic action");
    if (p->u.rows() != static_cast<size_t>(m))
        throw dimension_error("evolve: passive element size mismatch");
    if (!p->u.is_unitary(tolerances().unitarity))
        throw numeric_error("evolve: passive element is not unitary");
    Matrix out(2 * m, 2 * m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
            out(i, j) = p->u(i, j);
            out(m + i, m + j) = std::conj(p->u(i, j));
        }
    return out;
}

/// (V, d~) -> (S V S^dag, S d~); displacements translate d only.
inline GaussianState evolve_covariance(const GaussianState& state, const Element& e) {
    GaussianState out = state;
    if (const auto* d = std::get_if<Displace>(&e)) {
        if (d->beta.size() != static_cast<size_t>(state.modes))
            throw dimension_error("evolve: displacement length mismatch");
        for (int i = 0; i < state.modes; ++i) out.displacement[i] += d->beta[i];
        return out;
    }
    Matrix s = symplectic_of(e, state.modes);
    out.covariance = s * state.covariance * s.adjoint();
    std::vector<cplx> dt = s * state.full_displacement();
    for (int i = 0; i < state.modes; ++i) out.displacement[i] = dt[i];
    return out;
}

inline GaussianState apply_circuit(GaussianState state, const std::vector<Element>& circuit) {
    for (const auto& e : circuit) state = evolve_covariance(state, e);
    return state;
}

namespace detail {

struct QuadraticForm {
    Matrix inv;        // (V + I/2)^{-1}
    double sqrt_det;   // sqrt det(V + I/2), real positive
};

inline QuadraticForm husimi_form(const GaussianState& s) {
    size_t two_m = 2 * static_cast<size_t>(s.modes);
    Matrix sigma = s.covariance + Matrix::identity(two_m) * cplx(0.5);
    auto lu = sigma.lu_invert(true);
    if (sigma.condition_estimate(lu.inverse) > tolerances().condition_limit)
        throw numeric_error("husimi: covariance too ill-conditioned");
    cplx det = lu.det;
    if (det.real() <= 0.0 || std::abs(det.imag()) > 1e-6 * det.real())
        throw numeric_error("husimi: covariance is not a valid Gaussian state");
    return {std::move(lu.inverse), std::sqrt(det.real())};
}

}  // namespace detail

/// Husimi Q density of a Gaussian state at a phase-space point.
inline double husimi_gaussian(const GaussianState& state, const std::vector<cplx>& point) {
    if (point.size() != static_cast<size_t>(state.modes))
        throw dimension_error("husimi_gaussian: point dimension mismatch");
    auto form = detail::husimi_form(state);
    std::vector<cplx> delta(2 * state.modes);
    auto d = state.full_displacement();
    for (int i = 0; i < state.modes; ++i) {
        delta[i] = point[i] - d[i];
        delta[state.modes + i] = std::conj(point[i]) - d[state.modes + i];
    }
    cplx quad = 0.0;
    for (size_t i = 0; i < delta.size(); ++i)
        for (size_t j = 0; j < delta.size(); ++j)
            quad += std::conj(delta[i]) * form.inv(i, j) * delta[j];
    return std::exp(-0.5 * quad.real()) / (std::pow(pi, state.modes) * form.sqrt_det);
}

inline std::atomic<std::uint64_t>& density_clamp_count() {
    static std::atomic<std::uint64_t> count{0};
    return count;
}

/// Output probability density of a Gaussian circuit with a core-state input
/// and balanced heterodyne detection, evaluated at one point: the Gaussian
/// prefactor kappa times the signed loop-hafnian sum over core indices.
inline double gcore_density(const std::vector<Element>& circuit, const fock::FockVector& core,
                            const std::vector<cplx>& point) {
    int m = core.modes();
    if (point.size() != static_cast<size_t>(m))
        throw dimension_error("gcore_density: point dimension mismatch");
    if (!core.is_normalized(tolerances().normalization))
        throw numeric_error("gcore_density: core state must be normalized");

    // Gaussian state G^dag |alpha>: start from |alpha> and apply inverses in
    // reverse circuit order.
    GaussianState g = GaussianState::vacuum(m);
    g.displacement.assign(point.begin(), point.end());
    for (auto it = circuit.rbegin(); it != circuit.rend(); ++it)
        g = evolve_covariance(g, inverse(*it));

    auto form = detail::husimi_form(g);
    auto dt = g.full_displacement();

    // V = X (I - M), D = (d~^dag M)^T, with X the block swap
    size_t two_m = 2 * static_cast<size_t>(m);
    Matrix i_minus(two_m, two_m);
    for (size_t i = 0; i < two_m; ++i)
        for (size_t j = 0; j < two_m; ++j)
            i_minus(i, j) = (i == j ? cplx(1.0) : cplx(0.0)) - form.inv(i, j);
    Matrix v(two_m, two_m);
    for (size_t i = 0; i < two_m; ++i) {
        size_t swapped = (i < static_cast<size_t>(m)) ? i + m : i - m;
        for (size_t j = 0; j < two_m; ++j) v(i, j) = i_minus(swapped, j);
    }
    std::vector<cplx> dvec(two_m, cplx(0.0));
    for (size_t j = 0; j < two_m; ++j)
        for (size_t i = 0; i < two_m; ++i) dvec[j] += std::conj(dt[i]) * form.inv(i, j);

    cplx quad = 0.0;
    for (size_t j = 0; j < two_m; ++j) quad += dvec[j] * dt[j];
    double kappa = std::exp(-0.5 * quad.real()) / (std::pow(pi, m) * form.sqrt_det);

    // The diagonal carries -D: in the signed sum below, each singleton in a
    // matching then contributes +D, which is what heterodyne statistics of
    // displaced states require (checked against the Fock-space oracle).
    std::vector<cplx> neg_d(two_m);
    for (size_t j = 0; j < two_m; ++j) neg_d[j] = -dvec[j];

    cplx sum = 0.0;
    for (const auto& [p, cp] : core.amplitudes())
        for (const auto& [q, cq] : core.amplitudes()) {
            Matrix apq = matfun::repeat_symmetric(v, neg_d, p, q);
            int order = fock::total_photons(p) + fock::total_photons(q);
            double sign = (order % 2) ? -1.0 : 1.0;
            sum += sign * cp * std::conj(cq) * matfun::loop_hafnian_exact(apq) /
                   std::sqrt(fock::tuple_factorial(p) * fock::tuple_factorial(q));
        }
    if (std::abs(sum.imag()) > 1e-7 * std::max(1.0, std::abs(sum.real())))
        throw numeric_error("gcore_density: density has a significant imaginary part");
    double density = kappa * sum.real();
    if (density < 0.0) {
        if (density < -tolerances().density_clamp)
            throw numeric_error("gcore_density: significantly negative density");
        density_clamp_count()++;
        density = 0.0;
    }
    return density;
}

/// Interferometer with n single photons, passive evolution O e^{i phi Sigma}
/// and unbalanced heterodyne detection with parameter zeta.
struct CvsCircuit {
    int modes = 0;    // m >= 2n
    int photons = 0;  // n, even
    double xi = 0.0;
    double phi = 0.0;
    Matrix sigma;  // real symmetric orthogonal
    Matrix o;      // real orthogonal
    double zeta = 0.0;

    void check_invariants() const {
        size_t m = static_cast<size_t>(modes);
        if (photons < 0 || photons % 2 != 0) throw dimension_error("CvsCircuit: n must be even");
        if (modes < 2 * photons) throw dimension_error("CvsCircuit: need m >= 2n");
        if (sigma.rows() != m || o.rows() != m)
            throw dimension_error("CvsCircuit: matrix sizes must match mode count");
        for (const Matrix* mat : {&sigma, &o})
            for (size_t i = 0; i < m; ++i)
                for (size_t j = 0; j < m; ++j)
                    if (std::abs((*mat)(i, j).imag()) > 1e-12)
                        throw numeric_error("CvsCircuit: matrices must be real");
        if (sigma.symmetry_defect() > 1e-9) throw numeric_error("CvsCircuit: Sigma not symmetric");
        if ((sigma * sigma - Matrix::identity(m)).max_abs() > 1e-9)
            throw numeric_error("CvsCircuit: Sigma^2 != I");
        if ((o.transpose() * o - Matrix::identity(m)).max_abs() > 1e-9)
            throw numeric_error("CvsCircuit: O not orthogonal");
    }

    Matrix unitary() const {
        // U = O e^{i phi Sigma} = O (cos(phi) I + i sin(phi) Sigma)
        size_t m = static_cast<size_t>(modes);
        Matrix expo(m, m);
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < m; ++j)
                expo(i, j) = std::cos(phi) * (i == j ? 1.0 : 0.0) +
                             cplx(0.0, std::sin(phi)) * sigma(i, j);
        return o * expo;
    }

    /// The equivalent Gaussian circuit acting on the Fock input |1^n 0^{m-n}>.
    std::vector<Element> as_circuit() const {
        std::vector<Element> elems;
        elems.push_back(Squeeze{std::vector<cplx>(modes, cplx(xi, 0.0))});
        elems.push_back(Passive{unitary()});
        elems.push_back(Squeeze{std::vector<cplx>(modes, cplx(-zeta, 0.0))});
        return elems;
    }
};

/// Closed form for the output density at the phase-space origin:
/// kappa(phi, xi, zeta) Haf(Sigma_n)^2, independent of O.
inline double cvs_origin_density(const CvsCircuit& c) {
    c.check_invariants();
    double c2x = std::cosh(2 * c.xi), s2x = std::sinh(2 * c.xi);
    double c2z = std::cosh(2 * c.zeta), s2z = std::sinh(2 * c.zeta);
    double denom = 1.0 + c2x * c2z - s2x * s2z * std::cos(2 * c.phi);
    double kappa = std::pow(2.0, c.modes / 2.0) * std::pow(s2z, c.photons) *
                   std::pow(std::sin(2 * c.phi), c.photons) /
                   (std::pow(pi, c.modes) * std::pow(denom, c.photons + c.modes / 2.0));
    cplx haf = matfun::hafnian_exact(c.sigma.top_left(c.photons));
    return kappa * std::norm(haf);  // Sigma_n is real, so Haf^2 = |Haf|^2
}

/// Builds a real symmetric orthogonal m x m matrix whose top-left 2p x 2p
/// block is nu [[0, X], [X^T, 0]] via the Cholesky factor of I - Y^T Y and a
/// basis completion.
inline Matrix embed_orthogonal(const Matrix& x, int m, double nu) {
    size_t p = x.rows();
    if (x.cols() != p || p == 0) throw dimension_error("embed_orthogonal: X must be square");
    int n = 2 * static_cast<int>(p);
    if (m < 2 * n) throw dimension_error("embed_orthogonal: need m >= 4p");
    if (nu > 1.0 / x.operator_norm() + 1e-12)
        throw dimension_error("embed_orthogonal: nu exceeds 1/||X||");

    Matrix y = x * cplx(nu);
    // I - Y^T Y, real symmetric positive semidefinite
    Matrix g = Matrix::identity(p) - y.transpose() * y;
    // Cholesky G = L L^T (PSD: tiny negative pivots are clamped)
    Matrix l(p, p);
    for (size_t i = 0; i < p; ++i) {
        for (size_t j = 0; j <= i; ++j) {
            cplx s = g(i, j);
            for (size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
            if (i == j) {
                double diag = s.real();
                if (diag < -1e-10)
                    throw dimension_error("embed_orthogonal: I - Y^T Y not PSD (nu too large)");
                l(i, j) = std::sqrt(std::max(0.0, diag));
            } else {
                l(i, j) = (std::abs(l(j, j)) > 1e-14) ? s / l(j, j) : cplx(0.0);
            }
        }
    }
    Matrix z = l.transpose();  // Z^T Z = I - Y^T Y

    // Complete the 2p x p column block (Y; Z) to an orthogonal 2p x 2p matrix
    // W = [[Y, C], [Z, D]] by Gram-Schmidt against canonical vectors.
    size_t np = 2 * p;
    std::vector<std::vector<double>> cols;
    for (size_t j = 0; j < p; ++j) {
        std::vector<double> col(np);
        for (size_t i = 0; i < p; ++i) col[i] = y(i, j).real();
        for (size_t i = 0; i < p; ++i) col[p + i] = z(i, j).real();
        cols.push_back(col);
    }
    for (size_t cand = 0; cand < np && cols.size() < np; ++cand) {
        std::vector<double> v(np, 0.0);
        v[cand] = 1.0;
        for (const auto& c : cols) {
            double dot = 0.0;
            for (size_t i = 0; i < np; ++i) dot += c[i] * v[i];
            for (size_t i = 0; i < np; ++i) v[i] -= dot * c[i];
        }
        double norm = 0.0;
        for (double t : v) norm += t * t;
        norm = std::sqrt(norm);
        if (norm < 1e-7) continue;
        for (double& t : v) t /= norm;
        cols.push_back(std::move(v));
    }
    if (cols.size() != np) throw numeric_error("embed_orthogonal: basis completion failed");

    Matrix cmat(p, p), dmat(p, p), bmat(p, p);
    for (size_t j = 0; j < p; ++j)
        for (size_t i = 0; i < p; ++i) {
            cmat(i, j) = cols[p + j][i];
            dmat(i, j) = cols[p + j][p + i];
            bmat(i, j) = z(j, i);  // B = Z^T
        }

    // Block layout [p, p, p, p, m - 4p]
    Matrix sig(m, m);
    auto put = [&](size_t bi, size_t bj, const Matrix& blk) {
        for (size_t i = 0; i < p; ++i)
            for (size_t j = 0; j < p; ++j) sig(bi * p + i, bj * p + j) = blk(i, j);
    };
    put(0, 1, y);
    put(1, 0, y.transpose());
    put(0, 3, cmat);
    put(3, 0, cmat.transpose());
    put(1, 2, bmat);
    put(2, 1, bmat.transpose());
    put(2, 3, dmat);
    put(3, 2, dmat.transpose());
    for (int i = 4 * static_cast<int>(p); i < m; ++i) sig(i, i) = 1.0;

    if (sig.symmetry_defect() > 1e-9 || (sig * sig - Matrix::identity(m)).max_abs() > 1e-9)
        throw numeric_error("embed_orthogonal: construction check failed");
    return sig;
}

}  // namespace gaussian
}  // namespace cvkit
