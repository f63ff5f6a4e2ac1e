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

#include <variant>

#include "fock.hpp"
#include "optim.hpp"

namespace cvkit {
namespace stellar {

/// Probabilists' Hermite polynomial He_n(z) via the three-term recurrence
/// He_{n+1} = z He_n - n He_{n-1}.
inline cplx hermite(int n, cplx z) {
    if (n < 0 || n > 200) throw dimension_error("hermite: need 0 <= n <= 200");
    cplx prev = 1.0, cur = z;
    if (n == 0) return prev;
    for (int k = 1; k < n; ++k) {
        cplx next = z * cur - double(k) * prev;
        prev = cur;
        cur = next;
    }
    return cur;
}

/// Single-mode core state: amplitudes c_n over |n>, finite support. The
/// stellar function is the polynomial sum c_n z^n / sqrt(n!).
struct CoreState {
    std::vector<cplx> amplitudes;

    int degree() const {
        for (int n = static_cast<int>(amplitudes.size()) - 1; n >= 0; --n)
            if (std::abs(amplitudes[n]) > 0.0) return n;
        return 0;
    }

    double norm2() const {
        double s = 0.0;
        for (const auto& a : amplitudes) s += std::norm(a);
        return s;
    }

    void normalize() {
        double n = std::sqrt(norm2());
        if (n == 0.0) throw numeric_error("CoreState: zero vector");
        for (auto& a : amplitudes) a /= n;
    }
};

struct CoreSpec {
    CoreState state;
};
struct GaussianSpec {  // S(xi) D(alpha) |0>, squeeze exp((xi a^2 - xi* a^dag^2)/2)
    cplx xi;
    cplx alpha;
};
struct CatSpec {
    cplx alpha;
    int sign = +1;  // +1 for cat+, -1 for cat-
};
struct GkpSpec {
    int lattice_cutoff = 5;  // terms |s|,|t| <= L
};
struct GaussianCoreSpec {  // S(xi) D(alpha) |C>
    cplx xi;
    cplx alpha;
    CoreState core;
};
using StellarSpec = std::variant<CoreSpec, GaussianSpec, CatSpec, GkpSpec, GaussianCoreSpec>;

namespace detail {

struct ValueAndDerivative {
    cplx f;
    cplx df;
};

inline ValueAndDerivative eval_core(const CoreState& c, cplx z) {
    cplx f = 0.0, df = 0.0, zn = 1.0, zn1 = 0.0;
    for (size_t n = 0; n < c.amplitudes.size(); ++n) {
        cplx coeff = c.amplitudes[n] / std::sqrt(factorial(static_cast<int>(n)));
        f += coeff * zn;
        if (n >= 1) df += coeff * double(n) * zn1;
        zn1 = zn;
        zn *= z;
    }
    return {f, df};
}

inline ValueAndDerivative eval_gaussian(cplx xi, cplx alpha, cplx z) {
    double r = std::abs(xi), theta = std::arg(xi);
    cplx a = std::polar(std::tanh(r), -theta);
    cplx b = alpha / std::cosh(r);
    cplx c = 0.5 * std::conj(a) * alpha * alpha - 0.5 * std::norm(alpha);
    cplx f = std::pow(1.0 - std::norm(a), 0.25) * std::exp(-0.5 * a * z * z + b * z + c);
    return {f, f * (-a * z + b)};
}

inline ValueAndDerivative eval_cat(cplx alpha, int sign, cplx z) {
    double a2 = std::norm(alpha);
    if (sign > 0) {
        double norm = std::sqrt(std::cosh(a2));
        return {std::cosh(alpha * z) / norm, alpha * std::sinh(alpha * z) / norm};
    }
    if (a2 < 1e-12) throw numeric_error("stellar: cat- undefined at alpha = 0");
    double norm = std::sqrt(std::sinh(a2));
    return {std::sinh(alpha * z) / norm, alpha * std::cosh(alpha * z) / norm};
}

inline ValueAndDerivative eval_gkp(int L, cplx z) {
    if (L < 3) throw dimension_error("stellar: GKP lattice cutoff must be >= 3");
    cplx f = 0.0, df = 0.0;
    double root_pi = std::sqrt(pi);
    for (int s = -L; s <= L; ++s)
        for (int t = -L; t <= L; ++t) {
            double sign = ((s * t) % 2) ? -1.0 : 1.0;
            cplx mu = 2.0 * root_pi * cplx(double(s), double(t));
            cplx term = sign * std::exp(-2.0 * pi * double(s * s + t * t) + mu * z);
            f += term;
            df += mu * term;
        }
    return {f, df};
}

// F of S(xi) D(alpha) |C>: displaced Hermite-sum form. S(xi) D(alpha) =
// D(beta) S(xi) with beta = alpha cosh r - alpha* e^{-i theta} sinh r.
inline ValueAndDerivative eval_gaussian_core(cplx xi, cplx alpha, const CoreState& core, cplx z) {
    double r = std::abs(xi), theta = std::arg(xi);
    double cr = std::cosh(r), sr = std::sinh(r);
    cplx beta = alpha * cr - std::conj(alpha) * std::polar(sr, -theta);
    cplx a = std::polar(std::tanh(r), -theta);
    cplx w = z - std::conj(beta);

    // P(w) = sum_n C_n / sqrt(n!) f_n(w) with the squeeze polynomials
    cplx p = 0.0, dp = 0.0;
    for (size_t n = 0; n < core.amplitudes.size(); ++n) {
        if (core.amplitudes[n] == cplx(0.0)) continue;
        auto poly = fock::detail::squeeze_polynomial(static_cast<int>(n), r, theta);
        cplx wm = 1.0, wm1 = 0.0;
        cplx val = 0.0, dval = 0.0;
        for (size_t j = 0; j < poly.size(); ++j) {
            val += poly[j] * wm;
            if (j >= 1) dval += poly[j] * double(j) * wm1;
            wm1 = wm;
            wm *= w;
        }
        cplx coeff = core.amplitudes[n] / std::sqrt(factorial(static_cast<int>(n)));
        p += coeff * val;
        dp += coeff * dval;
    }
    cplx envelope = std::exp(beta * z - 0.5 * std::norm(beta) - 0.5 * a * w * w) / std::sqrt(cr);
    cplx f = envelope * p;
    cplx df = envelope * (dp + (beta - a * w) * p);
    return {f, df};
}

inline ValueAndDerivative eval(const StellarSpec& spec, cplx z) {
    if (const auto* c = std::get_if<CoreSpec>(&spec)) return eval_core(c->state, z);
    if (const auto* g = std::get_if<GaussianSpec>(&spec)) return eval_gaussian(g->xi, g->alpha, z);
    if (const auto* cat = std::get_if<CatSpec>(&spec)) return eval_cat(cat->alpha, cat->sign, z);
    if (const auto* gkp = std::get_if<GkpSpec>(&spec)) return eval_gkp(gkp->lattice_cutoff, z);
    const auto& gc = std::get<GaussianCoreSpec>(spec);
    return eval_gaussian_core(gc.xi, gc.alpha, gc.core, z);
}

}  // namespace detail

inline cplx stellar_eval(const StellarSpec& spec, cplx z) { return detail::eval(spec, z).f; }
inline cplx stellar_derivative(const StellarSpec& spec, cplx z) { return detail::eval(spec, z).df; }

namespace detail {

struct LogDerivative {
    cplx ratio;            // F'(z) / F(z)
    bool near_zero = false;  // the contour point sits suspiciously close to a zero
};

// F'/F with the non-vanishing envelopes cancelled analytically, so the
// ratio stays finite wherever F has no zero, for contours of any size.
inline LogDerivative log_derivative(const StellarSpec& spec, cplx z) {
    const double rel = 1e-9;
    if (const auto* c = std::get_if<CoreSpec>(&spec)) {
        auto vd = eval_core(c->state, z);
        double scale = 0.0;
        for (size_t n = 0; n < c->state.amplitudes.size(); ++n)
            scale = std::max(scale, std::abs(c->state.amplitudes[n]) /
                                        std::sqrt(factorial(static_cast<int>(n))));
        double mag = std::pow(std::max(1.0, std::abs(z)), c->state.degree());
        if (std::abs(vd.f) < rel * scale * mag) return {cplx(0.0), true};
        return {vd.df / vd.f, false};
    }
    if (const auto* g = std::get_if<GaussianSpec>(&spec)) {
        double r = std::abs(g->xi), theta = std::arg(g->xi);
        cplx a = std::polar(std::tanh(r), -theta);
        return {-a * z + g->alpha / std::cosh(r), false};
    }
    if (const auto* cat = std::get_if<CatSpec>(&spec)) {
        cplx w = cat->alpha * z;
        // tanh/coth computed from exp with the dominant magnitude factored out
        cplx e2 = std::exp(-2.0 * w * ((w.real() >= 0) ? 1.0 : -1.0));
        double sgn = (w.real() >= 0) ? 1.0 : -1.0;
        cplx num, den;
        if (cat->sign > 0) {  // F ~ cosh: F'/F = alpha tanh(w)
            num = sgn * (1.0 - e2);
            den = 1.0 + e2;
        } else {  // F ~ sinh: F'/F = alpha coth(w)
            num = sgn * (1.0 + e2);
            den = 1.0 - e2;
        }
        if (std::abs(den) < rel) return {cplx(0.0), true};
        return {cat->alpha * num / den, false};
    }
    if (const auto* gkp = std::get_if<GkpSpec>(&spec)) {
        int L = gkp->lattice_cutoff;
        double root_pi = std::sqrt(pi);
        double peak = -1e300;
        for (int s = -L; s <= L; ++s)
            for (int t = -L; t <= L; ++t)
                peak = std::max(peak, -2.0 * pi * double(s * s + t * t) +
                                          (2.0 * root_pi * cplx(double(s), double(t)) * z).real());
        cplx f = 0.0, df = 0.0;
        for (int s = -L; s <= L; ++s)
            for (int t = -L; t <= L; ++t) {
                double sign = ((s * t) % 2) ? -1.0 : 1.0;
                cplx mu = 2.0 * root_pi * cplx(double(s), double(t));
                cplx term =
                    sign * std::exp(-2.0 * pi * double(s * s + t * t) + mu * z - peak);
                f += term;
                df += mu * term;
            }
        if (std::abs(f) < rel) return {cplx(0.0), true};
        return {df / f, false};
    }
    const auto& gc = std::get<GaussianCoreSpec>(spec);
    double r = std::abs(gc.xi), theta = std::arg(gc.xi);
    double cr = std::cosh(r), sr = std::sinh(r);
    cplx beta = gc.alpha * cr - std::conj(gc.alpha) * std::polar(sr, -theta);
    cplx a = std::polar(std::tanh(r), -theta);
    cplx w = z - std::conj(beta);
    cplx p = 0.0, dp = 0.0;
    double scale = 0.0;
    for (size_t n = 0; n < gc.core.amplitudes.size(); ++n) {
        if (gc.core.amplitudes[n] == cplx(0.0)) continue;
        auto poly = fock::detail::squeeze_polynomial(static_cast<int>(n), r, theta);
        cplx wm = 1.0, wm1 = 0.0;
        for (size_t j = 0; j < poly.size(); ++j) {
            cplx coeff = gc.core.amplitudes[n] / std::sqrt(factorial(static_cast<int>(n)));
            p += coeff * poly[j] * wm;
            if (j >= 1) dp += coeff * poly[j] * double(j) * wm1;
            scale = std::max(scale, std::abs(coeff * poly[j]));
            wm1 = wm;
            wm *= w;
        }
    }
    double mag = std::pow(std::max(1.0, std::abs(w)), gc.core.degree());
    if (std::abs(p) < rel * scale * mag) return {cplx(0.0), true};
    return {dp / p + beta - a * w, false};
}

}  // namespace detail

struct RectangleContour {
    cplx corner;  // lower-left
    double width = 0.0;
    double height = 0.0;
};
struct CircleContour {
    cplx center;
    double radius = 0.0;
};
using Contour = std::variant<RectangleContour, CircleContour>;

namespace detail {

inline cplx contour_point(const Contour& c, double t, cplx* tangent) {
    if (const auto* rect = std::get_if<RectangleContour>(&c)) {
        double w = rect->width, h = rect->height;
        double perim = 2 * (w + h);
        double s = t * perim;
        cplx z, dz;
        if (s < w) {
            z = rect->corner + cplx(s, 0.0);
            dz = cplx(perim, 0.0);
        } else if (s < w + h) {
            z = rect->corner + cplx(w, s - w);
            dz = cplx(0.0, perim);
        } else if (s < 2 * w + h) {
            z = rect->corner + cplx(w - (s - w - h), h);
            dz = cplx(-perim, 0.0);
        } else {
            z = rect->corner + cplx(0.0, h - (s - 2 * w - h));
            dz = cplx(0.0, -perim);
        }
        *tangent = dz;
        return z;
    }
    const auto& circ = std::get<CircleContour>(c);
    double phase = 2 * pi * t;
    cplx e = std::polar(circ.radius, phase);
    *tangent = cplx(0.0, 2 * pi) * e;
    return circ.center + e;
}

inline Contour grow(const Contour& c, double factor) {
    if (const auto* rect = std::get_if<RectangleContour>(&c)) {
        RectangleContour out = *rect;
        cplx center = rect->corner + 0.5 * cplx(rect->width, rect->height);
        out.width = rect->width * factor;
        out.height = rect->height * factor;
        out.corner = center - 0.5 * cplx(out.width, out.height);
        return out;
    }
    CircleContour out = std::get<CircleContour>(c);
    out.radius *= factor;
    return out;
}

}  // namespace detail

/// Number of zeros of the stellar function inside the contour, by the
/// argument principle: (1/2 pi i) integral of F'/F. The trapezoid rule is
/// doubled until the integer residue stabilizes; if the contour runs too
/// close to a zero the contour is slightly rescaled, up to 3 retries.
inline int count_zeros(const StellarSpec& spec, const Contour& contour, int quadrature_points = 256) {
    Contour active = contour;
    for (int attempt = 0; attempt < 4; ++attempt) {
        bool too_close = false;
        int points = std::max(quadrature_points, 64);
        double previous = -1e99;
        for (int doubling = 0; doubling < 8 && !too_close; ++doubling) {
            cplx integral = 0.0;
            for (int i = 0; i < points; ++i) {
                double t = (i + 0.5) / points;
                cplx tangent;
                cplx z = detail::contour_point(active, t, &tangent);
                auto ld = detail::log_derivative(spec, z);
                if (ld.near_zero) {
                    too_close = true;
                    break;
                }
                integral += ld.ratio * tangent / double(points);
            }
            if (too_close) break;
            double residue = (integral / cplx(0.0, 2 * pi)).real();
            if (std::abs(residue - previous) < 1e-3) {
                double rounded = std::round(residue);
                if (std::abs(residue - rounded) > 0.1)
                    throw numeric_error("count_zeros: residue is not close to an integer");
                return static_cast<int>(rounded);
            }
            previous = residue;
            points *= 2;
        }
        // shrink, then expand, then shrink more
        double factor = (attempt % 2 == 0) ? 0.987 : 1.017;
        active = detail::grow(active, factor);
    }
    throw numeric_error("count_zeros: contour keeps passing near a zero");
}

/// Core-state extraction, the operator substitution
/// P(c_r z - s_r e^{i theta} d/dz + c_r alpha* - s_r e^{i theta} alpha) . 1
/// applied to the stellar polynomial of the input.
inline CoreState extract_core(const CoreState& input, cplx xi, cplx alpha) {
    double r = std::abs(xi), theta = std::arg(xi);
    double cr = std::cosh(r), sr = std::sinh(r);
    cplx eith = std::polar(1.0, theta);
    cplx shift = cr * std::conj(alpha) - sr * eith * alpha;

    int deg = input.degree();
    // powers L^k(1) of the substitution operator, as polynomial coefficients
    std::vector<std::vector<cplx>> powers;
    powers.push_back({cplx(1.0)});
    for (int k = 1; k <= deg; ++k) {
        const auto& prev = powers.back();
        std::vector<cplx> next(prev.size() + 1, cplx(0.0));
        for (size_t j = 0; j < prev.size(); ++j) {
            next[j + 1] += cr * prev[j];
            next[j] += shift * prev[j];
            if (j >= 1) next[j - 1] -= sr * eith * double(j) * prev[j];
        }
        powers.push_back(std::move(next));
    }

    // P(L) . 1 with P the input's stellar polynomial
    std::vector<cplx> poly(deg + 1, cplx(0.0));
    for (int n = 0; n <= deg; ++n) {
        if (n >= static_cast<int>(input.amplitudes.size())) break;
        cplx pn = input.amplitudes[n] / std::sqrt(factorial(n));
        if (pn == cplx(0.0)) continue;
        for (size_t j = 0; j < powers[n].size(); ++j) poly[j] += pn * powers[n][j];
    }

    CoreState out;
    out.amplitudes.resize(deg + 1);
    for (int n = 0; n <= deg; ++n) out.amplitudes[n] = poly[n] * std::sqrt(factorial(n));
    out.normalize();
    return out;
}

struct OptimizerBudget {
    int restarts = 16;
    int iterations = 400;
    double tolerance = 1e-10;
};

struct RobustnessResult {
    double r_k = 0.0;
    double max_fidelity = 0.0;
    cplx xi;
    cplx alpha;
    bool converged = true;
};

/// sum_{m < k} |<C|S(xi)D(alpha)|m>|^2, the overlap of the Gaussian-rotated
/// state with the best rank-(k-1) core, from truncated operator matrices.
inline double robustness_objective(const CoreState& core, int k, cplx xi, cplx alpha,
                                   int internal_cutoff = 120) {
    int deg = core.degree();
    double total = 0.0;
    for (int m = 0; m < k; ++m) {
        cplx um = 0.0;
        for (int n = 0; n <= deg; ++n) {
            if (core.amplitudes[n] == cplx(0.0)) continue;
            cplx element = 0.0;
            for (int j = (n % 2); j <= internal_cutoff; j += 2) {
                // squeeze couples n to j of equal parity only
                cplx s = fock::squeeze_element(n, j, xi);
                if (s != cplx(0.0)) element += s * fock::displacement_element(j, m, alpha);
            }
            um += std::conj(core.amplitudes[n]) * element;
        }
        total += std::norm(um);
    }
    return total;
}

struct RobustnessQuery {
    CoreState core;
    int k = 1;
    OptimizerBudget budget;
};

/// k-robustness of a core state: R_k = sqrt(1 - sup over Gaussian unitaries
/// of the projector overlap), with the supremum over (xi, alpha) searched by
/// quasi-random multistart simplex.
inline RobustnessResult robustness(const RobustnessQuery& query) {
    const CoreState& core = query.core;
    if (core.degree() > 8 || query.k > 8 || query.k < 1)
        throw dimension_error("robustness: degree <= 8 and 1 <= k <= 8");
    if (std::abs(core.norm2() - 1.0) > tolerances().normalization)
        throw numeric_error("robustness: core state must be normalized");
    if (query.k > core.degree()) {
        // the state itself has rank < k: R_k = 0
        return {0.0, 1.0, cplx(0.0), cplx(0.0), true};
    }
    auto objective = [&](const std::vector<double>& p) {
        return -robustness_objective(core, query.k, cplx(p[0], p[1]), cplx(p[2], p[3]));
    };
    optim::Options opts{query.budget.iterations, query.budget.tolerance};
    auto best = optim::multistart(objective, {-2.0, -2.0, -2.0, -2.0}, {2.0, 2.0, 2.0, 2.0},
                                  query.budget.restarts, opts);
    double sup = std::clamp(-best.value, 0.0, 1.0);
    RobustnessResult out;
    out.max_fidelity = sup;
    out.r_k = std::sqrt(1.0 - sup);
    out.xi = cplx(best.x[0], best.x[1]);
    out.alpha = cplx(best.x[2], best.x[3]);
    out.converged = best.converged;
    return out;
}

/// Hermite-based objective for the k-robustness of cat states, evaluated in
/// the folded form where each branch is the bounded coherent-state overlap
/// <m|S(xi)D(beta)|+-a>. The rescaled t_r^{m/2} He_m(x e^{i theta/2} /
/// sqrt(c_r s_r)) is a polynomial in t_r e^{i theta} and stays finite as
/// r -> 0; the branch exponents are nonpositive, so nothing overflows even
/// at |alpha| = 10.
inline double cat_objective(double amp, int sign, int k, cplx xi, cplx beta) {
    double r = std::abs(xi), theta = std::arg(xi);
    double cr = std::cosh(r), tr = std::tanh(r);
    cplx treith = std::polar(tr, theta);
    auto scaled_hermite = [&](int m, cplx x) {
        cplx sum = 0.0;
        for (int p = 0; 2 * p <= m; ++p) {
            double he = factorial(m) / (std::pow(2.0, p) * factorial(p) * factorial(m - 2 * p));
            sum += he * ((p % 2) ? -1.0 : 1.0) * std::pow(treith, p) *
                   std::pow(x / cr, m - 2 * p);
        }
        return sum;
    };
    cplx common = -0.5 * (amp * amp + std::norm(beta));
    cplx expo_plus = common - amp * std::conj(beta) + 0.5 * treith * (amp + beta) * (amp + beta);
    cplx expo_minus = common + amp * std::conj(beta) + 0.5 * treith * (beta - amp) * (beta - amp);
    // N+- = 2 (1 +- e^{-2 a^2})
    double norm_factor = 2.0 * (1.0 + double(sign) * std::exp(-2.0 * amp * amp));
    double total = 0.0;
    for (int m = 0; m < k; ++m) {
        cplx branch_plus = std::exp(expo_plus) * scaled_hermite(m, amp + beta);
        cplx branch_minus = std::exp(expo_minus) * scaled_hermite(m, beta - amp);
        cplx um = (branch_plus + double(sign) * branch_minus) / std::sqrt(cr * factorial(m));
        total += std::norm(um);
    }
    return total / norm_factor;
}

/// k-robustness of cat states; independent of arg(alpha).
inline RobustnessResult cat_robustness(cplx alpha, int sign, int k,
                                       const OptimizerBudget& budget = {}) {
    double amp = std::abs(alpha);
    if (amp > 10.0 || k > 12 || k < 1)
        throw dimension_error("cat_robustness: |alpha| <= 10 and 1 <= k <= 12");
    if (sign < 0 && amp < 1e-6) throw numeric_error("cat_robustness: cat- undefined at alpha = 0");
    auto objective = [&](const std::vector<double>& p) {
        return -cat_objective(amp, sign, k, cplx(p[0], p[1]), cplx(p[2], p[3]));
    };
    double box = std::max(2.0, 2.0 * amp);
    optim::Options opts{budget.iterations, budget.tolerance};
    auto best =
        optim::multistart(objective, {-2.0, -2.0, -box, -box}, {2.0, 2.0, box, box},
                          budget.restarts, opts);
    double sup = std::clamp(-best.value, 0.0, 1.0);
    RobustnessResult out;
    out.max_fidelity = sup;
    out.r_k = std::sqrt(1.0 - sup);
    out.xi = cplx(best.x[0], best.x[1]);
    out.alpha = cplx(best.x[2], best.x[3]);
    out.converged = best.converged;
    return out;
}

}  // namespace stellar
}  // namespace cvkit
