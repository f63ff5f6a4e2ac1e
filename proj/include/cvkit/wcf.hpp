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

#include "common.hpp"

namespace cvkit {
namespace wcf {

/// Protocol knobs: beam-splitter reflectances x, y, z and the loss budget
/// (channel transmission eta_t, per-party fiber-delay transmissions eta_f,
/// detector efficiencies eta_d).
struct WcfParams {
    double x = 0.0, y = 0.0, z = 0.0;
    double eta_t = 1.0;
    double eta_f_a = 1.0, eta_f_b = 1.0;
    double eta_d_a = 1.0, eta_d_b = 1.0;

    void check() const {
        for (double v : {x, y, z, eta_t, eta_f_a, eta_f_b, eta_d_a, eta_d_b})
            if (v < 0.0 || v > 1.0) throw dimension_error("WcfParams: values must lie in [0,1]");
    }

    /// Lossless honest configuration: y and z derived from x so the flip is
    /// fair and verification never aborts.
    static WcfParams honest(double x) {
        WcfParams p;
        p.x = x;
        p.y = 1.0 - 1.0 / (2.0 * (1.0 - x));
        p.z = 2.0 * x;
        p.check();
        return p;
    }
};

struct HonestProbs {
    double win_a = 0.0;
    double win_b = 0.0;
    double abort = 0.0;
};

/// Honest winning probabilities with losses; they sum with the abort
/// probability to one exactly.
inline HonestProbs honest_probs(const WcfParams& p) {
    p.check();
    HonestProbs out;
    out.win_a = p.eta_t * p.eta_d_b *
                std::pow(std::sqrt(p.x * p.z * p.eta_f_a) +
                             std::sqrt((1.0 - p.x) * p.y * (1.0 - p.z) * p.eta_f_b),
                         2.0);
    out.win_b = p.eta_t * p.eta_d_b * (1.0 - p.x) * (1.0 - p.y);
    out.abort = 1.0 - out.win_a - out.win_b;
    return out;
}

enum class Detector { threshold, number_resolving };

struct CheatProbs {
    double alice = 0.0;  // dishonest Alice vs honest Bob
    double bob = 0.0;    // dishonest Bob vs honest Alice
    int l_star = 1;      // photon number maximizing Alice's lossy attack
};

namespace detail {

/// argmax over integers l >= 1 of r^l - s^l for 0 < s < r < 1, via the real
/// stationary point lambda_1 = ln(ln s / ln r) / ln(r / s) compared at floor
/// and ceiling. (The paper's log-log display is read through this sign-safe
/// equivalent form: ln s / ln r > 1 and r / s > 1, so lambda_1 > 0.)
inline int maximizing_photon_number(double r, double s) {
    if (!(r > 0.0 && r < 1.0 && s > 0.0 && s < 1.0)) return 1;
    if (std::abs(r - s) < 1e-15) return 1;  // degenerate: flat difference
    double lambda = std::log(std::log(s) / std::log(r)) / std::log(r / s);
    if (!(lambda > 1.0)) return 1;
    double lo = std::floor(lambda), hi = std::ceil(lambda);
    double value_lo = std::pow(r, lo) - std::pow(s, lo);
    double value_hi = std::pow(r, hi) - std::pow(s, hi);
    return static_cast<int>(value_lo >= value_hi ? lo : hi);
}

}  // namespace detail

/// Optimal cheating probabilities. Bob discards his half and declares 1;
/// Alice prepares the state that maximizes Bob's (1,0,0) verification
/// outcome, optimizing the photon number against threshold detectors.
inline CheatProbs cheat_probs(const WcfParams& p, Detector detector = Detector::threshold) {
    p.check();
    CheatProbs out;
    out.bob = 1.0 - p.x * p.eta_f_a * p.eta_d_a;
    double r = 1.0 - (1.0 - p.y * p.eta_f_b) * (1.0 - p.z) * p.eta_d_b;
    double s = 1.0 - p.eta_d_b;
    if (detector == Detector::number_resolving || s == 0.0) {
        // lossless-detector limit: l = 1 term only
        out.l_star = 1;
        out.alice = r - s;
    } else {
        out.l_star = detail::maximizing_photon_number(r, s);
        out.alice = std::pow(r, out.l_star) - std::pow(s, out.l_star);
    }
    return out;
}

/// Fairness: the y that equalizes the honest winning probabilities, the
/// positive root of the quadratic in sqrt(y).
inline double solve_fair_y(const WcfParams& p) {
    p.check();
    double x = p.x, z = p.z, efa = p.eta_f_a, efb = p.eta_f_b;
    double zmax = (1.0 - x) * (1.0 + efb) / (x * efa + (1.0 - x) * efb);
    if (z > zmax + 1e-12) throw dimension_error("solve_fair_y: realness constraint violated");
    double bracket = (1.0 - z) * efb + 1.0;
    double first = (1.0 - x) * bracket - x * z * efa;
    double second = x * z * (1.0 - z) * efa * efb;
    double y = std::pow(std::sqrt(std::max(0.0, first)) - std::sqrt(second), 2.0) /
               ((1.0 - x) * bracket * bracket);
    return y;
}

/// Balance: the x that equalizes the two cheating probabilities.
/// Solutions clipped against [0,1] are flagged infeasible.
struct BalanceResult {
    double x = 0.0;
    bool feasible = true;
};

inline BalanceResult solve_balance(const WcfParams& p) {
    p.check();
    WcfParams q = p;
    q.x = 0.0;  // unused by Alice's cheating probability
    CheatProbs cheats = cheat_probs(q);
    double x = (1.0 - cheats.alice) / (p.eta_f_a * p.eta_d_a);
    BalanceResult out;
    out.x = std::clamp(x, 0.0, 1.0);
    out.feasible = (x >= 0.0 && x <= 1.0);
    return out;
}

struct ScanRow {
    double distance_km = 0.0;
    double p_honest = 0.0;
    double p_abort = 0.0;
    double p_cheat_quantum = 0.0;
    double p_cheat_classical = 0.0;
    double forcing_limit = 1.0;  // p_{*1}: Alice can always force outcome 1
    bool advantage = false;
    bool converged = true;
};

struct ScanConfig {
    double z = 0.57;
    double eta_d = 0.95;
    double fiber_db_per_km = 0.2;   // one-way fiber attenuation
    double switch_loss_db = 0.02;   // 500 ns of switching time in fiber
    int max_iterations = 200;
    double damping = 0.5;
    double tol = 1e-10;
};

/// Distance scan: at each distance the fiber model fixes the losses, the
/// fairness and balance conditions are solved by damped alternation, and
/// the quantum cheating probability is compared to the classical floor
/// 1 - sqrt(P_abort).
inline ScanRow scan_point(double distance_km, const ScanConfig& cfg) {
    ScanRow row;
    row.distance_km = distance_km;
    WcfParams p;
    p.z = cfg.z;
    p.eta_d_a = p.eta_d_b = cfg.eta_d;
    p.eta_t = std::pow(10.0, -cfg.fiber_db_per_km * distance_km / 10.0);
    double eta_s = std::pow(10.0, -cfg.switch_loss_db / 10.0);
    double eta_f = eta_s * p.eta_t * p.eta_t;  // stored for twice the travel
    p.eta_f_a = p.eta_f_b = eta_f;

    // damped alternation of fairness and balance
    double x = 0.2;
    bool converged = false;
    for (int it = 0; it < cfg.max_iterations; ++it) {
        p.x = x;
        p.y = solve_fair_y(p);
        BalanceResult bal = solve_balance(p);
        if (!bal.feasible) break;
        double next = (1.0 - cfg.damping) * x + cfg.damping * bal.x;
        if (std::abs(next - x) < cfg.tol) {
            x = next;
            converged = true;
            break;
        }
        x = next;
    }
    row.converged = converged;
    if (!converged) return row;
    p.x = x;
    p.y = solve_fair_y(p);
    auto honest = honest_probs(p);
    auto cheats = cheat_probs(p);
    row.p_honest = honest.win_a;
    row.p_abort = honest.abort;
    row.p_cheat_quantum = std::max(cheats.alice, cheats.bob);
    row.p_cheat_classical = 1.0 - std::sqrt(std::max(0.0, honest.abort));
    row.advantage = row.p_cheat_quantum < row.p_cheat_classical;
    return row;
}

inline std::vector<ScanRow> advantage_scan(const std::vector<double>& distances,
                                           const ScanConfig& cfg = {}) {
    std::vector<ScanRow> rows(distances.size());
    parallel_for(distances.size(), [&](size_t i) { rows[i] = scan_point(distances[i], cfg); });
    return rows;
}

struct StrongCfSolution {
    double x = 0.0, y = 0.0, z = 0.0;
    double bias = 0.0;
};

/// Parameters of the unbalanced protocol that yield a strong coin flip:
/// bracketed root finding in y of the three balance constraints.
inline StrongCfSolution strong_cf_solve() {
    auto x_of = [](double y) { return y * y / ((1.0 - y) * (1.0 - 2.0 * y)); };
    auto z_of = [](double y) { return y / ((1.0 - y) * (1.0 - y)); };
    auto residual = [&](double y) {
        double x = x_of(y), z = z_of(y);
        return 1.0 - x / 2.0 - 1.0 / (2.0 - y - z + y * z);
    };
    double lo = 0.05, hi = 0.45;
    if (residual(lo) * residual(hi) > 0.0) throw numeric_error("strong_cf_solve: no bracket");
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        (residual(lo) * residual(mid) <= 0.0 ? hi : lo) = mid;
    }
    StrongCfSolution out;
    out.y = 0.5 * (lo + hi);
    out.x = x_of(out.y);
    out.z = z_of(out.y);
    double p = 1.0 - (1.0 - out.x) * (1.0 - out.y);  // honest Alice
    double eps = (1.0 - (1.0 - out.y) * (1.0 - out.z)) - p;
    out.bias = std::max(0.5 - 0.5 * (p - eps), 1.0 / (2.0 - (p + eps)) - 0.5);
    return out;
}

}  // namespace wcf
}  // namespace cvkit
