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

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cvkit {

using cplx = std::complex<double>;
using std::size_t;

inline constexpr double pi = 3.14159265358979323846;

/// Errors raised on violated preconditions (bad arguments, size limits).
class dimension_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Errors raised when a numerical routine cannot produce a trustworthy result.
class numeric_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Factorials are cached up to 170 (the last one representable in a double).
inline double factorial(int n) {
    static const std::vector<double> table = [] {
        std::vector<double> t(171);
        t[0] = 1.0;
        for (int k = 1; k <= 170; ++k) t[k] = t[k - 1] * k;
        return t;
    }();
    if (n < 0) throw dimension_error("factorial: negative argument");
    if (n > 170) throw numeric_error("factorial: overflow beyond 170!");
    return table[static_cast<size_t>(n)];
}

inline double log_factorial(double n) { return std::lgamma(n + 1.0); }

inline double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    return std::exp(log_factorial(n) - log_factorial(k) - log_factorial(n - k));
}

// Exact for small arguments, used where counts must be integral.
inline std::uint64_t binomial_exact(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        std::uint64_t num = static_cast<std::uint64_t>(n - k + i);
        if (r > UINT64_MAX / num) throw numeric_error("binomial_exact: overflow");
        r = r * num / static_cast<std::uint64_t>(i);
    }
    return r;
}

/// Deterministic RNG. Wraps mt19937_64 with hand-rolled uniform/normal
/// transforms so the stream is identical across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() {  // [0, 1)
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    double normal() {  // standard normal, Box-Muller
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = 0.0;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * pi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * pi * u2);
    }

    cplx complex_normal() {  // E|z|^2 = 1
        double re = normal(), im = normal();
        return cplx(re, im) / std::sqrt(2.0);
    }

    std::uint64_t integer() { return gen_(); }

private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Pairwise (fixed-tree) summation: associative reduction with a
/// deterministic order, independent of chunking by callers.
template <typename T>
T pairwise_sum(const std::vector<T>& v, size_t lo, size_t hi) {
    if (hi - lo == 0) return T{};
    if (hi - lo == 1) return v[lo];
    size_t mid = lo + (hi - lo) / 2;
    return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

template <typename T>
T pairwise_sum(const std::vector<T>& v) {
    return pairwise_sum(v, 0, v.size());
}

/// Thread cap taken from CVKIT_THREADS (default: hardware concurrency).
inline unsigned max_threads() {
    if (const char* env = std::getenv("CVKIT_THREADS")) {
        long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : hc;
}

/// Runs fn(i) for i in [0, n). Each index is processed exactly once; the
/// callee must not share mutable state across indices.
inline void parallel_for(size_t n, const std::function<void(size_t)>& fn) {
    unsigned t = std::min<size_t>(max_threads(), n);
    if (t <= 1) {
        for (size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(t);
    for (unsigned w = 0; w < t; ++w) {
        pool.emplace_back([&, w] {
            for (size_t i = w; i < n; i += t) fn(i);
        });
    }
    for (auto& th : pool) th.join();
}

/// An estimate bundled with the additive error bound and failure probability
/// of the concentration statement that produced it.
struct ConfidenceValue {
    cplx value;
    double bound = 0.0;
    double failure_probability = 0.0;
    bool flagged = false;  // set when a result was clamped or did not converge

    double real() const { return value.real(); }
};

/// Central tolerance record. Modules read these defaults; the CLI may
/// override individual entries via --tol.<name>.
struct Tolerances {
    double unitarity = 1e-9;       // max |U^dag U - I| accepted
    double symmetry = 1e-9;        // hafnian input symmetrization threshold
    double normalization = 1e-6;   // state-norm slack accepted on input
    double density_clamp = 1e-9;   // negative densities clamped above -this
    double condition_limit = 1e12; // reject covariance inverses beyond this
    double optimizer = 1e-10;      // simplex objective tolerance
    double delta = 0.05;           // default failure probability for bounds
};

inline Tolerances& tolerances() {
    static Tolerances t;
    return t;
}

}  // namespace cvkit
