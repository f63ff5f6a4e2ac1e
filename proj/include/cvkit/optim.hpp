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
namespace optim {

struct Options {
    int max_iterations = 400;
    double tolerance = 1e-10;  // spread of simplex values at convergence
};

struct Result {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    bool converged = false;
};

/// Nelder-Mead simplex minimization, derivative-free.
inline Result nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                          const std::vector<double>& start, double step, const Options& opts = {}) {
    size_t n = start.size();
    std::vector<std::vector<double>> x(n + 1, start);
    for (size_t i = 0; i < n; ++i) x[i + 1][i] += step;
    std::vector<double> fx(n + 1);
    for (size_t i = 0; i <= n; ++i) fx[i] = f(x[i]);

    auto order = [&] {
        std::vector<size_t> idx(n + 1);
        std::iota(idx.begin(), idx.end(), size_t{0});
        std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) { return fx[a] < fx[b]; });
        std::vector<std::vector<double>> x2;
        std::vector<double> f2;
        for (size_t k : idx) {
            x2.push_back(x[k]);
            f2.push_back(fx[k]);
        }
        x.swap(x2);
        fx.swap(f2);
    };

    Result res;
    int it = 0;
    for (; it < opts.max_iterations; ++it) {
        order();
        if (std::abs(fx[n] - fx[0]) < opts.tolerance) {
            res.converged = true;
            break;
        }
        std::vector<double> centroid(n, 0.0);
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < n; ++j) centroid[j] += x[i][j] / double(n);

        auto blend = [&](double t) {
            std::vector<double> p(n);
            for (size_t j = 0; j < n; ++j) p[j] = centroid[j] + t * (x[n][j] - centroid[j]);
            return p;
        };

        std::vector<double> xr = blend(-1.0);
        double fr = f(xr);
        if (fr < fx[0]) {
            std::vector<double> xe = blend(-2.0);
            double fe = f(xe);
            if (fe < fr) {
                x[n] = xe;
                fx[n] = fe;
            } else {
                x[n] = xr;
                fx[n] = fr;
            }
        } else if (fr < fx[n - 1]) {
            x[n] = xr;
            fx[n] = fr;
        } else {
            std::vector<double> xc = blend(fr < fx[n] ? -0.5 : 0.5);
            double fc = f(xc);
            if (fc < std::min(fr, fx[n])) {
                x[n] = xc;
                fx[n] = fc;
            } else {
                for (size_t i = 1; i <= n; ++i) {
                    for (size_t j = 0; j < n; ++j) x[i][j] = x[0][j] + 0.5 * (x[i][j] - x[0][j]);
                    fx[i] = f(x[i]);
                }
            }
        }
    }
    order();
    res.x = x[0];
    res.value = fx[0];
    res.iterations = it;
    return res;
}

/// Halton low-discrepancy sequence in [0,1)^dim (bases 2, 3, 5, 7, ...).
inline std::vector<double> halton_point(size_t index, size_t dim) {
    static const int primes[] = {2, 3, 5, 7, 11, 13, 17, 19};
    if (dim > 8) throw dimension_error("halton_point: at most 8 dimensions");
    std::vector<double> p(dim);
    for (size_t d = 0; d < dim; ++d) {
        int base = primes[d];
        double f = 1.0, r = 0.0;
        size_t i = index + 1;
        while (i > 0) {
            f /= base;
            r += f * double(i % base);
            i /= base;
        }
        p[d] = r;
    }
    return p;
}

/// Quasi-random multistart minimization over a box. Restarts run
/// independently (parallel when allowed); ties break toward the lowest
/// restart index so results are reproducible.
inline Result multistart(const std::function<double(const std::vector<double>&)>& f,
                         const std::vector<double>& lower, const std::vector<double>& upper,
                         int restarts, const Options& opts = {}) {
    size_t dim = lower.size();
    std::vector<Result> results(restarts);
    parallel_for(restarts, [&](size_t r) {
        auto u = halton_point(r, dim);
        std::vector<double> start(dim);
        double span = 0.0;
        for (size_t d = 0; d < dim; ++d) {
            start[d] = lower[d] + u[d] * (upper[d] - lower[d]);
            span = std::max(span, upper[d] - lower[d]);
        }
        results[r] = nelder_mead(f, start, 0.1 * span, opts);
    });
    size_t best = 0;
    for (size_t r = 1; r < results.size(); ++r)
        if (results[r].value < results[best].value) best = r;
    return results[best];
}

}  // namespace optim
}  // namespace cvkit
