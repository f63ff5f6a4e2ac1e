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

#include "heterodyne.hpp"

namespace cvkit {
namespace mverify {

using heterodyne::SampleBatch;

/// Undoes a passive transformation followed by displacements in classical
/// post-processing: each sample vector gamma becomes U^dag (gamma - beta).
inline SampleBatch postprocess_samples(const SampleBatch& batch, const Matrix& u,
                                       const std::vector<cplx>& beta) {
    size_t m = batch.modes;
    if (u.rows() != m || u.cols() != m || beta.size() != m)
        throw dimension_error("postprocess_samples: dimension mismatch");
    if (!u.is_unitary(tolerances().unitarity))
        throw numeric_error("postprocess_samples: U must be unitary");
    Matrix udag = u.adjoint();
    SampleBatch out = batch;
    out.descriptor += "+postprocessed";
    std::vector<cplx> shifted(m);
    for (size_t shot = 0; shot < batch.count(); ++shot) {
        for (size_t i = 0; i < m; ++i) shifted[i] = batch.at(shot, static_cast<int>(i)) - beta[i];
        std::vector<cplx> rotated = udag * shifted;
        for (size_t i = 0; i < m; ++i) out.data[shot * m + i] = rotated[i];
    }
    return out;
}

struct ProductBounds {
    double lower = 0.0;
    double upper = 0.0;
};

/// Multimode fidelity from single-mode subsystem fidelities:
/// 1 - sum eps_i <= F <= prod (1 - eps_i), floored at zero.
inline ProductBounds product_fidelity_bounds(const std::vector<double>& fidelities) {
    ProductBounds out{1.0, 1.0};
    for (double f : fidelities) {
        if (f < 0.0 || f > 1.0)
            throw dimension_error("product_fidelity_bounds: fidelities must lie in [0,1]");
        out.lower -= 1.0 - f;
        out.upper *= f;
    }
    out.lower = std::max(0.0, out.lower);
    return out;
}

inline double f0_estimator(cplx z, double eta) {
    return std::exp((1.0 - 1.0 / eta) * std::norm(z)) / eta;
}

inline double f1_estimator(cplx z, double eta) {
    return (std::norm(z) / eta - 1.0) * std::exp((1.0 - 1.0 / eta) * std::norm(z)) / (eta * eta);
}

struct WitnessReport {
    std::vector<double> mode_fidelities;
    double witness = 0.0;
    double slack = 0.0;
    double failure_probability = 0.0;
    std::uint64_t samples = 0;
};

/// Fidelity witness for the output of an interferometer fed with single
/// photons in the first n modes: samples are rotated back by U^dag, then the
/// first n modes are scored with f_1 and the rest with f_0. The default
/// slack split assigns lambda_0 = eps/(2(m-n)) and lambda_1 = eps/(2n); a
/// degenerate group (n = 0 or n = m) is simply omitted.
inline WitnessReport bs_witness(const SampleBatch& batch, const Matrix& u, int n_photons,
                                double epsilon) {
    int m = batch.modes;
    if (n_photons < 0 || n_photons > m) throw dimension_error("bs_witness: need 0 <= n <= m");
    SampleBatch rotated = postprocess_samples(batch, u, std::vector<cplx>(m, cplx(0.0)));
    std::uint64_t N = rotated.count();
    if (N == 0) throw dimension_error("bs_witness: empty batch");

    int vacuum_modes = m - n_photons;
    double lambda0 = vacuum_modes > 0 ? epsilon / (2.0 * vacuum_modes) : 0.0;
    double lambda1 = n_photons > 0 ? epsilon / (2.0 * n_photons) : 0.0;
    double eta0 = lambda0 / 2.0;
    double eta1 = lambda1 / 3.0;
    if ((vacuum_modes > 0 && !(eta0 > 0.0 && eta0 < 2.0 / 3.0)) ||
        (n_photons > 0 && !(eta1 > 0.0 && eta1 < 2.0 / 3.0)))
        throw dimension_error("bs_witness: the estimator precision must lie in (0, 2/3)");

    WitnessReport report;
    report.samples = N;
    report.mode_fidelities.assign(m, 0.0);
    std::vector<double> values(N);
    for (int mode = 0; mode < m; ++mode) {
        for (std::uint64_t i = 0; i < N; ++i) {
            cplx z = rotated.at(i, mode);
            values[i] = (mode < n_photons) ? f1_estimator(z, eta1) : f0_estimator(z, eta0);
        }
        report.mode_fidelities[mode] = pairwise_sum(values) / double(N);
    }
    double deficit = 0.0;
    for (double f : report.mode_fidelities) deficit += 1.0 - f;
    report.witness = 1.0 - deficit;
    report.slack = vacuum_modes * lambda0 + n_photons * lambda1;
    double term0 = vacuum_modes > 0
                       ? vacuum_modes * std::exp(-2.0 * double(N) * std::pow(epsilon, 4) /
                                                 std::pow(4.0 * vacuum_modes, 4))
                       : 0.0;
    double term1 = n_photons > 0
                       ? n_photons * std::exp(-double(N) * std::pow(epsilon, 6) /
                                              (2.0 * std::pow(6.0 * n_photons, 6)))
                       : 0.0;
    report.failure_probability = 2.0 * (term0 + term1);
    return report;
}

}  // namespace mverify
}  // namespace cvkit
