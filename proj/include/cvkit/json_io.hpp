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

#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "gaussian.hpp"
#include "heterodyne.hpp"
#include "interf.hpp"
#include "stellar.hpp"

namespace cvkit {
namespace io {

using json = nlohmann::json;

// Complex numbers are always [re, im] pairs; no string forms.
inline json encode(cplx z) { return json::array({z.real(), z.imag()}); }

inline cplx decode_complex(const json& j) {
    if (!j.is_array() || j.size() != 2) throw dimension_error("json: complex must be [re, im]");
    return cplx(j[0].get<double>(), j[1].get<double>());
}

inline json encode(const std::vector<cplx>& v) {
    json out = json::array();
    for (const auto& z : v) out.push_back(encode(z));
    return out;
}

inline std::vector<cplx> decode_complex_vector(const json& j) {
    std::vector<cplx> out;
    for (const auto& e : j) out.push_back(decode_complex(e));
    return out;
}

/// Matrices: {"rows": r, "cols": c, "entries": [[re, im], ...]} row-major.
inline json encode(const Matrix& m) {
    json entries = json::array();
    for (size_t i = 0; i < m.rows(); ++i)
        for (size_t j = 0; j < m.cols(); ++j) entries.push_back(encode(m(i, j)));
    return json{{"rows", m.rows()}, {"cols", m.cols()}, {"entries", entries}};
}

inline Matrix decode_matrix(const json& j) {
    size_t rows = j.at("rows").get<size_t>();
    size_t cols = j.at("cols").get<size_t>();
    const json& entries = j.at("entries");
    if (entries.size() != rows * cols) throw dimension_error("json: matrix entry count mismatch");
    Matrix m(rows, cols);
    for (size_t i = 0; i < rows; ++i)
        for (size_t k = 0; k < cols; ++k) m(i, k) = decode_complex(entries[i * cols + k]);
    return m;
}

/// FockVector: {"modes": m, "cutoff": [...], "amplitudes":
///              [{"occ": [..], "re": x, "im": y}, ...]}
inline json encode(const fock::FockVector& state) {
    json amps = json::array();
    for (const auto& [occ, amp] : state.amplitudes())
        amps.push_back(json{{"occ", occ}, {"re", amp.real()}, {"im", amp.imag()}});
    return json{{"modes", state.modes()}, {"cutoff", state.cutoff()}, {"amplitudes", amps}};
}

inline fock::FockVector decode_fock(const json& j) {
    int modes = j.at("modes").get<int>();
    std::vector<int> cutoff = j.at("cutoff").get<std::vector<int>>();
    fock::FockVector state(modes, cutoff);
    for (const auto& entry : j.at("amplitudes")) {
        fock::OccupationTuple occ = entry.at("occ").get<fock::OccupationTuple>();
        state.set(occ, cplx(entry.at("re").get<double>(), entry.at("im").get<double>()));
    }
    return state;
}

/// GaussianState: {"modes": m, "covariance": matrix, "displacement": [...]}.
inline json encode(const gaussian::GaussianState& state) {
    return json{{"modes", state.modes},
                {"covariance", encode(state.covariance)},
                {"displacement", encode(state.displacement)}};
}

inline gaussian::GaussianState decode_gaussian(const json& j) {
    gaussian::GaussianState state;
    state.modes = j.at("modes").get<int>();
    state.covariance = decode_matrix(j.at("covariance"));
    state.displacement = decode_complex_vector(j.at("displacement"));
    state.check_invariants();
    return state;
}

/// Gaussian circuits: {"elements": [{"kind": "squeeze", "xi": [...]},
/// {"kind": "passive", "unitary": matrix}, {"kind": "displace", "beta":
/// [...]}]}.
inline std::vector<gaussian::Element> decode_circuit(const json& j) {
    std::vector<gaussian::Element> elements;
    for (const auto& e : j.at("elements")) {
        std::string kind = e.at("kind").get<std::string>();
        if (kind == "squeeze")
            elements.push_back(gaussian::Squeeze{decode_complex_vector(e.at("xi"))});
        else if (kind == "passive")
            elements.push_back(gaussian::Passive{decode_matrix(e.at("unitary"))});
        else if (kind == "displace")
            elements.push_back(gaussian::Displace{decode_complex_vector(e.at("beta"))});
        else
            throw dimension_error("json: unknown circuit element kind '" + kind + "'");
    }
    return elements;
}

/// Adaptive circuits: base unitary plus a prefix-indexed stage table.
inline interf::AdaptiveCircuit decode_adaptive(const json& j) {
    std::map<fock::OccupationTuple, Matrix> table;
    if (j.contains("stages"))
        for (const auto& s : j.at("stages"))
            table[s.at("prefix").get<fock::OccupationTuple>()] = decode_matrix(s.at("unitary"));
    return interf::AdaptiveCircuit::from_table(
        j.at("modes").get<int>(), j.at("photons").get<int>(), j.at("adaptive_modes").get<int>(),
        decode_matrix(j.at("base_unitary")), std::move(table));
}

/// Stellar specs, tagged by "variant".
inline stellar::StellarSpec decode_stellar(const json& j) {
    std::string variant = j.at("variant").get<std::string>();
    if (variant == "core") {
        stellar::CoreState c{decode_complex_vector(j.at("amplitudes"))};
        return stellar::CoreSpec{c};
    }
    if (variant == "gaussian")
        return stellar::GaussianSpec{decode_complex(j.at("xi")), decode_complex(j.at("alpha"))};
    if (variant == "cat")
        return stellar::CatSpec{decode_complex(j.at("alpha")), j.at("sign").get<int>()};
    if (variant == "gkp") return stellar::GkpSpec{j.value("lattice", 5)};
    if (variant == "gaussian-core") {
        stellar::CoreState c{decode_complex_vector(j.at("amplitudes"))};
        return stellar::GaussianCoreSpec{decode_complex(j.at("xi")),
                                         decode_complex(j.at("alpha")), c};
    }
    throw dimension_error("json: unknown stellar variant '" + variant + "'");
}

/// SampleBatch CSV: one shot per line, columns re,im per mode; the seed and
/// detection metadata live in a JSON sidecar.
inline void write_samples_csv(const heterodyne::SampleBatch& batch, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw numeric_error("cannot open '" + path + "' for writing");
    out << std::setprecision(17);
    for (size_t shot = 0; shot < batch.count(); ++shot) {
        for (int mode = 0; mode < batch.modes; ++mode) {
            if (mode) out << ',';
            cplx z = batch.at(shot, mode);
            out << z.real() << ',' << z.imag();
        }
        out << '\n';
    }
}

inline json sidecar_of(const heterodyne::SampleBatch& batch) {
    return json{{"modes", batch.modes}, {"seed", batch.seed}, {"descriptor", batch.descriptor}};
}

inline heterodyne::SampleBatch read_samples_csv(const std::string& path, int modes) {
    std::ifstream in(path);
    if (!in) throw numeric_error("cannot open '" + path + "'");
    heterodyne::SampleBatch batch;
    batch.modes = modes;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (row.size() != static_cast<size_t>(2 * modes))
            throw dimension_error("samples CSV: wrong column count");
        for (int m = 0; m < modes; ++m) batch.data.push_back(cplx(row[2 * m], row[2 * m + 1]));
    }
    return batch;
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw numeric_error("cannot open '" + path + "'");
    return json::parse(in);
}

/// FNV-1a digest of the canonical serialization, for the result envelope.
inline std::string digest(const std::string& text) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : text) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream out;
    out << std::hex << std::setw(16) << std::setfill('0') << h;
    return out.str();
}

}  // namespace io
}  // namespace cvkit
