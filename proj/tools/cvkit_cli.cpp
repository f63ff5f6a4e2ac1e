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

#include <iostream>

#include <CLI11.hpp>

#include "cvkit/json_io.hpp"
#include "cvkit/mverify.hpp"
#include "cvkit/progmeas.hpp"
#include "cvkit/wcf.hpp"

using namespace cvkit;
using io::json;

namespace {

struct RunConfig {
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string out_path;
    std::string format = "json";
    std::vector<std::string> tolerance_overrides;
    std::string digest_source;  // canonical inputs, hashed into the envelope
};

void apply_tolerance_overrides(const RunConfig& cfg) {
    for (const auto& spec : cfg.tolerance_overrides) {
        auto eq = spec.find('=');
        if (eq == std::string::npos)
            throw dimension_error("--tol expects name=value, got '" + spec + "'");
        std::string name = spec.substr(0, eq);
        double value = std::stod(spec.substr(eq + 1));
        Tolerances& t = tolerances();
        if (name == "unitarity")
            t.unitarity = value;
        else if (name == "symmetry")
            t.symmetry = value;
        else if (name == "normalization")
            t.normalization = value;
        else if (name == "density-clamp")
            t.density_clamp = value;
        else if (name == "condition-limit")
            t.condition_limit = value;
        else if (name == "optimizer")
            t.optimizer = value;
        else if (name == "delta")
            t.delta = value;
        else
            throw dimension_error("unknown tolerance '" + name + "'");
    }
}

/// Inline tuple parser: "1,1,0" -> (1,1,0).
fock::OccupationTuple parse_tuple(const std::string& text) {
    fock::OccupationTuple out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) out.push_back(std::stoi(cell));
    if (out.empty()) throw dimension_error("empty occupation tuple");
    return out;
}

/// Inline complex vector parser: "re,im;re,im;...".
std::vector<cplx> parse_points(const std::string& text) {
    std::vector<cplx> out;
    std::stringstream ss(text);
    std::string pair;
    while (std::getline(ss, pair, ';')) {
        auto comma = pair.find(',');
        if (comma == std::string::npos) throw dimension_error("complex entries are re,im pairs");
        out.push_back(cplx(std::stod(pair.substr(0, comma)), std::stod(pair.substr(comma + 1))));
    }
    if (out.empty()) throw dimension_error("empty complex vector");
    return out;
}

cplx parse_complex(const std::string& text) { return parse_points(text).at(0); }

void note_input(RunConfig& cfg, const std::string& tag, const std::string& content) {
    cfg.digest_source += tag + "=" + content + ";";
}

json load_input(RunConfig& cfg, const std::string& tag, const std::string& path) {
    json j = io::load_json(path);
    note_input(cfg, tag, j.dump());
    return j;
}

void emit(const RunConfig& cfg, const std::string& verb, const json& result) {
    json envelope{{"verb", verb},
                  {"inputs_digest", io::digest(cfg.digest_source)},
                  {"seed", cfg.seed},
                  {"result", result}};
    std::cout << envelope.dump(2) << "\n";
}

void write_csv(const std::string& path, const std::string& header,
               const std::vector<std::vector<double>>& rows) {
    std::ofstream out(path);
    if (!out) throw numeric_error("cannot open '" + path + "' for writing");
    out << header << "\n" << std::setprecision(17);
    for (const auto& row : rows) {
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
        out << "\n";
    }
}

heterodyne::SampleBatch load_batch(RunConfig& cfg, const std::string& csv_path,
                                   const std::string& sidecar_path) {
    json sidecar = load_input(cfg, "sidecar", sidecar_path);
    auto batch = io::read_samples_csv(csv_path, sidecar.at("modes").get<int>());
    batch.seed = sidecar.value("seed", std::uint64_t{0});
    batch.descriptor = sidecar.value("descriptor", "");
    note_input(cfg, "samples", csv_path + ":" + std::to_string(batch.count()));
    return batch;
}

int run_reproduce(const std::string& recipe) {
    auto report = [](const std::string& name, bool ok, const std::string& detail) {
        std::cout << (ok ? "PASS" : "FAIL") << " " << name << ": " << detail << "\n";
        return ok ? 0 : 1;
    };
    if (recipe == "rfock-robustness") {
        stellar::CoreState one;
        one.amplitudes = {cplx(0.0), cplx(1.0)};
        auto res = stellar::robustness({one, 1, {}});
        double expected = 3.0 * std::sqrt(3.0) / (4.0 * std::exp(1.0));
        std::ostringstream detail;
        detail << std::setprecision(6) << "max fidelity " << res.max_fidelity
               << " vs 3*sqrt(3)/(4e) = " << expected;
        return report(recipe, std::abs(res.max_fidelity - expected) < 1e-4, detail.str());
    }
    if (recipe == "gkp-zeros") {
        double period = 4.0 * std::sqrt(pi);
        int zeros = stellar::count_zeros(
            stellar::GkpSpec{5}, stellar::RectangleContour{cplx(0.37, 0.21), period, period});
        return report(recipe, zeros == 16, "zero count " + std::to_string(zeros) + " (want 16)");
    }
    if (recipe == "hadamard-m4") {
        auto s = progmeas::hadamard_walsh(2);
        Matrix u = s.unitary();
        double sum_i = 0.0, sum_d = 0.0;
        bool shortcut_ok = true;
        for (const auto& d : fock::enumerate_sector(4, 4)) {
            double pv = progmeas::pi_value(s, d);
            bool accept = std::abs(pv - 4.0) < 1e-9;
            if (progmeas::parity_postprocess(s, d) != (accept ? 0 : 1)) shortcut_ok = false;
            if (!accept) continue;
            auto p = progmeas::distinguishability_probs(u, d);
            sum_i += p.indistinguishable;
            sum_d += p.distinguishable;
        }
        bool ok = shortcut_ok && std::abs(sum_i - 1.0) < 1e-10 && std::abs(sum_d - 0.25) < 1e-10;
        std::ostringstream detail;
        detail << std::setprecision(12) << "sum Pr_i = " << sum_i << ", sum Pr_d = " << sum_d;
        return report(recipe, ok, detail.str());
    }
    if (recipe == "wcf-advantage") {
        wcf::ScanConfig cfg;
        double first_loss = -1.0;
        for (double d = 0.0; d <= 5.0; d += 0.1) {
            auto row = wcf::scan_point(d, cfg);
            if (row.converged && !row.advantage) {
                first_loss = d;
                break;
            }
        }
        std::ostringstream detail;
        detail << "advantage first lost at d = " << first_loss << " km";
        return report(recipe, first_loss > 0.0, detail.str());
    }
    if (recipe == "bs-witness-m4") {
        Rng rng(2024);
        Matrix u = random_unitary(4, rng);
        auto ideal = fock::apply_interferometer(
            u, fock::FockVector::basis_state({1, 1, 0, 0}, std::vector<int>(4, 2)));
        auto batch = heterodyne::sample_husimi(ideal, 100000, 7);
        auto w = mverify::bs_witness(batch, u, 2, 0.3);
        std::ostringstream detail;
        detail << std::setprecision(4) << "witness " << w.witness << " (want >= 0.7)";
        return report(recipe, w.witness >= 0.7, detail.str());
    }
    std::cerr << "unknown recipe '" << recipe << "'\n";
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"cvkit: linear-optical, Gaussian-circuit and heterodyne-certification numerics"};
    app.require_subcommand(1);

    RunConfig cfg;
    app.add_option("--seed", cfg.seed, "seed for any sampling verb")
        ->each([&](std::string) { cfg.seed_set = true; });
    app.add_option("--out", cfg.out_path, "artifact output path (CSV or JSON)");
    app.add_option("--format", cfg.format, "result format: json|csv")
        ->check(CLI::IsMember({"json", "csv"}));
    app.add_option("--tol", cfg.tolerance_overrides, "tolerance override name=value")->take_all();

    // ---- interf ----------------------------------------------------------
    std::string unitary_path, input_str, output_str;
    std::uint64_t count = 0;
    auto* bs_prob =
        app.add_subcommand("bs-prob", "photon-pattern probability of an interferometer");
    bs_prob->add_option("--unitary", unitary_path)->required();
    bs_prob->add_option("--input", input_str)->required();
    bs_prob->add_option("--output", output_str)->required();
    bs_prob->callback([&] {
        Matrix u = io::decode_matrix(load_input(cfg, "unitary", unitary_path));
        note_input(cfg, "in", input_str);
        note_input(cfg, "out", output_str);
        double p = interf::bs_probability(u, parse_tuple(input_str), parse_tuple(output_str));
        emit(cfg, "bs-prob", json{{"probability", p}});
    });

    auto* bs_sample = app.add_subcommand("bs-sample", "chain-rule sampling of output patterns");
    bs_sample->add_option("--unitary", unitary_path)->required();
    bs_sample->add_option("--input", input_str)->required();
    bs_sample->add_option("--count", count)->required();
    bs_sample->callback([&] {
        if (!cfg.seed_set) throw dimension_error("bs-sample: --seed is required");
        Matrix u = io::decode_matrix(load_input(cfg, "unitary", unitary_path));
        note_input(cfg, "in", input_str);
        note_input(cfg, "count", std::to_string(count));
        auto samples = interf::bs_sample(u, parse_tuple(input_str), count, cfg.seed);
        std::map<fock::OccupationTuple, int> histogram;
        for (const auto& s : samples) histogram[s]++;
        if (!cfg.out_path.empty()) {
            std::ofstream out(cfg.out_path);
            for (const auto& s : samples) {
                for (size_t i = 0; i < s.size(); ++i) out << (i ? "," : "") << s[i];
                out << "\n";
            }
        }
        json hist = json::array();
        for (const auto& [occ, c] : histogram) hist.push_back(json{{"occ", occ}, {"count", c}});
        emit(cfg, "bs-sample", json{{"count", count}, {"histogram", hist}, {"csv", cfg.out_path}});
    });

    std::string circuit_path, final_str, circuit_q_path, p_str, q_str;
    auto* adaptive_prob =
        app.add_subcommand("adaptive-prob", "final-outcome probability with adaptive stages");
    adaptive_prob->add_option("--circuit", circuit_path)->required();
    adaptive_prob->add_option("--final", final_str)->required();
    adaptive_prob->callback([&] {
        auto c = io::decode_adaptive(load_input(cfg, "circuit", circuit_path));
        note_input(cfg, "final", final_str);
        emit(cfg, "adaptive-prob",
             json{{"probability", interf::adaptive_final_probability(c, parse_tuple(final_str))}});
    });

    auto* adaptive_overlap =
        app.add_subcommand("adaptive-overlap", "inner product of post-measurement states");
    adaptive_overlap->add_option("--circuit-p", circuit_path)->required();
    adaptive_overlap->add_option("--p", p_str)->required();
    adaptive_overlap->add_option("--circuit-q", circuit_q_path)->required();
    adaptive_overlap->add_option("--q", q_str)->required();
    adaptive_overlap->callback([&] {
        auto cp = io::decode_adaptive(load_input(cfg, "circuit-p", circuit_path));
        auto cq = io::decode_adaptive(load_input(cfg, "circuit-q", circuit_q_path));
        note_input(cfg, "p", p_str);
        note_input(cfg, "q", q_str);
        cplx overlap = interf::adaptive_overlap(cp, parse_tuple(p_str), cq, parse_tuple(q_str));
        emit(cfg, "adaptive-overlap", json{{"overlap", io::encode(overlap)}});
    });

    // ---- gaussian --------------------------------------------------------
    std::string core_path, point_str, cvs_path, x_path;
    int embed_m = 0;
    double nu = 0.0;
    auto* gcore =
        app.add_subcommand("gcore-density", "output density of a Gaussian circuit with core input");
    gcore->add_option("--circuit", circuit_path)->required();
    gcore->add_option("--core", core_path)->required();
    gcore->add_option("--point", point_str)->required();
    gcore->callback([&] {
        auto elements = io::decode_circuit(load_input(cfg, "circuit", circuit_path));
        auto core = io::decode_fock(load_input(cfg, "core", core_path));
        note_input(cfg, "point", point_str);
        double density = gaussian::gcore_density(elements, core, parse_points(point_str));
        emit(cfg, "gcore-density", json{{"density", density}});
    });

    auto* cvs = app.add_subcommand("cvs-origin",
                                   "closed-form output density of a CVS circuit at the origin");
    cvs->add_option("--cvs", cvs_path)->required();
    cvs->callback([&] {
        json j = load_input(cfg, "cvs", cvs_path);
        gaussian::CvsCircuit c;
        c.modes = j.at("modes").get<int>();
        c.photons = j.at("photons").get<int>();
        c.xi = j.at("xi").get<double>();
        c.phi = j.at("phi").get<double>();
        c.zeta = j.at("zeta").get<double>();
        c.sigma = io::decode_matrix(j.at("sigma"));
        c.o = j.contains("o") ? io::decode_matrix(j.at("o")) : Matrix::identity(c.modes);
        emit(cfg, "cvs-origin", json{{"density", gaussian::cvs_origin_density(c)}});
    });

    auto* embed =
        app.add_subcommand("embed-sigma", "symmetric orthogonal embedding of a real matrix");
    embed->add_option("--x", x_path)->required();
    embed->add_option("--m", embed_m)->required();
    embed->add_option("--nu", nu)->required();
    embed->callback([&] {
        Matrix x = io::decode_matrix(load_input(cfg, "x", x_path));
        note_input(cfg, "m", std::to_string(embed_m));
        note_input(cfg, "nu", std::to_string(nu));
        Matrix sigma = gaussian::embed_orthogonal(x, embed_m, nu);
        json result{{"sigma", io::encode(sigma)}};
        if (!cfg.out_path.empty()) {
            std::ofstream out(cfg.out_path);
            out << result.at("sigma").dump(2) << "\n";
        }
        emit(cfg, "embed-sigma", result);
    });

    // ---- stellar ---------------------------------------------------------
    std::string spec_path, z_str, contour_str, poly_path, xi_str, alpha_str;
    int zeros_points = 256;
    auto* seval = app.add_subcommand("stellar-eval", "evaluate a stellar function");
    seval->add_option("--spec", spec_path)->required();
    seval->add_option("--z", z_str)->required();
    seval->callback([&] {
        auto spec = io::decode_stellar(load_input(cfg, "spec", spec_path));
        note_input(cfg, "z", z_str);
        cplx value = stellar::stellar_eval(spec, parse_complex(z_str));
        emit(cfg, "stellar-eval", json{{"value", io::encode(value)}});
    });

    auto* szeros = app.add_subcommand("stellar-zeros", "count zeros inside a contour");
    szeros->add_option("--spec", spec_path)->required();
    szeros->add_option("--contour", contour_str, "rect:x,y,w,h or circle:x,y,r")->required();
    szeros->add_option("--points", zeros_points);
    szeros->callback([&] {
        auto spec = io::decode_stellar(load_input(cfg, "spec", spec_path));
        note_input(cfg, "contour", contour_str);
        stellar::Contour contour;
        auto colon = contour_str.find(':');
        if (colon == std::string::npos)
            throw dimension_error("contour: expected rect:... or circle:...");
        std::string kind = contour_str.substr(0, colon);
        std::vector<double> vals;
        {
            std::stringstream ss(contour_str.substr(colon + 1));
            std::string cell;
            while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        }
        if (kind == "rect" && vals.size() == 4)
            contour = stellar::RectangleContour{cplx(vals[0], vals[1]), vals[2], vals[3]};
        else if (kind == "circle" && vals.size() == 3)
            contour = stellar::CircleContour{cplx(vals[0], vals[1]), vals[2]};
        else
            throw dimension_error("contour: expected rect:x,y,w,h or circle:x,y,r");
        emit(cfg, "stellar-zeros",
             json{{"zeros", stellar::count_zeros(spec, contour, zeros_points)}});
    });

    auto* cextract =
        app.add_subcommand("core-extract", "core state of a polynomial-times-Gaussian state");
    cextract->add_option("--poly", poly_path)->required();
    cextract->add_option("--xi", xi_str)->required();
    cextract->add_option("--alpha", alpha_str)->required();
    cextract->callback([&] {
        json j = load_input(cfg, "poly", poly_path);
        stellar::CoreState input{io::decode_complex_vector(j.at("amplitudes"))};
        note_input(cfg, "xi", xi_str);
        note_input(cfg, "alpha", alpha_str);
        auto core = stellar::extract_core(input, parse_complex(xi_str), parse_complex(alpha_str));
        emit(cfg, "core-extract", json{{"amplitudes", io::encode(core.amplitudes)}});
    });

    int k_max = 1, sign = +1, restarts = 16, iterations = 400;
    auto* robust = app.add_subcommand("robustness", "robustness profile of a core state");
    robust->add_option("--core", core_path)->required();
    robust->add_option("--k", k_max, "largest k in the profile")->required();
    robust->add_option("--restarts", restarts);
    robust->add_option("--iterations", iterations);
    robust->callback([&] {
        json j = load_input(cfg, "core", core_path);
        stellar::CoreState core{io::decode_complex_vector(j.at("amplitudes"))};
        note_input(cfg, "k", std::to_string(k_max));
        stellar::OptimizerBudget budget;
        budget.restarts = restarts;
        budget.iterations = iterations;
        json profile = json::array();
        std::vector<std::vector<double>> rows;
        for (int k = 1; k <= k_max; ++k) {
            auto res = stellar::robustness({core, k, budget});
            profile.push_back(json{{"k", k},
                                   {"r_k", res.r_k},
                                   {"max_fidelity", res.max_fidelity},
                                   {"xi", io::encode(res.xi)},
                                   {"alpha", io::encode(res.alpha)},
                                   {"converged", res.converged}});
            rows.push_back({double(k), res.r_k, res.max_fidelity});
        }
        if (!cfg.out_path.empty()) write_csv(cfg.out_path, "k,r_k,max_fidelity", rows);
        emit(cfg, "robustness", json{{"profile", profile}});
    });

    auto* catrb = app.add_subcommand("cat-robustness", "robustness profile of a cat state");
    catrb->add_option("--alpha", alpha_str)->required();
    catrb->add_option("--sign", sign, "+1 or -1");
    catrb->add_option("--k", k_max)->required();
    catrb->add_option("--restarts", restarts);
    catrb->add_option("--iterations", iterations);
    catrb->callback([&] {
        note_input(cfg, "alpha", alpha_str);
        note_input(cfg, "sign", std::to_string(sign));
        stellar::OptimizerBudget budget;
        budget.restarts = restarts;
        budget.iterations = iterations;
        json profile = json::array();
        std::vector<std::vector<double>> rows;
        for (int k = 1; k <= k_max; ++k) {
            auto res = stellar::cat_robustness(parse_complex(alpha_str), sign, k, budget);
            profile.push_back(json{{"k", k}, {"r_k", res.r_k}, {"max_fidelity", res.max_fidelity}});
            rows.push_back({double(k), res.r_k, res.max_fidelity});
        }
        if (!cfg.out_path.empty()) write_csv(cfg.out_path, "k,r_k,max_fidelity", rows);
        emit(cfg, "cat-robustness", json{{"profile", profile}});
    });

    // ---- heterodyne ------------------------------------------------------
    std::string state_path, samples_path, sidecar_path, target_path, profile_str;
    int energy_cutoff = 1, support_limit = 0, m_copies = 1;
    double eps = 0.05, eps_prime = 0.05, eta = 0.1, fid_value = 0.0, fid_bound = 0.0;
    auto* hsample = app.add_subcommand("het-sample", "sample the Husimi function of a state");
    hsample->add_option("--state", state_path, "FockVector or GaussianState JSON")->required();
    hsample->add_option("--count", count)->required();
    hsample->callback([&] {
        if (!cfg.seed_set) throw dimension_error("het-sample: --seed is required");
        if (cfg.out_path.empty()) throw dimension_error("het-sample: --out is required");
        json j = load_input(cfg, "state", state_path);
        note_input(cfg, "count", std::to_string(count));
        heterodyne::SampleBatch batch;
        if (j.contains("covariance"))
            batch = heterodyne::sample_husimi(io::decode_gaussian(j), count, cfg.seed);
        else
            batch = heterodyne::sample_husimi(io::decode_fock(j), count, cfg.seed);
        io::write_samples_csv(batch, cfg.out_path);
        std::ofstream side(cfg.out_path + ".json");
        side << io::sidecar_of(batch).dump(2) << "\n";
        emit(cfg, "het-sample",
             json{{"csv", cfg.out_path},
                  {"sidecar", cfg.out_path + ".json"},
                  {"count", batch.count()}});
    });

    auto* tomo = app.add_subcommand("tomo", "reliable heterodyne tomography");
    tomo->add_option("--samples", samples_path)->required();
    tomo->add_option("--sidecar", sidecar_path)->required();
    tomo->add_option("--E", energy_cutoff)->required();
    tomo->add_option("--eps", eps);
    tomo->add_option("--eps-prime", eps_prime);
    tomo->callback([&] {
        auto batch = load_batch(cfg, samples_path, sidecar_path);
        auto estimates = heterodyne::tomo_estimate(batch, energy_cutoff, eps, eps_prime);
        json rows = json::array();
        for (const auto& row : estimates) {
            json r = json::array();
            for (const auto& entry : row) r.push_back(io::encode(entry.value));
            rows.push_back(r);
        }
        emit(cfg, "tomo",
             json{{"estimate", rows},
                  {"bound", estimates[0][0].bound},
                  {"failure_probability", estimates[0][0].failure_probability}});
    });

    auto* certify = app.add_subcommand("certify", "i.i.d. fidelity certification against a target");
    certify->add_option("--samples", samples_path)->required();
    certify->add_option("--sidecar", sidecar_path)->required();
    certify->add_option("--target", target_path)->required();
    certify->add_option("--m", m_copies);
    certify->add_option("--E", energy_cutoff)->required();
    certify->add_option("--s", support_limit);
    certify->add_option("--eps", eps);
    certify->add_option("--eps-prime", eps_prime);
    certify->callback([&] {
        auto batch = load_batch(cfg, samples_path, sidecar_path);
        auto target = io::decode_fock(load_input(cfg, "target", target_path));
        auto res = heterodyne::certify_fidelity(batch, target, m_copies, energy_cutoff,
                                                support_limit, eps, eps_prime);
        emit(cfg, "certify",
             json{{"fidelity", res.fidelity.real()},
                  {"bound", res.fidelity.bound},
                  {"failure_probability", res.fidelity.failure_probability},
                  {"clamped", res.fidelity.flagged},
                  {"support_score", res.support_score},
                  {"p_support", res.p_support}});
    });

    heterodyne::VerificationBudget vb;
    double c_psi_value = 1.0;
    auto* vbounds = app.add_subcommand("verify-bounds", "non-i.i.d. verification failure bounds");
    vbounds->add_option("--n", vb.n)->required();
    vbounds->add_option("--k", vb.k)->required();
    vbounds->add_option("--q", vb.q)->required();
    vbounds->add_option("--s", vb.s)->required();
    vbounds->add_option("--m", vb.m)->required();
    vbounds->add_option("--E", vb.E)->required();
    vbounds->add_option("--eps", vb.epsilon)->required();
    vbounds->add_option("--eps-prime", vb.epsilon_prime)->required();
    vbounds->add_option("--c-psi", c_psi_value)->required();
    vbounds->callback([&] {
        note_input(cfg, "budget",
                   std::to_string(vb.n) + "," + std::to_string(vb.k) + "," + std::to_string(vb.q));
        auto bounds = heterodyne::verification_bounds(vb, c_psi_value);
        emit(cfg, "verify-bounds",
             json{{"p_support", bounds.p_support},
                  {"p_definetti", bounds.p_definetti},
                  {"p_choice", bounds.p_choice},
                  {"p_hoeffding", bounds.p_hoeffding},
                  {"total_slack", bounds.total_slack}});
    });

    auto* wigner =
        app.add_subcommand("wigner-point", "Wigner value from displaced-parity estimation");
    wigner->add_option("--samples", samples_path)->required();
    wigner->add_option("--sidecar", sidecar_path)->required();
    wigner->add_option("--alpha", alpha_str)->required();
    wigner->add_option("--eta", eta)->required();
    wigner->add_option("--E", energy_cutoff)->required();
    wigner->callback([&] {
        auto batch = load_batch(cfg, samples_path, sidecar_path);
        note_input(cfg, "alpha", alpha_str);
        auto value = heterodyne::wigner_point(batch, parse_complex(alpha_str), eta, energy_cutoff);
        emit(cfg, "wigner-point",
             json{{"value", value.real()},
                  {"bound", value.bound},
                  {"failure_probability", value.failure_probability}});
    });

    auto* rankw = app.add_subcommand("rank-witness", "certified stellar-rank lower bound");
    rankw->add_option("--fidelity", fid_value)->required();
    rankw->add_option("--bound", fid_bound)->required();
    rankw->add_option("--profile", profile_str, "comma-separated R_k values")->required();
    rankw->callback([&] {
        note_input(cfg, "fidelity", std::to_string(fid_value));
        note_input(cfg, "profile", profile_str);
        std::vector<double> profile;
        std::stringstream ss(profile_str);
        std::string cell;
        while (std::getline(ss, cell, ',')) profile.push_back(std::stod(cell));
        ConfidenceValue fid{cplx(fid_value), fid_bound, 0.0, false};
        emit(cfg, "rank-witness", json{{"rank", heterodyne::rank_witness(fid, profile)}});
    });

    // ---- mverify ---------------------------------------------------------
    int n_photons = 0;
    double epsilon_witness = 0.3;
    auto* bsverify =
        app.add_subcommand("bs-verify", "fidelity witness for an interferometer output");
    bsverify->add_option("--samples", samples_path)->required();
    bsverify->add_option("--sidecar", sidecar_path)->required();
    bsverify->add_option("--unitary", unitary_path)->required();
    bsverify->add_option("--photons", n_photons)->required();
    bsverify->add_option("--epsilon", epsilon_witness);
    bsverify->callback([&] {
        auto batch = load_batch(cfg, samples_path, sidecar_path);
        Matrix u = io::decode_matrix(load_input(cfg, "unitary", unitary_path));
        auto report = mverify::bs_witness(batch, u, n_photons, epsilon_witness);
        json result{{"witness", report.witness},
                    {"mode_fidelities", report.mode_fidelities},
                    {"slack", report.slack},
                    {"failure_probability", report.failure_probability},
                    {"samples", report.samples}};
        if (!cfg.out_path.empty()) {
            std::ofstream out(cfg.out_path);
            out << result.dump(2) << "\n";
        }
        emit(cfg, "bs-verify", result);
    });

    // ---- progmeas --------------------------------------------------------
    int order_m = 2;
    double overlap_sq = 0.0;
    auto* swap_stats = app.add_subcommand("swap-stats", "order-m swap test acceptance");
    swap_stats->add_option("--m", order_m)->required();
    swap_stats->add_option("--overlap-sq", overlap_sq)->required();
    swap_stats->callback([&] {
        note_input(cfg, "m", std::to_string(order_m));
        note_input(cfg, "x", std::to_string(overlap_sq));
        emit(cfg, "swap-stats", json{{"p_accept", progmeas::swap_test_stats(order_m, overlap_sq)}});
    });

    int hw_order = 2;
    std::string pattern_str;
    auto* haccept =
        app.add_subcommand("hadamard-accept", "parity post-processing of a detection pattern");
    haccept->add_option("--order", hw_order, "Hadamard-Walsh order n, size m = 2^n")->required();
    haccept->add_option("--pattern", pattern_str)->required();
    haccept->callback([&] {
        note_input(cfg, "order", std::to_string(hw_order));
        note_input(cfg, "pattern", pattern_str);
        auto s = progmeas::hadamard_walsh(hw_order);
        auto d = parse_tuple(pattern_str);
        int reject = progmeas::parity_postprocess(s, d);
        emit(cfg, "hadamard-accept",
             json{{"accept", reject == 0}, {"pi", progmeas::pi_value(s, d)}});
    });

    auto* cscheme = app.add_subcommand("coherent-scheme", "coherent-state comparison statistics");
    cscheme->add_option("--m", order_m)->required();
    cscheme->add_option("--overlap-sq", overlap_sq)->required();
    cscheme->callback([&] {
        note_input(cfg, "m", std::to_string(order_m));
        note_input(cfg, "x", std::to_string(overlap_sq));
        auto stats = progmeas::coherent_scheme_stats(order_m, overlap_sq);
        emit(cfg, "coherent-scheme",
             json{{"p_no_click", stats.p_no_click},
                  {"gap_single_photon", stats.gap_single_photon},
                  {"gap_coherent", stats.gap_coherent}});
    });

    std::string beta_str;
    double visibility = 1.0, efficiency = 1.0;
    auto* merger =
        app.add_subcommand("merger-imperfect", "imperfect merger completeness and soundness");
    merger->add_option("--alpha", alpha_str)->required();
    merger->add_option("--beta", beta_str)->required();
    merger->add_option("--nu", visibility)->required();
    merger->add_option("--eta", efficiency)->required();
    merger->callback([&] {
        note_input(cfg, "alpha", alpha_str);
        note_input(cfg, "beta", beta_str);
        auto stats = progmeas::merger_imperfect(parse_complex(alpha_str), parse_complex(beta_str),
                                                visibility, efficiency);
        emit(cfg, "merger-imperfect",
             json{{"c2", stats.c2}, {"c4", stats.c4}, {"s2", stats.s2}, {"s4", stats.s4}});
    });

    // ---- wcf -------------------------------------------------------------
    wcf::WcfParams wp;
    auto* wcf_point = app.add_subcommand("wcf-point", "probabilities for one parameter set");
    wcf_point->add_option("--x", wp.x)->required();
    wcf_point->add_option("--y", wp.y)->required();
    wcf_point->add_option("--z", wp.z)->required();
    wcf_point->add_option("--eta-t", wp.eta_t);
    wcf_point->add_option("--eta-f-a", wp.eta_f_a);
    wcf_point->add_option("--eta-f-b", wp.eta_f_b);
    wcf_point->add_option("--eta-d-a", wp.eta_d_a);
    wcf_point->add_option("--eta-d-b", wp.eta_d_b);
    wcf_point->callback([&] {
        note_input(cfg, "x", std::to_string(wp.x));
        note_input(cfg, "y", std::to_string(wp.y));
        note_input(cfg, "z", std::to_string(wp.z));
        auto honest = wcf::honest_probs(wp);
        auto cheats = wcf::cheat_probs(wp);
        emit(cfg, "wcf-point",
             json{{"p_honest_a", honest.win_a},
                  {"p_honest_b", honest.win_b},
                  {"p_abort", honest.abort},
                  {"p_cheat_a", cheats.alice},
                  {"p_cheat_b", cheats.bob},
                  {"l_star", cheats.l_star}});
    });

    wcf::ScanConfig scan_cfg;
    double d_max = 2.0, d_step = 0.1;
    auto* wcf_scan = app.add_subcommand("wcf-scan", "fair-balanced scan over distance");
    wcf_scan->add_option("--z", scan_cfg.z);
    wcf_scan->add_option("--eta-d", scan_cfg.eta_d);
    wcf_scan->add_option("--switch-loss", scan_cfg.switch_loss_db, "switch loss in dB");
    wcf_scan->add_option("--d-max", d_max)->required();
    wcf_scan->add_option("--d-step", d_step)->required();
    wcf_scan->callback([&] {
        note_input(cfg, "z", std::to_string(scan_cfg.z));
        note_input(cfg, "eta-d", std::to_string(scan_cfg.eta_d));
        note_input(cfg, "d", std::to_string(d_max) + ":" + std::to_string(d_step));
        std::vector<double> distances;
        for (double d = 0.0; d <= d_max + 1e-12; d += d_step) distances.push_back(d);
        auto rows = wcf::advantage_scan(distances, scan_cfg);
        std::vector<std::vector<double>> csv;
        json result = json::array();
        for (const auto& r : rows) {
            csv.push_back({r.distance_km, r.p_honest, r.p_abort, r.p_cheat_quantum,
                           r.p_cheat_classical, double(r.advantage)});
            result.push_back(json{{"d", r.distance_km},
                                  {"p_h", r.p_honest},
                                  {"p_ab", r.p_abort},
                                  {"p_d_q", r.p_cheat_quantum},
                                  {"p_d_c", r.p_cheat_classical},
                                  {"forcing_limit", r.forcing_limit},
                                  {"advantage", r.advantage},
                                  {"converged", r.converged}});
        }
        if (!cfg.out_path.empty()) write_csv(cfg.out_path, "d,p_h,p_ab,p_d_q,p_d_c,advantage", csv);
        emit(cfg, "wcf-scan", json{{"rows", result}});
    });

    auto* scf = app.add_subcommand("scf-solve", "strong coin flipping parameters");
    scf->callback([&] {
        auto sol = wcf::strong_cf_solve();
        emit(cfg, "scf-solve", json{{"x", sol.x}, {"y", sol.y}, {"z", sol.z}, {"bias", sol.bias}});
    });

    // ---- reproduce -------------------------------------------------------
    std::string recipe;
    auto* repro = app.add_subcommand("reproduce", "run a pinned acceptance recipe");
    repro->add_option("--recipe", recipe,
                      "rfock-robustness | wcf-advantage | gkp-zeros | hadamard-m4 | bs-witness-m4")
        ->required();
    repro->callback([&] {
        if (run_reproduce(recipe) != 0) throw numeric_error("recipe '" + recipe + "' failed");
    });

    app.parse_complete_callback([&] { apply_tolerance_overrides(cfg); });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
