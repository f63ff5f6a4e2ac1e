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

#include <cstdlib>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "cvkit/json_io.hpp"

using namespace cvkit;
using io::json;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CliRun {
    int exit_code;
    std::string stdout_text;
};

CliRun run_cli(const std::string& args) {
    std::string out_file = "cli_stdout.txt";
    std::string cmd = std::string(CVKIT_BIN) + " " + args + " > " + out_file + " 2> cli_stderr.txt";
    int status = std::system(cmd.c_str());
    return {WEXITSTATUS(status), slurp(out_file)};
}

}  // namespace

TEST_CASE("json round trips") {
    Rng rng(3);
    Matrix u = random_unitary(3, rng);
    Matrix back = io::decode_matrix(io::encode(u));
    REQUIRE((u - back).max_abs() == 0.0);

    fock::FockVector state(2, {3, 3});
    state.set({1, 0}, cplx(0.6, 0.0));
    state.set({0, 2}, cplx(0.0, 0.8));
    auto state2 = io::decode_fock(io::encode(state));
    REQUIRE(state2.at({1, 0}) == state.at({1, 0}));
    REQUIRE(state2.at({0, 2}) == state.at({0, 2}));
    REQUIRE(state2.cutoff() == state.cutoff());

    auto g = gaussian::evolve_covariance(gaussian::GaussianState::vacuum(2),
                                         gaussian::Squeeze{{cplx(0.2), cplx(0.1, 0.3)}});
    auto g2 = io::decode_gaussian(io::encode(g));
    REQUIRE((g2.covariance - g.covariance).max_abs() < 1e-15);

    heterodyne::SampleBatch batch;
    batch.modes = 2;
    batch.seed = 9;
    for (int i = 0; i < 20; ++i) batch.data.push_back(cplx(i * 0.1, -i * 0.05));
    io::write_samples_csv(batch, "roundtrip.csv");
    auto batch2 = io::read_samples_csv("roundtrip.csv", 2);
    REQUIRE(batch2.count() == batch.count());
    for (size_t i = 0; i < batch.data.size(); ++i) REQUIRE(batch2.data[i] == batch.data[i]);
}

TEST_CASE("cli envelope and exit codes") {
    // unknown verb: exit 2 with usage text
    auto bad = run_cli("definitely-not-a-verb");
    REQUIRE(bad.exit_code == 2);

    // formula verbs produce a result envelope
    auto swap = run_cli("swap-stats --m 8 --overlap-sq 0.5");
    REQUIRE(swap.exit_code == 0);
    json env = json::parse(swap.stdout_text);
    REQUIRE(env.at("verb") == "swap-stats");
    REQUIRE(env.at("result").at("p_accept").get<double>() == Catch::Approx(0.5625));
    REQUIRE(env.contains("inputs_digest"));
    REQUIRE(env.contains("seed"));

    // module errors exit 1
    auto invalid = run_cli("swap-stats --m 1 --overlap-sq 0.5");
    REQUIRE(invalid.exit_code == 1);
}

TEST_CASE("cli sampling determinism and pipelines") {
    // HOM probability through files
    {
        double s = 1.0 / std::sqrt(2.0);
        Matrix h(2, 2, {cplx(s), cplx(s), cplx(s), cplx(-s)});
        std::ofstream out("h.json");
        out << io::encode(h).dump() << "\n";
    }
    auto hom = run_cli("bs-prob --unitary h.json --input 1,1 --output 1,1");
    REQUIRE(hom.exit_code == 0);
    REQUIRE(json::parse(hom.stdout_text).at("result").at("probability").get<double>() ==
            Catch::Approx(0.0).margin(1e-12));

    // same seed, same verb: byte-identical output
    auto first = run_cli("--seed 42 bs-sample --unitary h.json --input 1,1 --count 50");
    auto second = run_cli("--seed 42 bs-sample --unitary h.json --input 1,1 --count 50");
    REQUIRE(first.exit_code == 0);
    REQUIRE(first.stdout_text == second.stdout_text);
    auto third = run_cli("--seed 43 bs-sample --unitary h.json --input 1,1 --count 50");
    REQUIRE(third.stdout_text != first.stdout_text);

    // het-sample writes CSV + sidecar which certify can consume
    {
        fock::FockVector vac = fock::FockVector::vacuum(1, 2);
        std::ofstream out("vac.json");
        out << io::encode(vac).dump() << "\n";
    }
    auto sampled = run_cli("--seed 7 --out vac.csv het-sample --state vac.json --count 20000");
    REQUIRE(sampled.exit_code == 0);
    auto certified = run_cli(
        "certify --samples vac.csv --sidecar vac.csv.json --target vac.json --m 1 --E 2 --s 10 "
        "--eps 0.05 --eps-prime 0.05");
    REQUIRE(certified.exit_code == 0);
    json cert = json::parse(certified.stdout_text);
    REQUIRE(cert.at("result").at("fidelity").get<double>() >= 0.9);

    // sampling without a seed is refused
    auto unseeded = run_cli("bs-sample --unitary h.json --input 1,1 --count 5");
    REQUIRE(unseeded.exit_code == 1);
}

TEST_CASE("cli reproduce recipes") {
    auto fast = run_cli("reproduce --recipe hadamard-m4");
    REQUIRE(fast.exit_code == 0);
    REQUIRE(fast.stdout_text.find("PASS") != std::string::npos);

    auto unknown = run_cli("reproduce --recipe nonsense");
    REQUIRE(unknown.exit_code == 1);
}
