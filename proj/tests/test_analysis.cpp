// SPDX-License-Identifier: Apache-2.0
//
// ddnoma: delay-Doppler link-level simulation library for uplink NOMA
// with mixed-mobility user groups and iterative SIC turbo reception
// Copyright (C) 2026 ddnoma contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>

#include "ddnoma/analysis.hpp"
#include "ddnoma/io.hpp"

using namespace ddnoma;

TEST_CASE("information measure behaves at the extremes", "[exit]")
{
    CHECK(j_function(0.0) == 0.0);
    CHECK(j_function(kJSolverCap) == 1.0);
    double prev = 0.0;
    for (double s : {0.5, 1.0, 2.0, 4.0, 8.0})
    {
        double v = j_function(s);
        CHECK(v > prev);
        prev = v;
    }
    CHECK(j_inverse(0.0) == 0.0);
    for (double target : {0.2, 0.5, 0.8})
        CHECK(j_function(j_inverse(target)) == Catch::Approx(target).margin(1e-5));

    std::vector<std::uint8_t> bits = {0, 1, 0, 1};
    CHECK(estimate_mi({0.0, 0.0, 0.0, 0.0}, bits) == Catch::Approx(0.0).margin(1e-12));
    CHECK(estimate_mi({50.0, -50.0, 50.0, -50.0}, bits) == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("synthetic a-priori knowledge closes the estimator loop", "[exit][oracle]")
{
    Rng rng(3);
    std::vector<std::uint8_t> bits(40000);
    for (auto &b : bits)
        b = std::uint8_t(rng.below(2));

    auto silent = generate_apriori_llrs(bits, 0.0, rng);
    for (double l : silent)
        CHECK(l == 0.0);

    auto certain = generate_apriori_llrs(bits, 1.0, rng);
    int sign_ok = 0;
    for (std::size_t i = 0; i < bits.size(); ++i)
        sign_ok += ((bits[i] == 0) == (certain[i] > 0.0));
    CHECK(double(sign_ok) / bits.size() >= 0.999);

    for (double target : {0.1, 0.3, 0.5, 0.7, 0.9})
    {
        auto llrs = generate_apriori_llrs(bits, target, rng);
        CHECK(estimate_mi(llrs, bits) == Catch::Approx(target).margin(0.02));
    }

    // Gaussian LLRs at sigma = 2 carry J(2) bits
    double sigma = 2.0;
    std::vector<double> llrs(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        llrs[i] = (1.0 - 2.0 * bits[i]) * sigma * sigma / 2.0 + sigma * rng.gaussian();
    CHECK(estimate_mi(llrs, bits) == Catch::Approx(j_function(2.0)).margin(0.02));
}

TEST_CASE("decoder transfer curve saturates and never decreases", "[exit]")
{
    LdpcCode code = LdpcCode::build(256, 3, 6, 5);
    ExitCurve curve = measure_decoder_curve(code, {0.0, 0.25, 0.5, 0.75, 1.0}, 6, 100, 17);
    REQUIRE(curve.samples.size() == 5);
    CHECK(curve.samples.back().second >= 0.99);
    for (std::size_t i = 1; i < curve.samples.size(); ++i)
        CHECK(curve.samples[i].second + 0.02 >= curve.samples[i - 1].second);
    CHECK(curve.at(0.375) >= curve.at(0.125) - 0.02);
}

TEST_CASE("waterfall crossing interpolates on a log scale", "[analysis]")
{
    std::vector<double> snr = {0.0, 1.0, 2.0, 3.0};
    std::vector<double> ber = {1e-1, 1e-2, 1e-4, 1e-6};
    double at = waterfall_crossing(snr, ber, 1e-3);
    CHECK(at == Catch::Approx(1.5).margin(1e-9));
    CHECK(std::isnan(waterfall_crossing(snr, ber, 1e-8)));
}

TEST_CASE("repeated measurements are bit-identical under one seed", "[analysis][slow]")
{
    LinkScenario sc;
    sc.sys.M = 16;
    sc.sys.N = 4;
    sc.sys.U = 1;
    sc.sys.V = 1;
    sc.sys.seed = 77;
    sc.sys.set_energy_ratios(4.0, 5.0);
    sc.turbo.outer_iters = 2;
    LinkRuntime rt = prepare_link(sc);
    GroupStats a = measure_link_ber(sc, rt, 8, 1);
    GroupStats b = measure_link_ber(sc, rt, 8, 1);
    CHECK(a.ber_s == b.ber_s);
    CHECK(a.ber_m == b.ber_m);
    CHECK(a.se_s == b.se_s);
}

TEST_CASE("CSV output format is stable", "[io]")
{
    const char *path = "io_test.tmp.csv";
    {
        CsvWriter w(path, {"a", "b"});
        w.write_row({1.25, 3.0000001e-5});
        w.write_strings({"x", format_number(0.1)});
    }
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "a,b");
    std::getline(in, line);
    CHECK(line == "1.25,3.0000001e-05");
    std::getline(in, line);
    CHECK(line == "x,0.1");
    std::remove(path);
}
