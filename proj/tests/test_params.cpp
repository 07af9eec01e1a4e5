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

#include <fstream>

#include "ddnoma/alphabet.hpp"
#include "ddnoma/resources.hpp"

using namespace ddnoma;

TEST_CASE("QPSK constellation follows the documented labeling", "[alphabet]")
{
    Alphabet a = build_alphabet(4);
    const double s = 1.0 / std::sqrt(2.0);
    CHECK(std::abs(a.points[0] - cx(s, s)) < 1e-15); // label (0,0)
    for (int x = 0; x < 4; ++x)
    {
        CHECK(std::abs(std::abs(a.points[x].real()) - s) < 1e-15);
        CHECK(std::abs(std::abs(a.points[x].imag()) - s) < 1e-15);
    }
    CHECK(std::abs(arma::mean(arma::square(arma::abs(a.points))) - 1.0) < 1e-12);
}

TEST_CASE("16-QAM is Gray labeled along both axes", "[alphabet]")
{
    Alphabet a = build_alphabet(16);
    CHECK(std::abs(arma::mean(arma::square(arma::abs(a.points))) - 1.0) < 1e-12);

    // exhaustive check: points adjacent along one axis differ in exactly one
    // label bit
    const double step = 2.0 / std::sqrt(10.0);
    int adjacent_pairs = 0;
    for (int p = 0; p < 16; ++p)
        for (int q = p + 1; q < 16; ++q)
        {
            cx d = a.points[p] - a.points[q];
            bool adj = (std::abs(d.real()) < 1e-9 && std::abs(std::abs(d.imag()) - step) < 1e-9) ||
                       (std::abs(d.imag()) < 1e-9 && std::abs(std::abs(d.real()) - step) < 1e-9);
            if (!adj)
                continue;
            ++adjacent_pairs;
            int diff = p ^ q;
            CHECK(__builtin_popcount(unsigned(diff)) == 1);
        }
    CHECK(adjacent_pairs == 24); // 2 axes * 3 transitions * 4 lines

    // labels form a bijection by construction (index == label)
    CHECK(a.points.n_elem == 16);
    CHECK_THROWS_AS(build_alphabet(8), ConfigError);
}

TEST_CASE("equal allocation splits both axes into contiguous blocks", "[resources]")
{
    SystemConfig cfg;
    cfg.M = 128;
    cfg.N = 32;
    cfg.U = 4;
    cfg.V = 4;
    ResourceMap map = allocate_resources(cfg);
    REQUIRE(map.doppler_sets.size() == 4);
    CHECK(map.doppler_sets[0].bins() == std::vector<int>{0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(map.doppler_sets[3].first == 24);
    CHECK(map.doppler_sets[3].count == 8);
    REQUIRE(map.delay_sets.size() == 4);
    CHECK(map.delay_sets[0].first == 0);
    CHECK(map.delay_sets[0].count == 32);

    SystemConfig single;
    single.M = 4;
    single.N = 4;
    single.U = 1;
    single.V = 1;
    ResourceMap one = allocate_resources(single);
    CHECK(one.doppler_sets[0].bins() == std::vector<int>{0, 1, 2, 3});

    SystemConfig bad = cfg;
    bad.U = 5; // does not divide N = 32
    CHECK_THROWS_AS(allocate_resources(bad), ConfigError);
}

TEST_CASE("resource sets partition their axes", "[resources]")
{
    for (auto [m, n, u, v] : {std::tuple{32, 8, 2, 2}, {16, 4, 4, 4}, {8, 8, 1, 2}})
    {
        SystemConfig cfg;
        cfg.M = m;
        cfg.N = n;
        cfg.U = u;
        cfg.V = v;
        ResourceMap map = allocate_resources(cfg);
        std::vector<char> dop(n, 0), del(m, 0);
        for (const auto &r : map.doppler_sets)
            for (int b : r.bins())
            {
                CHECK(!dop[b]);
                dop[b] = 1;
            }
        for (const auto &r : map.delay_sets)
            for (int b : r.bins())
            {
                CHECK(!del[b]);
                del[b] = 1;
            }
        CHECK(std::count(dop.begin(), dop.end(), 1) == n);
        CHECK(std::count(del.begin(), del.end(), 1) == m);
    }
}

TEST_CASE("placement follows the documented ordering and inverts", "[resources]")
{
    SystemConfig cfg;
    cfg.M = 2;
    cfg.N = 2;
    cfg.U = 1;
    cfg.V = 1;
    ResourceMap map = allocate_resources(cfg);

    arma::cx_vec syms = {cx(1, 0), cx(2, 0), cx(3, 0), cx(4, 0)};
    arma::cx_mat grid = place_symbols_stationary(syms, map, 0, 2, 2);
    // symbol k_u*M + l sits at grid(l, k)
    CHECK(grid(0, 0) == cx(1, 0));
    CHECK(grid(1, 0) == cx(2, 0));
    CHECK(grid(0, 1) == cx(3, 0));
    CHECK(grid(1, 1) == cx(4, 0));

    arma::cx_mat gm = place_symbols_mobile(syms, map, 0, 2, 2);
    CHECK(gm(0, 0) == cx(1, 0)); // symbol l_v*N + k at grid(l, k)
    CHECK(gm(0, 1) == cx(2, 0));
    CHECK(gm(1, 0) == cx(3, 0));
    CHECK(gm(1, 1) == cx(4, 0));

    CHECK_THROWS_AS(place_symbols_stationary(arma::cx_vec(3), map, 0, 2, 2),
                    std::invalid_argument);
}

TEST_CASE("extract is the inverse of place and supports cover the frame", "[resources]")
{
    Rng rng(99);
    SystemConfig cfg;
    cfg.M = 12;
    cfg.N = 6;
    cfg.U = 3;
    cfg.V = 4;
    ResourceMap map = allocate_resources(cfg);
    Alphabet a = build_alphabet(4);

    arma::cx_mat total_s(cfg.M, cfg.N, arma::fill::zeros);
    arma::cx_mat total_m(cfg.M, cfg.N, arma::fill::zeros);
    for (int u = 0; u < cfg.U; ++u)
    {
        arma::cx_vec syms(cfg.M * map.doppler_sets[u].count);
        for (auto &v : syms)
            v = a.points[rng.below(a.q)];
        arma::cx_mat grid = place_symbols_stationary(syms, map, u, cfg.M, cfg.N);
        CHECK(arma::norm(extract_symbols_stationary(grid, map, u) - syms) == 0.0);
        total_s += grid;
    }
    for (int v = 0; v < cfg.V; ++v)
    {
        arma::cx_vec syms(cfg.N * map.delay_sets[v].count);
        for (auto &s : syms)
            s = a.points[rng.below(a.q)];
        arma::cx_mat grid = place_symbols_mobile(syms, map, v, cfg.M, cfg.N);
        CHECK(arma::norm(extract_symbols_mobile(grid, map, v) - syms) == 0.0);
        total_m += grid;
    }
    CHECK(arma::accu(arma::abs(total_s) > 0) == cfg.M * cfg.N);
    CHECK(arma::accu(arma::abs(total_m) > 0) == cfg.M * cfg.N);
}

TEST_CASE("config files parse with comments and overrides", "[config]")
{
    const char *path = "test_config.tmp";
    {
        std::ofstream f(path);
        f << "# frame geometry\nM = 16\nN = 4\nQ = 16\nU = 2\nV = 2\n"
          << "rolloff = 0.25 # RRC\nseed = 77\n";
    }
    SystemConfig cfg = load_config_file(path);
    CHECK(cfg.M == 16);
    CHECK(cfg.N == 4);
    CHECK(cfg.Q == 16);
    CHECK(cfg.rolloff == 0.25);
    CHECK(cfg.seed == 77);
    apply_config_entry(cfg, "P_S", "2.5");
    CHECK(cfg.P_S == 2.5);
    CHECK_THROWS_AS(apply_config_entry(cfg, "bogus", "1"), ConfigError);
    std::remove(path);

    SystemConfig bad;
    bad.Q = 7;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
    bad = SystemConfig{};
    bad.rolloff = 1.5;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("bit energies derive from symbol energies and code rate", "[config]")
{
    SystemConfig cfg;
    cfg.Q = 4;
    cfg.code_rate = 0.5;
    cfg.noise_var = 1.0;
    cfg.set_energy_ratios(3.0, 5.0);
    CHECK(cfg.bit_energy_mobile() == Catch::Approx(db_to_linear(3.0)));
    CHECK(cfg.P_S / cfg.P_M == Catch::Approx(db_to_linear(5.0)));
}
