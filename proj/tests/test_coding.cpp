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

#include <set>
#include <sstream>

#include "ddnoma/interleave.hpp"
#include "ddnoma/ldpc.hpp"

using namespace ddnoma;

namespace {

bool has_four_cycle(const ParityMatrix &h)
{
    // two columns sharing two checks close a length-4 cycle
    std::set<std::pair<int, int>> pairs;
    for (int v = 0; v < h.n; ++v)
    {
        const auto &cs = h.cols[v];
        for (std::size_t i = 0; i < cs.size(); ++i)
            for (std::size_t j = i + 1; j < cs.size(); ++j)
            {
                auto key = std::minmax(cs[i], cs[j]);
                if (!pairs.emplace(key.first, key.second).second)
                    return true;
            }
    }
    return false;
}

} // namespace

TEST_CASE("progressive edge growth keeps the degree plan", "[ldpc]")
{
    Rng rng(5);
    ParityMatrix h = peg_construct(8, 3, 6, rng);
    CHECK(h.m == 4);
    for (const auto &col : h.cols)
        CHECK(col.size() == 3);
    std::size_t edges = 0;
    for (const auto &row : h.rows)
        edges += row.size();
    CHECK(edges == 24);

    Rng r1(9), r2(9);
    ParityMatrix a = peg_construct(64, 3, 6, r1);
    ParityMatrix b = peg_construct(64, 3, 6, r2);
    CHECK(a.rows == b.rows);

    CHECK_THROWS_AS(peg_construct(9, 3, 6, rng), std::invalid_argument);
}

TEST_CASE("length-512 graph reaches girth six", "[ldpc][oracle]")
{
    Rng rng(2);
    ParityMatrix h = peg_construct(512, 3, 6, rng);
    CHECK(!has_four_cycle(h));
}

TEST_CASE("systematic encoding satisfies every parity check", "[ldpc]")
{
    LdpcCode code = LdpcCode::build(512, 3, 6, 31);
    CHECK(code.k() == 256); // rate one half

    std::vector<std::uint8_t> zero(code.k(), 0);
    auto zero_cw = code.encode(zero);
    CHECK(std::count(zero_cw.begin(), zero_cw.end(), 0) == code.n());

    Rng rng(33);
    for (int rep = 0; rep < 20; ++rep)
    {
        std::vector<std::uint8_t> info(code.k());
        for (auto &b : info)
            b = std::uint8_t(rng.below(2));
        auto cw = code.encode(info);
        CHECK(code.parity().syndrome_ok(cw));
        CHECK(code.extract_info(cw) == info);
    }
}

TEST_CASE("belief propagation decodes and reports extrinsics", "[ldpc]")
{
    LdpcCode code = LdpcCode::build(512, 3, 6, 41);
    Rng rng(43);
    std::vector<std::uint8_t> info(code.k());
    for (auto &b : info)
        b = std::uint8_t(rng.below(2));
    auto cw = code.encode(info);

    // strong clean input stays fixed; extrinsic = posterior - input
    std::vector<double> llr(code.n());
    for (int i = 0; i < code.n(); ++i)
        llr[i] = cw[i] ? -9.0 : 9.0;
    DecodeResult res = code.decode(llr);
    CHECK(res.converged);
    CHECK(res.hard == cw);
    for (int i = 0; i < code.n(); ++i)
    {
        CHECK(std::isfinite(res.extrinsic[i]));
        if (std::abs(res.posterior[i] - llr[i]) < kLlrClamp)
            CHECK(res.extrinsic[i] == Catch::Approx(res.posterior[i] - llr[i]).margin(1e-9));
    }

    // two flipped bits of the all-zero codeword are corrected
    int corrected = 0;
    const int trials = 100;
    for (int t = 0; t < trials; ++t)
    {
        std::vector<double> l(code.n(), 5.0);
        int i = int(rng.below(code.n())), j = int(rng.below(code.n()));
        while (j == i)
            j = int(rng.below(code.n()));
        l[i] = -5.0;
        l[j] = -5.0;
        DecodeResult r = code.decode(l);
        corrected += (r.converged && std::count(r.hard.begin(), r.hard.end(), 1) == 0);
    }
    CHECK(corrected == trials);
}

TEST_CASE("alist serialization carries the degree tables", "[ldpc]")
{
    Rng rng(6);
    ParityMatrix h = peg_construct(16, 3, 6, rng);
    std::ostringstream os;
    write_alist(h, os);
    std::istringstream is(os.str());
    int n, m, maxc, maxr;
    is >> n >> m >> maxc >> maxr;
    CHECK(n == 16);
    CHECK(m == 8);
    CHECK(maxc == 3);
    CHECK(maxr == 6);
}

TEST_CASE("interleaving is a seeded bijection", "[interleave]")
{
    std::vector<int> one = {42};
    CHECK(interleave(one, 7) == one);

    Rng rng(8);
    std::vector<int> data(257);
    for (auto &v : data)
        v = int(rng.next_u64() & 0xffff);
    Interleaver il(data.size(), 123);
    CHECK(il.invert(il.apply(data)) == data);

    CHECK(make_permutation(2048, 1) != make_permutation(2048, 2));
}

TEST_CASE("pmf-to-LLR demapping matches direct enumeration", "[softbits][oracle]")
{
    Alphabet a = build_alphabet(4);

    PmfMat uniform = uniform_pmfs(4, 3);
    for (double l : demap_llr(uniform, a))
        CHECK(l == 0.0);

    // point mass on the symbol labeled (bit0=0, bit1=1)
    PmfMat point(4, 1, arma::fill::zeros);
    point(2, 0) = 1.0; // label 0b10
    auto llrs = demap_llr(point, a);
    CHECK(llrs[0] == kLlrClamp);
    CHECK(llrs[1] == -kLlrClamp);

    Rng rng(11);
    PmfMat pmfs(4, 5);
    for (arma::uword c = 0; c < pmfs.n_cols; ++c)
    {
        arma::vec p(4);
        for (auto &x : p)
            x = rng.uniform() + 1e-3;
        pmfs.col(c) = p / arma::accu(p);
    }
    auto got = demap_llr(pmfs, a);
    for (arma::uword c = 0; c < pmfs.n_cols; ++c)
        for (int j = 0; j < 2; ++j)
        {
            double p0 = 0.0, p1 = 0.0;
            for (int x = 0; x < 4; ++x)
                (a.bit_of(x, j) ? p1 : p0) += pmfs(x, c);
            CHECK(got[c * 2 + j] == Catch::Approx(std::log(p0 / p1)).margin(1e-12));
        }
}

TEST_CASE("LLR-to-pmf mapping round-trips for Gray QPSK", "[softbits][oracle]")
{
    Alphabet a = build_alphabet(4);

    auto uniform = map_pmf({0.0, 0.0}, a);
    for (int x = 0; x < 4; ++x)
        CHECK(uniform(x, 0) == Catch::Approx(0.25).margin(1e-12));

    // Gray labeling makes the two bits independent: demap(map(L)) = L
    Rng rng(13);
    for (int rep = 0; rep < 50; ++rep)
    {
        std::vector<double> llrs = {rng.uniform(-8.0, 8.0), rng.uniform(-8.0, 8.0)};
        auto back = demap_llr(map_pmf(llrs, a), a);
        CHECK(back[0] == Catch::Approx(llrs[0]).margin(1e-9));
        CHECK(back[1] == Catch::Approx(llrs[1]).margin(1e-9));
    }

    // an overwhelming positive LLR leaves mass only on bit-0 symbols
    auto pinned = map_pmf({60.0, 0.0}, a);
    for (int x = 0; x < 4; ++x)
        if (a.bit_of(x, 0))
            CHECK(pinned(x, 0) < 1e-20);
    CHECK(arma::accu(pinned.col(0)) == Catch::Approx(1.0).margin(1e-12));
}
