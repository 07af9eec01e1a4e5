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

#include <sstream>

#include "ddnoma/effective_channel.hpp"

using namespace ddnoma;

namespace {

PathSet single_path(cx gain, double delay_s, double doppler_hz)
{
    PathSet set;
    set.mobility = (doppler_hz != 0.0) ? Mobility::mobile : Mobility::stationary;
    set.paths = {{gain, delay_s, doppler_hz}};
    return set;
}

PathSet random_paths(Rng &rng, const SystemConfig &cfg, int count, double max_delay_samples,
                     double max_doppler_bins)
{
    PathSet set;
    set.mobility = (max_doppler_bins != 0.0) ? Mobility::mobile : Mobility::stationary;
    for (int i = 0; i < count; ++i)
    {
        Path p;
        p.gain = rng.cgaussian() / std::sqrt(double(count));
        p.delay_s = rng.uniform(0.0, max_delay_samples) * cfg.sample_interval();
        p.doppler_hz = (max_doppler_bins != 0.0)
                           ? rng.uniform(-max_doppler_bins, max_doppler_bins) * cfg.delta_f / cfg.N
                           : 0.0;
        set.paths.push_back(p);
    }
    return set;
}

} // namespace

TEST_CASE("Doppler window sum matches direct summation and sums to N", "[effective][oracle]")
{
    Rng rng(7);
    for (int n : {4, 8, 32})
    {
        for (int rep = 0; rep < 20; ++rep)
        {
            double beta = rng.uniform(-0.5, 0.5);
            cx total = 0.0;
            for (int q = 0; q < n; ++q)
            {
                cx direct = 0.0;
                for (int i = 0; i < n; ++i)
                    direct += unit_phasor(2.0 * kPi * i * (q + beta) / n);
                cx closed = doppler_window_sum(q, beta, n);
                CHECK(std::abs(closed - direct) < 1e-10);
                total += closed;
            }
            CHECK(std::abs(total - cx(double(n), 0.0)) < 1e-9);
        }
        CHECK(std::abs(doppler_window_sum(0, 0.0, n) - cx(double(n), 0.0)) == 0.0);
        for (int q = 1; q < n; ++q)
            CHECK(std::abs(doppler_window_sum(q, 0.0, n)) < 1e-10);
    }
}

TEST_CASE("trivial mobile channels produce trivial matrices", "[effective]")
{
    SystemConfig cfg;
    cfg.M = 8;
    cfg.N = 4;

    // no delay, no Doppler: identity coupling
    auto ident = build_mobile_matrix(single_path(cx(1.0, 0.0), 0.0, 0.0), cfg);
    arma::cx_mat dense = ident.dense();
    CHECK(arma::abs(dense - arma::eye<arma::cx_mat>(32, 32)).max() < 1e-12);

    // one-sample delay: equals the direct elementwise construction including
    // the per-block wrap phase
    PathSet d1 = single_path(cx(1.0, 0.0), cfg.sample_interval(), 0.0);
    arma::cx_mat brute = stationary_matrix_bruteforce(d1, cfg);
    CHECK(arma::abs(build_mobile_matrix(d1, cfg).dense() - brute).max() < 1e-10);
}

TEST_CASE("block construction agrees with the direct-sum oracle", "[effective][oracle]")
{
    SystemConfig cfg;
    cfg.M = 8;
    cfg.N = 4;
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep)
    {
        PathSet paths = random_paths(rng, cfg, 3, 2.5, 0.0);
        StationaryBlocks blocks = build_stationary_blocks(paths, cfg);
        arma::cx_mat brute = stationary_matrix_bruteforce(paths, cfg);
        for (int k = 0; k < cfg.N; ++k)
        {
            arma::cx_mat sub = brute.submat(k * cfg.M, k * cfg.M, (k + 1) * cfg.M - 1,
                                            (k + 1) * cfg.M - 1);
            CHECK(arma::abs(blocks.blocks[k] - sub).max() < 1e-10);
        }
        // zero-Doppler degenerate mobile build agrees with both
        CHECK(arma::abs(build_mobile_matrix(paths, cfg).dense() - brute).max() < 1e-10);
        // off-block entries of the oracle are zero by construction
        arma::cx_mat off = brute;
        for (int k = 0; k < cfg.N; ++k)
            off.submat(k * cfg.M, k * cfg.M, (k + 1) * cfg.M - 1, (k + 1) * cfg.M - 1).zeros();
        CHECK(arma::abs(off).max() == 0.0);
    }
}

TEST_CASE("single-slot stationary block is circulant", "[effective]")
{
    SystemConfig cfg;
    cfg.M = 6;
    cfg.N = 1;
    Rng rng(13);
    PathSet paths = random_paths(rng, cfg, 2, 1.5, 0.0);
    StationaryBlocks blocks = build_stationary_blocks(paths, cfg);
    const arma::cx_mat &h = blocks.blocks[0];
    for (int r = 0; r < cfg.M; ++r)
        for (int c = 0; c < cfg.M; ++c)
            CHECK(std::abs(h(r, c) - h((r + 1) % cfg.M, (c + 1) % cfg.M)) < 1e-10);

    // flat channel: every block is the identity
    auto flat = build_stationary_blocks(single_path(cx(1.0, 0.0), 0.0, 0.0), cfg);
    CHECK(arma::abs(flat.blocks[0] - arma::eye<arma::cx_mat>(cfg.M, cfg.M)).max() < 1e-12);

    PathSet moving = single_path(cx(1.0, 0.0), 0.0, 100.0);
    CHECK_THROWS_AS(build_stationary_blocks(moving, cfg), std::invalid_argument);
}

TEST_CASE("mobile matrix reproduces the waveform pipeline", "[effective][oracle]")
{
    SystemConfig cfg;
    cfg.M = 8;
    cfg.N = 4;
    Rng rng(17);
    for (int rep = 0; rep < 10; ++rep)
    {
        PathSet paths = random_paths(rng, cfg, 2, 2.0, 0.45);
        SparseChannelMatrix hm = build_mobile_matrix(paths, cfg);
        SampledChannel ch = sample_channel_taps(paths, cfg);
        int l_cp = ch.num_taps + 1;

        arma::cx_mat x(cfg.M, cfg.N);
        for (auto &v : x)
            v = rng.cgaussian();
        arma::cx_vec rx =
            transmit_through(modulate_frame(x, l_cp), ch, l_cp, 0.0, rng);
        arma::cx_vec y = arma::vectorise(demodulate_frame(rx, cfg.M, cfg.N, l_cp));
        arma::cx_vec pred = hm.multiply(arma::vectorise(x));
        CHECK(arma::norm(y - pred) / arma::norm(y) < 1e-6);
    }
}

TEST_CASE("sparse bookkeeping is cross-consistent", "[effective]")
{
    SystemConfig cfg;
    cfg.M = 8;
    cfg.N = 4;
    Rng rng(19);
    PathSet paths = random_paths(rng, cfg, 3, 2.0, 0.4);
    SparseChannelMatrix hm = build_mobile_matrix(paths, cfg);

    std::int64_t row_total = 0, col_total = 0;
    for (int d = 0; d < hm.n_rows(); ++d)
        row_total += std::int64_t(hm.row(d).size());
    for (int c = 0; c < hm.n_cols(); ++c)
        col_total += std::int64_t(hm.col(c).size());
    CHECK(row_total == hm.nnz());
    CHECK(col_total == hm.nnz());

    for (int d = 0; d < hm.n_rows(); ++d)
        for (const auto &[c, v] : hm.row(d))
        {
            bool found = false;
            for (const auto &[r2, v2] : hm.col(c))
                if (r2 == d)
                {
                    found = (v2 == v);
                    break;
                }
            CHECK(found);
        }

    std::ostringstream os;
    hm.write_triplets(os);
    std::string text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == hm.nnz());
}

TEST_CASE("group assembly selects columns and keeps block structure", "[effective]")
{
    SystemConfig cfg;
    cfg.M = 8;
    cfg.N = 4;
    cfg.U = 2;
    cfg.V = 2;
    cfg.P_S = 4.0;
    cfg.P_M = 1.0;
    Rng rng(23);
    ResourceMap map = allocate_resources(cfg);

    std::vector<StationaryBlocks> st;
    std::vector<SparseChannelMatrix> mob;
    for (int u = 0; u < cfg.U; ++u)
        st.push_back(build_stationary_blocks(random_paths(rng, cfg, 2, 2.0, 0.0), cfg));
    for (int v = 0; v < cfg.V; ++v)
        mob.push_back(build_mobile_matrix(random_paths(rng, cfg, 2, 2.0, 0.3), cfg));

    ObnomaChannel ch = assemble_obnoma(st, mob, map, cfg);
    const int frame = cfg.frame_size();
    CHECK(ch.h_s.n_cols() == frame);
    CHECK(ch.h_m.n_cols() == frame);

    // stationary side is block diagonal; block k comes from the user owning
    // Doppler bin k, scaled by sqrt(P_S)
    arma::cx_mat hs = ch.h_s.dense();
    for (int k = 0; k < cfg.N; ++k)
    {
        int owner = (k < map.doppler_sets[0].count) ? 0 : 1;
        arma::cx_mat blk = hs.submat(k * cfg.M, k * cfg.M, (k + 1) * cfg.M - 1,
                                     (k + 1) * cfg.M - 1);
        CHECK(arma::abs(blk - std::sqrt(cfg.P_S) * st[owner].blocks[k]).max() < 1e-12);
        CHECK(arma::abs(ch.h_s_blocks[k] - std::sqrt(cfg.P_S) * st[owner].blocks[k]).max() <
              1e-12);
    }
    arma::cx_mat off = hs;
    for (int k = 0; k < cfg.N; ++k)
        off.submat(k * cfg.M, k * cfg.M, (k + 1) * cfg.M - 1, (k + 1) * cfg.M - 1).zeros();
    CHECK(arma::abs(off).max() == 0.0);

    // ledgers are bijections between columns and (user, symbol) pairs
    for (const ColumnLedger *ledger : {&ch.ledger_s, &ch.ledger_m})
    {
        std::vector<char> seen(frame, 0);
        CHECK(int(ledger->col_owner.size()) == frame);
        for (std::size_t user = 0; user < ledger->user_cols.size(); ++user)
            for (std::size_t s = 0; s < ledger->user_cols[user].size(); ++s)
            {
                int col = ledger->user_cols[user][s];
                CHECK(!seen[col]);
                seen[col] = 1;
                CHECK(ledger->col_owner[col] == std::make_pair(int(user), int(s)));
            }
        CHECK(std::count(seen.begin(), seen.end(), 1) == frame);
    }

    // single user owning everything: matrix passes through unchanged
    SystemConfig solo = cfg;
    solo.U = 1;
    solo.V = 1;
    solo.P_S = 1.0;
    ResourceMap solo_map = allocate_resources(solo);
    auto blocks = build_stationary_blocks(random_paths(rng, solo, 2, 2.0, 0.0), solo);
    ObnomaChannel sch = assemble_obnoma({blocks}, {mob[0]}, solo_map, solo);
    CHECK(arma::abs(sch.h_s.dense() - blocks_to_sparse(blocks).dense()).max() < 1e-12);
}
