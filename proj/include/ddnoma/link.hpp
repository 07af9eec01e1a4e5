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

#ifndef DDNOMA_LINK_HPP
#define DDNOMA_LINK_HPP

#include <memory>
#include <optional>
#include <vector>

#include "channel.hpp"
#include "otfs.hpp"
#include "turbo.hpp"

namespace ddnoma {

// Everything needed to run one coded multi-user frame end to end.
struct LinkScenario
{
    SystemConfig sys;
    ChannelProfile profile_s = typical_urban_profile(Mobility::stationary);
    ChannelProfile profile_m = typical_urban_profile(Mobility::mobile, 1111.0);
    TurboConfig turbo;
    double csi_eps = 0.0; // receiver channel-knowledge error bound
};

inline int cp_length_for(const LinkScenario &sc)
{
    double t_s = sc.sys.sample_interval();
    double worst = std::max(sc.sys.U > 0 ? sc.profile_s.max_delay_s : 0.0,
                            sc.sys.V > 0 ? sc.profile_m.max_delay_s : 0.0);
    return int(std::ceil(worst / t_s)) + kRcSpanSamples;
}

// Per-group code lengths: each user's codeword fills its frame share exactly.
inline int coded_bits_stationary(const SystemConfig &sys)
{
    return sys.U > 0 ? sys.M * (sys.N / sys.U) * sys.bits_per_symbol() : 0;
}
inline int coded_bits_mobile(const SystemConfig &sys)
{
    return sys.V > 0 ? sys.N * (sys.M / sys.V) * sys.bits_per_symbol() : 0;
}

// Immutable per-scenario state shared by all Monte-Carlo trials.
struct LinkRuntime
{
    Alphabet alphabet;
    ResourceMap map;
    std::shared_ptr<LdpcCode> code_s, code_m; // may alias when lengths coincide
    std::vector<UserLink> links;              // stationary users first
    int l_cp = 0;

    const LdpcCode &code_for(int user_index, const SystemConfig &sys) const
    {
        return user_index < sys.U ? *code_s : *code_m;
    }
};

inline LinkRuntime prepare_link(const LinkScenario &sc)
{
    sc.sys.validate();
    LinkRuntime rt;
    rt.alphabet = build_alphabet(sc.sys.Q);
    rt.map = allocate_resources(sc.sys);
    rt.l_cp = cp_length_for(sc);

    int n_s = coded_bits_stationary(sc.sys);
    int n_m = coded_bits_mobile(sc.sys);
    if (n_s > 0)
        rt.code_s = std::make_shared<LdpcCode>(LdpcCode::build(n_s, 3, 6, sc.sys.seed));
    if (n_m > 0)
        rt.code_m = (n_m == n_s && rt.code_s)
                        ? rt.code_s
                        : std::make_shared<LdpcCode>(LdpcCode::build(n_m, 3, 6, sc.sys.seed));

    for (int g = 0; g < sc.sys.U + sc.sys.V; ++g)
    {
        const LdpcCode &code = (g < sc.sys.U) ? *rt.code_s : *rt.code_m;
        rt.links.push_back(
            {&code, Interleaver(code.n(), derive_seed(sc.sys.seed, 1000 + g))});
    }
    return rt;
}

struct TrialOutput
{
    std::vector<std::vector<double>> ber_per_iter; // [outer iter][user]
    std::vector<int> bit_errors_final;             // per user
    std::vector<int> info_bits;                    // per user
    TurboDiagnostics diag;
};

namespace detail {

struct FrameState
{
    std::vector<std::vector<std::uint8_t>> info_bits;  // per user
    std::vector<std::vector<std::uint8_t>> coded_bits; // interleave order (d)
    std::vector<arma::cx_vec> symbols;                 // unit energy, symbol order
    std::vector<PathSet> channels;                     // true channels
    arma::cx_vec received;                             // noisy demodulated frame (vectorized)
    arma::cx_vec true_x_s, true_x_m;                   // retained-column order
};

// Draws data and channels for every user, runs the waveform chain and
// produces the vectorized receive frame.
inline FrameState simulate_frame(const LinkScenario &sc, const LinkRuntime &rt, Rng &data_rng,
                                 Rng &chan_rng, Rng &noise_rng)
{
    const SystemConfig &sys = sc.sys;
    const int users = sys.U + sys.V;
    FrameState fs;
    fs.info_bits.resize(users);
    fs.coded_bits.resize(users);
    fs.symbols.resize(users);
    fs.channels.resize(users);

    arma::cx_vec superposed;
    for (int g = 0; g < users; ++g)
    {
        const bool is_stationary = g < sys.U;
        const LdpcCode &code = rt.code_for(g, sys);

        auto &info = fs.info_bits[g];
        info.resize(code.k());
        for (auto &b : info)
            b = std::uint8_t(data_rng.below(2));
        std::vector<std::uint8_t> cw = code.encode(info);
        fs.coded_bits[g] = rt.links[g].interleaver.apply(cw);
        fs.symbols[g] = modulate_bits(fs.coded_bits[g], rt.alphabet);

        arma::cx_mat grid =
            is_stationary
                ? place_symbols_stationary(fs.symbols[g], rt.map, g, sys.M, sys.N)
                : place_symbols_mobile(fs.symbols[g], rt.map, g - sys.U, sys.M, sys.N);
        grid *= std::sqrt(is_stationary ? sys.P_S : sys.P_M);

        const ChannelProfile &prof = is_stationary ? sc.profile_s : sc.profile_m;
        fs.channels[g] = draw_paths(prof, chan_rng);
        fs.channels[g].owner = g;

        SampledChannel ch = sample_channel_taps(fs.channels[g], sys);
        arma::cx_vec tx = modulate_frame(grid, rt.l_cp);
        arma::cx_vec rx = transmit_through(tx, ch, rt.l_cp, 0.0, noise_rng);
        if (superposed.n_elem == 0)
            superposed = rx;
        else
            superposed += rx;
    }

    add_awgn(superposed, sys.noise_var, noise_rng);
    fs.received = arma::vectorise(demodulate_frame(superposed, sys.M, sys.N, rt.l_cp));
    return fs;
}

// Receiver-side channel matrices from (possibly perturbed) path knowledge.
inline ObnomaChannel build_receiver_channel(const LinkScenario &sc, const LinkRuntime &rt,
                                            const std::vector<PathSet> &true_channels,
                                            Rng &csi_rng)
{
    const SystemConfig &sys = sc.sys;
    std::vector<StationaryBlocks> st;
    std::vector<SparseChannelMatrix> mob;
    for (int g = 0; g < sys.U + sys.V; ++g)
    {
        PathSet knowledge = (sc.csi_eps > 0.0)
                                ? perturb_csi(true_channels[g], sc.csi_eps, csi_rng)
                                : true_channels[g];
        if (g < sys.U)
            st.push_back(build_stationary_blocks(knowledge, sys));
        else
            mob.push_back(build_mobile_matrix(knowledge, sys));
    }
    return assemble_obnoma(st, mob, rt.map, sys);
}

inline void fill_true_symbol_vectors(const LinkRuntime &rt, const ObnomaChannel &ch,
                                     const SystemConfig &sys, FrameState &fs)
{
    fs.true_x_s.set_size(ch.h_s.n_cols());
    fs.true_x_m.set_size(ch.h_m.n_cols());
    for (int g = 0; g < sys.U + sys.V; ++g)
    {
        const bool is_stationary = g < sys.U;
        const ColumnLedger &ledger = is_stationary ? ch.ledger_s : ch.ledger_m;
        const auto &cols = ledger.user_cols[is_stationary ? g : g - sys.U];
        for (std::size_t s = 0; s < cols.size(); ++s)
            (is_stationary ? fs.true_x_s : fs.true_x_m)[cols[s]] = fs.symbols[g][s];
    }
}

} // namespace detail

// One independent coded frame through the complete chain. All randomness is
// derived from trial_seed, so a trial is reproducible in isolation.
inline TrialOutput run_link_trial(const LinkScenario &sc, const LinkRuntime &rt,
                                  std::uint64_t trial_seed,
                                  const TurboObserver &observer = {})
{
    Rng data_rng(derive_seed(trial_seed, 1));
    Rng chan_rng(derive_seed(trial_seed, 2));
    Rng noise_rng(derive_seed(trial_seed, 3));
    Rng csi_rng(derive_seed(trial_seed, 4));

    detail::FrameState fs = detail::simulate_frame(sc, rt, data_rng, chan_rng, noise_rng);
    ObnomaChannel ch = detail::build_receiver_channel(sc, rt, fs.channels, csi_rng);
    detail::fill_true_symbol_vectors(rt, ch, sc.sys, fs);

    SicInput in;
    in.y = fs.received;
    in.channel = &ch;
    in.noise_var = sc.sys.noise_var;
    in.alphabet = &rt.alphabet;
    in.true_x_s = fs.true_x_s;
    in.true_x_m = fs.true_x_m;

    TurboResult res = run_turbo(in, rt.links, sc.turbo, &fs.info_bits, observer);

    TrialOutput out;
    out.ber_per_iter = res.diag.ber_per_iter;
    out.diag = std::move(res.diag);
    const int users = sc.sys.U + sc.sys.V;
    out.bit_errors_final.resize(users);
    out.info_bits.resize(users);
    for (int g = 0; g < users; ++g)
    {
        int errors = 0;
        for (std::size_t i = 0; i < fs.info_bits[g].size(); ++i)
            errors += (res.decoded_info[g][i] != fs.info_bits[g][i]);
        out.bit_errors_final[g] = errors;
        out.info_bits[g] = int(fs.info_bits[g].size());
    }
    return out;
}

} // namespace ddnoma

#endif
