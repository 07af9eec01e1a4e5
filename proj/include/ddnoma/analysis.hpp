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

#ifndef DDNOMA_ANALYSIS_HPP
#define DDNOMA_ANALYSIS_HPP

#include <numeric>
#include <vector>

#include "exit_chart.hpp"
#include "link.hpp"

namespace ddnoma {

// ---------------------------------------------------------------------------
// BER measurement
// ---------------------------------------------------------------------------

struct GroupStats
{
    double ber_s = 0.0, se_s = 0.0;
    double ber_m = 0.0, se_m = 0.0;
    std::vector<double> iter_ber_s, iter_se_s; // per outer iteration
    std::vector<double> iter_ber_m, iter_se_m;
    int trials = 0;
};

namespace detail {

inline void mean_se(const std::vector<double> &xs, double &mean, double &se)
{
    const double t = double(xs.size());
    mean = std::accumulate(xs.begin(), xs.end(), 0.0) / t;
    double var = 0.0;
    for (double x : xs)
        var += (x - mean) * (x - mean);
    var /= std::max(1.0, t - 1.0);
    se = std::sqrt(var / t);
}

inline double group_mean(const std::vector<double> &per_user, int first, int count)
{
    if (count == 0)
        return 0.0;
    double acc = 0.0;
    for (int g = first; g < first + count; ++g)
        acc += per_user[g];
    return acc / count;
}

} // namespace detail

// Averaged BER over independent trials; trial seeds derive from the scenario
// seed, so results are reproducible and invariant to the thread count.
inline GroupStats measure_link_ber(const LinkScenario &sc, const LinkRuntime &rt, int trials,
                                   int threads = 1)
{
    const int iters = sc.turbo.outer_iters;
    std::vector<std::vector<double>> trial_s(iters, std::vector<double>(trials));
    std::vector<std::vector<double>> trial_m(iters, std::vector<double>(trials));

    parallel_for(trials, threads, [&](int trial) {
        TrialOutput out =
            run_link_trial(sc, rt, derive_seed(sc.sys.seed, 0xB0000 + trial));
        for (int t = 0; t < iters; ++t)
        {
            trial_s[t][trial] = detail::group_mean(out.ber_per_iter[t], 0, sc.sys.U);
            trial_m[t][trial] = detail::group_mean(out.ber_per_iter[t], sc.sys.U, sc.sys.V);
        }
    });

    GroupStats st;
    st.trials = trials;
    st.iter_ber_s.resize(iters);
    st.iter_se_s.resize(iters);
    st.iter_ber_m.resize(iters);
    st.iter_se_m.resize(iters);
    for (int t = 0; t < iters; ++t)
    {
        detail::mean_se(trial_s[t], st.iter_ber_s[t], st.iter_se_s[t]);
        detail::mean_se(trial_m[t], st.iter_ber_m[t], st.iter_se_m[t]);
    }
    st.ber_s = st.iter_ber_s.back();
    st.se_s = st.iter_se_s.back();
    st.ber_m = st.iter_ber_m.back();
    st.se_m = st.iter_se_m.back();
    return st;
}

// SNR (dB) where a BER curve crosses the given level, by log-linear
// interpolation between grid points; NaN when the curve never brackets it.
inline double waterfall_crossing(const std::vector<double> &snr_db,
                                 const std::vector<double> &ber, double level)
{
    for (std::size_t i = 1; i < snr_db.size(); ++i)
    {
        double b0 = ber[i - 1], b1 = ber[i];
        if ((b0 >= level && b1 <= level) || (b0 <= level && b1 >= level))
        {
            if (b0 == b1)
                return snr_db[i - 1];
            double l0 = std::log10(std::max(b0, 1e-12));
            double l1 = std::log10(std::max(b1, 1e-12));
            double lt = std::log10(level);
            double w = (lt - l0) / (l1 - l0);
            return snr_db[i - 1] + w * (snr_db[i] - snr_db[i - 1]);
        }
    }
    return std::nan("");
}

// ---------------------------------------------------------------------------
// EXIT analysis
// ---------------------------------------------------------------------------

struct ExitTrajectoryStep
{
    double det_in = 0.0;   // a-priori MI entering the detector (own group)
    double det_out = 0.0;  // measured extrinsic MI leaving the detector
    double dec_out = 0.0;  // measured extrinsic MI leaving the decoder
    double cross_in = 0.0; // a-priori MI of the other group at this iteration
};

struct ExitAnalysis
{
    std::vector<ExitCurve> detector_s; // one curve per fixed mobile a-priori MI
    std::vector<ExitCurve> detector_m; // one curve per fixed stationary a-priori MI
    ExitCurve decoder_s, decoder_m;
    std::vector<ExitTrajectoryStep> traj_s, traj_m;
};

// Transfer measurements pool LLRs over several frames. Desk-scale frames do
// not self-average across channel draws, so charts are conditioned on one
// channel realization by default (fresh data and noise per frame).
struct ExitMeasureOptions
{
    bool fix_channel = true;
    std::uint64_t channel_seed = 0xC4A2;
};

// Measures one SIC-detector transfer point: synthetic a-priori knowledge at
// the requested MIs for both groups, one detector pass, extrinsic MI out.
inline std::pair<double, double> measure_detector_transfer(const LinkScenario &sc,
                                                           const LinkRuntime &rt, double mi_s,
                                                           double mi_m, int frames,
                                                           std::uint64_t seed,
                                                           const ExitMeasureOptions &mo = {})
{
    std::vector<double> pool_llr_s, pool_llr_m;
    std::vector<std::uint8_t> pool_bit_s, pool_bit_m;

    for (int f = 0; f < frames; ++f)
    {
        std::uint64_t fseed = derive_seed(seed, f);
        std::uint64_t cseed = mo.fix_channel ? derive_seed(mo.channel_seed, 2) : derive_seed(fseed, 2);
        Rng data_rng(derive_seed(fseed, 1)), chan_rng(cseed),
            noise_rng(derive_seed(fseed, 3)), csi_rng(derive_seed(fseed, 4)),
            prior_rng(derive_seed(fseed, 5));

        detail::FrameState fs = detail::simulate_frame(sc, rt, data_rng, chan_rng, noise_rng);
        ObnomaChannel ch = detail::build_receiver_channel(sc, rt, fs.channels, csi_rng);
        detail::fill_true_symbol_vectors(rt, ch, sc.sys, fs);

        PmfMat priors_s = uniform_pmfs(rt.alphabet.q, ch.h_s.n_cols());
        PmfMat priors_m = uniform_pmfs(rt.alphabet.q, ch.h_m.n_cols());
        for (int g = 0; g < sc.sys.U + sc.sys.V; ++g)
        {
            const bool is_stationary = g < sc.sys.U;
            auto llrs = generate_apriori_llrs(fs.coded_bits[g],
                                              is_stationary ? mi_s : mi_m, prior_rng);
            PmfMat up = map_pmf(llrs, rt.alphabet);
            if (is_stationary)
                scatter_user_pmfs(priors_s, ch.ledger_s, g, up);
            else
                scatter_user_pmfs(priors_m, ch.ledger_m, g - sc.sys.U, up);
        }

        SicInput in;
        in.y = fs.received;
        in.channel = &ch;
        in.noise_var = sc.sys.noise_var;
        in.alphabet = &rt.alphabet;
        in.true_x_s = fs.true_x_s;
        in.true_x_m = fs.true_x_m;
        SicPass pass = sic_detector_pass(in, priors_s, priors_m, sc.turbo);

        for (int g = 0; g < sc.sys.U + sc.sys.V; ++g)
        {
            const bool is_stationary = g < sc.sys.U;
            const ColumnLedger &ledger = is_stationary ? ch.ledger_s : ch.ledger_m;
            const DetectorOutput &det = is_stationary ? pass.stationary : pass.mobile;
            PmfMat ext = gather_user_pmfs(det.extrinsic, ledger, is_stationary ? g : g - sc.sys.U);
            auto llrs = demap_llr(ext, rt.alphabet);
            auto &pool_llr = is_stationary ? pool_llr_s : pool_llr_m;
            auto &pool_bit = is_stationary ? pool_bit_s : pool_bit_m;
            pool_llr.insert(pool_llr.end(), llrs.begin(), llrs.end());
            pool_bit.insert(pool_bit.end(), fs.coded_bits[g].begin(), fs.coded_bits[g].end());
        }
    }
    double out_s = pool_bit_s.empty() ? 0.0 : estimate_mi(pool_llr_s, pool_bit_s);
    double out_m = pool_bit_m.empty() ? 0.0 : estimate_mi(pool_llr_m, pool_bit_m);
    return {out_s, out_m};
}

// Decoder transfer curve: extrinsic MI out of belief propagation for a-priori
// LLRs of prescribed MI on random codewords.
inline ExitCurve measure_decoder_curve(const LdpcCode &code, const std::vector<double> &grid,
                                       int words, int bp_iters, std::uint64_t seed)
{
    ExitCurve curve;
    curve.kind = "decoder";
    Rng rng(seed);
    for (double mi_in : grid)
    {
        std::vector<double> pool_llr;
        std::vector<std::uint8_t> pool_bit;
        for (int w = 0; w < words; ++w)
        {
            std::vector<std::uint8_t> info(code.k());
            for (auto &b : info)
                b = std::uint8_t(rng.below(2));
            auto cw = code.encode(info);
            auto llrs = generate_apriori_llrs(cw, mi_in, rng);
            DecodeResult dec = code.decode(llrs, bp_iters);
            pool_llr.insert(pool_llr.end(), dec.extrinsic.begin(), dec.extrinsic.end());
            pool_bit.insert(pool_bit.end(), cw.begin(), cw.end());
        }
        curve.samples.emplace_back(mi_in, estimate_mi(pool_llr, pool_bit));
    }
    return curve;
}

// Turbo trajectory at the operating point: measured a-priori/extrinsic MI per
// outer iteration for both groups, pooled over several frames.
inline void measure_trajectory(const LinkScenario &sc, const LinkRuntime &rt, int frames,
                               std::uint64_t seed, std::vector<ExitTrajectoryStep> &traj_s,
                               std::vector<ExitTrajectoryStep> &traj_m,
                               const ExitMeasureOptions &mo = {})
{
    const int iters = sc.turbo.outer_iters;
    const int users = sc.sys.U + sc.sys.V;
    struct Pool
    {
        std::vector<double> det_llr, dec_llr;
        std::vector<std::uint8_t> det_bit, dec_bit;
    };
    std::vector<Pool> pool_s(iters), pool_m(iters);

    for (int f = 0; f < frames; ++f)
    {
        std::uint64_t fseed = derive_seed(seed, 0xE0000 + f);
        std::uint64_t cseed = mo.fix_channel ? derive_seed(mo.channel_seed, 2) : derive_seed(fseed, 2);
        Rng data_rng(derive_seed(fseed, 1)), chan_rng(cseed),
            noise_rng(derive_seed(fseed, 3)), csi_rng(derive_seed(fseed, 4));

        detail::FrameState fs = detail::simulate_frame(sc, rt, data_rng, chan_rng, noise_rng);
        ObnomaChannel ch = detail::build_receiver_channel(sc, rt, fs.channels, csi_rng);
        detail::fill_true_symbol_vectors(rt, ch, sc.sys, fs);

        std::vector<std::vector<std::uint8_t>> codewords(users);
        for (int g = 0; g < users; ++g)
            codewords[g] = rt.links[g].interleaver.invert(fs.coded_bits[g]);

        SicInput in;
        in.y = fs.received;
        in.channel = &ch;
        in.noise_var = sc.sys.noise_var;
        in.alphabet = &rt.alphabet;
        in.true_x_s = fs.true_x_s;
        in.true_x_m = fs.true_x_m;

        auto observer = [&](int iter, int g, const std::vector<double> &det_ext,
                            const std::vector<double> &dec_ext) {
            const bool is_stationary = g < sc.sys.U;
            Pool &p = (is_stationary ? pool_s : pool_m)[iter];
            p.det_llr.insert(p.det_llr.end(), det_ext.begin(), det_ext.end());
            p.det_bit.insert(p.det_bit.end(), fs.coded_bits[g].begin(), fs.coded_bits[g].end());
            p.dec_llr.insert(p.dec_llr.end(), dec_ext.begin(), dec_ext.end());
            p.dec_bit.insert(p.dec_bit.end(), codewords[g].begin(), codewords[g].end());
        };
        run_turbo(in, rt.links, sc.turbo, &fs.info_bits, observer);
    }

    traj_s.assign(iters, {});
    traj_m.assign(iters, {});
    for (int t = 0; t < iters; ++t)
    {
        traj_s[t].det_out = estimate_mi(pool_s[t].det_llr, pool_s[t].det_bit);
        traj_s[t].dec_out = estimate_mi(pool_s[t].dec_llr, pool_s[t].dec_bit);
        traj_m[t].det_out = estimate_mi(pool_m[t].det_llr, pool_m[t].det_bit);
        traj_m[t].dec_out = estimate_mi(pool_m[t].dec_llr, pool_m[t].dec_bit);
        traj_s[t].det_in = (t == 0) ? 0.0 : traj_s[t - 1].dec_out;
        traj_m[t].det_in = (t == 0) ? 0.0 : traj_m[t - 1].dec_out;
        traj_s[t].cross_in = (t == 0) ? 0.0 : traj_m[t - 1].dec_out;
        traj_m[t].cross_in = (t == 0) ? 0.0 : traj_s[t - 1].dec_out;
    }
}

struct ExitParams
{
    std::vector<double> input_grid = {0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0};
    std::vector<double> fixed_cross = {0.0, 0.5, 1.0};
    int frames_per_point = 4;
    int trajectory_frames = 6;
    int decoder_words = 8;
};

inline ExitAnalysis exit_chart_analysis(const LinkScenario &sc, const LinkRuntime &rt,
                                        const ExitParams &prm)
{
    ExitAnalysis out;
    std::uint64_t seed = derive_seed(sc.sys.seed, 0xE817);

    for (double cross : prm.fixed_cross)
    {
        ExitCurve cs, cm;
        cs.kind = "detector-stationary";
        cs.fixed_cross_mi = cross;
        cm.kind = "detector-mobile";
        cm.fixed_cross_mi = cross;
        for (double mi : prm.input_grid)
        {
            auto [es, _unused] = measure_detector_transfer(sc, rt, mi, cross,
                                                           prm.frames_per_point, seed);
            (void)_unused;
            cs.samples.emplace_back(mi, es);
            auto [_unused2, em] = measure_detector_transfer(sc, rt, cross, mi,
                                                            prm.frames_per_point, seed);
            (void)_unused2;
            cm.samples.emplace_back(mi, em);
        }
        out.detector_s.push_back(std::move(cs));
        out.detector_m.push_back(std::move(cm));
    }

    if (rt.code_s)
        out.decoder_s = measure_decoder_curve(*rt.code_s, prm.input_grid, prm.decoder_words,
                                              sc.turbo.bp_max_iter, derive_seed(seed, 11));
    if (rt.code_m)
        out.decoder_m = (rt.code_m == rt.code_s)
                            ? out.decoder_s
                            : measure_decoder_curve(*rt.code_m, prm.input_grid,
                                                    prm.decoder_words, sc.turbo.bp_max_iter,
                                                    derive_seed(seed, 12));
    out.decoder_s.kind = out.decoder_m.kind = "decoder";

    measure_trajectory(sc, rt, prm.trajectory_frames, seed, out.traj_s, out.traj_m);
    return out;
}

} // namespace ddnoma

#endif
