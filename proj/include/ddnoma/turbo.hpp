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

#ifndef DDNOMA_TURBO_HPP
#define DDNOMA_TURBO_HPP

#include <functional>
#include <vector>

#include "detectors.hpp"
#include "interleave.hpp"
#include "ldpc.hpp"

namespace ddnoma {

struct TurboConfig
{
    int outer_iters = 4;
    DetectorParams det_s, det_m;
    bool reduced_stationary = false; // scalar-covariance LMMSE stage
    int reduced_mobile_edges = 0;    // keep this many edges per factor node; 0 = all
    bool mp_stationary = false;      // MP baseline instead of OAMP-LMMSE
    bool mp_mobile = false;          // MP baseline instead of GAMP-EP
    bool genie_sic_stationary = false; // stationary detector sees the mobile-free signal
    bool genie_sic_mobile = false;     // mobile detector sees the stationary-free signal
    bool decoder_feedback = true;      // false: priors stay uniform (diagnostic)
    int bp_max_iter = 100;
};

struct UserLink
{
    const LdpcCode *code = nullptr;
    Interleaver interleaver;
};

struct TurboDiagnostics
{
    std::vector<std::vector<double>> ber_per_iter;        // [iter][user], NaN without truth
    std::vector<double> alpha_final_s, alpha_final_m;     // indicator at detector exit
    std::vector<std::vector<char>> decoder_converged;     // [iter][user]
    std::vector<int> detector_skips_s, detector_skips_m;
};

struct TurboResult
{
    std::vector<std::vector<std::uint8_t>> decoded_info; // stationary users first
    TurboDiagnostics diag;
};

inline PmfMat gather_user_pmfs(const PmfMat &all, const ColumnLedger &ledger, int user)
{
    const auto &cols = ledger.user_cols.at(user);
    PmfMat out(all.n_rows, cols.size());
    for (std::size_t i = 0; i < cols.size(); ++i)
        out.col(i) = all.col(cols[i]);
    return out;
}

inline void scatter_user_pmfs(PmfMat &all, const ColumnLedger &ledger, int user,
                              const PmfMat &user_pmfs)
{
    const auto &cols = ledger.user_cols.at(user);
    for (std::size_t i = 0; i < cols.size(); ++i)
        all.col(cols[i]) = user_pmfs.col(i);
}

struct SicInput
{
    arma::cx_vec y;
    const ObnomaChannel *channel = nullptr;
    double noise_var = 1.0;
    const Alphabet *alphabet = nullptr;
    // unit-energy transmitted symbols in retained-column order, for genie modes
    arma::cx_vec true_x_s, true_x_m;
};

struct SicPass
{
    DetectorOutput stationary, mobile;
};

// One pass of the SIC detector bank: stationary group first (cancelling the
// mobile group with its prior moments), then the mobile group (cancelling the
// stationary group with the just-computed posterior moments).
inline SicPass sic_detector_pass(const SicInput &in, const PmfMat &priors_s,
                                 const PmfMat &priors_m, const TurboConfig &cfg)
{
    const ObnomaChannel &ch = *in.channel;
    const Alphabet &a = *in.alphabet;
    const int m = ch.h_s_blocks.empty() ? 0 : int(ch.h_s_blocks.front().n_rows);
    const bool have_stationary = ch.h_s.n_cols() > 0;
    const bool have_mobile = ch.h_m.n_cols() > 0;

    SicPass pass;

    if (have_stationary)
    {
        arma::cx_vec y_s;
        std::vector<arma::cx_mat> sigma_blocks;
        arma::vec sigma_diag;
        if (cfg.genie_sic_stationary && in.true_x_m.n_elem > 0)
        {
            y_s = in.y - ch.h_m.multiply(in.true_x_m);
            if (cfg.mp_stationary)
                sigma_diag = arma::vec(in.y.n_elem, arma::fill::value(in.noise_var));
            else
            {
                sigma_blocks.assign(ch.h_s_blocks.size(),
                                    arma::cx_mat(m, m, arma::fill::zeros));
                for (auto &b : sigma_blocks)
                    b.diag() += in.noise_var;
            }
        }
        else
        {
            arma::cx_vec mu_m;
            arma::vec eta_m;
            project_pmfs(priors_m, a, cfg.det_m.var_floor, mu_m, eta_m);
            if (cfg.mp_stationary)
            {
                auto cancel = cancel_interference_diag(in.y, ch.h_m, mu_m, eta_m, in.noise_var);
                y_s = std::move(cancel.residual);
                sigma_diag = std::move(cancel.sigma_diag);
            }
            else
            {
                auto cancel =
                    cancel_interference_blocks(in.y, ch.h_m, mu_m, eta_m, in.noise_var, m);
                y_s = std::move(cancel.residual);
                sigma_blocks = std::move(cancel.sigma_blocks);
            }
        }

        if (cfg.mp_stationary)
            pass.stationary = mp_detect(y_s, ch.h_s, sigma_diag, priors_s, a, cfg.det_s);
        else if (cfg.reduced_stationary)
            pass.stationary =
                r_oamp_lmmse_detect(y_s, ch.h_s_blocks, sigma_blocks, priors_s, a, cfg.det_s);
        else
            pass.stationary =
                oamp_lmmse_detect(y_s, ch.h_s_blocks, sigma_blocks, priors_s, a, cfg.det_s);
    }
    else
    {
        pass.stationary.posterior = PmfMat(a.q, 0);
        pass.stationary.extrinsic = PmfMat(a.q, 0);
    }

    if (have_mobile)
    {
        arma::cx_vec y_m;
        arma::vec sigma_diag;
        if (cfg.genie_sic_mobile && in.true_x_s.n_elem > 0)
        {
            y_m = in.y - ch.h_s.multiply(in.true_x_s);
            sigma_diag = arma::vec(in.y.n_elem, arma::fill::value(in.noise_var));
        }
        else if (have_stationary)
        {
            arma::cx_vec mu_s;
            arma::vec eta_s;
            project_pmfs(pass.stationary.posterior, a, cfg.det_s.var_floor, mu_s, eta_s);
            auto cancel = cancel_interference_diag(in.y, ch.h_s, mu_s, eta_s, in.noise_var);
            y_m = std::move(cancel.residual);
            sigma_diag = std::move(cancel.sigma_diag);
        }
        else
        {
            y_m = in.y;
            sigma_diag = arma::vec(in.y.n_elem, arma::fill::value(in.noise_var));
        }

        if (cfg.mp_mobile)
            pass.mobile = mp_detect(y_m, ch.h_m, sigma_diag, priors_m, a, cfg.det_m);
        else if (cfg.reduced_mobile_edges > 0)
            pass.mobile = r_gamp_ep_detect(y_m, ch.h_m, sigma_diag, priors_m, a, cfg.det_m,
                                           cfg.reduced_mobile_edges);
        else
            pass.mobile = gamp_ep_detect(y_m, ch.h_m, sigma_diag, priors_m, a, cfg.det_m);
    }
    else
    {
        pass.mobile.posterior = PmfMat(a.q, 0);
        pass.mobile.extrinsic = PmfMat(a.q, 0);
    }

    return pass;
}

// Per-iteration tap for convergence instrumentation: detector extrinsic LLRs
// in interleaved (transmit) order and decoder extrinsic LLRs in codeword
// order, per user.
using TurboObserver = std::function<void(int iter, int user,
                                         const std::vector<double> &detector_extrinsic,
                                         const std::vector<double> &decoder_extrinsic)>;

// Full iterative receiver: SIC detector bank and per-user channel decoders
// exchanging extrinsic information for a fixed number of outer iterations.
// links lists the stationary users first, then the mobile users; truth_info
// (optional, same order) enables per-iteration error accounting.
inline TurboResult run_turbo(const SicInput &in, const std::vector<UserLink> &links,
                             const TurboConfig &cfg,
                             const std::vector<std::vector<std::uint8_t>> *truth_info = nullptr,
                             const TurboObserver &observer = {})
{
    const ObnomaChannel &ch = *in.channel;
    const Alphabet &a = *in.alphabet;
    const int num_s = int(ch.ledger_s.user_cols.size());
    const int num_m = int(ch.ledger_m.user_cols.size());
    const int num_users = num_s + num_m;
    if (int(links.size()) != num_users)
        throw std::invalid_argument("one code/interleaver pair needed per user");

    PmfMat priors_s = uniform_pmfs(a.q, ch.h_s.n_cols());
    PmfMat priors_m = uniform_pmfs(a.q, ch.h_m.n_cols());

    TurboResult result;
    result.decoded_info.resize(num_users);
    auto &diag = result.diag;

    for (int t = 0; t < cfg.outer_iters; ++t)
    {
        SicPass pass = sic_detector_pass(in, priors_s, priors_m, cfg);
        diag.alpha_final_s.push_back(
            pass.stationary.alpha_trace.empty() ? 1.0 : pass.stationary.alpha_trace.back());
        diag.alpha_final_m.push_back(
            pass.mobile.alpha_trace.empty() ? 1.0 : pass.mobile.alpha_trace.back());
        diag.detector_skips_s.push_back(pass.stationary.skipped_updates);
        diag.detector_skips_m.push_back(pass.mobile.skipped_updates);

        std::vector<double> iter_ber(num_users, std::nan(""));
        std::vector<char> iter_conv(num_users, 0);

        for (int g = 0; g < num_users; ++g)
        {
            const bool is_stationary = g < num_s;
            const ColumnLedger &ledger = is_stationary ? ch.ledger_s : ch.ledger_m;
            const DetectorOutput &det = is_stationary ? pass.stationary : pass.mobile;
            const int user = is_stationary ? g : g - num_s;
            const UserLink &link = links[g];

            PmfMat user_ext = gather_user_pmfs(det.extrinsic, ledger, user);
            std::vector<double> llr_e = demap_llr(user_ext, a);
            std::vector<double> llr_deint = link.interleaver.invert(llr_e);

            DecodeResult dec = link.code->decode(llr_deint, cfg.bp_max_iter);
            iter_conv[g] = dec.converged ? 1 : 0;

            result.decoded_info[g] = link.code->extract_info(dec.hard);
            if (truth_info)
            {
                const auto &truth = (*truth_info)[g];
                int errors = 0;
                for (std::size_t i = 0; i < truth.size(); ++i)
                    errors += (result.decoded_info[g][i] != truth[i]);
                iter_ber[g] = double(errors) / double(truth.size());
            }

            if (observer)
                observer(t, g, llr_e, dec.extrinsic);

            // decoder extrinsics become the next detector priors
            std::vector<double> llr_d = dec.extrinsic;
            if (!cfg.decoder_feedback)
                std::fill(llr_d.begin(), llr_d.end(), 0.0);
            std::vector<double> llr_int = link.interleaver.apply(llr_d);
            PmfMat user_priors = map_pmf(llr_int, a);
            if (is_stationary)
                scatter_user_pmfs(priors_s, ledger, user, user_priors);
            else
                scatter_user_pmfs(priors_m, ledger, user, user_priors);
        }

        diag.ber_per_iter.push_back(std::move(iter_ber));
        diag.decoder_converged.push_back(std::move(iter_conv));
    }
    return result;
}

} // namespace ddnoma

#endif
