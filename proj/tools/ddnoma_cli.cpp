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

#include <chrono>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "ddnoma/analysis.hpp"
#include "ddnoma/io.hpp"

namespace fs = std::filesystem;
using namespace ddnoma;

namespace {

struct CommonOptions
{
    std::string config_path;
    std::string out_dir = "out";
    std::string preset = "desk";
    std::vector<std::string> overrides; // key=value
    std::uint64_t seed = 1;
    bool seed_set = false;
    int trials = 0; // 0: preset default
    int threads = 1;
    double em_n0_db = 3.5;
    double es_em_db = 5.0;
    double velocity_kmh = 300.0;
};

void add_common(CLI::App *cmd, CommonOptions &opt)
{
    cmd->add_option("--config", opt.config_path, "key = value configuration file");
    cmd->add_option("--preset", opt.preset, "desk (CI scale) or paper (full scale)")
        ->check(CLI::IsMember({"desk", "paper"}));
    cmd->add_option("--set", opt.overrides, "config override key=value (repeatable)");
    cmd->add_option("--seed", opt.seed, "global RNG seed")->each([&](const std::string &) {
        opt.seed_set = true;
    });
    cmd->add_option("--trials", opt.trials, "Monte-Carlo trials per point");
    cmd->add_option("--out-dir", opt.out_dir, "output directory");
    cmd->add_option("--threads", opt.threads, "worker threads");
    cmd->add_option("--em-n0", opt.em_n0_db, "mobile-user bit SNR E_M/N0 [dB]");
    cmd->add_option("--es-em", opt.es_em_db, "group energy ratio E_S/E_M [dB]");
    cmd->add_option("--velocity", opt.velocity_kmh, "mobile velocity [km/h]");
}

SystemConfig preset_config(const std::string &preset)
{
    SystemConfig cfg;
    if (preset == "paper")
    {
        cfg.M = 128;
        cfg.N = 32;
        cfg.U = 4;
        cfg.V = 4;
    }
    else
    {
        cfg.M = 32;
        cfg.N = 8;
        cfg.U = 2;
        cfg.V = 2;
    }
    return cfg;
}

int preset_trials(const std::string &preset) { return preset == "paper" ? 500 : 200; }

LinkScenario build_scenario(const CommonOptions &opt)
{
    SystemConfig cfg = preset_config(opt.preset);
    if (!opt.config_path.empty())
        cfg = load_config_file(opt.config_path, cfg);
    for (const auto &kv : opt.overrides)
    {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("override must be key=value: " + kv);
        apply_config_entry(cfg, kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (opt.seed_set)
        cfg.seed = opt.seed;
    cfg.set_energy_ratios(opt.em_n0_db, opt.es_em_db);
    cfg.validate();

    LinkScenario sc;
    sc.sys = cfg;
    sc.profile_s = typical_urban_profile(Mobility::stationary);
    sc.profile_m = typical_urban_profile(
        Mobility::mobile, doppler_for_velocity(opt.velocity_kmh, cfg.carrier_freq));
    return sc;
}

TurboConfig detector_variant(const std::string &name)
{
    TurboConfig t;
    if (name == "oamp-gamp")
        return t;
    if (name == "mp")
    {
        t.mp_stationary = t.mp_mobile = true;
        return t;
    }
    if (name == "r-oamp")
    {
        t.reduced_stationary = true;
        return t;
    }
    if (name.rfind("r-gamp:", 0) == 0)
    {
        t.reduced_mobile_edges = std::stoi(name.substr(7));
        return t;
    }
    throw ConfigError("unknown detector variant: " + name);
}

std::string join_args(int argc, char **argv)
{
    std::ostringstream os;
    for (int i = 0; i < argc; ++i)
        os << (i ? " " : "") << argv[i];
    return os.str();
}

struct Timer
{
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const
    {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

int cmd_ber_sweep(const CommonOptions &opt, const std::vector<double> &em_grid,
                  const std::vector<std::string> &detectors, const std::string &cmdline)
{
    Timer timer;
    fs::create_directories(opt.out_dir);
    LinkScenario sc = build_scenario(opt);
    const int trials = opt.trials > 0 ? opt.trials : preset_trials(opt.preset);

    CsvWriter csv(opt.out_dir + "/ber_sweep.csv",
                  {"em_n0_db", "es_em_db", "velocity_kmh", "csi_eps", "detector", "q", "m", "n",
                   "ber_s", "se_s", "ber_m", "se_m", "trials"});
    for (const auto &det : detectors)
    {
        LinkScenario run = sc;
        run.turbo = detector_variant(det);
        LinkRuntime rt = prepare_link(run);
        for (double em : em_grid)
        {
            run.sys.set_energy_ratios(em, opt.es_em_db);
            GroupStats st = measure_link_ber(run, rt, trials, opt.threads);
            csv.write_strings({format_number(em), format_number(opt.es_em_db),
                               format_number(opt.velocity_kmh), format_number(run.csi_eps), det,
                               std::to_string(run.sys.Q), std::to_string(run.sys.M),
                               std::to_string(run.sys.N), format_number(st.ber_s),
                               format_number(st.se_s), format_number(st.ber_m),
                               format_number(st.se_m), std::to_string(st.trials)});
            std::cout << "em_n0=" << em << " dB det=" << det << " ber_s=" << st.ber_s
                      << " ber_m=" << st.ber_m << "\n";
        }
    }
    write_metadata(opt.out_dir + "/ber_sweep.meta.json", sc.sys, cmdline, timer.seconds());
    return 0;
}

int cmd_exit_chart(const CommonOptions &opt, const std::string &cmdline)
{
    Timer timer;
    fs::create_directories(opt.out_dir);
    LinkScenario sc = build_scenario(opt);
    LinkRuntime rt = prepare_link(sc);

    ExitParams prm;
    ExitAnalysis ea = exit_chart_analysis(sc, rt, prm);

    CsvWriter curves(opt.out_dir + "/exit_curves.csv",
                     {"kind", "fixed_cross_mi", "i_in", "i_out"});
    auto dump_curve = [&](const ExitCurve &c) {
        for (auto [x, y] : c.samples)
            curves.write_strings(
                {c.kind, format_number(c.fixed_cross_mi), format_number(x), format_number(y)});
    };
    for (const auto &c : ea.detector_s)
        dump_curve(c);
    for (const auto &c : ea.detector_m)
        dump_curve(c);
    dump_curve(ea.decoder_s);

    CsvWriter traj(opt.out_dir + "/exit_trajectory.csv",
                   {"group", "iter", "det_in", "det_out", "dec_out", "cross_in"});
    for (std::size_t t = 0; t < ea.traj_s.size(); ++t)
        traj.write_strings({"stationary", std::to_string(t + 1),
                            format_number(ea.traj_s[t].det_in), format_number(ea.traj_s[t].det_out),
                            format_number(ea.traj_s[t].dec_out),
                            format_number(ea.traj_s[t].cross_in)});
    for (std::size_t t = 0; t < ea.traj_m.size(); ++t)
        traj.write_strings({"mobile", std::to_string(t + 1), format_number(ea.traj_m[t].det_in),
                            format_number(ea.traj_m[t].det_out),
                            format_number(ea.traj_m[t].dec_out),
                            format_number(ea.traj_m[t].cross_in)});

    write_metadata(opt.out_dir + "/exit_chart.meta.json", sc.sys, cmdline, timer.seconds());
    std::cout << "exit charts written to " << opt.out_dir << "\n";
    return 0;
}

int cmd_convergence(const CommonOptions &opt, int iters, const std::string &cmdline)
{
    Timer timer;
    fs::create_directories(opt.out_dir);
    LinkScenario sc = build_scenario(opt);
    sc.turbo.outer_iters = iters;
    LinkRuntime rt = prepare_link(sc);
    const int trials = opt.trials > 0 ? opt.trials : preset_trials(opt.preset);

    GroupStats st = measure_link_ber(sc, rt, trials, opt.threads);
    CsvWriter csv(opt.out_dir + "/convergence.csv",
                  {"iter", "ber_s", "se_s", "ber_m", "se_m", "trials"});
    for (int t = 0; t < iters; ++t)
    {
        csv.write_row({double(t + 1), st.iter_ber_s[t], st.iter_se_s[t], st.iter_ber_m[t],
                       st.iter_se_m[t], double(trials)});
        std::cout << "iter " << (t + 1) << " ber_s=" << st.iter_ber_s[t]
                  << " ber_m=" << st.iter_ber_m[t] << "\n";
    }
    write_metadata(opt.out_dir + "/convergence.meta.json", sc.sys, cmdline, timer.seconds());
    return 0;
}

int cmd_csi_robustness(const CommonOptions &opt, const std::vector<double> &eps_grid,
                       const std::string &cmdline)
{
    Timer timer;
    fs::create_directories(opt.out_dir);
    LinkScenario sc = build_scenario(opt);
    LinkRuntime rt = prepare_link(sc);
    const int trials = opt.trials > 0 ? opt.trials : preset_trials(opt.preset);

    CsvWriter csv(opt.out_dir + "/csi_robustness.csv",
                  {"csi_eps", "em_n0_db", "es_em_db", "ber_s", "se_s", "ber_m", "se_m", "trials"});
    for (double eps : eps_grid)
    {
        LinkScenario run = sc;
        run.csi_eps = eps;
        GroupStats st = measure_link_ber(run, rt, trials, opt.threads);
        csv.write_row({eps, opt.em_n0_db, opt.es_em_db, st.ber_s, st.se_s, st.ber_m, st.se_m,
                       double(trials)});
        std::cout << "eps=" << eps << " ber_s=" << st.ber_s << " ber_m=" << st.ber_m << "\n";
    }
    write_metadata(opt.out_dir + "/csi_robustness.meta.json", sc.sys, cmdline, timer.seconds());
    return 0;
}

bool report(const char *name, bool ok)
{
    std::cout << (ok ? "PASS " : "FAIL ") << name << "\n";
    return ok;
}

int cmd_selftest(const CommonOptions &opt)
{
    bool all = true;
    Rng rng(derive_seed(opt.seed, 0x5E1F));

    {
        Alphabet a4 = build_alphabet(4), a16 = build_alphabet(16);
        bool ok = std::abs(arma::mean(arma::square(arma::abs(a4.points))) - 1.0) < 1e-12 &&
                  std::abs(arma::mean(arma::square(arma::abs(a16.points))) - 1.0) < 1e-12;
        all &= report("alphabet unit energy", ok);
    }
    {
        SystemConfig cfg;
        cfg.M = 8;
        cfg.N = 4;
        arma::cx_mat x(cfg.M, cfg.N);
        for (auto &v : x)
            v = rng.cgaussian();
        double err = arma::abs(demodulate_frame(modulate_frame(x, 6), cfg.M, cfg.N, 6) - x).max();
        all &= report("modem loopback identity", err < 1e-12);
    }
    {
        SystemConfig cfg;
        cfg.M = 8;
        cfg.N = 4;
        ChannelProfile prof = typical_urban_profile(Mobility::stationary);
        prof.max_delay_s = 2.0 * cfg.sample_interval();
        prof.decay_s = cfg.sample_interval();
        PathSet paths = draw_paths(prof, rng);
        auto blocks = build_stationary_blocks(paths, cfg);
        arma::cx_mat brute = stationary_matrix_bruteforce(paths, cfg);
        double err = 0.0;
        for (int k = 0; k < cfg.N; ++k)
            err = std::max(err, arma::abs(blocks.blocks[k] -
                                          brute.submat(k * cfg.M, k * cfg.M, (k + 1) * cfg.M - 1,
                                                       (k + 1) * cfg.M - 1))
                                    .max());
        double err2 = arma::abs(build_mobile_matrix(paths, cfg).dense() - brute).max();
        all &= report("block-diagonal construction vs direct sum", err < 1e-10 && err2 < 1e-10);
    }
    {
        SystemConfig cfg;
        cfg.M = 8;
        cfg.N = 4;
        cfg.U = 1;
        cfg.V = 1;
        cfg.P_S = 2.0;
        cfg.P_M = 1.0;
        LinkScenario sc;
        sc.sys = cfg;
        sc.profile_s = typical_urban_profile(Mobility::stationary);
        sc.profile_s.num_paths = 2;
        sc.profile_s.max_delay_s = 1.5 * cfg.sample_interval();
        sc.profile_s.decay_s = cfg.sample_interval();
        sc.profile_m = typical_urban_profile(Mobility::mobile, 0.3 * cfg.delta_f / cfg.N);
        sc.profile_m.num_paths = 2;
        sc.profile_m.max_delay_s = 1.5 * cfg.sample_interval();
        sc.profile_m.decay_s = cfg.sample_interval();

        ResourceMap map = allocate_resources(cfg);
        Alphabet a = build_alphabet(cfg.Q);
        int l_cp = cp_length_for(sc);
        PathSet ps = draw_paths(sc.profile_s, rng), pm = draw_paths(sc.profile_m, rng);
        arma::cx_vec xs(cfg.M * cfg.N), xm(cfg.M * cfg.N);
        for (auto &v : xs)
            v = a.points[rng.below(a.q)];
        for (auto &v : xm)
            v = a.points[rng.below(a.q)];

        arma::cx_mat grid_s =
            place_symbols_stationary(xs, map, 0, cfg.M, cfg.N) * std::sqrt(cfg.P_S);
        arma::cx_mat grid_m = place_symbols_mobile(xm, map, 0, cfg.M, cfg.N) * std::sqrt(cfg.P_M);
        arma::cx_vec rx =
            transmit_through(modulate_frame(grid_s, l_cp), sample_channel_taps(ps, cfg), l_cp,
                             0.0, rng) +
            transmit_through(modulate_frame(grid_m, l_cp), sample_channel_taps(pm, cfg), l_cp,
                             0.0, rng);
        arma::cx_vec y = arma::vectorise(demodulate_frame(rx, cfg.M, cfg.N, l_cp));

        ObnomaChannel ch = assemble_obnoma({build_stationary_blocks(ps, cfg)},
                                           {build_mobile_matrix(pm, cfg)}, map, cfg);
        arma::cx_vec xs_col(cfg.M * cfg.N), xm_col(cfg.M * cfg.N);
        for (std::size_t s = 0; s < xs.n_elem; ++s)
            xs_col[ch.ledger_s.user_cols[0][s]] = xs[s];
        for (std::size_t s = 0; s < xm.n_elem; ++s)
            xm_col[ch.ledger_m.user_cols[0][s]] = xm[s];
        arma::cx_vec pred = ch.h_s.multiply(xs_col) + ch.h_m.multiply(xm_col);
        double rel = arma::norm(y - pred) / arma::norm(y);
        all &= report("effective matrix matches waveform pipeline", rel < 1e-6);
    }
    {
        LdpcCode code = LdpcCode::build(512, 3, 6, opt.seed);
        bool four_cycle = false;
        const auto &h = code.parity();
        for (int v1 = 0; v1 < h.n && !four_cycle; ++v1)
            for (int v2 = v1 + 1; v2 < h.n && !four_cycle; ++v2)
            {
                int shared = 0;
                for (int c1 : h.cols[v1])
                    for (int c2 : h.cols[v2])
                        shared += (c1 == c2);
                four_cycle = shared >= 2;
            }
        std::vector<std::uint8_t> info(code.k());
        for (auto &b : info)
            b = std::uint8_t(rng.below(2));
        auto cw = code.encode(info);
        bool ok = !four_cycle && code.parity().syndrome_ok(cw);
        std::vector<double> llr(code.n());
        for (int i = 0; i < code.n(); ++i)
            llr[i] = (cw[i] ? -6.0 : 6.0);
        llr[7] = -llr[7];
        llr[300] = -llr[300];
        ok = ok && (code.decode(llr).hard == cw);
        all &= report("LDPC girth/encode/correct", ok);
    }
    {
        std::vector<std::uint8_t> bits(20000);
        for (auto &b : bits)
            b = std::uint8_t(rng.below(2));
        auto llrs = generate_apriori_llrs(bits, 0.5, rng);
        all &= report("MI generator/estimator closure",
                      std::abs(estimate_mi(llrs, bits) - 0.5) < 0.02);
    }
    std::cout << (all ? "selftest passed" : "selftest FAILED") << "\n";
    return all ? 0 : 1;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"delay-Doppler NOMA link-level simulation laboratory"};
    app.require_subcommand(1);

    CommonOptions opt;

    auto *sweep = app.add_subcommand("ber-sweep", "average BER over E_M/N0 grid");
    add_common(sweep, opt);
    std::vector<double> em_grid = {0.0, 1.0, 2.0, 3.0, 4.0};
    std::vector<std::string> detectors = {"oamp-gamp"};
    sweep->add_option("--em-n0-grid", em_grid, "E_M/N0 grid [dB]")->delimiter(',');
    sweep->add_option("--detectors", detectors,
                      "detector variants: oamp-gamp, mp, r-oamp, r-gamp:<R>")
        ->delimiter(',');

    auto *exitc = app.add_subcommand("exit-chart", "customized transfer charts and trajectory");
    add_common(exitc, opt);

    auto *conv = app.add_subcommand("convergence", "per-iteration BER study");
    add_common(conv, opt);
    int conv_iters = 6;
    conv->add_option("--iters", conv_iters, "outer iterations to trace");

    auto *csi = app.add_subcommand("csi-robustness", "BER vs channel-knowledge error bound");
    add_common(csi, opt);
    std::vector<double> eps_grid = {0.0, 0.05, 0.1};
    csi->add_option("--eps-grid", eps_grid, "relative CSI error bounds")->delimiter(',');

    auto *self = app.add_subcommand("selftest", "run the built-in oracle checks");
    add_common(self, opt);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const std::string cmdline = join_args(argc, argv);
    try
    {
        if (sweep->parsed())
            return cmd_ber_sweep(opt, em_grid, detectors, cmdline);
        if (exitc->parsed())
            return cmd_exit_chart(opt, cmdline);
        if (conv->parsed())
            return cmd_convergence(opt, conv_iters, cmdline);
        if (csi->parsed())
            return cmd_csi_robustness(opt, eps_grid, cmdline);
        if (self->parsed())
            return cmd_selftest(opt);
    }
    catch (const ConfigError &e)
    {
        std::cerr << "configuration error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
