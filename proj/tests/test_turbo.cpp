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

#include "ddnoma/analysis.hpp"

using namespace ddnoma;

namespace {

LinkScenario desk_scenario(double em_n0_db, double es_em_db)
{
    LinkScenario sc;
    sc.sys.M = 32;
    sc.sys.N = 8;
    sc.sys.U = 2;
    sc.sys.V = 2;
    sc.sys.seed = 1234;
    sc.sys.set_energy_ratios(em_n0_db, es_em_db);
    sc.profile_m.max_doppler_hz = doppler_for_velocity(300.0, sc.sys.carrier_freq);
    return sc;
}

} // namespace

TEST_CASE("noise-free single-user transmission decodes in one pass", "[turbo]")
{
    LinkScenario sc;
    sc.sys.M = 16;
    sc.sys.N = 4;
    sc.sys.U = 1;
    sc.sys.V = 0;
    sc.sys.noise_var = 1e-9;
    sc.sys.P_S = 1.0;
    sc.sys.seed = 7;
    sc.turbo.outer_iters = 1;
    LinkRuntime rt = prepare_link(sc);
    TrialOutput out = run_link_trial(sc, rt, 99);
    CHECK(out.ber_per_iter[0][0] == 0.0);
}

TEST_CASE("receiver without stationary users degenerates cleanly", "[turbo]")
{
    LinkScenario sc;
    sc.sys.M = 16;
    sc.sys.N = 4;
    sc.sys.U = 0;
    sc.sys.V = 2;
    sc.sys.noise_var = 1.0;
    sc.sys.set_energy_ratios(10.0, 0.0);
    sc.sys.seed = 11;
    sc.turbo.outer_iters = 2;
    LinkRuntime rt = prepare_link(sc);
    TrialOutput out = run_link_trial(sc, rt, 5);
    REQUIRE(out.ber_per_iter.size() == 2);
    REQUIRE(out.ber_per_iter[0].size() == 2);
    CHECK(out.ber_per_iter.back()[0] <= 0.5);
}

TEST_CASE("without decoder feedback the detector repeats itself", "[turbo]")
{
    LinkScenario sc = desk_scenario(4.0, 5.0);
    sc.turbo.outer_iters = 2;
    sc.turbo.decoder_feedback = false;
    LinkRuntime rt = prepare_link(sc);

    std::vector<std::vector<std::vector<double>>> det_llrs(
        2, std::vector<std::vector<double>>(sc.sys.U + sc.sys.V));
    auto observer = [&](int iter, int user, const std::vector<double> &det,
                        const std::vector<double> &) { det_llrs[iter][user] = det; };
    run_link_trial(sc, rt, 42, observer);

    for (int g = 0; g < sc.sys.U + sc.sys.V; ++g)
    {
        REQUIRE(det_llrs[0][g].size() == det_llrs[1][g].size());
        double max_diff = 0.0;
        for (std::size_t i = 0; i < det_llrs[0][g].size(); ++i)
            max_diff = std::max(max_diff, std::abs(det_llrs[0][g][i] - det_llrs[1][g][i]));
        CHECK(max_diff == 0.0);
    }
}

TEST_CASE("per-iteration error rate does not regress on average", "[turbo][slow]")
{
    LinkScenario sc = desk_scenario(3.0, 5.0);
    sc.turbo.outer_iters = 4;
    LinkRuntime rt = prepare_link(sc);
    GroupStats st = measure_link_ber(sc, rt, 40, 1);
    for (int t = 1; t < sc.turbo.outer_iters; ++t)
    {
        double band_s = 2.0 * std::sqrt(st.iter_se_s[t] * st.iter_se_s[t] +
                                        st.iter_se_s[t - 1] * st.iter_se_s[t - 1]);
        double band_m = 2.0 * std::sqrt(st.iter_se_m[t] * st.iter_se_m[t] +
                                        st.iter_se_m[t - 1] * st.iter_se_m[t - 1]);
        CHECK(st.iter_ber_s[t] <= st.iter_ber_s[t - 1] + band_s);
        CHECK(st.iter_ber_m[t] <= st.iter_ber_m[t - 1] + band_m);
    }
}

TEST_CASE("perfect cancellation can only help the mobile group", "[turbo][slow]")
{
    LinkScenario base = desk_scenario(2.5, 5.0);
    base.turbo.outer_iters = 3;
    LinkRuntime rt = prepare_link(base);

    LinkScenario genie = base;
    genie.turbo.genie_sic_mobile = true;

    GroupStats st_base = measure_link_ber(base, rt, 30, 1);
    GroupStats st_genie = measure_link_ber(genie, rt, 30, 1);
    double band = 2.0 * std::sqrt(st_base.se_m * st_base.se_m + st_genie.se_m * st_genie.se_m);
    CHECK(st_genie.ber_m <= st_base.ber_m + band);
}
