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

#ifndef DDNOMA_RESOURCES_HPP
#define DDNOMA_RESOURCES_HPP

#include <armadillo>
#include <vector>

#include "config.hpp"

namespace ddnoma {

// Contiguous index range [first, first + count) on one grid axis.
struct BinRange
{
    int first = 0;
    int count = 0;

    bool contains(int i) const { return i >= first && i < first + count; }
    int offset_of(int i) const { return i - first; }
    std::vector<int> bins() const
    {
        std::vector<int> b(count);
        for (int i = 0; i < count; ++i)
            b[i] = first + i;
        return b;
    }
};

// Stationary users own disjoint Doppler bins (all delay bins each); mobile
// users own disjoint delay bins (all Doppler bins each). Equal contiguous
// allocation: stationary user u gets Doppler bins [u*N/U, (u+1)*N/U) and
// mobile user v gets delay bins [v*M/V, (v+1)*M/V).
struct ResourceMap
{
    std::vector<BinRange> doppler_sets; // one per stationary user
    std::vector<BinRange> delay_sets;   // one per mobile user

    int stationary_symbols(int m) const
    {
        int total = 0;
        for (const auto &r : doppler_sets)
            total += m * r.count;
        return total;
    }
    int mobile_symbols(int n) const
    {
        int total = 0;
        for (const auto &r : delay_sets)
            total += n * r.count;
        return total;
    }
};

inline ResourceMap allocate_resources(const SystemConfig &cfg)
{
    cfg.validate();
    ResourceMap map;
    if (cfg.U > 0)
    {
        int width = cfg.N / cfg.U;
        for (int u = 0; u < cfg.U; ++u)
            map.doppler_sets.push_back({u * width, width});
    }
    if (cfg.V > 0)
    {
        int width = cfg.M / cfg.V;
        for (int v = 0; v < cfg.V; ++v)
            map.delay_sets.push_back({v * width, width});
    }
    return map;
}

// Placement for stationary user u: symbol s[k_u*M + l] goes to grid(l, k)
// where k is the k_u-th Doppler bin of the user. All other entries are zero.
inline arma::cx_mat place_symbols_stationary(const arma::cx_vec &symbols, const ResourceMap &map,
                                             int user, int m, int n)
{
    const BinRange &range = map.doppler_sets.at(user);
    if (int(symbols.n_elem) != m * range.count)
        throw std::invalid_argument("stationary symbol vector has wrong length");
    arma::cx_mat grid(m, n, arma::fill::zeros);
    for (int ku = 0; ku < range.count; ++ku)
        grid.col(range.first + ku) = symbols.subvec(ku * m, ku * m + m - 1);
    return grid;
}

inline arma::cx_vec extract_symbols_stationary(const arma::cx_mat &grid, const ResourceMap &map,
                                               int user)
{
    const BinRange &range = map.doppler_sets.at(user);
    const int m = int(grid.n_rows);
    arma::cx_vec symbols(m * range.count);
    for (int ku = 0; ku < range.count; ++ku)
        symbols.subvec(ku * m, ku * m + m - 1) = grid.col(range.first + ku);
    return symbols;
}

// Placement for mobile user v: symbol s[l_v*N + k] goes to grid(l, k) where
// l is the l_v-th delay bin of the user.
inline arma::cx_mat place_symbols_mobile(const arma::cx_vec &symbols, const ResourceMap &map,
                                         int user, int m, int n)
{
    const BinRange &range = map.delay_sets.at(user);
    if (int(symbols.n_elem) != n * range.count)
        throw std::invalid_argument("mobile symbol vector has wrong length");
    arma::cx_mat grid(m, n, arma::fill::zeros);
    for (int lv = 0; lv < range.count; ++lv)
        for (int k = 0; k < n; ++k)
            grid(range.first + lv, k) = symbols[lv * n + k];
    return grid;
}

inline arma::cx_vec extract_symbols_mobile(const arma::cx_mat &grid, const ResourceMap &map,
                                           int user)
{
    const BinRange &range = map.delay_sets.at(user);
    const int n = int(grid.n_cols);
    arma::cx_vec symbols(n * range.count);
    for (int lv = 0; lv < range.count; ++lv)
        for (int k = 0; k < n; ++k)
            symbols[lv * n + k] = grid(range.first + lv, k);
    return symbols;
}

} // namespace ddnoma

#endif
