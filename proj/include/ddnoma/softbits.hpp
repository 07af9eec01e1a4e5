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

#ifndef DDNOMA_SOFTBITS_HPP
#define DDNOMA_SOFTBITS_HPP

#include <armadillo>
#include <vector>

#include "alphabet.hpp"

namespace ddnoma {

// LLR sign convention: positive means bit 0 is more likely. Values are
// clamped to +-kLlrClamp, beyond machine-probability resolution anyway.
constexpr double kLlrClamp = 50.0;

inline double clamp_llr(double l)
{
    return std::max(-kLlrClamp, std::min(kLlrClamp, l));
}

// Symbol pmfs are stored one column per symbol (Q rows), each column summing
// to one.
using PmfMat = arma::mat;

inline PmfMat uniform_pmfs(int q, int count)
{
    return PmfMat(q, count, arma::fill::value(1.0 / q));
}

// Bit LLRs from symbol pmfs: L[c*R + j] = log sum_{bit_j=0} P - log sum_{bit_j=1} P.
// Zero mass on both branches yields LLR 0.
inline std::vector<double> demap_llr(const PmfMat &pmfs, const Alphabet &a)
{
    const int r = a.bits_per_symbol;
    std::vector<double> llrs(pmfs.n_cols * r);
    for (arma::uword c = 0; c < pmfs.n_cols; ++c)
    {
        for (int j = 0; j < r; ++j)
        {
            double p0 = 0.0, p1 = 0.0;
            for (int x = 0; x < a.q; ++x)
                (a.bit_of(x, j) ? p1 : p0) += pmfs(x, c);
            double l;
            if (p0 <= 0.0 && p1 <= 0.0)
                l = 0.0;
            else if (p1 <= 0.0)
                l = kLlrClamp;
            else if (p0 <= 0.0)
                l = -kLlrClamp;
            else
                l = std::log(p0) - std::log(p1);
            llrs[c * r + j] = clamp_llr(l);
        }
    }
    return llrs;
}

// Symbol pmfs from bit LLRs: P(x) proportional to prod_j exp(-bit_j(x) * L_j).
inline PmfMat map_pmf(const std::vector<double> &llrs, const Alphabet &a)
{
    const int r = a.bits_per_symbol;
    if (llrs.size() % r != 0)
        throw std::invalid_argument("LLR count not a multiple of bits per symbol");
    const int count = int(llrs.size()) / r;
    PmfMat pmfs(a.q, count);
    arma::vec logp(a.q);
    for (int c = 0; c < count; ++c)
    {
        for (int x = 0; x < a.q; ++x)
        {
            double acc = 0.0;
            for (int j = 0; j < r; ++j)
                if (a.bit_of(x, j))
                    acc -= llrs[c * r + j];
            logp[x] = acc;
        }
        logp -= logp.max();
        arma::vec p = arma::exp(logp);
        pmfs.col(c) = p / arma::accu(p);
    }
    return pmfs;
}

inline std::vector<std::uint8_t> hard_decisions(const std::vector<double> &llrs)
{
    std::vector<std::uint8_t> bits(llrs.size());
    for (std::size_t i = 0; i < llrs.size(); ++i)
        bits[i] = (llrs[i] < 0.0) ? 1 : 0;
    return bits;
}

} // namespace ddnoma

#endif
