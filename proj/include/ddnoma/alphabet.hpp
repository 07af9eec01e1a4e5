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

#ifndef DDNOMA_ALPHABET_HPP
#define DDNOMA_ALPHABET_HPP

#include <armadillo>
#include <cstdint>
#include <vector>

#include "config.hpp"

namespace ddnoma {

// Gray-labeled unit-energy QAM constellation. Point index equals its binary
// label; bit j of point a is (a >> j) & 1. For QPSK bit 0 selects the real
// sign and bit 1 the imaginary sign, so label 0 maps to (1+j)/sqrt(2).
// For 16-QAM the in-phase axis is driven by bits (0, 2) and the quadrature
// axis by bits (1, 3), each pair Gray-coded over levels {+3,+1,-1,-3}/sqrt(10).
struct Alphabet
{
    int q = 0;
    int bits_per_symbol = 0;
    arma::cx_vec points;

    int bit_of(int point, int j) const { return (point >> j) & 1; }
};

namespace detail {

// Gray pair (sign bit s, magnitude bit m) -> amplitude level
inline double gray_level(int sign_bit, int mag_bit)
{
    double a = (mag_bit == 0) ? 3.0 : 1.0;
    return (sign_bit == 0) ? a : -a;
}

} // namespace detail

inline Alphabet build_alphabet(int q)
{
    if (q != 4 && q != 16)
        throw ConfigError("unsupported constellation size (expected 4 or 16)");

    Alphabet a;
    a.q = q;
    a.bits_per_symbol = (q == 4) ? 2 : 4;
    a.points.set_size(q);

    if (q == 4)
    {
        const double s = 1.0 / std::sqrt(2.0);
        for (int label = 0; label < 4; ++label)
        {
            int b0 = label & 1;
            int b1 = (label >> 1) & 1;
            a.points[label] = cx((1 - 2 * b0) * s, (1 - 2 * b1) * s);
        }
    }
    else
    {
        const double s = 1.0 / std::sqrt(10.0);
        for (int label = 0; label < 16; ++label)
        {
            int b0 = label & 1;
            int b1 = (label >> 1) & 1;
            int b2 = (label >> 2) & 1;
            int b3 = (label >> 3) & 1;
            a.points[label] = cx(detail::gray_level(b0, b2) * s, detail::gray_level(b1, b3) * s);
        }
    }
    return a;
}

// Maps a bit sequence to symbols; bit j of symbol c is bits[c*R + j].
inline arma::cx_vec modulate_bits(const std::vector<std::uint8_t> &bits, const Alphabet &a)
{
    const int r = a.bits_per_symbol;
    if (bits.size() % r != 0)
        throw std::invalid_argument("bit count not a multiple of bits per symbol");
    arma::cx_vec out(bits.size() / r);
    for (arma::uword c = 0; c < out.n_elem; ++c)
    {
        int label = 0;
        for (int j = 0; j < r; ++j)
            label |= int(bits[c * r + j]) << j;
        out[c] = a.points[label];
    }
    return out;
}

} // namespace ddnoma

#endif
