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

#ifndef DDNOMA_OTFS_HPP
#define DDNOMA_OTFS_HPP

#include <armadillo>
#include <map>
#include <mutex>

#include "common.hpp"

namespace ddnoma {

// Grid conventions used throughout:
//   delay-Doppler grid  X(l, k): rows l = delay bins, cols k = Doppler bins
//   time-frequency grid Xbar(m, n): rows m = subcarriers, cols n = time slots
//   time signal s: block n occupies samples n*M .. n*M + M - 1
// All transforms use symmetric 1/sqrt(dim) DFT scaling, so each one is
// unitary and round trips are exact identities.

// Normalized DFT matrix, F(a,b) = exp(-j*2*pi*a*b/n)/sqrt(n). Cached.
inline const arma::cx_mat &unitary_dft(int n)
{
    static std::map<int, arma::cx_mat> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end())
        return it->second;
    arma::cx_mat f(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            f(a, b) = unit_phasor(-2.0 * kPi * a * b / n) / std::sqrt(double(n));
    return cache.emplace(n, std::move(f)).first->second;
}

// Xbar = F_M * X * F_N^H
inline arma::cx_mat isfft(const arma::cx_mat &dd)
{
    const arma::cx_mat &fm = unitary_dft(int(dd.n_rows));
    const arma::cx_mat &fn = unitary_dft(int(dd.n_cols));
    return fm * dd * fn.t();
}

// X = F_M^H * Xbar * F_N
inline arma::cx_mat sfft(const arma::cx_mat &tf)
{
    const arma::cx_mat &fm = unitary_dft(int(tf.n_rows));
    const arma::cx_mat &fn = unitary_dft(int(tf.n_cols));
    return fm.t() * tf * fn;
}

// With rectangular transmit pulses of slot duration, the pulse synthesis
// reduces to an M-point unitary IDFT of each time-frequency column.
inline arma::cx_vec heisenberg_rect(const arma::cx_mat &tf)
{
    const arma::cx_mat &fm = unitary_dft(int(tf.n_rows));
    arma::cx_mat s = fm.t() * tf;
    return arma::vectorise(s);
}

// Adjoint of heisenberg_rect.
inline arma::cx_mat wigner_rect(const arma::cx_vec &r, int m, int n)
{
    if (int(r.n_elem) != m * n)
        throw std::invalid_argument("sample count does not match grid size");
    const arma::cx_mat &fm = unitary_dft(m);
    return fm * arma::reshape(r, m, n);
}

inline arma::cx_vec add_cp(const arma::cx_vec &s, int l_cp)
{
    if (l_cp < 0 || l_cp > int(s.n_elem))
        throw std::invalid_argument("cyclic prefix length out of range");
    if (l_cp == 0)
        return s;
    arma::cx_vec out(s.n_elem + l_cp);
    out.subvec(0, l_cp - 1) = s.subvec(s.n_elem - l_cp, s.n_elem - 1);
    out.subvec(l_cp, out.n_elem - 1) = s;
    return out;
}

inline arma::cx_vec remove_cp(const arma::cx_vec &s, int l_cp)
{
    if (l_cp < 0 || l_cp >= int(s.n_elem))
        throw std::invalid_argument("cyclic prefix length out of range");
    if (l_cp == 0)
        return s;
    return s.subvec(l_cp, s.n_elem - 1);
}

inline arma::cx_vec modulate_frame(const arma::cx_mat &dd, int l_cp)
{
    return add_cp(heisenberg_rect(isfft(dd)), l_cp);
}

inline arma::cx_mat demodulate_frame(const arma::cx_vec &r, int m, int n, int l_cp)
{
    return sfft(wigner_rect(remove_cp(r, l_cp), m, n));
}

} // namespace ddnoma

#endif
