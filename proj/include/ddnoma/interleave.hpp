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

#ifndef DDNOMA_INTERLEAVE_HPP
#define DDNOMA_INTERLEAVE_HPP

#include <cstdint>
#include <vector>

#include "common.hpp"

namespace ddnoma {

inline std::vector<int> make_permutation(std::size_t length, std::uint64_t seed)
{
    std::vector<int> perm(length);
    for (std::size_t i = 0; i < length; ++i)
        perm[i] = int(i);
    Rng rng(seed);
    rng.shuffle(perm);
    return perm;
}

// Seeded uniform random permutation; out[i] = in[perm[i]].
class Interleaver
{
  public:
    Interleaver() = default;
    Interleaver(std::size_t length, std::uint64_t seed) : perm_(make_permutation(length, seed)) {}

    std::size_t size() const { return perm_.size(); }
    const std::vector<int> &permutation() const { return perm_; }

    template <class T> std::vector<T> apply(const std::vector<T> &in) const
    {
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i)
            out[i] = in[perm_[i]];
        return out;
    }

    template <class T> std::vector<T> invert(const std::vector<T> &in) const
    {
        std::vector<T> out(in.size());
        for (std::size_t i = 0; i < perm_.size(); ++i)
            out[perm_[i]] = in[i];
        return out;
    }

  private:
    std::vector<int> perm_;
};

template <class T>
inline std::vector<T> interleave(const std::vector<T> &seq, std::uint64_t seed)
{
    return Interleaver(seq.size(), seed).apply(seq);
}

template <class T>
inline std::vector<T> deinterleave(const std::vector<T> &seq, std::uint64_t seed)
{
    return Interleaver(seq.size(), seed).invert(seq);
}

} // namespace ddnoma

#endif
