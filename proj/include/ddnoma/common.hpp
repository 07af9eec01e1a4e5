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

#ifndef DDNOMA_COMMON_HPP
#define DDNOMA_COMMON_HPP

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <thread>
#include <vector>

namespace ddnoma {

using cx = std::complex<double>;

constexpr double kPi = 3.14159265358979323846;
constexpr double kSpeedOfLight = 299792458.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

inline cx unit_phasor(double angle) { return {std::cos(angle), std::sin(angle)}; }

// Floored modulo, valid for negative a.
inline int mod_floor(int a, int m)
{
    int r = a % m;
    return (r < 0) ? r + m : r;
}

// splitmix64 step; used to derive independent seed streams.
inline std::uint64_t mix_seed(std::uint64_t z)
{
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream)
{
    return mix_seed(base ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

// Self-contained PRNG (xoshiro256**) with hand-rolled distributions so that
// every draw is reproducible across standard libraries and platforms.
class Rng
{
  public:
    explicit Rng(std::uint64_t seed)
    {
        std::uint64_t z = seed;
        for (auto &word : state_)
            word = mix_seed(z++);
        haveSpare_ = false;
        spare_ = 0.0;
    }

    std::uint64_t next_u64()
    {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Unbiased-enough bounded draw via 128-bit multiply
    std::size_t below(std::size_t n)
    {
        return std::size_t((static_cast<unsigned __int128>(next_u64()) * n) >> 64);
    }

    // Standard normal via Box-Muller (cached pair)
    double gaussian()
    {
        if (haveSpare_)
        {
            haveSpare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0)
            u1 = uniform();
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double a = 2.0 * kPi * u2;
        spare_ = r * std::sin(a);
        haveSpare_ = true;
        return r * std::cos(a);
    }

    // Circular complex Gaussian CN(0, 1)
    cx cgaussian()
    {
        double re = gaussian();
        double im = gaussian();
        return cx(re, im) / std::sqrt(2.0);
    }

    template <class T> void shuffle(std::vector<T> &v)
    {
        for (std::size_t i = v.size(); i > 1; --i)
            std::swap(v[i - 1], v[below(i)]);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
    bool haveSpare_;
    double spare_;
};

// Runs f(0..n-1) on a small worker pool. Each index must be independent and
// write only its own output slot, which keeps results thread-count invariant.
template <class F> inline void parallel_for(int n, int threads, F &&f)
{
    if (threads <= 1 || n <= 1)
    {
        for (int i = 0; i < n; ++i)
            f(i);
        return;
    }
    std::atomic<int> next{0};
    auto worker = [&]() {
        for (;;)
        {
            int i = next.fetch_add(1);
            if (i >= n)
                return;
            f(i);
        }
    };
    std::vector<std::thread> pool;
    int count = std::min(threads, n);
    pool.reserve(count);
    for (int t = 0; t < count; ++t)
        pool.emplace_back(worker);
    for (auto &th : pool)
        th.join();
}

} // namespace ddnoma

#endif
