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

#ifndef DDNOMA_EXIT_CHART_HPP
#define DDNOMA_EXIT_CHART_HPP

#include <cstdint>
#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "common.hpp"

namespace ddnoma {

namespace detail {

// log2(1 + exp(-x)) without overflow
inline double log2_1p_exp_neg(double x)
{
    constexpr double inv_ln2 = 1.4426950408889634;
    if (x > 36.0)
        return std::exp(-x) * inv_ln2;
    if (x < -36.0)
        return -x * inv_ln2;
    return std::log1p(std::exp(-x)) * inv_ln2;
}

inline double j_integrand(double l, double sigma)
{
    double var = sigma * sigma;
    double d = l - var / 2.0;
    double pdf = std::exp(-d * d / (2.0 * var)) / std::sqrt(2.0 * kPi * var);
    return pdf * log2_1p_exp_neg(l);
}

inline double simpson(double a, double b, int segments, double sigma)
{
    double h = (b - a) / segments;
    double acc = j_integrand(a, sigma) + j_integrand(b, sigma);
    for (int i = 1; i < segments; ++i)
        acc += j_integrand(a + i * h, sigma) * ((i % 2) ? 4.0 : 2.0);
    return acc * h / 3.0;
}

} // namespace detail

constexpr double kJSolverCap = 60.0;

// Mutual information of a binary-input channel whose LLRs are Gaussian with
// mean sigma^2/2 and variance sigma^2. Numerically integrated and cached.
inline double j_function(double sigma)
{
    if (sigma <= 0.0)
        return 0.0;
    if (sigma >= kJSolverCap)
        return 1.0;
    static std::map<long long, double> cache;
    static std::mutex mtx;
    long long key = (long long)(sigma * 1e9);
    {
        std::lock_guard<std::mutex> lock(mtx);
        auto it = cache.find(key);
        if (it != cache.end())
            return it->second;
    }
    double mean = sigma * sigma / 2.0;
    double lo = mean - 12.0 * sigma;
    double hi = mean + 12.0 * sigma;
    // fixed fine grid; the integrand is smooth and light-tailed
    double value = 1.0 - detail::simpson(lo, hi, 4096, sigma);
    value = std::min(1.0, std::max(0.0, value));
    std::lock_guard<std::mutex> lock(mtx);
    cache[key] = value;
    return value;
}

// Inverse of j_function by bisection.
inline double j_inverse(double target)
{
    if (target <= 0.0)
        return 0.0;
    if (target >= 1.0)
        return kJSolverCap;
    double lo = 0.0, hi = kJSolverCap;
    while (hi - lo > 1e-6)
    {
        double mid = 0.5 * (lo + hi);
        if (j_function(mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Synthetic a-priori LLRs with prescribed mutual information against the
// given bits: L = (1 - 2b) * sigma^2/2 + sigma * z.
inline std::vector<double> generate_apriori_llrs(const std::vector<std::uint8_t> &bits,
                                                 double target_mi, Rng &rng)
{
    double sigma = j_inverse(target_mi);
    std::vector<double> llrs(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i)
        llrs[i] = (1.0 - 2.0 * bits[i]) * sigma * sigma / 2.0 + sigma * rng.gaussian();
    return llrs;
}

// Sample-mean mutual information estimate between bits and their LLRs.
inline double estimate_mi(const std::vector<double> &llrs, const std::vector<std::uint8_t> &bits)
{
    if (llrs.size() != bits.size())
        throw std::invalid_argument("LLR/bit length mismatch");
    if (llrs.empty())
        return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < llrs.size(); ++i)
        acc += detail::log2_1p_exp_neg((1.0 - 2.0 * bits[i]) * llrs[i]);
    double mi = 1.0 - acc / double(llrs.size());
    return std::min(1.0, std::max(0.0, mi));
}

struct ExitCurve
{
    std::string kind;           // detector-stationary | detector-mobile | decoder
    double fixed_cross_mi = 0.0; // cross-group a-priori MI the curve was traced at
    std::vector<std::pair<double, double>> samples; // (I_in, I_out)

    // linear interpolation over the sample grid
    double at(double x) const
    {
        if (samples.empty())
            return 0.0;
        if (x <= samples.front().first)
            return samples.front().second;
        for (std::size_t i = 1; i < samples.size(); ++i)
            if (x <= samples[i].first)
            {
                auto [x0, y0] = samples[i - 1];
                auto [x1, y1] = samples[i];
                double w = (x1 > x0) ? (x - x0) / (x1 - x0) : 0.0;
                return y0 + w * (y1 - y0);
            }
        return samples.back().second;
    }
};

} // namespace ddnoma

#endif
