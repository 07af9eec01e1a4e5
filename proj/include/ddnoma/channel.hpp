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

#ifndef DDNOMA_CHANNEL_HPP
#define DDNOMA_CHANNEL_HPP

#include <armadillo>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common.hpp"
#include "config.hpp"

namespace ddnoma {

// Raised-cosine taps are truncated beyond this many sample intervals from the
// pulse center; sidelobes there are below -40 dB for rolloff 0.4.
constexpr int kRcSpanSamples = 4;

// Raised-cosine pulse value at time t, symbol interval t_s. Total function:
// the removable singularities at t = +-t_s/(2*rolloff) and t = 0 evaluate to
// their analytic limits.
inline double sample_rc(double t, double rolloff, double t_s)
{
    double x = t / t_s;
    double sinc = (std::abs(x) < 1e-12) ? 1.0 : std::sin(kPi * x) / (kPi * x);
    if (rolloff <= 0.0)
        return sinc;
    double denom = 1.0 - 4.0 * rolloff * rolloff * x * x;
    if (std::abs(denom) < 1e-9)
        return (rolloff / 2.0) * std::sin(kPi / (2.0 * rolloff));
    return sinc * std::cos(kPi * rolloff * x) / denom;
}

enum class Mobility
{
    stationary,
    mobile
};

struct Path
{
    cx gain{0.0, 0.0};
    double delay_s = 0.0;
    double doppler_hz = 0.0;
};

struct PathSet
{
    std::vector<Path> paths;
    double timing_offset_s = 0.0;
    Mobility mobility = Mobility::stationary;
    int owner = -1; // user id, informational

    double max_delay() const
    {
        double d = 0.0;
        for (const auto &p : paths)
            d = std::max(d, p.delay_s);
        return d;
    }
};

// Exponential power delay profile with continuous (off-grid) delays; Doppler
// shifts follow the classical cosine-of-random-angle model for mobile users.
struct ChannelProfile
{
    Mobility mobility = Mobility::stationary;
    int num_paths = 6;
    double max_delay_s = 5e-6;
    double decay_s = 1e-6;
    double max_doppler_hz = 0.0;
};

inline ChannelProfile typical_urban_profile(Mobility mobility, double max_doppler_hz = 0.0)
{
    ChannelProfile p;
    p.mobility = mobility;
    p.max_doppler_hz = (mobility == Mobility::mobile) ? max_doppler_hz : 0.0;
    return p;
}

inline double doppler_for_velocity(double velocity_kmh, double carrier_freq)
{
    return velocity_kmh / 3.6 * carrier_freq / kSpeedOfLight;
}

// Draws one channel realization. Mean path powers are proportional to
// exp(-delay/decay) and normalized per draw so the expected total path power
// is exactly one.
inline PathSet draw_paths(const ChannelProfile &profile, Rng &rng)
{
    if (profile.num_paths < 1)
        throw std::invalid_argument("channel profile needs at least one path");
    if (profile.max_delay_s <= 0.0 || profile.decay_s <= 0.0)
        throw std::invalid_argument("delay profile parameters must be positive");

    PathSet set;
    set.mobility = profile.mobility;
    set.paths.resize(profile.num_paths);

    std::vector<double> delays(profile.num_paths);
    double power_sum = 0.0;
    for (int i = 0; i < profile.num_paths; ++i)
    {
        delays[i] = rng.uniform(0.0, profile.max_delay_s);
        power_sum += std::exp(-delays[i] / profile.decay_s);
    }
    for (int i = 0; i < profile.num_paths; ++i)
    {
        double power = std::exp(-delays[i] / profile.decay_s) / power_sum;
        Path &p = set.paths[i];
        p.delay_s = delays[i];
        p.gain = std::sqrt(power) * rng.cgaussian();
        if (profile.mobility == Mobility::mobile)
            p.doppler_hz = profile.max_doppler_hz * std::cos(rng.uniform(-kPi, kPi));
        else
            p.doppler_hz = 0.0;
    }
    return set;
}

// One path's pulse samples on the receive grid: g[p] = P_rc(p*T_s - t - tau),
// hard-windowed to +-kRcSpanSamples around the pulse center and clipped to
// p >= 0. Samples that are exact Nyquist zeros are omitted, so on-grid
// delays contribute a single tap.
struct PathTaps
{
    cx gain;
    double doppler_hz;
    std::vector<std::pair<int, double>> taps; // (p, pulse value)
};

inline std::vector<PathTaps> sampled_path_taps(const PathSet &set, const SystemConfig &cfg)
{
    const double t_s = cfg.sample_interval();
    std::vector<PathTaps> out;
    out.reserve(set.paths.size());
    for (const auto &path : set.paths)
    {
        PathTaps pt;
        pt.gain = path.gain;
        pt.doppler_hz = path.doppler_hz;
        double center = (set.timing_offset_s + path.delay_s) / t_s;
        int lo = std::max(0, int(std::ceil(center - kRcSpanSamples)));
        int hi = int(std::floor(center + kRcSpanSamples));
        for (int p = lo; p <= hi; ++p)
        {
            double g = sample_rc((p - center) * t_s, cfg.rolloff, t_s);
            if (std::abs(g) > 1e-12)
                pt.taps.emplace_back(p, g);
        }
        out.push_back(std::move(pt));
    }
    return out;
}

inline int tap_count(const std::vector<PathTaps> &per_path)
{
    int last = 0;
    for (const auto &pt : per_path)
        for (auto [p, g] : pt.taps)
            last = std::max(last, p);
    return last + 1;
}

// Effective channel memory in samples; the frame's delay axis must cover it.
inline int tap_count(const PathSet &set, const SystemConfig &cfg)
{
    int p = tap_count(sampled_path_taps(set, cfg));
    if (p > cfg.M)
        throw ConfigError("channel delay spread exceeds the delay axis span");
    return p;
}

// Sampled impulse response h[c, p]. Stationary channels carry a single row
// (no c dependence); mobile channels carry one row per output sample of the
// CP-stripped frame.
struct SampledChannel
{
    arma::cx_mat taps;      // (time_varying ? M*N : 1) x P
    int num_taps = 0;       // P
    bool time_varying = false;

    cx at(int c, int p) const { return time_varying ? taps(c, p) : taps(0, p); }
};

inline SampledChannel sample_channel_taps(const PathSet &set, const SystemConfig &cfg)
{
    const double t_s = cfg.sample_interval();
    const int frame = cfg.frame_size();
    auto per_path = sampled_path_taps(set, cfg);

    SampledChannel ch;
    ch.num_taps = tap_count(per_path);
    if (ch.num_taps > cfg.M)
        throw ConfigError("channel delay spread exceeds the delay axis span");
    ch.time_varying = (set.mobility == Mobility::mobile);
    ch.taps.zeros(ch.time_varying ? frame : 1, ch.num_taps);

    for (const auto &pt : per_path)
    {
        if (!ch.time_varying)
        {
            for (auto [p, g] : pt.taps)
                ch.taps(0, p) += pt.gain * g;
        }
        else
        {
            for (auto [p, g] : pt.taps)
            {
                cx base = pt.gain * g;
                for (int c = 0; c < frame; ++c)
                    ch.taps(c, p) += base * unit_phasor(2.0 * kPi * pt.doppler_hz * (c - p) * t_s);
            }
        }
    }
    return ch;
}

inline void add_awgn(arma::cx_vec &signal, double noise_var, Rng &rng)
{
    if (noise_var <= 0.0)
        return;
    double scale = std::sqrt(noise_var);
    for (auto &v : signal)
        v += scale * rng.cgaussian();
}

// Passes a CP-prefixed frame through the channel by linear convolution and
// adds white noise. Doppler phases are referenced to the first post-CP
// sample, so after CP removal the received frame obeys the cyclic relation
// r[c] = sum_p h[c, p] * s[(c - p) mod MN] + n[c].
inline arma::cx_vec transmit_through(const arma::cx_vec &s_with_cp, const SampledChannel &ch,
                                     int l_cp, double noise_var, Rng &rng)
{
    if (l_cp < ch.num_taps - 1)
        throw std::invalid_argument("cyclic prefix shorter than channel memory");
    const int total = int(s_with_cp.n_elem);
    arma::cx_vec r(total, arma::fill::zeros);
    for (int g = 0; g < total; ++g)
    {
        int c = g - l_cp; // frame-relative output index
        // taps are tabulated for c in [0, MN); CP-region output samples reuse
        // the c = 0 row and are discarded by remove_cp anyway
        int row = ch.time_varying ? std::max(c, 0) : 0;
        cx acc = 0.0;
        for (int p = 0; p < ch.num_taps && p <= g; ++p)
            acc += ch.taps(row, p) * s_with_cp[g - p];
        r[g] = acc;
    }
    add_awgn(r, noise_var, rng);
    return r;
}

// Receiver-side channel knowledge with norm-bounded errors: every gain,
// delay and Doppler value is displaced by a perturbation no larger than
// eps times its own magnitude.
inline PathSet perturb_csi(const PathSet &set, double eps, Rng &rng)
{
    if (eps < 0.0)
        throw std::invalid_argument("csi error bound must be non-negative");
    PathSet out = set;
    if (eps == 0.0)
        return out;
    for (auto &p : out.paths)
    {
        // complex gain: uniform draw in the disk of radius eps*|gain|
        double radius = eps * std::abs(p.gain) * std::sqrt(rng.uniform());
        double angle = rng.uniform(-kPi, kPi);
        p.gain += radius * unit_phasor(angle);
        p.delay_s += rng.uniform(-1.0, 1.0) * eps * std::abs(p.delay_s);
        p.doppler_hz += rng.uniform(-1.0, 1.0) * eps * std::abs(p.doppler_hz);
        if (p.delay_s < 0.0)
            p.delay_s = 0.0;
    }
    return out;
}

inline nlohmann::json pathset_to_json(const PathSet &set)
{
    nlohmann::json j;
    j["timing_offset_s"] = set.timing_offset_s;
    j["mobility"] = (set.mobility == Mobility::mobile) ? "mobile" : "stationary";
    j["owner"] = set.owner;
    j["paths"] = nlohmann::json::array();
    for (const auto &p : set.paths)
        j["paths"].push_back({{"gain_re", p.gain.real()},
                              {"gain_im", p.gain.imag()},
                              {"delay_s", p.delay_s},
                              {"doppler_hz", p.doppler_hz}});
    return j;
}

inline PathSet pathset_from_json(const nlohmann::json &j)
{
    PathSet set;
    set.timing_offset_s = j.at("timing_offset_s").get<double>();
    set.mobility = (j.at("mobility").get<std::string>() == "mobile") ? Mobility::mobile
                                                                     : Mobility::stationary;
    set.owner = j.value("owner", -1);
    for (const auto &pj : j.at("paths"))
    {
        Path p;
        p.gain = cx(pj.at("gain_re").get<double>(), pj.at("gain_im").get<double>());
        p.delay_s = pj.at("delay_s").get<double>();
        p.doppler_hz = pj.at("doppler_hz").get<double>();
        set.paths.push_back(p);
    }
    return set;
}

} // namespace ddnoma

#endif
