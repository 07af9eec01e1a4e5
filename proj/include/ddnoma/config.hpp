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

#ifndef DDNOMA_CONFIG_HPP
#define DDNOMA_CONFIG_HPP

#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include "common.hpp"

namespace ddnoma {

struct ConfigError : std::runtime_error
{
    explicit ConfigError(const std::string &msg) : std::runtime_error(msg) {}
};

// Frame geometry, power levels and modem parameters shared by every stage of
// the chain. Delay axis has M bins (subcarriers), Doppler axis has N bins
// (time slots); sampling interval is T_s = 1/(M*delta_f) and slot duration
// T = 1/delta_f.
struct SystemConfig
{
    int M = 32;                  // delay bins / subcarriers
    int N = 8;                   // Doppler bins / time slots
    double delta_f = 15e3;       // subcarrier spacing [Hz]
    double carrier_freq = 4e9;   // [Hz]
    double rolloff = 0.4;        // RRC rolloff in [0, 1]
    int Q = 4;                   // constellation size (4 or 16)
    int U = 2;                   // stationary users
    int V = 2;                   // mobile users
    double P_S = 1.0;            // mean symbol energy, stationary group
    double P_M = 1.0;            // mean symbol energy, mobile group
    double noise_var = 1.0;      // N0 per complex sample
    double code_rate = 0.5;
    std::uint64_t seed = 1;

    double slot_duration() const { return 1.0 / delta_f; }              // T
    double sample_interval() const { return 1.0 / (M * delta_f); }      // T_s
    double frame_duration() const { return N / delta_f; }               // T_f
    double bandwidth() const { return M * delta_f; }                    // B
    int frame_size() const { return M * N; }
    int bits_per_symbol() const { return (Q == 4) ? 2 : 4; }

    // Per-bit energies E_x = P_x / (log2(Q) * code_rate)
    double bit_energy_stationary() const { return P_S / (bits_per_symbol() * code_rate); }
    double bit_energy_mobile() const { return P_M / (bits_per_symbol() * code_rate); }

    // Sets P_M and P_S from the sweep axes E_M/N0 [dB] and E_S/E_M [dB].
    void set_energy_ratios(double em_n0_db, double es_em_db)
    {
        double e_m = noise_var * db_to_linear(em_n0_db);
        P_M = e_m * bits_per_symbol() * code_rate;
        P_S = P_M * db_to_linear(es_em_db);
    }

    void validate() const
    {
        if (M < 1 || N < 1)
            throw ConfigError("M and N must be >= 1");
        if (delta_f <= 0.0)
            throw ConfigError("delta_f must be positive");
        if (rolloff < 0.0 || rolloff > 1.0)
            throw ConfigError("rolloff must lie in [0, 1]");
        if (Q != 4 && Q != 16)
            throw ConfigError("unsupported constellation size (expected 4 or 16)");
        if (P_S <= 0.0 || P_M <= 0.0)
            throw ConfigError("symbol energies must be positive");
        if (noise_var <= 0.0)
            throw ConfigError("noise_var must be positive");
        if (code_rate <= 0.0 || code_rate > 1.0)
            throw ConfigError("code_rate must lie in (0, 1]");
        if (U < 0 || V < 0)
            throw ConfigError("user counts must be non-negative");
        if (U > 0 && N % U != 0)
            throw ConfigError("U must divide N for equal Doppler allocation");
        if (V > 0 && M % V != 0)
            throw ConfigError("V must divide M for equal delay allocation");
    }
};

namespace detail {

inline std::string trim(const std::string &s)
{
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos)
        return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

} // namespace detail

// Applies a single "key = value" pair; keys mirror the SystemConfig fields.
inline void apply_config_entry(SystemConfig &cfg, const std::string &key, const std::string &value)
{
    auto as_int = [&](const char *name) {
        try
        {
            return std::stoi(value);
        }
        catch (...)
        {
            throw ConfigError(std::string("invalid integer for ") + name + ": " + value);
        }
    };
    auto as_double = [&](const char *name) {
        try
        {
            return std::stod(value);
        }
        catch (...)
        {
            throw ConfigError(std::string("invalid number for ") + name + ": " + value);
        }
    };

    if (key == "M")
        cfg.M = as_int("M");
    else if (key == "N")
        cfg.N = as_int("N");
    else if (key == "delta_f")
        cfg.delta_f = as_double("delta_f");
    else if (key == "carrier_freq")
        cfg.carrier_freq = as_double("carrier_freq");
    else if (key == "rolloff")
        cfg.rolloff = as_double("rolloff");
    else if (key == "Q")
        cfg.Q = as_int("Q");
    else if (key == "U")
        cfg.U = as_int("U");
    else if (key == "V")
        cfg.V = as_int("V");
    else if (key == "P_S")
        cfg.P_S = as_double("P_S");
    else if (key == "P_M")
        cfg.P_M = as_double("P_M");
    else if (key == "noise_var")
        cfg.noise_var = as_double("noise_var");
    else if (key == "code_rate")
        cfg.code_rate = as_double("code_rate");
    else if (key == "seed")
        cfg.seed = std::uint64_t(std::stoull(value));
    else
        throw ConfigError("unknown configuration key: " + key);
}

// Reads "key = value" lines; '#' starts a comment, blank lines are ignored.
inline SystemConfig load_config_file(const std::string &path, SystemConfig base = SystemConfig{})
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line))
    {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos)
            line.erase(hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        std::string key = detail::trim(line.substr(0, eq));
        std::string value = detail::trim(line.substr(eq + 1));
        apply_config_entry(base, key, value);
    }
    return base;
}

} // namespace ddnoma

#endif
