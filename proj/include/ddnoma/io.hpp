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

#ifndef DDNOMA_IO_HPP
#define DDNOMA_IO_HPP

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "config.hpp"

namespace ddnoma {

// Fixed-format number rendering so repeated runs emit byte-identical tables.
inline std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

class CsvWriter
{
  public:
    CsvWriter(const std::string &path, const std::vector<std::string> &header) : out_(path)
    {
        if (!out_)
            throw std::runtime_error("cannot open output file: " + path);
        write_strings(header);
    }

    void write_row(const std::vector<double> &values)
    {
        std::vector<std::string> cells;
        cells.reserve(values.size());
        for (double v : values)
            cells.push_back(format_number(v));
        write_strings(cells);
    }

    void write_strings(const std::vector<std::string> &cells)
    {
        for (std::size_t i = 0; i < cells.size(); ++i)
        {
            if (i)
                out_ << ',';
            out_ << cells[i];
        }
        out_ << '\n';
    }

  private:
    std::ofstream out_;
};

inline std::string git_describe()
{
    FILE *pipe = ::popen("git describe --always --dirty 2>/dev/null", "r");
    if (!pipe)
        return "unknown";
    char buf[128] = {0};
    std::string out;
    while (std::fgets(buf, sizeof(buf), pipe))
        out += buf;
    ::pclose(pipe);
    while (!out.empty() && (out.back() == '\n' || out.back() == '\r'))
        out.pop_back();
    return out.empty() ? "unknown" : out;
}

inline nlohmann::json config_to_json(const SystemConfig &cfg)
{
    return {{"M", cfg.M},
            {"N", cfg.N},
            {"delta_f", cfg.delta_f},
            {"carrier_freq", cfg.carrier_freq},
            {"rolloff", cfg.rolloff},
            {"Q", cfg.Q},
            {"U", cfg.U},
            {"V", cfg.V},
            {"P_S", cfg.P_S},
            {"P_M", cfg.P_M},
            {"noise_var", cfg.noise_var},
            {"code_rate", cfg.code_rate},
            {"seed", cfg.seed}};
}

// Sidecar describing one experiment run.
inline void write_metadata(const std::string &path, const SystemConfig &cfg,
                           const std::string &command, double wall_seconds,
                           const nlohmann::json &extra = {})
{
    nlohmann::json j;
    j["config"] = config_to_json(cfg);
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["git"] = git_describe();
    j["wall_seconds"] = wall_seconds;
    if (!extra.is_null())
        j["params"] = extra;
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    out << j.dump(2) << '\n';
}

} // namespace ddnoma

#endif
