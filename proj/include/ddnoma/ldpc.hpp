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

#ifndef DDNOMA_LDPC_HPP
#define DDNOMA_LDPC_HPP

#include <algorithm>
#include <cstdint>
#include <ostream>
#include <vector>

#include "common.hpp"
#include "softbits.hpp"

namespace ddnoma {

// Binary sparse parity-check matrix in adjacency-list form.
struct ParityMatrix
{
    int n = 0; // variable nodes (columns)
    int m = 0; // check nodes (rows)
    std::vector<std::vector<int>> rows; // column indices per check
    std::vector<std::vector<int>> cols; // check indices per variable

    bool syndrome_ok(const std::vector<std::uint8_t> &word) const
    {
        for (const auto &row : rows)
        {
            int parity = 0;
            for (int c : row)
                parity ^= word[c];
            if (parity)
                return false;
        }
        return true;
    }
};

// Progressive edge-growth construction of a (d_v, d_c)-regular Tanner graph.
// Each new edge attaches the variable to a check that is farthest from it in
// the graph built so far (unreachable checks first), breaking ties toward
// low check degree and then by seeded draw, so the result is deterministic
// for a fixed seed.
inline ParityMatrix peg_construct(int n, int d_v, int d_c, Rng &rng)
{
    if (n < 1 || d_v < 1 || d_c < 1 || (std::int64_t(n) * d_v) % d_c != 0)
        throw std::invalid_argument("infeasible LDPC degree pair");
    const int m = int(std::int64_t(n) * d_v / d_c);

    ParityMatrix h;
    h.n = n;
    h.m = m;
    h.rows.resize(m);
    h.cols.resize(n);

    std::vector<char> check_seen(m), var_seen(n);
    std::vector<int> frontier, next_frontier, last_level, candidates;

    for (int v = 0; v < n; ++v)
    {
        for (int t = 0; t < d_v; ++t)
        {
            candidates.clear();
            if (t == 0)
            {
                for (int c = 0; c < m; ++c)
                    candidates.push_back(c);
            }
            else
            {
                // BFS over the bipartite graph starting from v
                std::fill(check_seen.begin(), check_seen.end(), 0);
                std::fill(var_seen.begin(), var_seen.end(), 0);
                var_seen[v] = 1;
                frontier.clear();
                for (int c : h.cols[v])
                    if (!check_seen[c])
                    {
                        check_seen[c] = 1;
                        frontier.push_back(c);
                    }
                last_level = frontier;
                while (!frontier.empty())
                {
                    next_frontier.clear();
                    for (int c : frontier)
                        for (int v2 : h.rows[c])
                        {
                            if (var_seen[v2])
                                continue;
                            var_seen[v2] = 1;
                            for (int c2 : h.cols[v2])
                                if (!check_seen[c2])
                                {
                                    check_seen[c2] = 1;
                                    next_frontier.push_back(c2);
                                }
                        }
                    if (next_frontier.empty())
                        break;
                    last_level = next_frontier;
                    frontier.swap(next_frontier);
                }

                for (int c = 0; c < m; ++c)
                    if (!check_seen[c])
                        candidates.push_back(c);
                if (candidates.empty())
                {
                    // whole graph reachable: take the deepest BFS level,
                    // excluding checks already adjacent to v
                    for (int c : last_level)
                        if (std::find(h.cols[v].begin(), h.cols[v].end(), c) == h.cols[v].end())
                            candidates.push_back(c);
                }
                if (candidates.empty())
                {
                    for (int c = 0; c < m; ++c)
                        if (std::find(h.cols[v].begin(), h.cols[v].end(), c) == h.cols[v].end())
                            candidates.push_back(c);
                }
                if (candidates.empty())
                    throw std::runtime_error("PEG cannot place edge without a parallel edge");
            }

            // lowest current degree, seeded tie break
            int best_deg = n + 1;
            for (int c : candidates)
                best_deg = std::min(best_deg, int(h.rows[c].size()));
            int count = 0;
            for (int c : candidates)
                if (int(h.rows[c].size()) == best_deg)
                    candidates[count++] = c;
            int chosen = candidates[rng.below(count)];

            h.rows[chosen].push_back(v);
            h.cols[v].push_back(chosen);
        }
    }
    for (auto &row : h.rows)
        std::sort(row.begin(), row.end());
    return h;
}

// Standard alist text serialization.
inline void write_alist(const ParityMatrix &h, std::ostream &os)
{
    std::size_t max_col = 0, max_row = 0;
    for (const auto &c : h.cols)
        max_col = std::max(max_col, c.size());
    for (const auto &r : h.rows)
        max_row = std::max(max_row, r.size());
    os << h.n << ' ' << h.m << '\n' << max_col << ' ' << max_row << '\n';
    for (int v = 0; v < h.n; ++v)
        os << h.cols[v].size() << (v + 1 < h.n ? ' ' : '\n');
    for (int c = 0; c < h.m; ++c)
        os << h.rows[c].size() << (c + 1 < h.m ? ' ' : '\n');
    for (int v = 0; v < h.n; ++v)
    {
        for (std::size_t i = 0; i < max_col; ++i)
            os << (i < h.cols[v].size() ? h.cols[v][i] + 1 : 0) << (i + 1 < max_col ? ' ' : '\n');
    }
    for (int c = 0; c < h.m; ++c)
    {
        for (std::size_t i = 0; i < max_row; ++i)
            os << (i < h.rows[c].size() ? h.rows[c][i] + 1 : 0) << (i + 1 < max_row ? ' ' : '\n');
    }
}

struct DecodeResult
{
    std::vector<std::uint8_t> hard;     // full codeword decision
    std::vector<double> posterior;      // final per-bit LLR
    std::vector<double> extrinsic;      // posterior minus input, clamped
    bool converged = false;
    int iterations = 0;
};

// Sum-product decoding with a flooding schedule. Stops early once the hard
// decision satisfies every check.
inline DecodeResult bp_decode(const std::vector<double> &llr_in, const ParityMatrix &h,
                              int max_iter)
{
    const int n = h.n;
    if (int(llr_in.size()) != n)
        throw std::invalid_argument("LLR length does not match code length");

    // flat edge storage, grouped by check
    std::vector<int> edge_var, row_start;
    row_start.reserve(h.m + 1);
    row_start.push_back(0);
    for (const auto &row : h.rows)
    {
        for (int v : row)
            edge_var.push_back(v);
        row_start.push_back(int(edge_var.size()));
    }
    const int n_edges = int(edge_var.size());
    std::vector<double> var_to_chk(n_edges), chk_to_var(n_edges, 0.0);
    for (int c = 0; c < h.m; ++c)
        for (int e = row_start[c]; e < row_start[c + 1]; ++e)
            var_to_chk[e] = llr_in[edge_var[e]];

    DecodeResult res;
    res.hard = hard_decisions(llr_in);
    res.posterior = llr_in;
    res.extrinsic.assign(n, 0.0);
    if (max_iter <= 0)
    {
        res.converged = h.syndrome_ok(res.hard);
        return res;
    }

    std::vector<double> fwd, bwd;
    std::vector<double> posterior(n);
    for (int iter = 1; iter <= max_iter; ++iter)
    {
        // check update: leave-one-out tanh products via forward/backward scan
        for (int c = 0; c < h.m; ++c)
        {
            int lo = row_start[c], hi = row_start[c + 1];
            int deg = hi - lo;
            if (deg == 0)
                continue;
            fwd.assign(deg, 1.0);
            bwd.assign(deg, 1.0);
            for (int i = 1; i < deg; ++i)
                fwd[i] = fwd[i - 1] * std::tanh(0.5 * var_to_chk[lo + i - 1]);
            for (int i = deg - 2; i >= 0; --i)
                bwd[i] = bwd[i + 1] * std::tanh(0.5 * var_to_chk[lo + i + 1]);
            for (int i = 0; i < deg; ++i)
            {
                double t = fwd[i] * bwd[i];
                t = std::max(-0.999999999999, std::min(0.999999999999, t));
                chk_to_var[lo + i] = 2.0 * std::atanh(t);
            }
        }

        // variable update and posterior
        std::fill(posterior.begin(), posterior.end(), 0.0);
        for (int e = 0; e < n_edges; ++e)
            posterior[edge_var[e]] += chk_to_var[e];
        for (int v = 0; v < n; ++v)
            posterior[v] += llr_in[v];
        for (int e = 0; e < n_edges; ++e)
            var_to_chk[e] = clamp_llr(posterior[edge_var[e]] - chk_to_var[e]);

        for (int v = 0; v < n; ++v)
            res.hard[v] = (posterior[v] < 0.0) ? 1 : 0;
        res.iterations = iter;
        if (h.syndrome_ok(res.hard))
        {
            res.converged = true;
            break;
        }
    }

    res.posterior = posterior;
    for (int v = 0; v < n; ++v)
        res.extrinsic[v] = clamp_llr(posterior[v] - llr_in[v]);
    return res;
}

namespace detail {

// GF(2) row reduction on bit-packed rows; returns pivot column per row or -1.
class Gf2Matrix
{
  public:
    Gf2Matrix(int rows, int cols)
        : rows_(rows), cols_(cols), words_((cols + 63) / 64), data_(std::size_t(rows) * words_, 0)
    {
    }

    void set(int r, int c) { data_[std::size_t(r) * words_ + c / 64] |= 1ULL << (c % 64); }
    bool get(int r, int c) const
    {
        return (data_[std::size_t(r) * words_ + c / 64] >> (c % 64)) & 1ULL;
    }
    void xor_rows(int dst, int src)
    {
        auto *d = &data_[std::size_t(dst) * words_];
        const auto *s = &data_[std::size_t(src) * words_];
        for (int w = 0; w < words_; ++w)
            d[w] ^= s[w];
    }
    void swap_rows(int a, int b)
    {
        for (int w = 0; w < words_; ++w)
            std::swap(data_[std::size_t(a) * words_ + w], data_[std::size_t(b) * words_ + w]);
    }

    // reduced row echelon form; returns pivot columns in row order
    std::vector<int> rref()
    {
        std::vector<int> pivots;
        int row = 0;
        for (int col = 0; col < cols_ && row < rows_; ++col)
        {
            int sel = -1;
            for (int r = row; r < rows_; ++r)
                if (get(r, col))
                {
                    sel = r;
                    break;
                }
            if (sel < 0)
                continue;
            swap_rows(sel, row);
            for (int r = 0; r < rows_; ++r)
                if (r != row && get(r, col))
                    xor_rows(r, row);
            pivots.push_back(col);
            ++row;
        }
        return pivots;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

  private:
    int rows_, cols_, words_;
    std::vector<std::uint64_t> data_;
};

} // namespace detail

// Regular LDPC code with systematic encoding derived from the reduced parity
// matrix. Construction retries with fresh seeds until the parity matrix has
// full row rank.
class LdpcCode
{
  public:
    static LdpcCode build(int n, int d_v, int d_c, std::uint64_t seed, int max_attempts = 16)
    {
        for (int attempt = 0; attempt < max_attempts; ++attempt)
        {
            Rng rng(derive_seed(seed, attempt));
            ParityMatrix h = peg_construct(n, d_v, d_c, rng);
            LdpcCode code;
            if (code.init_encoding(std::move(h)))
                return code;
        }
        throw std::runtime_error("failed to build a full-rank LDPC parity matrix");
    }

    int n() const { return h_.n; }
    int k() const { return h_.n - h_.m; }
    const ParityMatrix &parity() const { return h_; }
    const std::vector<int> &info_positions() const { return info_positions_; }

    std::vector<std::uint8_t> encode(const std::vector<std::uint8_t> &info) const
    {
        if (int(info.size()) != k())
            throw std::invalid_argument("info word length mismatch");
        std::vector<std::uint8_t> cw(h_.n, 0);
        for (int i = 0; i < k(); ++i)
            cw[info_positions_[i]] = info[i] & 1;
        for (std::size_t r = 0; r < parity_positions_.size(); ++r)
        {
            int acc = 0;
            for (int c : parity_deps_[r])
                acc ^= cw[c];
            cw[parity_positions_[r]] = std::uint8_t(acc);
        }
        return cw;
    }

    std::vector<std::uint8_t> extract_info(const std::vector<std::uint8_t> &cw) const
    {
        std::vector<std::uint8_t> info(k());
        for (int i = 0; i < k(); ++i)
            info[i] = cw[info_positions_[i]];
        return info;
    }

    DecodeResult decode(const std::vector<double> &llr_in, int max_iter = 100) const
    {
        return bp_decode(llr_in, h_, max_iter);
    }

  private:
    bool init_encoding(ParityMatrix h)
    {
        detail::Gf2Matrix g(h.m, h.n);
        for (int c = 0; c < h.m; ++c)
            for (int v : h.rows[c])
                g.set(c, v);
        std::vector<int> pivots = g.rref();
        if (int(pivots.size()) != h.m)
            return false;

        h_ = std::move(h);
        parity_positions_ = pivots;
        std::vector<char> is_pivot(h_.n, 0);
        for (int p : pivots)
            is_pivot[p] = 1;
        info_positions_.clear();
        for (int c = 0; c < h_.n; ++c)
            if (!is_pivot[c])
                info_positions_.push_back(c);

        parity_deps_.assign(pivots.size(), {});
        for (std::size_t r = 0; r < pivots.size(); ++r)
            for (int c = 0; c < h_.n; ++c)
                if (c != pivots[r] && g.get(int(r), c))
                    parity_deps_[r].push_back(c);
        return true;
    }

    ParityMatrix h_;
    std::vector<int> info_positions_;
    std::vector<int> parity_positions_;
    std::vector<std::vector<int>> parity_deps_;
};

} // namespace ddnoma

#endif
