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

#ifndef DDNOMA_DETECTORS_HPP
#define DDNOMA_DETECTORS_HPP

#include <armadillo>
#include <vector>

#include "effective_channel.hpp"
#include "softbits.hpp"

namespace ddnoma {

struct GaussianMsg
{
    cx mean{0.0, 0.0};
    double var = 1.0;
};

struct DetectorParams
{
    double damping = 0.3;        // convex blend of new vs previous message
    double var_floor = 1e-8;     // minimum variance in flight
    double conv_threshold = 0.1; // a symbol counts as converged when its
                                 // posterior peak reaches 1 - conv_threshold
    int max_iter = 20;
};

struct DetectorOutput
{
    PmfMat posterior; // Q x n, taken from the best-indicator iterate
    PmfMat extrinsic; // Q x n, prior-free counterpart
    std::vector<double> alpha_trace;
    int iterations_used = 0;
    int skipped_updates = 0;      // variable updates dropped for negative variance
    int degenerate_extrinsic = 0; // factor-side divisions without information
    arma::cx_vec lmmse_mean;      // linear-stage posterior of the last iteration
    arma::vec lmmse_var;          // (block detectors only)
};

// Second moments of a symbol pmf, variance floored.
inline GaussianMsg gaussian_project(const arma::vec &pmf, const Alphabet &a, double var_floor)
{
    cx mean = 0.0;
    double power = 0.0;
    for (int x = 0; x < a.q; ++x)
    {
        mean += a.points[x] * pmf[x];
        power += std::norm(a.points[x]) * pmf[x];
    }
    return {mean, std::max(var_floor, power - std::norm(mean))};
}

inline void project_pmfs(const PmfMat &pmfs, const Alphabet &a, double var_floor,
                         arma::cx_vec &mean, arma::vec &var)
{
    mean.set_size(pmfs.n_cols);
    var.set_size(pmfs.n_cols);
    for (arma::uword c = 0; c < pmfs.n_cols; ++c)
    {
        GaussianMsg g = gaussian_project(pmfs.col(c), a, var_floor);
        mean[c] = g.mean;
        var[c] = g.var;
    }
}

// ---------------------------------------------------------------------------
// Interference cancellation
// ---------------------------------------------------------------------------

// Residual and the M x M diagonal blocks of noise_var*I + H diag(vars) H^H.
struct CancelBlocksResult
{
    arma::cx_vec residual;
    std::vector<arma::cx_mat> sigma_blocks;
};

inline std::vector<arma::cx_mat> interference_cov_blocks(const SparseChannelMatrix &h,
                                                         const arma::vec &vars, double noise_var,
                                                         int m)
{
    const int n_blocks = h.n_rows() / m;
    std::vector<arma::cx_mat> blocks(n_blocks);
    for (auto &b : blocks)
        b.zeros(m, m);
    for (int c = 0; c < h.n_cols(); ++c)
    {
        const auto &col = h.col(c);
        const double v = vars[c];
        if (v == 0.0 || col.empty())
            continue;
        for (std::size_t i = 0; i < col.size(); ++i)
        {
            const auto &[r1, h1] = col[i];
            const int blk = r1 / m;
            arma::cx_mat &b = blocks[blk];
            b(r1 % m, r1 % m) += v * std::norm(h1);
            for (std::size_t j = i + 1; j < col.size(); ++j)
            {
                const auto &[r2, h2] = col[j];
                if (r2 / m != blk)
                    continue;
                cx t = v * h1 * std::conj(h2);
                b(r1 % m, r2 % m) += t;
                b(r2 % m, r1 % m) += std::conj(t);
            }
        }
    }
    for (auto &b : blocks)
        b.diag() += noise_var;
    return blocks;
}

inline arma::vec interference_cov_diag(const SparseChannelMatrix &h, const arma::vec &vars,
                                       double noise_var)
{
    arma::vec diag(h.n_rows());
    diag.fill(noise_var);
    for (int d = 0; d < h.n_rows(); ++d)
        for (const auto &[c, v] : h.row(d))
            diag[d] += std::norm(v) * vars[c];
    return diag;
}

inline CancelBlocksResult cancel_interference_blocks(const arma::cx_vec &y,
                                                     const SparseChannelMatrix &h_other,
                                                     const arma::cx_vec &mean,
                                                     const arma::vec &var, double noise_var, int m)
{
    CancelBlocksResult out;
    out.residual = y - h_other.multiply(mean);
    out.sigma_blocks = interference_cov_blocks(h_other, var, noise_var, m);
    return out;
}

struct CancelDiagResult
{
    arma::cx_vec residual;
    arma::vec sigma_diag;
};

inline CancelDiagResult cancel_interference_diag(const arma::cx_vec &y,
                                                 const SparseChannelMatrix &h_other,
                                                 const arma::cx_vec &mean, const arma::vec &var,
                                                 double noise_var)
{
    CancelDiagResult out;
    out.residual = y - h_other.multiply(mean);
    out.sigma_diag = interference_cov_diag(h_other, var, noise_var);
    return out;
}

// ---------------------------------------------------------------------------
// OAMP-LMMSE detector (stationary group)
// ---------------------------------------------------------------------------

namespace detail {

// Bookkeeping shared by the detectors: keep the posterior/extrinsic pmfs of
// the iterate with the highest convergence indicator, first one on ties.
struct BestTracker
{
    double best_alpha = -1.0;

    bool offer(double alpha)
    {
        if (alpha > best_alpha)
        {
            best_alpha = alpha;
            return true;
        }
        return false;
    }
};

// log of exp(-|x - c|^2 / d) evaluated for every constellation point
inline void likelihood_log(const Alphabet &a, cx c, double d, arma::vec &out)
{
    for (int x = 0; x < a.q; ++x)
        out[x] = -std::norm(a.points[x] - c) / d;
}

inline void normalize_log_pmf(arma::vec &logp)
{
    logp -= logp.max();
    logp = arma::exp(logp);
    logp /= arma::accu(logp);
}

} // namespace detail

// Runs the factor-node LMMSE / variable-node projection loop independently on
// each block of an "ISI-free" block channel. y, priors and the output are in
// block order (block k covers entries k*m .. k*m + m - 1).
inline DetectorOutput oamp_lmmse_detect(const arma::cx_vec &y,
                                        const std::vector<arma::cx_mat> &h_blocks,
                                        const std::vector<arma::cx_mat> &sigma_blocks,
                                        const PmfMat &priors, const Alphabet &a,
                                        const DetectorParams &prm, bool reduced = false,
                                        int doppler_bins = 0)
{
    const int n_blocks = int(h_blocks.size());
    const int m = n_blocks ? int(h_blocks.front().n_rows) : 0;
    const int total = n_blocks * m;
    if (int(y.n_elem) != total || int(priors.n_cols) != total)
        throw std::invalid_argument("block detector dimension mismatch");

    DetectorOutput out;
    out.posterior = priors;
    out.extrinsic = uniform_pmfs(a.q, total);
    out.alpha_trace.assign(prm.max_iter, 0.0);
    out.lmmse_mean.zeros(total);
    out.lmmse_var.zeros(total);

    const double var_cap = 1e12;
    std::vector<int> iters_per_block(n_blocks, 0);
    std::vector<double> final_alpha(n_blocks, 0.0);

    for (int blk = 0; blk < n_blocks; ++blk)
    {
        const arma::cx_mat &h = h_blocks[blk];
        const arma::cx_mat &sigma = sigma_blocks[blk];
        const int base = blk * m;

        arma::cx_vec mu(m);
        arma::vec eta(m);
        for (int i = 0; i < m; ++i)
        {
            GaussianMsg g = gaussian_project(priors.col(base + i), a, prm.var_floor);
            mu[i] = g.mean;
            eta[i] = g.var;
        }

        // constant pieces of the LMMSE stage
        arma::cx_mat sigma_inv = arma::inv(sigma);
        arma::cx_mat gram = h.t() * sigma_inv * h;
        arma::cx_vec w = h.t() * sigma_inv * y.subvec(base, base + m - 1);

        // reduced variant: scalar covariance and diagonalized Gram
        arma::cx_mat u;
        arma::cx_vec hbar;
        double sigma_bar = 0.0;
        arma::cx_vec z_rot;
        if (reduced)
        {
            u = block_unitary(blk, m, doppler_bins);
            arma::cx_mat rotated = u * h * u.t();
            hbar = rotated.diag();
            sigma_bar = arma::mean(arma::real(sigma.diag()));
            z_rot = u * y.subvec(base, base + m - 1);
        }

        detail::BestTracker tracker;
        arma::vec loglik(a.q), logp(a.q);
        arma::cx_vec c_msg(m);
        arma::vec d_msg(m);

        for (int iter = 1; iter <= prm.max_iter; ++iter)
        {
            arma::cx_vec a_post(m);
            arma::vec b_diag(m);
            arma::vec prior_var = eta; // what the linear stage actually assumed
            if (!reduced)
            {
                arma::cx_mat b = arma::inv(gram + arma::diagmat(arma::cx_vec(1.0 / eta,
                                                                             arma::vec(m, arma::fill::zeros))));
                a_post = b * (w + mu / arma::cx_vec(eta, arma::vec(m, arma::fill::zeros)));
                b_diag = arma::real(b.diag());
            }
            else
            {
                const double eta_bar = arma::mean(eta);
                arma::vec dinv(m);
                for (int r = 0; r < m; ++r)
                    dinv[r] = 1.0 / (std::norm(hbar[r]) / sigma_bar + 1.0 / eta_bar);
                arma::cx_vec inner = arma::conj(hbar) % z_rot / sigma_bar + (u * mu) / eta_bar;
                a_post = u.t() * (arma::cx_vec(dinv, arma::vec(m, arma::fill::zeros)) % inner);
                b_diag.fill(arma::mean(dinv));
                prior_var.fill(eta_bar);
            }
            out.lmmse_mean.subvec(base, base + m - 1) = a_post;
            out.lmmse_var.subvec(base, base + m - 1) = b_diag;

            // factor-node extrinsic: remove the prior share the linear stage
            // consumed from its posterior
            for (int i = 0; i < m; ++i)
            {
                double denom = 1.0 / b_diag[i] - 1.0 / prior_var[i];
                if (denom <= 1.0 / var_cap)
                {
                    d_msg[i] = var_cap;
                    c_msg[i] = a_post[i];
                    ++out.degenerate_extrinsic;
                }
                else
                {
                    d_msg[i] = 1.0 / denom;
                    c_msg[i] = d_msg[i] * (a_post[i] / b_diag[i] - mu[i] / prior_var[i]);
                }
            }

            // variable nodes: discrete posterior, Gaussian projection and
            // damped extrinsic feedback
            int confident = 0;
            PmfMat post_blk(a.q, m), ext_blk(a.q, m);
            for (int i = 0; i < m; ++i)
            {
                detail::likelihood_log(a, c_msg[i], d_msg[i], loglik);
                logp = loglik;
                for (int x = 0; x < a.q; ++x)
                    logp[x] += std::log(std::max(priors(x, base + i), 1e-300));
                detail::normalize_log_pmf(logp);
                post_blk.col(i) = logp;
                if (logp.max() >= 1.0 - prm.conv_threshold)
                    ++confident;

                arma::vec ext_pmf = loglik;
                detail::normalize_log_pmf(ext_pmf);
                ext_blk.col(i) = ext_pmf;

                GaussianMsg proj = gaussian_project(post_blk.col(i), a, prm.var_floor);
                double lam_ext = 1.0 / proj.var - 1.0 / d_msg[i];
                if (lam_ext <= 0.0)
                {
                    ++out.skipped_updates;
                    continue;
                }
                cx xi_ext = proj.mean / proj.var - c_msg[i] / d_msg[i];
                double lam_new = prm.damping * lam_ext + (1.0 - prm.damping) / eta[i];
                cx xi_new = prm.damping * xi_ext + (1.0 - prm.damping) * mu[i] / eta[i];
                if (lam_new <= 0.0)
                {
                    ++out.skipped_updates;
                    continue;
                }
                double eta_new = std::max(prm.var_floor, 1.0 / lam_new);
                eta[i] = eta_new;
                mu[i] = xi_new * eta_new;
            }

            double alpha = double(confident) / m;
            out.alpha_trace[iter - 1] += alpha / n_blocks;
            final_alpha[blk] = alpha;
            iters_per_block[blk] = iter;
            if (tracker.offer(alpha))
            {
                out.posterior.cols(base, base + m - 1) = post_blk;
                out.extrinsic.cols(base, base + m - 1) = ext_blk;
            }
            if (alpha >= 1.0)
                break;
        }
    }

    int used = 0;
    for (int blk = 0; blk < n_blocks; ++blk)
        used = std::max(used, iters_per_block[blk]);
    out.iterations_used = used;
    // blocks that stopped early keep contributing their final indicator
    for (int it = 0; it < prm.max_iter; ++it)
        for (int blk = 0; blk < n_blocks; ++blk)
            if (it >= iters_per_block[blk])
                out.alpha_trace[it] += final_alpha[blk] / n_blocks;
    out.alpha_trace.resize(std::max(used, 1));
    return out;
}

inline DetectorOutput r_oamp_lmmse_detect(const arma::cx_vec &y,
                                          const std::vector<arma::cx_mat> &h_blocks,
                                          const std::vector<arma::cx_mat> &sigma_blocks,
                                          const PmfMat &priors, const Alphabet &a,
                                          const DetectorParams &prm)
{
    return oamp_lmmse_detect(y, h_blocks, sigma_blocks, priors, a, prm, true,
                             int(h_blocks.size()));
}

// ---------------------------------------------------------------------------
// GAMP-EP detector (mobile group)
// ---------------------------------------------------------------------------

namespace detail {

struct EdgeGraph
{
    std::vector<int> row_start; // factor -> edge range
    std::vector<int> col_of;    // edge -> variable
    std::vector<cx> weight;     // edge -> channel coefficient
    std::vector<std::vector<int>> col_edges; // variable -> edges
};

inline EdgeGraph build_edge_graph(const SparseChannelMatrix &h)
{
    EdgeGraph g;
    g.row_start.reserve(h.n_rows() + 1);
    g.row_start.push_back(0);
    g.col_edges.resize(h.n_cols());
    for (int d = 0; d < h.n_rows(); ++d)
    {
        for (const auto &[c, v] : h.row(d))
        {
            g.col_edges[c].push_back(int(g.col_of.size()));
            g.col_of.push_back(c);
            g.weight.push_back(v);
        }
        g.row_start.push_back(int(g.col_of.size()));
    }
    return g;
}

} // namespace detail

// Expectation-propagation message passing on the sparse factor graph of
// y = H x + z with independent noise variances per factor node.
inline DetectorOutput gamp_ep_detect(const arma::cx_vec &y, const SparseChannelMatrix &h,
                                     const arma::vec &sigma_diag, const PmfMat &priors,
                                     const Alphabet &a, const DetectorParams &prm)
{
    const int n_fac = h.n_rows();
    const int n_var = h.n_cols();
    if (int(y.n_elem) != n_fac || int(priors.n_cols) != n_var ||
        int(sigma_diag.n_elem) != n_fac)
        throw std::invalid_argument("sparse detector dimension mismatch");

    detail::EdgeGraph g = detail::build_edge_graph(h);
    const int n_edges = int(g.col_of.size());

    DetectorOutput out;
    out.posterior = priors;
    out.extrinsic = uniform_pmfs(a.q, n_var);
    out.alpha_trace.clear();

    // per-variable prior moments initialize every outgoing edge
    arma::cx_vec mu0;
    arma::vec eta0;
    project_pmfs(priors, a, prm.var_floor, mu0, eta0);

    std::vector<cx> mu(n_edges), c_msg(n_edges);
    std::vector<double> eta(n_edges), d_msg(n_edges);
    for (int e = 0; e < n_edges; ++e)
    {
        mu[e] = mu0[g.col_of[e]];
        eta[e] = eta0[g.col_of[e]];
    }

    arma::vec log_prior(a.q);
    detail::BestTracker tracker;
    arma::vec loglik(a.q), logp(a.q), logp_ext(a.q);

    PmfMat post(a.q, n_var), ext(a.q, n_var);
    arma::cx_vec e_proj(n_var);
    arma::vec f_proj(n_var);

    for (int iter = 1; iter <= prm.max_iter; ++iter)
    {
        // factor -> variable: leave-one-out interference moments
        for (int d = 0; d < n_fac; ++d)
        {
            cx s1 = 0.0;
            double s2 = 0.0;
            for (int e = g.row_start[d]; e < g.row_start[d + 1]; ++e)
            {
                s1 += g.weight[e] * mu[e];
                s2 += std::norm(g.weight[e]) * eta[e];
            }
            for (int e = g.row_start[d]; e < g.row_start[d + 1]; ++e)
            {
                const cx w = g.weight[e];
                const double w2 = std::norm(w);
                c_msg[e] = (y[d] - (s1 - w * mu[e])) / w;
                d_msg[e] = ((s2 - w2 * eta[e]) + sigma_diag[d]) / w2;
            }
        }

        // variable posteriors and per-edge extrinsic feedback
        int confident = 0;
        for (int c = 0; c < n_var; ++c)
        {
            logp_ext.zeros();
            for (int e : g.col_edges[c])
            {
                detail::likelihood_log(a, c_msg[e], d_msg[e], loglik);
                logp_ext += loglik;
            }
            logp = logp_ext;
            for (int x = 0; x < a.q; ++x)
                logp[x] += std::log(std::max(priors(x, c), 1e-300));
            detail::normalize_log_pmf(logp);
            post.col(c) = logp;
            if (logp.max() >= 1.0 - prm.conv_threshold)
                ++confident;

            if (g.col_edges[c].empty())
                ext.col(c).fill(1.0 / a.q);
            else
            {
                detail::normalize_log_pmf(logp_ext);
                ext.col(c) = logp_ext;
            }

            GaussianMsg proj = gaussian_project(post.col(c), a, prm.var_floor);
            e_proj[c] = proj.mean;
            f_proj[c] = proj.var;
        }

        for (int c = 0; c < n_var; ++c)
        {
            for (int e : g.col_edges[c])
            {
                double lam_ext = 1.0 / f_proj[c] - 1.0 / d_msg[e];
                if (lam_ext <= 0.0)
                {
                    ++out.skipped_updates;
                    continue;
                }
                cx xi_ext = e_proj[c] / f_proj[c] - c_msg[e] / d_msg[e];
                double lam_new = prm.damping * lam_ext + (1.0 - prm.damping) / eta[e];
                cx xi_new = prm.damping * xi_ext + (1.0 - prm.damping) * mu[e] / eta[e];
                if (lam_new <= 0.0)
                {
                    ++out.skipped_updates;
                    continue;
                }
                eta[e] = std::max(prm.var_floor, 1.0 / lam_new);
                mu[e] = xi_new * eta[e];
            }
        }

        double alpha = n_var ? double(confident) / n_var : 1.0;
        out.alpha_trace.push_back(alpha);
        out.iterations_used = iter;
        if (tracker.offer(alpha))
        {
            out.posterior = post;
            out.extrinsic = ext;
        }
        if (alpha >= 1.0)
            break;
    }
    return out;
}

// Keeps only the R strongest edges per factor node; the trimmed tail is
// absorbed into the factor's effective observation and noise floor using the
// prior moments of the trimmed variables, then the regular message passing
// runs on the pruned graph.
inline DetectorOutput r_gamp_ep_detect(const arma::cx_vec &y, const SparseChannelMatrix &h,
                                       const arma::vec &sigma_diag, const PmfMat &priors,
                                       const Alphabet &a, const DetectorParams &prm, int r_edges)
{
    if (r_edges < 1)
        throw std::invalid_argument("edge budget must be at least 1");
    if (r_edges >= h.max_row_degree())
        return gamp_ep_detect(y, h, sigma_diag, priors, a, prm);

    arma::cx_vec mu0;
    arma::vec eta0;
    project_pmfs(priors, a, prm.var_floor, mu0, eta0);

    SparseChannelMatrix pruned(h.n_rows(), h.n_cols());
    arma::cx_vec y_eff = y;
    arma::vec sigma_eff = sigma_diag;
    std::vector<int> order;
    for (int d = 0; d < h.n_rows(); ++d)
    {
        const auto &row = h.row(d);
        if (int(row.size()) <= r_edges)
        {
            for (const auto &[c, v] : row)
                pruned.push_entry(d, c, v);
            continue;
        }
        order.resize(row.size());
        for (std::size_t i = 0; i < row.size(); ++i)
            order[i] = int(i);
        std::partial_sort(order.begin(), order.begin() + r_edges, order.end(),
                          [&](int i, int j) { return std::abs(row[i].second) > std::abs(row[j].second); });
        std::vector<char> keep(row.size(), 0);
        for (int i = 0; i < r_edges; ++i)
            keep[order[i]] = 1;
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            const auto &[c, v] = row[i];
            if (keep[i])
                pruned.push_entry(d, c, v);
            else
            {
                y_eff[d] -= v * mu0[c];
                sigma_eff[d] += std::norm(v) * eta0[c];
            }
        }
    }
    return gamp_ep_detect(y_eff, pruned, sigma_eff, priors, a, prm);
}

// ---------------------------------------------------------------------------
// MP baseline detector
// ---------------------------------------------------------------------------

// Classical interference-cancellation message passing: factor nodes compute
// Gaussian interference moments exactly as the EP detector, variable nodes
// reply with leave-one-out discrete pmfs (no Gaussian division), damped in
// probability domain.
inline DetectorOutput mp_detect(const arma::cx_vec &y, const SparseChannelMatrix &h,
                                const arma::vec &sigma_diag, const PmfMat &priors,
                                const Alphabet &a, const DetectorParams &prm)
{
    const int n_fac = h.n_rows();
    const int n_var = h.n_cols();
    detail::EdgeGraph g = detail::build_edge_graph(h);
    const int n_edges = int(g.col_of.size());

    DetectorOutput out;
    out.posterior = priors;
    out.extrinsic = uniform_pmfs(a.q, n_var);

    // per-edge pmfs and their moments
    arma::mat edge_pmf(a.q, std::max(n_edges, 1));
    for (int e = 0; e < n_edges; ++e)
        edge_pmf.col(e) = priors.col(g.col_of[e]);
    std::vector<cx> mu(n_edges), c_msg(n_edges);
    std::vector<double> eta(n_edges), d_msg(n_edges);

    arma::vec loglik(a.q), logp(a.q), logp_ext(a.q), leave(a.q);
    arma::mat edge_loglik(a.q, std::max(n_edges, 1));
    detail::BestTracker tracker;
    PmfMat post(a.q, n_var), ext(a.q, n_var);

    for (int iter = 1; iter <= prm.max_iter; ++iter)
    {
        for (int e = 0; e < n_edges; ++e)
        {
            GaussianMsg gm = gaussian_project(edge_pmf.col(e), a, prm.var_floor);
            mu[e] = gm.mean;
            eta[e] = gm.var;
        }
        for (int d = 0; d < n_fac; ++d)
        {
            cx s1 = 0.0;
            double s2 = 0.0;
            for (int e = g.row_start[d]; e < g.row_start[d + 1]; ++e)
            {
                s1 += g.weight[e] * mu[e];
                s2 += std::norm(g.weight[e]) * eta[e];
            }
            for (int e = g.row_start[d]; e < g.row_start[d + 1]; ++e)
            {
                const cx w = g.weight[e];
                const double w2 = std::norm(w);
                c_msg[e] = (y[d] - (s1 - w * mu[e])) / w;
                d_msg[e] = ((s2 - w2 * eta[e]) + sigma_diag[d]) / w2;
            }
        }

        int confident = 0;
        for (int c = 0; c < n_var; ++c)
        {
            logp_ext.zeros();
            for (int e : g.col_edges[c])
            {
                detail::likelihood_log(a, c_msg[e], d_msg[e], loglik);
                edge_loglik.col(e) = loglik;
                logp_ext += loglik;
            }
            logp = logp_ext;
            for (int x = 0; x < a.q; ++x)
                logp[x] += std::log(std::max(priors(x, c), 1e-300));

            // leave-one-out replies, damped on pmfs
            for (int e : g.col_edges[c])
            {
                leave = logp - edge_loglik.col(e);
                detail::normalize_log_pmf(leave);
                edge_pmf.col(e) = prm.damping * leave + (1.0 - prm.damping) * edge_pmf.col(e);
                edge_pmf.col(e) /= arma::accu(edge_pmf.col(e));
            }

            detail::normalize_log_pmf(logp);
            post.col(c) = logp;
            if (logp.max() >= 1.0 - prm.conv_threshold)
                ++confident;
            if (g.col_edges[c].empty())
                ext.col(c).fill(1.0 / a.q);
            else
            {
                detail::normalize_log_pmf(logp_ext);
                ext.col(c) = logp_ext;
            }
        }

        double alpha = n_var ? double(confident) / n_var : 1.0;
        out.alpha_trace.push_back(alpha);
        out.iterations_used = iter;
        if (tracker.offer(alpha))
        {
            out.posterior = post;
            out.extrinsic = ext;
        }
        if (alpha >= 1.0)
            break;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Exact MAP oracle
// ---------------------------------------------------------------------------

// Exact per-symbol marginals by enumerating every symbol vector. Only viable
// for tiny instances; guards at Q^n <= 65536.
inline PmfMat map_oracle(const arma::cx_vec &y, const arma::cx_mat &h, const PmfMat &priors,
                         const arma::vec &sigma_diag, const Alphabet &a)
{
    const int n = int(h.n_cols);
    double combos_d = std::pow(double(a.q), n);
    if (combos_d > 65536.0)
        throw std::invalid_argument("MAP oracle instance too large");
    const long combos = long(combos_d + 0.5);

    std::vector<int> assign(n, 0);
    arma::vec logw(combos);
    arma::cx_vec hx(h.n_rows);
    for (long idx = 0; idx < combos; ++idx)
    {
        long rem = idx;
        for (int c = 0; c < n; ++c)
        {
            assign[c] = int(rem % a.q);
            rem /= a.q;
        }
        hx.zeros();
        double lp = 0.0;
        for (int c = 0; c < n; ++c)
        {
            hx += h.col(c) * a.points[assign[c]];
            lp += std::log(std::max(priors(assign[c], c), 1e-300));
        }
        for (arma::uword d = 0; d < y.n_elem; ++d)
            lp -= std::norm(y[d] - hx[d]) / sigma_diag[d];
        logw[idx] = lp;
    }
    logw -= logw.max();
    arma::vec w = arma::exp(logw);

    PmfMat marg(a.q, n, arma::fill::zeros);
    for (long idx = 0; idx < combos; ++idx)
    {
        long rem = idx;
        for (int c = 0; c < n; ++c)
        {
            marg(int(rem % a.q), c) += w[idx];
            rem /= a.q;
        }
    }
    for (int c = 0; c < n; ++c)
        marg.col(c) /= arma::accu(marg.col(c));
    return marg;
}

} // namespace ddnoma

#endif
