// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/istc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace omnizip::istc {

std::vector<double> temporal_similarity(const MatrixF& frame_prev, const MatrixF& frame_curr) {
    if (frame_prev.rows() != frame_curr.rows() || frame_prev.cols() != frame_curr.cols()) {
        throw Error(ErrorCode::DimMismatch, "adjacent frames must share P and d");
    }
    std::vector<double> sims(static_cast<std::size_t>(frame_prev.rows()));
    for (Eigen::Index p = 0; p < frame_prev.rows(); ++p) {
        const Eigen::RowVectorXd a = frame_prev.row(p).cast<double>();
        const Eigen::RowVectorXd b = frame_curr.row(p).cast<double>();
        const double norms = a.norm() * b.norm();
        sims[static_cast<std::size_t>(p)] = norms > 0.0 ? a.dot(b) / norms : 0.0;
    }
    return sims;
}

std::vector<DensityScore> dpc_knn_scores(const MatrixF& tokens, int k) {
    const int n = static_cast<int>(tokens.rows());
    if (n < 2) {
        throw Error(ErrorCode::TooFewTokens, "density scoring needs at least 2 tokens");
    }
    if (k < 1) throw Error(ErrorCode::ValidationFailed, "k must be at least 1");
    const int k_eff = std::min(k, n - 1);

    const MatrixD pts = tokens.cast<double>();
    MatrixD sq_dist(n, n);
    for (int i = 0; i < n; ++i) {
        sq_dist(i, i) = 0.0;
        for (int j = i + 1; j < n; ++j) {
            const double d2 = (pts.row(i) - pts.row(j)).squaredNorm();
            sq_dist(i, j) = d2;
            sq_dist(j, i) = d2;
        }
    }

    std::vector<DensityScore> scores(static_cast<std::size_t>(n));
    std::vector<std::pair<double, int>> neighbors;
    neighbors.reserve(static_cast<std::size_t>(n - 1));
    for (int i = 0; i < n; ++i) {
        neighbors.clear();
        for (int j = 0; j < n; ++j) {
            if (j != i) neighbors.emplace_back(sq_dist(i, j), j);
        }
        // kNN in canonical (distance, index) order so the summation order is
        // reproducible independently.
        std::partial_sort(neighbors.begin(), neighbors.begin() + k_eff, neighbors.end());
        double sum = 0.0;
        for (int t = 0; t < k_eff; ++t) sum += neighbors[static_cast<std::size_t>(t)].first;
        scores[static_cast<std::size_t>(i)].rho = std::exp(-sum / k_eff);
    }

    // Density order: rho descending, index ascending.
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        const double ra = scores[static_cast<std::size_t>(a)].rho;
        const double rb = scores[static_cast<std::size_t>(b)].rho;
        if (ra != rb) return ra > rb;
        return a < b;
    });
    std::vector<int> rank(static_cast<std::size_t>(n));
    for (int r = 0; r < n; ++r) rank[static_cast<std::size_t>(order[static_cast<std::size_t>(r)])] = r;

    for (int i = 0; i < n; ++i) {
        auto& s = scores[static_cast<std::size_t>(i)];
        if (rank[static_cast<std::size_t>(i)] == 0) {
            double best = 0.0;
            for (int j = 0; j < n; ++j) {
                if (j != i) best = std::max(best, std::sqrt(sq_dist(i, j)));
            }
            s.delta = best;
        } else {
            double best = std::numeric_limits<double>::infinity();
            for (int j = 0; j < n; ++j) {
                if (rank[static_cast<std::size_t>(j)] < rank[static_cast<std::size_t>(i)]) {
                    best = std::min(best, std::sqrt(sq_dist(i, j)));
                }
            }
            s.delta = best;
        }
        s.score = s.rho * s.delta;
    }
    return scores;
}

std::vector<int> temporal_prune(const std::vector<double>& similarities, int m_remove) {
    const int n = static_cast<int>(similarities.size());
    if (m_remove < 0 || m_remove > n) {
        throw Error(ErrorCode::BudgetOutOfRange,
                    "temporal removal count " + std::to_string(m_remove) + " outside [0, " +
                        std::to_string(n) + "]");
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (similarities[static_cast<std::size_t>(a)] != similarities[static_cast<std::size_t>(b)])
            return similarities[static_cast<std::size_t>(a)] >
                   similarities[static_cast<std::size_t>(b)];
        return a < b;
    });
    std::vector<int> removed(order.begin(), order.begin() + m_remove);
    std::sort(removed.begin(), removed.end());
    return removed;
}

std::vector<int> spatial_prune(const std::vector<DensityScore>& scores, int m_keep) {
    const int n = static_cast<int>(scores.size());
    if (m_keep < 0 || m_keep > n) {
        throw Error(ErrorCode::BudgetOutOfRange, "spatial keep count " + std::to_string(m_keep) +
                                                     " outside [0, " + std::to_string(n) + "]");
    }
    std::vector<int> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (scores[static_cast<std::size_t>(a)].score != scores[static_cast<std::size_t>(b)].score)
            return scores[static_cast<std::size_t>(a)].score >
                   scores[static_cast<std::size_t>(b)].score;
        return a < b;
    });
    std::vector<int> kept(order.begin(), order.begin() + m_keep);
    std::sort(kept.begin(), kept.end());
    return kept;
}

WindowCompression compress_window_video(const MatrixF& window, int frames_per_window,
                                        int tokens_per_frame, int keep_count, int k) {
    const int total = frames_per_window * tokens_per_frame;
    if (window.rows() != total) {
        throw Error(ErrorCode::DimMismatch, "window rows disagree with F * P");
    }
    if (keep_count < frames_per_window || keep_count > total) {
        throw Error(ErrorCode::BudgetOutOfRange,
                    "keep count " + std::to_string(keep_count) + " outside [" +
                        std::to_string(frames_per_window) + ", " + std::to_string(total) + "]");
    }

    std::vector<int> density_frames;
    std::vector<int> temporal_frames;
    for (int f = 0; f < frames_per_window; ++f) {
        (is_density_frame(f) ? density_frames : temporal_frames).push_back(f);
    }
    const std::int64_t temporal_pool =
        static_cast<std::int64_t>(temporal_frames.size()) * tokens_per_frame;
    const std::int64_t density_pool =
        static_cast<std::int64_t>(density_frames.size()) * tokens_per_frame;

    const std::int64_t removals = total - keep_count;
    std::int64_t remove_temporal = std::llround(
        static_cast<double>(removals) * static_cast<double>(temporal_pool) / total);
    remove_temporal = std::clamp<std::int64_t>(remove_temporal, 0, temporal_pool);
    std::int64_t remove_density = removals - remove_temporal;
    if (remove_density > density_pool) {
        remove_temporal += remove_density - density_pool;
        remove_density = density_pool;
    }
    if (remove_temporal > temporal_pool) {
        remove_density += remove_temporal - temporal_pool;
        remove_temporal = temporal_pool;
    }

    WindowCompression out;

    // Temporal side: rank every even-frame token by similarity to the same
    // position in the preceding frame, jointly across the window.
    if (!temporal_frames.empty()) {
        std::vector<double> sims;
        sims.reserve(static_cast<std::size_t>(temporal_pool));
        std::vector<int> token_index;
        token_index.reserve(static_cast<std::size_t>(temporal_pool));
        for (int f : temporal_frames) {
            const auto prev = window.middleRows((f - 1) * tokens_per_frame, tokens_per_frame);
            const auto curr = window.middleRows(f * tokens_per_frame, tokens_per_frame);
            const auto frame_sims = temporal_similarity(prev, curr);
            for (int p = 0; p < tokens_per_frame; ++p) {
                sims.push_back(frame_sims[static_cast<std::size_t>(p)]);
                token_index.push_back(f * tokens_per_frame + p);
            }
        }
        const auto removed = temporal_prune(sims, static_cast<int>(remove_temporal));
        for (int pos : removed) {
            out.removed_temporal.push_back(token_index[static_cast<std::size_t>(pos)]);
        }
        std::sort(out.removed_temporal.begin(), out.removed_temporal.end());
    }

    // Density side: per-frame keep quotas by largest remainder (equal ideals,
    // so ties fall to the lower frame), then density-peak pruning per frame.
    if (!density_frames.empty()) {
        const std::int64_t keep_density = density_pool - remove_density;
        const auto frames = static_cast<std::int64_t>(density_frames.size());
        std::vector<int> quota(density_frames.size(),
                               static_cast<int>(keep_density / frames));
        const auto extras = static_cast<std::size_t>(keep_density % frames);
        for (std::size_t f = 0; f < extras; ++f) ++quota[f];

        for (std::size_t fi = 0; fi < density_frames.size(); ++fi) {
            const int f = density_frames[fi];
            const int m_keep = quota[fi];
            if (m_keep == tokens_per_frame) continue;
            const auto frame = window.middleRows(f * tokens_per_frame, tokens_per_frame);
            std::vector<char> keep_mask(static_cast<std::size_t>(tokens_per_frame), 0);
            if (m_keep > 0) {
                // 0 < m_keep < P implies P >= 2, so density scoring is defined.
                const auto scores = dpc_knn_scores(frame, k);
                for (int p : spatial_prune(scores, m_keep)) {
                    keep_mask[static_cast<std::size_t>(p)] = 1;
                }
            }
            for (int p = 0; p < tokens_per_frame; ++p) {
                if (!keep_mask[static_cast<std::size_t>(p)]) {
                    out.removed_spatial.push_back(f * tokens_per_frame + p);
                }
            }
        }
        std::sort(out.removed_spatial.begin(), out.removed_spatial.end());
    }

    std::vector<char> removed_mask(static_cast<std::size_t>(total), 0);
    for (int t : out.removed_temporal) removed_mask[static_cast<std::size_t>(t)] = 1;
    for (int t : out.removed_spatial) removed_mask[static_cast<std::size_t>(t)] = 1;
    out.kept.reserve(static_cast<std::size_t>(keep_count));
    for (int t = 0; t < total; ++t) {
        if (!removed_mask[static_cast<std::size_t>(t)]) out.kept.push_back(t);
    }
    return out;
}

}  // namespace omnizip::istc
