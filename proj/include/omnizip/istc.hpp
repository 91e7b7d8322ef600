// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/types.hpp"

#include <vector>

namespace omnizip::istc {

// Density-peak statistics for one token: local density from the k nearest
// neighbors, separation distance to the nearest denser token, and their
// product used for ranking.
struct DensityScore {
    double rho = 0.0;    // exp(-(1/k) * sum of squared kNN distances), in (0, 1]
    double delta = 0.0;  // distance to nearest higher-density token
    double score = 0.0;  // rho * delta
};

struct WindowCompression {
    std::vector<int> kept;              // sorted window token indices
    std::vector<int> removed_temporal;  // from even frames
    std::vector<int> removed_spatial;   // from odd frames
};

// Per-position cosine similarity between two frames of equal shape.
// Positions where either token is the zero vector map to 0.
std::vector<double> temporal_similarity(const MatrixF& frame_prev, const MatrixF& frame_curr);

// Density-peak scores over one frame's tokens. k is clamped to n-1. The
// density order is (rho descending, index ascending); its top token takes
// delta = max distance to any other token, everyone else the minimum
// distance to a strictly higher-ordered token.
std::vector<DensityScore> dpc_knn_scores(const MatrixF& tokens, int k);

// Removes the m_remove most similar positions (ties to the lower index);
// returns the removed positions sorted ascending.
std::vector<int> temporal_prune(const std::vector<double>& similarities, int m_remove);

// Keeps the m_keep highest-scoring positions (ties to the lower index);
// returns the kept positions sorted ascending.
std::vector<int> spatial_prune(const std::vector<DensityScore>& scores, int m_keep);

// Full interleaved compression of one window: frames at positions 0 and 2 of
// each run of four are reduced by density-peak pruning, frames at positions
// 1 and 3 by temporal-similarity pruning against their immediate
// predecessor. The removal budget splits between the pools proportionally to
// their token counts. `window` is (F*P) x d in frame-major order.
WindowCompression compress_window_video(const MatrixF& window, int frames_per_window,
                                        int tokens_per_frame, int keep_count, int k);

// Frames at run positions 0 and 2 use the density rule; 1 and 3 the
// temporal rule. A lone trailing frame counts as position 0.
inline bool is_density_frame(int frame_index) {
    const int pos = frame_index % 4;
    return pos == 0 || pos == 2;
}

}  // namespace omnizip::istc
