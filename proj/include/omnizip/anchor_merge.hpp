// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/types.hpp"

#include <vector>

namespace omnizip::anchor_merge {

// Consolidation plan for one window's non-salient audio tokens. All indices
// are positions within the non-salient set (0..n'-1); anchors, member lists
// and discarded together partition that set.
struct MergePlan {
    std::vector<int> anchors;                   // sorted ascending
    std::vector<std::vector<int>> members;      // per anchor, at most G each
    std::vector<int> discarded;                 // sorted ascending
};

// L2-normalizes each row with the epsilon guard: row / (||row|| + 1e-6).
// Zero rows stay zero.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>
row_normalize(const Eigen::MatrixBase<Derived>& h) {
    using Scalar = typename Derived::Scalar;
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> out(h.rows(), h.cols());
    for (Eigen::Index i = 0; i < h.rows(); ++i) {
        const Scalar norm = h.row(i).norm();
        out.row(i) = h.row(i) / (norm + static_cast<Scalar>(1e-6));
    }
    return out;
}

// Cosine similarity between every non-salient audio token and every video
// token of the window: row_normalize(H_a) * row_normalize(H_v)^T.
MatrixF cross_modal_similarity(const MatrixF& h_audio, const MatrixF& h_video);

// Deterministic uniform stride over the non-salient set:
// index_j = floor((j + 0.5) * count / anchor_count). Strictly increasing.
std::vector<int> sample_anchors(int non_salient_count, int anchor_count);

// Ranks non-anchor tokens by their best video affinity (row max of
// `s_cross`, ties to lower index), keeps the top G * |anchors| as members
// and assigns each in rank order to the most cosine-similar anchor that
// still has capacity. `h_audio` holds the non-salient embeddings used for
// the anchor affinity.
MergePlan build_merge_plan(const MatrixF& s_cross, const MatrixF& h_audio,
                           const std::vector<int>& anchors, int group_size);

struct ConsolidatedAudio {
    MatrixF embeddings;             // |salient| + |anchors| rows, original temporal order
    std::vector<int> kept_indices;  // original token indices, ascending
};

// Replaces each anchor by the mean of itself and its members and interleaves
// the survivors (salient tokens and anchors) in original temporal order.
// `window_audio` is the full n_a x d window, `salient`/`non_salient` are
// original token indices.
ConsolidatedAudio consolidate(const MergePlan& plan, const MatrixF& window_audio,
                              const std::vector<int>& salient,
                              const std::vector<int>& non_salient);

// Mean of the rows listed in `indices` (ascending accumulation order);
// shared by consolidate and the result writer so merged embeddings are
// bit-identical on both paths.
Eigen::RowVectorXf group_mean(const MatrixF& rows, const std::vector<int>& indices);

}  // namespace omnizip::anchor_merge
