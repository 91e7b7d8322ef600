// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/anchor_merge.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace omnizip::anchor_merge {

MatrixF cross_modal_similarity(const MatrixF& h_audio, const MatrixF& h_video) {
    if (h_audio.cols() != h_video.cols()) {
        throw Error(ErrorCode::DimMismatch,
                    "audio and video embeddings disagree on dimension: " +
                        std::to_string(h_audio.cols()) + " vs " + std::to_string(h_video.cols()));
    }
    const MatrixF a = row_normalize(h_audio);
    const MatrixF v = row_normalize(h_video);
    return a * v.transpose();
}

std::vector<int> sample_anchors(int non_salient_count, int anchor_count) {
    if (anchor_count < 0 || anchor_count > non_salient_count) {
        throw Error(ErrorCode::BudgetOutOfRange,
                    "anchor count " + std::to_string(anchor_count) + " outside [0, " +
                        std::to_string(non_salient_count) + "]");
    }
    std::vector<int> anchors(static_cast<std::size_t>(anchor_count));
    for (int j = 0; j < anchor_count; ++j) {
        anchors[static_cast<std::size_t>(j)] = static_cast<int>(
            std::floor((j + 0.5) * static_cast<double>(non_salient_count) / anchor_count));
    }
    return anchors;
}

MergePlan build_merge_plan(const MatrixF& s_cross, const MatrixF& h_audio,
                           const std::vector<int>& anchors, int group_size) {
    const int n = static_cast<int>(s_cross.rows());
    if (h_audio.rows() != n) {
        throw Error(ErrorCode::DimMismatch, "similarity rows and audio rows disagree");
    }

    MergePlan plan;
    plan.anchors = anchors;
    std::sort(plan.anchors.begin(), plan.anchors.end());
    plan.members.resize(plan.anchors.size());

    std::vector<char> is_anchor(static_cast<std::size_t>(n), 0);
    for (int a : plan.anchors) is_anchor[static_cast<std::size_t>(a)] = 1;

    // Rank non-anchor tokens by their strongest video affinity.
    std::vector<int> candidates;
    for (int t = 0; t < n; ++t) {
        if (!is_anchor[static_cast<std::size_t>(t)]) candidates.push_back(t);
    }
    std::vector<double> relevance(static_cast<std::size_t>(n), 0.0);
    for (int t : candidates) {
        relevance[static_cast<std::size_t>(t)] =
            s_cross.cols() > 0 ? static_cast<double>(s_cross.row(t).maxCoeff()) : 0.0;
    }
    std::sort(candidates.begin(), candidates.end(), [&](int lhs, int rhs) {
        if (relevance[static_cast<std::size_t>(lhs)] != relevance[static_cast<std::size_t>(rhs)])
            return relevance[static_cast<std::size_t>(lhs)] >
                   relevance[static_cast<std::size_t>(rhs)];
        return lhs < rhs;
    });

    const std::int64_t member_budget =
        static_cast<std::int64_t>(group_size) * static_cast<std::int64_t>(plan.anchors.size());
    const MatrixF unit = row_normalize(h_audio);

    std::vector<int> capacity(plan.anchors.size(), group_size);
    std::int64_t placed = 0;
    for (int t : candidates) {
        if (placed >= member_budget) {
            plan.discarded.push_back(t);
            continue;
        }
        // Nearest anchor with remaining capacity, by audio cosine.
        int best = -1;
        double best_sim = 0.0;
        for (std::size_t a = 0; a < plan.anchors.size(); ++a) {
            if (capacity[a] <= 0) continue;
            const double sim =
                unit.row(t).dot(unit.row(plan.anchors[a]));
            if (best < 0 || sim > best_sim) {
                best = static_cast<int>(a);
                best_sim = sim;
            }
        }
        if (best < 0) {
            plan.discarded.push_back(t);
            continue;
        }
        plan.members[static_cast<std::size_t>(best)].push_back(t);
        --capacity[static_cast<std::size_t>(best)];
        ++placed;
    }
    std::sort(plan.discarded.begin(), plan.discarded.end());
    return plan;
}

Eigen::RowVectorXf group_mean(const MatrixF& rows, const std::vector<int>& indices) {
    Eigen::RowVectorXf sum = Eigen::RowVectorXf::Zero(rows.cols());
    for (int idx : indices) sum += rows.row(idx);
    return sum / static_cast<float>(indices.size());
}

ConsolidatedAudio consolidate(const MergePlan& plan, const MatrixF& window_audio,
                              const std::vector<int>& salient,
                              const std::vector<int>& non_salient) {
    ConsolidatedAudio out;
    out.kept_indices.reserve(salient.size() + plan.anchors.size());
    out.kept_indices.insert(out.kept_indices.end(), salient.begin(), salient.end());

    // Original index and merged value per anchor.
    std::vector<std::pair<int, Eigen::RowVectorXf>> merged;
    merged.reserve(plan.anchors.size());
    for (std::size_t a = 0; a < plan.anchors.size(); ++a) {
        std::vector<int> group;
        group.push_back(non_salient[static_cast<std::size_t>(plan.anchors[a])]);
        for (int m : plan.members[a]) group.push_back(non_salient[static_cast<std::size_t>(m)]);
        std::sort(group.begin(), group.end());
        const int anchor_original = non_salient[static_cast<std::size_t>(plan.anchors[a])];
        merged.emplace_back(anchor_original, group_mean(window_audio, group));
        out.kept_indices.push_back(anchor_original);
    }
    std::sort(out.kept_indices.begin(), out.kept_indices.end());

    out.embeddings.resize(static_cast<Eigen::Index>(out.kept_indices.size()), window_audio.cols());
    for (std::size_t row = 0; row < out.kept_indices.size(); ++row) {
        const int original = out.kept_indices[row];
        const auto it = std::find_if(merged.begin(), merged.end(),
                                     [&](const auto& p) { return p.first == original; });
        if (it != merged.end()) {
            out.embeddings.row(static_cast<Eigen::Index>(row)) = it->second;
        } else {
            out.embeddings.row(static_cast<Eigen::Index>(row)) = window_audio.row(original);
        }
    }
    return out;
}

}  // namespace omnizip::anchor_merge
