// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/saliency.hpp"
#include "omnizip/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace omnizip {

// One consolidated token group: the anchor survives, the members were
// averaged into it. All indices are original within-window token indices.
struct MergeGroup {
    int anchor = 0;
    std::vector<int> members;
};

struct WindowResult {
    std::vector<int> kept_audio;  // sorted original audio indices
    std::vector<int> kept_video;  // sorted original video indices
    std::vector<int> removed_temporal;
    std::vector<int> removed_spatial;
    std::vector<MergeGroup> audio_merge_groups;
    std::vector<MergeGroup> video_merge_groups;  // used by the merge baseline
};

struct CompressionResult {
    Strategy strategy = Strategy::Omnizip;
    StreamConfig stream_config;
    PruneConfig prune_config;   // meaningful for the omnizip strategy
    double retention_request = 1.0;  // meaningful for baselines

    std::vector<WindowResult> windows;
    saliency::SaliencyReport saliency;  // empty for baselines
    bool has_saliency = false;

    std::vector<double> initial_rates;
    std::vector<double> final_rates;
    std::vector<int> keep_counts;

    std::int64_t audio_total = 0;
    std::int64_t video_total = 0;
    std::int64_t audio_kept = 0;
    std::int64_t video_kept = 0;
    double retained_ratio = 1.0;

    std::string content_hash;
    std::string engine_version{kEngineVersion};
    bool infeasible_budget = false;
    // Wall time of the pruning stages only. Reported on the CLI but kept out
    // of result.json so identical inputs serialize byte-identically.
    double elapsed_ms = 0.0;
};

// Rebuilds the compressed embedding tensors from a result and its source
// stream. Merged tokens are the mean of their group in ascending original
// index order, so repeated materialization is bit-identical.
MatrixF materialize_audio(const CompressionResult& result, const TokenStream& stream);
MatrixF materialize_video(const CompressionResult& result, const TokenStream& stream);

// Deterministic JSON payload (no timing, stable key order).
std::string result_to_json(const CompressionResult& result);

}  // namespace omnizip
