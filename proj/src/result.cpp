// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/result.hpp"

#include "omnizip/anchor_merge.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>

namespace omnizip {

using nlohmann::ordered_json;

namespace {

// Writes one modality's surviving rows. Tokens that head a merge group take
// the group mean (ascending original order), everything else its original
// embedding.
MatrixF materialize_modality(const std::vector<WindowResult>& windows, const MatrixF& embeddings,
                             int tokens_per_window, bool audio) {
    std::int64_t kept_rows = 0;
    for (const auto& w : windows) {
        kept_rows += static_cast<std::int64_t>(audio ? w.kept_audio.size() : w.kept_video.size());
    }
    MatrixF out(kept_rows, embeddings.cols());
    std::int64_t row = 0;
    for (std::size_t wi = 0; wi < windows.size(); ++wi) {
        const auto& kept = audio ? windows[wi].kept_audio : windows[wi].kept_video;
        const auto& groups = audio ? windows[wi].audio_merge_groups : windows[wi].video_merge_groups;
        const std::int64_t base = static_cast<std::int64_t>(wi) * tokens_per_window;
        for (int idx : kept) {
            const auto group = std::find_if(groups.begin(), groups.end(),
                                            [&](const MergeGroup& g) { return g.anchor == idx; });
            if (group != groups.end() && !group->members.empty()) {
                std::vector<int> all{group->anchor};
                all.insert(all.end(), group->members.begin(), group->members.end());
                std::sort(all.begin(), all.end());
                for (int& t : all) t += static_cast<int>(base);
                out.row(row) = anchor_merge::group_mean(embeddings, all);
            } else {
                out.row(row) = embeddings.row(base + idx);
            }
            ++row;
        }
    }
    return out;
}

ordered_json groups_to_json(const std::vector<MergeGroup>& groups) {
    ordered_json arr = ordered_json::array();
    for (const auto& g : groups) {
        arr.push_back({{"anchor", g.anchor}, {"members", g.members}});
    }
    return arr;
}

}  // namespace

MatrixF materialize_audio(const CompressionResult& result, const TokenStream& stream) {
    return materialize_modality(result.windows, stream.audio_embeddings,
                                stream.config.audio_tokens_per_window, true);
}

MatrixF materialize_video(const CompressionResult& result, const TokenStream& stream) {
    return materialize_modality(result.windows, stream.video_embeddings,
                                stream.config.video_tokens_per_window(), false);
}

std::string result_to_json(const CompressionResult& result) {
    ordered_json j;
    j["engine_version"] = result.engine_version;
    j["strategy"] = std::string(to_string(result.strategy));
    j["content_hash"] = result.content_hash;
    j["stream_config"] = {
        {"d", result.stream_config.embed_dim},
        {"num_windows", result.stream_config.num_windows},
        {"audio_tokens_per_window", result.stream_config.audio_tokens_per_window},
        {"frames_per_window", result.stream_config.frames_per_window},
        {"video_tokens_per_frame", result.stream_config.video_tokens_per_frame},
        {"audio_pool_size", result.stream_config.audio_pool_size},
    };
    if (result.strategy == Strategy::Omnizip) {
        j["prune_config"] = {
            {"rho_a", result.prune_config.rho_a},
            {"rho_v", result.prune_config.rho_v},
            {"rho_max", result.prune_config.rho_max},
            {"rho_min", result.prune_config.rho_min},
            {"G", result.prune_config.group_size},
            {"k", result.prune_config.knn_k},
            {"anchor_fraction", result.prune_config.anchor_fraction},
        };
    } else {
        j["retention"] = result.retention_request;
    }
    j["totals"] = {
        {"audio_tokens", result.audio_total},   {"video_tokens", result.video_total},
        {"audio_kept", result.audio_kept},      {"video_kept", result.video_kept},
        {"retained_ratio", result.retained_ratio},
    };
    j["infeasible_budget"] = result.infeasible_budget;

    if (result.has_saliency) {
        j["saliency"] = {
            {"scores", result.saliency.scores},
            {"salient", result.saliency.salient},
            {"non_salient", result.saliency.non_salient},
            {"window_retention", result.saliency.window_retention},
            {"raw_retention_fraction", result.saliency.raw_retention_fraction},
        };
    }
    j["rates"] = {
        {"initial", result.initial_rates},
        {"final", result.final_rates},
        {"keep_counts", result.keep_counts},
    };

    ordered_json audio_kept = ordered_json::array();
    ordered_json video_kept = ordered_json::array();
    ordered_json merge_groups = ordered_json::array();
    for (const auto& w : result.windows) {
        audio_kept.push_back(w.kept_audio);
        video_kept.push_back({{"kept", w.kept_video},
                              {"removed_temporal", w.removed_temporal},
                              {"removed_spatial", w.removed_spatial}});
        merge_groups.push_back(
            {{"audio", groups_to_json(w.audio_merge_groups)},
             {"video", groups_to_json(w.video_merge_groups)}});
    }
    j["audio_kept"] = std::move(audio_kept);
    j["video_kept"] = std::move(video_kept);
    j["merge_groups"] = std::move(merge_groups);

    return j.dump(2) + "\n";
}

}  // namespace omnizip
