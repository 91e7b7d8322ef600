// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/baselines.hpp"

#include "omnizip/stream_model.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace omnizip;

namespace {

StreamConfig paper_window_config(int windows) {
    StreamConfig cfg;
    cfg.embed_dim = 8;
    cfg.num_windows = windows;
    cfg.audio_tokens_per_window = 50;
    cfg.frames_per_window = 4;
    cfg.video_tokens_per_frame = 72;
    return cfg;
}

}  // namespace

TEST_CASE("random pruning: identity retention and per-seed determinism") {
    const auto stream = stream_model::synth_stream(paper_window_config(2), 5,
                                                   stream_model::Scenario::IidGaussian);
    const auto identity = baselines::random_prune(stream, 1.0, 3);
    CHECK(identity.audio_kept == stream.config.total_audio_tokens());
    CHECK(identity.video_kept == stream.config.total_video_tokens());
    CHECK(identity.retained_ratio == 1.0);
    for (const auto& w : identity.windows) {
        CHECK(static_cast<int>(w.kept_audio.size()) == 50);
        CHECK(static_cast<int>(w.kept_video.size()) == 288);
    }

    const auto a = baselines::random_prune(stream, 0.5, 17);
    const auto b = baselines::random_prune(stream, 0.5, 17);
    const auto c = baselines::random_prune(stream, 0.5, 18);
    for (int w = 0; w < 2; ++w) {
        CHECK(a.windows[w].kept_audio == b.windows[w].kept_audio);
        CHECK(a.windows[w].kept_video == b.windows[w].kept_video);
    }
    bool any_difference = false;
    for (int w = 0; w < 2; ++w) {
        if (a.windows[w].kept_audio != c.windows[w].kept_audio ||
            a.windows[w].kept_video != c.windows[w].kept_video) {
            any_difference = true;
        }
    }
    CHECK(any_difference);
}

TEST_CASE("random pruning apportions near-evenly over windows") {
    const auto stream = stream_model::synth_stream(paper_window_config(4), 6,
                                                   stream_model::Scenario::IidGaussian);
    const auto result = baselines::random_prune(stream, 0.5, 1);
    // 338 tokens per window at retention 0.5 -> 169 per window, +-1.
    for (const auto& w : result.windows) {
        const auto kept = static_cast<int>(w.kept_audio.size() + w.kept_video.size());
        CHECK(kept >= 168);
        CHECK(kept <= 170);
        CHECK(std::is_sorted(w.kept_audio.begin(), w.kept_audio.end()));
        CHECK(std::is_sorted(w.kept_video.begin(), w.kept_video.end()));
    }
    CHECK(result.audio_kept + result.video_kept == std::llround(0.5 * 338.0 * 4.0));
}

TEST_CASE("random pruning inclusion frequency is uniform over seeds") {
    // One window of 20 audio tokens, retention 0.5 on the audio side.
    StreamConfig cfg;
    cfg.embed_dim = 4;
    cfg.num_windows = 1;
    cfg.audio_tokens_per_window = 20;
    cfg.frames_per_window = 1;
    cfg.video_tokens_per_frame = 20;
    const auto stream = stream_model::synth_stream(cfg, 8, stream_model::Scenario::IidGaussian);

    std::vector<int> hits(20, 0);
    const int seeds = 10000;
    baselines::ModalityBudgets budgets{10, 10};
    for (int seed = 0; seed < seeds; ++seed) {
        const auto result = baselines::random_prune(stream, budgets, static_cast<std::uint64_t>(seed));
        for (int idx : result.windows[0].kept_audio) ++hits[idx];
    }
    for (int idx = 0; idx < 20; ++idx) {
        const double freq = static_cast<double>(hits[idx]) / seeds;
        CHECK(freq >= 0.45);
        CHECK(freq <= 0.55);
    }
}

TEST_CASE("temporal merge: identity retention and tie ordering") {
    const auto stream = stream_model::synth_stream(paper_window_config(2), 9,
                                                   stream_model::Scenario::IidGaussian);
    const auto identity = baselines::temporal_merge(stream, 1.0);
    CHECK(identity.retained_ratio == 1.0);
    for (const auto& w : identity.windows) {
        CHECK(w.audio_merge_groups.empty());
        CHECK(w.video_merge_groups.empty());
    }

    // All-identical tokens: every adjacent pair ties, so the lowest-index
    // disjoint pairs merge first.
    StreamConfig cfg;
    cfg.embed_dim = 4;
    cfg.num_windows = 1;
    cfg.audio_tokens_per_window = 6;
    cfg.frames_per_window = 1;
    cfg.video_tokens_per_frame = 4;
    auto flat = stream_model::synth_stream(cfg, 2, stream_model::Scenario::IidGaussian);
    flat.audio_embeddings = MatrixF::Constant(6, 4, 1.0f);

    baselines::ModalityBudgets budgets{4, 4};
    const auto merged = baselines::temporal_merge(flat, budgets);
    REQUIRE(merged.windows.size() == 1);
    CHECK(merged.windows[0].kept_audio == std::vector<int>{0, 2, 4, 5});
    REQUIRE(merged.windows[0].audio_merge_groups.size() == 2);
    CHECK(merged.windows[0].audio_merge_groups[0].anchor == 0);
    CHECK(merged.windows[0].audio_merge_groups[0].members == std::vector<int>{1});
    CHECK(merged.windows[0].audio_merge_groups[1].anchor == 2);
    CHECK(merged.windows[0].audio_merge_groups[1].members == std::vector<int>{3});
}

TEST_CASE("temporal merge respects cluster boundaries") {
    StreamConfig cfg;
    cfg.embed_dim = 3;
    cfg.num_windows = 1;
    cfg.audio_tokens_per_window = 6;
    cfg.frames_per_window = 1;
    cfg.video_tokens_per_frame = 6;
    auto stream = stream_model::synth_stream(cfg, 4, stream_model::Scenario::IidGaussian);

    // Two orthogonal clusters of three: intra-cosine 1, inter-cosine 0.
    MatrixF audio(6, 3);
    audio << 1.0f, 0.0f, 0.0f, 1.0f, 0.0f, 0.0f, 1.0f, 0.0f, 0.0f,
             0.0f, 1.0f, 0.0f, 0.0f, 1.0f, 0.0f, 0.0f, 1.0f, 0.0f;
    stream.audio_embeddings = audio;

    baselines::ModalityBudgets budgets{4, 6};
    const auto result = baselines::temporal_merge(stream, budgets);
    for (const auto& group : result.windows[0].audio_merge_groups) {
        std::vector<int> all{group.anchor};
        all.insert(all.end(), group.members.begin(), group.members.end());
        const bool low = group.anchor < 3;
        for (int idx : all) CHECK((idx < 3) == low);
    }
}

TEST_CASE("strategies keep identical totals under forced budgets") {
    const auto stream = stream_model::synth_stream(paper_window_config(3), 10,
                                                   stream_model::Scenario::IidGaussian);
    const baselines::ModalityBudgets budgets =
        baselines::proportional_budgets(stream.config, 0.45);
    const auto random = baselines::random_prune(stream, budgets, 0);
    const auto merged = baselines::temporal_merge(stream, budgets);
    CHECK(random.audio_kept + random.video_kept == merged.audio_kept + merged.video_kept);
    CHECK(random.audio_kept == budgets.keep_audio);
    CHECK(merged.video_kept == budgets.keep_video);
}
