// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/baselines.hpp"

#include "omnizip/anchor_merge.hpp"
#include "omnizip/rate_allocator.hpp"
#include "omnizip/rng.hpp"
#include "omnizip/stream_model.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>

namespace omnizip::baselines {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point start) {
    return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

void check_retention(double retention) {
    if (!(retention > 0.0) || retention > 1.0) {
        throw Error(ErrorCode::BudgetOutOfRange, "retention must lie in (0, 1]");
    }
}

// Near-even per-window quotas for one modality.
std::vector<int> window_quotas(int num_windows, int tokens_per_window, std::int64_t keep) {
    std::vector<double> ideals(static_cast<std::size_t>(num_windows),
                               static_cast<double>(keep) / num_windows);
    std::vector<int> caps(static_cast<std::size_t>(num_windows), tokens_per_window);
    return rate_alloc::apportion(ideals, caps, keep);
}

CompressionResult make_result(const TokenStream& stream, Strategy strategy, double retention,
                              ModalityBudgets budgets) {
    CompressionResult result;
    result.strategy = strategy;
    result.stream_config = stream.config;
    result.retention_request = retention;
    result.audio_total = stream.config.total_audio_tokens();
    result.video_total = stream.config.total_video_tokens();
    result.audio_kept = budgets.keep_audio;
    result.video_kept = budgets.keep_video;
    result.retained_ratio = static_cast<double>(budgets.keep_audio + budgets.keep_video) /
                            static_cast<double>(result.audio_total + result.video_total);
    result.content_hash = stream_model::content_hash(stream);
    result.windows.resize(static_cast<std::size_t>(stream.config.num_windows));
    return result;
}

void fill_rates(CompressionResult& result) {
    const int n_v = result.stream_config.video_tokens_per_window();
    for (const auto& w : result.windows) {
        const double rate = 1.0 - static_cast<double>(w.kept_video.size()) / n_v;
        result.initial_rates.push_back(rate);
        result.final_rates.push_back(rate);
        result.keep_counts.push_back(static_cast<int>(w.kept_video.size()));
    }
}

// One merge round on the current token list: rank adjacent pairs by cosine,
// greedily merge disjoint top pairs until `needed` merges happen or no pair
// is left. Entries carry their original index sets; merged values are the
// mean of all originals.
struct MergeEntry {
    std::vector<int> originals;  // ascending
    Eigen::RowVectorXf value;
};

int merge_round(std::vector<MergeEntry>& entries, const MatrixF& original_rows, int needed) {
    const int pairs = static_cast<int>(entries.size()) - 1;
    if (pairs < 1 || needed < 1) return 0;
    std::vector<double> sims(static_cast<std::size_t>(pairs));
    for (int i = 0; i < pairs; ++i) {
        const Eigen::RowVectorXd a = entries[static_cast<std::size_t>(i)].value.cast<double>();
        const Eigen::RowVectorXd b = entries[static_cast<std::size_t>(i) + 1].value.cast<double>();
        const double norms = a.norm() * b.norm();
        sims[static_cast<std::size_t>(i)] = norms > 0.0 ? a.dot(b) / norms : 0.0;
    }
    std::vector<int> order(static_cast<std::size_t>(pairs));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (sims[static_cast<std::size_t>(a)] != sims[static_cast<std::size_t>(b)])
            return sims[static_cast<std::size_t>(a)] > sims[static_cast<std::size_t>(b)];
        return a < b;
    });

    std::vector<char> used(entries.size(), 0);
    std::vector<int> selected;
    for (int p : order) {
        if (static_cast<int>(selected.size()) == needed) break;
        if (used[static_cast<std::size_t>(p)] || used[static_cast<std::size_t>(p) + 1]) continue;
        used[static_cast<std::size_t>(p)] = 1;
        used[static_cast<std::size_t>(p) + 1] = 1;
        selected.push_back(p);
    }
    std::sort(selected.begin(), selected.end());

    std::vector<MergeEntry> next;
    next.reserve(entries.size() - selected.size());
    std::size_t s = 0;
    for (std::size_t i = 0; i < entries.size();) {
        if (s < selected.size() && static_cast<std::size_t>(selected[s]) == i) {
            MergeEntry merged;
            merged.originals = entries[i].originals;
            merged.originals.insert(merged.originals.end(), entries[i + 1].originals.begin(),
                                    entries[i + 1].originals.end());
            std::sort(merged.originals.begin(), merged.originals.end());
            merged.value = anchor_merge::group_mean(original_rows, merged.originals);
            next.push_back(std::move(merged));
            i += 2;
            ++s;
        } else {
            next.push_back(std::move(entries[i]));
            ++i;
        }
    }
    entries = std::move(next);
    return static_cast<int>(selected.size());
}

// Merges one window's tokens down to `keep` survivors. Returns kept anchor
// indices and the non-trivial merge groups.
std::pair<std::vector<int>, std::vector<MergeGroup>> merge_window(const MatrixF& window_rows,
                                                                  int keep) {
    const int n = static_cast<int>(window_rows.rows());
    std::vector<int> kept;
    std::vector<MergeGroup> groups;
    if (keep >= n) {
        kept.resize(static_cast<std::size_t>(n));
        std::iota(kept.begin(), kept.end(), 0);
        return {kept, groups};
    }
    if (keep <= 0) return {kept, groups};  // degenerate quota: drop the window

    std::vector<MergeEntry> entries(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        entries[static_cast<std::size_t>(i)].originals = {i};
        entries[static_cast<std::size_t>(i)].value = window_rows.row(i);
    }
    while (static_cast<int>(entries.size()) > keep) {
        const int needed = static_cast<int>(entries.size()) - keep;
        if (merge_round(entries, window_rows, needed) == 0) break;
    }
    for (const auto& entry : entries) {
        kept.push_back(entry.originals.front());
        if (entry.originals.size() > 1) {
            MergeGroup g;
            g.anchor = entry.originals.front();
            g.members.assign(entry.originals.begin() + 1, entry.originals.end());
            groups.push_back(std::move(g));
        }
    }
    return {kept, groups};
}

}  // namespace

ModalityBudgets proportional_budgets(const StreamConfig& config, double retention) {
    const std::int64_t audio = config.total_audio_tokens();
    const std::int64_t video = config.total_video_tokens();
    const std::int64_t total = audio + video;
    const std::int64_t keep_total = std::llround(retention * static_cast<double>(total));
    std::int64_t keep_audio =
        std::llround(static_cast<double>(keep_total) * static_cast<double>(audio) / total);
    keep_audio = std::clamp<std::int64_t>(keep_audio, std::max<std::int64_t>(0, keep_total - video),
                                          std::min(audio, keep_total));
    return {keep_audio, keep_total - keep_audio};
}

CompressionResult random_prune(const TokenStream& stream, double retention, std::uint64_t seed) {
    check_retention(retention);
    auto result = random_prune(stream, proportional_budgets(stream.config, retention), seed);
    result.retention_request = retention;
    return result;
}

CompressionResult random_prune(const TokenStream& stream, ModalityBudgets budgets,
                               std::uint64_t seed) {
    const auto start = Clock::now();
    const auto& cfg = stream.config;
    CompressionResult result = make_result(
        stream, Strategy::Random,
        static_cast<double>(budgets.keep_audio + budgets.keep_video) /
            static_cast<double>(cfg.total_audio_tokens() + cfg.total_video_tokens()),
        budgets);

    const auto audio_quotas =
        window_quotas(cfg.num_windows, cfg.audio_tokens_per_window, budgets.keep_audio);
    const auto video_quotas =
        window_quotas(cfg.num_windows, cfg.video_tokens_per_window(), budgets.keep_video);

    Rng root(seed);
    for (int w = 0; w < cfg.num_windows; ++w) {
        auto& window = result.windows[static_cast<std::size_t>(w)];
        if (cfg.audio_tokens_per_window > 0) {
            Rng rng = root.derive(0x10000u + static_cast<std::uint64_t>(w));
            window.kept_audio = rng.sample_without_replacement(
                cfg.audio_tokens_per_window, audio_quotas[static_cast<std::size_t>(w)]);
        }
        Rng rng = root.derive(0x20000u + static_cast<std::uint64_t>(w));
        window.kept_video = rng.sample_without_replacement(
            cfg.video_tokens_per_window(), video_quotas[static_cast<std::size_t>(w)]);
    }
    fill_rates(result);
    result.elapsed_ms = elapsed_ms(start);
    return result;
}

CompressionResult temporal_merge(const TokenStream& stream, double retention) {
    check_retention(retention);
    auto result = temporal_merge(stream, proportional_budgets(stream.config, retention));
    result.retention_request = retention;
    return result;
}

CompressionResult temporal_merge(const TokenStream& stream, ModalityBudgets budgets) {
    const auto start = Clock::now();
    const auto& cfg = stream.config;
    CompressionResult result = make_result(
        stream, Strategy::TemporalMerge,
        static_cast<double>(budgets.keep_audio + budgets.keep_video) /
            static_cast<double>(cfg.total_audio_tokens() + cfg.total_video_tokens()),
        budgets);

    const auto audio_quotas =
        window_quotas(cfg.num_windows, cfg.audio_tokens_per_window, budgets.keep_audio);
    const auto video_quotas =
        window_quotas(cfg.num_windows, cfg.video_tokens_per_window(), budgets.keep_video);

    for (int w = 0; w < cfg.num_windows; ++w) {
        auto& window = result.windows[static_cast<std::size_t>(w)];
        if (cfg.audio_tokens_per_window > 0) {
            const auto rows = stream.audio_embeddings.middleRows(
                static_cast<std::int64_t>(w) * cfg.audio_tokens_per_window,
                cfg.audio_tokens_per_window);
            auto [kept, groups] = merge_window(rows, audio_quotas[static_cast<std::size_t>(w)]);
            window.kept_audio = std::move(kept);
            window.audio_merge_groups = std::move(groups);
        }
        const auto rows = stream.video_embeddings.middleRows(
            static_cast<std::int64_t>(w) * cfg.video_tokens_per_window(),
            cfg.video_tokens_per_window());
        auto [kept, groups] = merge_window(rows, video_quotas[static_cast<std::size_t>(w)]);
        window.kept_video = std::move(kept);
        window.video_merge_groups = std::move(groups);
    }
    fill_rates(result);
    result.elapsed_ms = elapsed_ms(start);
    return result;
}

}  // namespace omnizip::baselines
