// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/pipeline.hpp"

#include "omnizip/anchor_merge.hpp"
#include "omnizip/baselines.hpp"
#include "omnizip/istc.hpp"
#include "omnizip/rate_allocator.hpp"
#include "omnizip/saliency.hpp"
#include "omnizip/stream_model.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <thread>

namespace omnizip::pipeline {

namespace {

using Clock = std::chrono::steady_clock;

// Runs fn(0..count-1) on up to `workers` threads. Work items write disjoint
// slots, so results are independent of scheduling.
void parallel_for(int workers, int count, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    const int nthreads = std::min(workers, count);
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
        pool.emplace_back([&] {
            while (!failed.load(std::memory_order_relaxed)) {
                const int i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                    failed.store(true, std::memory_order_relaxed);
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

void throw_if_invalid(const ValidationReport& report, const char* what) {
    for (const auto& issue : report.issues) {
        if (issue.severity == Severity::Error) {
            throw Error(ErrorCode::ValidationFailed,
                        std::string(what) + ": " + issue.message +
                            (issue.location.empty() ? "" : " (" + issue.location + ")"));
        }
    }
}

}  // namespace

CompressionResult compress_stream(const TokenStream& stream, const PruneConfig& config,
                                  int workers) {
    throw_if_invalid(stream_model::validate(stream), "invalid stream");
    throw_if_invalid(validate_config(config), "invalid prune config");

    const auto& cfg = stream.config;
    const auto start = Clock::now();

    CompressionResult result;
    result.strategy = Strategy::Omnizip;
    result.stream_config = cfg;
    result.prune_config = config;
    result.audio_total = cfg.total_audio_tokens();
    result.video_total = cfg.total_video_tokens();
    result.windows.resize(static_cast<std::size_t>(cfg.num_windows));

    // Stage 1: audio saliency. Mean received attention at raw resolution,
    // pooled to token resolution, then one global top-k under the audio
    // keep budget (minus the anchor share).
    std::vector<double> raw_scores;
    if (cfg.audio_tokens_per_window > 0) {
        if (stream.attention.kind == AttentionKind::QK) {
            raw_scores = saliency::mean_received_attention_qk(stream.attention.q,
                                                              stream.attention.k,
                                                              stream.attention.d_att);
        } else {
            raw_scores = saliency::mean_received_attention(stream.attention.a);
        }
    }
    const std::vector<double> pooled =
        cfg.audio_tokens_per_window > 0 ? saliency::pool_scores(raw_scores, cfg.audio_pool_size)
                                        : std::vector<double>{};

    const std::int64_t audio_total = result.audio_total;
    const std::int64_t audio_budget = std::llround((1.0 - config.rho_a) * audio_total);
    const std::int64_t anchor_budget = std::llround(config.anchor_fraction * audio_budget);
    const std::int64_t salient_budget = audio_budget - anchor_budget;

    auto partition = saliency::select_salient(pooled, cfg.num_windows,
                                              cfg.audio_tokens_per_window, salient_budget);
    const auto retention =
        saliency::window_retention(partition.salient, cfg.audio_tokens_per_window);

    result.saliency.scores = pooled;
    result.saliency.salient = partition.salient;
    result.saliency.non_salient = partition.non_salient;
    result.saliency.window_retention = retention.normalized;
    result.saliency.raw_retention_fraction = retention.raw;
    result.has_saliency = true;

    // Stage 2: anchor consolidation. The anchor budget is apportioned over
    // windows by non-salient mass.
    std::vector<int> anchor_counts(static_cast<std::size_t>(cfg.num_windows), 0);
    if (anchor_budget > 0) {
        std::int64_t non_salient_total = 0;
        for (const auto& ns : partition.non_salient) non_salient_total += ns.size();
        std::vector<double> ideals(static_cast<std::size_t>(cfg.num_windows), 0.0);
        std::vector<int> caps(static_cast<std::size_t>(cfg.num_windows), 0);
        for (int w = 0; w < cfg.num_windows; ++w) {
            const auto ns = static_cast<double>(partition.non_salient[w].size());
            caps[w] = static_cast<int>(partition.non_salient[w].size());
            ideals[w] = non_salient_total > 0
                            ? static_cast<double>(anchor_budget) * ns / non_salient_total
                            : 0.0;
        }
        anchor_counts = rate_alloc::apportion(ideals, caps, anchor_budget);
    }

    const int n_v = cfg.video_tokens_per_window();
    parallel_for(workers, cfg.num_windows, [&](int w) {
        auto& window = result.windows[static_cast<std::size_t>(w)];
        const auto& salient = partition.salient[static_cast<std::size_t>(w)];
        const auto& non_salient = partition.non_salient[static_cast<std::size_t>(w)];

        window.kept_audio = salient;
        const int anchors_here = anchor_counts[static_cast<std::size_t>(w)];
        if (anchors_here > 0) {
            const auto anchor_pos =
                anchor_merge::sample_anchors(static_cast<int>(non_salient.size()), anchors_here);

            MatrixF h_ns(static_cast<Eigen::Index>(non_salient.size()), cfg.embed_dim);
            for (std::size_t i = 0; i < non_salient.size(); ++i) {
                h_ns.row(static_cast<Eigen::Index>(i)) = stream.audio_embeddings.row(
                    static_cast<std::int64_t>(w) * cfg.audio_tokens_per_window + non_salient[i]);
            }
            const auto video = stream.video_embeddings.middleRows(
                static_cast<std::int64_t>(w) * n_v, n_v);
            const MatrixF s_cross = anchor_merge::cross_modal_similarity(h_ns, video);
            const auto plan =
                anchor_merge::build_merge_plan(s_cross, h_ns, anchor_pos, config.group_size);

            for (std::size_t a = 0; a < plan.anchors.size(); ++a) {
                MergeGroup group;
                group.anchor = non_salient[static_cast<std::size_t>(plan.anchors[a])];
                for (int m : plan.members[a]) {
                    group.members.push_back(non_salient[static_cast<std::size_t>(m)]);
                }
                std::sort(group.members.begin(), group.members.end());
                window.kept_audio.push_back(group.anchor);
                window.audio_merge_groups.push_back(std::move(group));
            }
            std::sort(window.kept_audio.begin(), window.kept_audio.end());
            std::sort(window.audio_merge_groups.begin(), window.audio_merge_groups.end(),
                      [](const MergeGroup& a, const MergeGroup& b) { return a.anchor < b.anchor; });
        }
    });

    // Stage 3: dynamic video rates under the global budget.
    result.initial_rates =
        rate_alloc::initial_rates(retention.normalized, config.rho_max, config.rho_min);
    auto normalized = rate_alloc::normalize_rates(result.initial_rates, config.rho_v,
                                                  config.rho_min, config.rho_max);
    result.final_rates = normalized.rates;
    result.infeasible_budget = normalized.infeasible;

    const std::int64_t video_total = result.video_total;
    const std::int64_t video_budget = std::llround((1.0 - config.rho_v) * video_total);
    const std::int64_t min_keep =
        static_cast<std::int64_t>(cfg.num_windows) * cfg.frames_per_window;
    std::int64_t video_keep = video_budget;
    if (video_keep < min_keep || video_keep > video_total) {
        video_keep = std::clamp(video_keep, min_keep, video_total);
        result.infeasible_budget = true;
    }
    result.keep_counts =
        rate_alloc::keep_counts(result.final_rates, n_v, video_keep, cfg.frames_per_window);

    // Stage 4: interleaved spatio-temporal compression per window.
    parallel_for(workers, cfg.num_windows, [&](int w) {
        auto& window = result.windows[static_cast<std::size_t>(w)];
        const auto video = stream.video_embeddings.middleRows(
            static_cast<std::int64_t>(w) * n_v, n_v);
        auto compressed = istc::compress_window_video(
            video, cfg.frames_per_window, cfg.video_tokens_per_frame,
            result.keep_counts[static_cast<std::size_t>(w)], config.knn_k);
        window.kept_video = std::move(compressed.kept);
        window.removed_temporal = std::move(compressed.removed_temporal);
        window.removed_spatial = std::move(compressed.removed_spatial);
    });

    result.audio_kept = 0;
    result.video_kept = 0;
    for (const auto& w : result.windows) {
        result.audio_kept += static_cast<std::int64_t>(w.kept_audio.size());
        result.video_kept += static_cast<std::int64_t>(w.kept_video.size());
    }
    result.retained_ratio = static_cast<double>(result.audio_kept + result.video_kept) /
                            static_cast<double>(audio_total + video_total);
    result.content_hash = stream_model::content_hash(stream);
    result.elapsed_ms = std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    return result;
}

void report(const CompressionResult& result, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());

    {
        std::ofstream out(out_dir / "result.json", std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoFailure, "cannot write result.json");
        out << result_to_json(result);
        if (!out) throw Error(ErrorCode::IoFailure, "short write on result.json");
    }

    std::ofstream csv(out_dir / "windows.csv", std::ios::binary | std::ios::trunc);
    if (!csv) throw Error(ErrorCode::IoFailure, "cannot write windows.csv");
    csv << "window,S_a,initial_rate,final_rate,audio_kept,video_kept\n";
    char line[160];
    for (std::size_t w = 0; w < result.windows.size(); ++w) {
        const double s_a =
            result.has_saliency ? result.saliency.window_retention[w] : 0.5;
        std::snprintf(line, sizeof(line), "%zu,%.10g,%.10g,%.10g,%zu,%zu\n", w, s_a,
                      result.initial_rates[w], result.final_rates[w],
                      result.windows[w].kept_audio.size(), result.windows[w].kept_video.size());
        csv << line;
    }
    if (!csv) throw Error(ErrorCode::IoFailure, "short write on windows.csv");
}

std::pair<double, double> retention_operating_point(double retention) {
    struct Point {
        double retention;
        double rho_a;
        double rho_v;
    };
    // Published operating points; other retentions prune both modalities at
    // the same ratio.
    static constexpr Point kPoints[] = {
        {1.00, 0.00, 0.00}, {0.55, 0.45, 0.45}, {0.50, 0.50, 0.50},
        {0.45, 0.30, 0.60}, {0.35, 0.40, 0.70},
    };
    for (const auto& p : kPoints) {
        if (std::abs(retention - p.retention) < 1e-9) return {p.rho_a, p.rho_v};
    }
    return {1.0 - retention, 1.0 - retention};
}

std::vector<CompareRow> compare(const TokenStream& stream, const std::vector<Strategy>& strategies,
                                const std::vector<double>& retentions,
                                const cost_model::GeometryPreset& preset, std::uint64_t seed) {
    if (strategies.empty()) {
        throw Error(ErrorCode::ValidationFailed, "strategy list must not be empty");
    }
    if (retentions.empty()) {
        throw Error(ErrorCode::ValidationFailed, "retention list must not be empty");
    }

    const std::int64_t audio_total = stream.config.total_audio_tokens();
    const std::int64_t video_total = stream.config.total_video_tokens();
    const std::int64_t grand_total = audio_total + video_total;

    std::vector<CompareRow> rows;
    for (double retention : retentions) {
        if (!(retention > 0.0) || retention > 1.0) {
            throw Error(ErrorCode::BudgetOutOfRange, "retention must lie in (0, 1]");
        }
        const auto [rho_a, rho_v] = retention_operating_point(retention);
        const std::int64_t keep_audio = std::llround((1.0 - rho_a) * audio_total);
        const std::int64_t keep_video = std::llround((1.0 - rho_v) * video_total);
        const std::int64_t keep_total = keep_audio + keep_video;

        // Baselines split the same total pooled-proportionally so every
        // strategy keeps exactly keep_total tokens.
        baselines::ModalityBudgets budgets;
        budgets.keep_audio = std::llround(static_cast<double>(keep_total) *
                                          static_cast<double>(audio_total) / grand_total);
        budgets.keep_audio = std::clamp<std::int64_t>(
            budgets.keep_audio, std::max<std::int64_t>(0, keep_total - video_total),
            std::min(audio_total, keep_total));
        budgets.keep_video = keep_total - budgets.keep_audio;

        const double retained_ratio =
            static_cast<double>(keep_total) / static_cast<double>(grand_total);
        const std::int64_t n_ref = preset.reference_tokens;
        const std::int64_t n_ref_compressed =
            std::llround(retained_ratio * static_cast<double>(n_ref));
        const double ratio = cost_model::flops_ratio(n_ref_compressed, n_ref, preset.geometry);

        for (Strategy strategy : strategies) {
            CompressionResult result;
            switch (strategy) {
                case Strategy::Omnizip: {
                    PruneConfig pc;
                    pc.rho_a = rho_a;
                    pc.rho_v = rho_v;
                    result = compress_stream(stream, pc);
                    break;
                }
                case Strategy::Random:
                    result = baselines::random_prune(stream, budgets, seed);
                    break;
                case Strategy::TemporalMerge:
                    result = baselines::temporal_merge(stream, budgets);
                    break;
            }
            CompareRow row;
            row.strategy = strategy;
            row.retention_request = retention;
            row.kept_tokens = result.audio_kept + result.video_kept;
            row.retained_ratio =
                static_cast<double>(row.kept_tokens) / static_cast<double>(grand_total);
            row.flops_ratio = ratio;
            row.prune_ms = result.elapsed_ms;
            rows.push_back(row);
        }
    }
    return rows;
}

void write_compare_csv(const std::vector<CompareRow>& rows, const std::filesystem::path& out_csv) {
    if (out_csv.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(out_csv.parent_path(), ec);
    }
    std::ofstream csv(out_csv, std::ios::binary | std::ios::trunc);
    if (!csv) throw Error(ErrorCode::IoFailure, "cannot write " + out_csv.string());
    csv << "strategy,retention,kept_tokens,retained_ratio,flops_ratio,prune_ms\n";
    char line[192];
    for (const auto& row : rows) {
        std::snprintf(line, sizeof(line), "%s,%.6g,%lld,%.6f,%.6f,%.3f\n",
                      std::string(to_string(row.strategy)).c_str(), row.retention_request,
                      static_cast<long long>(row.kept_tokens), row.retained_ratio,
                      row.flops_ratio, row.prune_ms);
        csv << line;
    }
    if (!csv) throw Error(ErrorCode::IoFailure, "short write on " + out_csv.string());
}

}  // namespace omnizip::pipeline
