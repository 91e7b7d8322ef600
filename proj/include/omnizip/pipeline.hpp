// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/cost_model.hpp"
#include "omnizip/result.hpp"
#include "omnizip/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace omnizip::pipeline {

// Runs the full audio-guided compression: saliency-based audio selection,
// anchor consolidation, budget-normalized per-window video rates, and
// interleaved spatio-temporal video pruning. Deterministic for fixed inputs
// and independent of `workers`.
CompressionResult compress_stream(const TokenStream& stream, const PruneConfig& config,
                                  int workers = 1);

// Writes result.json and windows.csv (window, S_a, initial_rate, final_rate,
// audio_kept, video_kept) into `out_dir`. Byte-identical across reruns.
void report(const CompressionResult& result, const std::filesystem::path& out_dir);

struct CompareRow {
    Strategy strategy = Strategy::Omnizip;
    double retention_request = 1.0;
    std::int64_t kept_tokens = 0;
    double retained_ratio = 1.0;
    double flops_ratio = 1.0;
    double prune_ms = 0.0;
};

// One row per (strategy, retention). Every strategy at a given retention is
// held to the same total token budget, derived from the pruning-ratio
// operating point for that retention. FLOPs ratios are evaluated at the
// geometry preset's reference token count.
std::vector<CompareRow> compare(const TokenStream& stream, const std::vector<Strategy>& strategies,
                                const std::vector<double>& retentions,
                                const cost_model::GeometryPreset& preset, std::uint64_t seed = 0);

void write_compare_csv(const std::vector<CompareRow>& rows, const std::filesystem::path& out_csv);

// Pruning ratios used for a requested retention: the known operating points
// (1.0, 0.55, 0.50, 0.45, 0.35) map to their published (rho_a, rho_v) pairs,
// anything else falls back to rho_a = rho_v = 1 - retention.
std::pair<double, double> retention_operating_point(double retention);

}  // namespace omnizip::pipeline
