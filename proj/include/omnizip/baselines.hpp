// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/result.hpp"
#include "omnizip/types.hpp"

#include <cstdint>

namespace omnizip::baselines {

// Explicit per-modality keep budgets, used by the comparison harness to
// force identical totals across strategies.
struct ModalityBudgets {
    std::int64_t keep_audio = 0;
    std::int64_t keep_video = 0;
};

// Splits round(retention * total) proportionally to the modality sizes.
ModalityBudgets proportional_budgets(const StreamConfig& config, double retention);

// Keeps a uniformly random subset of exactly the budgeted size per modality,
// apportioned near-evenly across windows. Deterministic per seed.
CompressionResult random_prune(const TokenStream& stream, double retention, std::uint64_t seed);
CompressionResult random_prune(const TokenStream& stream, ModalityBudgets budgets,
                               std::uint64_t seed);

// Temporal-merge baseline: within each window and modality, repeatedly
// merges the most cosine-similar adjacent token pairs (mean of the group's
// original embeddings) until the budget is met. Deterministic.
CompressionResult temporal_merge(const TokenStream& stream, double retention);
CompressionResult temporal_merge(const TokenStream& stream, ModalityBudgets budgets);

}  // namespace omnizip::baselines
