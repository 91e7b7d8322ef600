// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/types.hpp"

#include <cstdint>
#include <vector>

namespace omnizip::rate_alloc {

// Normalization may clamp slightly beyond [rho_min, rho_max]; strict bounds
// can make the global budget infeasible at extreme targets.
inline constexpr double kClampSlack = 0.05;

struct PruneRates {
    std::vector<double> initial;  // from the retention interpolation
    std::vector<double> final;    // after budget normalization
    std::vector<int> keep_counts;
    bool infeasible = false;
};

// rate_i = rho_max - (rho_max - rho_min) * retention_i. Order-reversing in
// the retention score.
std::vector<double> initial_rates(const std::vector<double>& retention, double rho_max,
                                  double rho_min);

struct NormalizeResult {
    std::vector<double> rates;
    bool infeasible = false;
};

// Proportional water-filling onto the budget sum(rates) = rho_v * N:
// repeatedly scale all unclamped rates by (remaining budget / their sum) and
// clamp escapees to [max(0, rho_min - slack), min(1, rho_max + slack)]. If
// everything clamps and the budget is still unmet, the residual is spread
// uniformly and the result is flagged infeasible. Preserves the input order
// (higher initial -> higher-or-equal final).
NormalizeResult normalize_rates(const std::vector<double>& initial, double rho_v,
                                double rho_min, double rho_max);

// Largest-remainder apportionment of `total` units over fractional ideals
// with per-slot caps: floor every ideal, then settle the difference by
// descending (surplus) or ascending (deficit) fractional part, ties to the
// lower index. Requires 0 <= total <= sum(caps).
std::vector<int> apportion(const std::vector<double>& ideals, const std::vector<int>& caps,
                           std::int64_t total);

// Integer keep counts per window via largest-remainder apportionment of
// `global_keep` over the ideals (1 - rate_i) * tokens_per_window, floored at
// `frames_per_window` (one token per frame) with deficits taken from the
// largest window; ties go to the lower window index.
std::vector<int> keep_counts(const std::vector<double>& final_rates, int tokens_per_window,
                             std::int64_t global_keep, int frames_per_window);

}  // namespace omnizip::rate_alloc
