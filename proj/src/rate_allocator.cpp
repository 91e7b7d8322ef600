// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/rate_allocator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace omnizip::rate_alloc {

std::vector<double> initial_rates(const std::vector<double>& retention, double rho_max,
                                  double rho_min) {
    if (rho_min > rho_max) {
        throw Error(ErrorCode::ValidationFailed, "rho_min exceeds rho_max");
    }
    std::vector<double> rates(retention.size());
    for (std::size_t i = 0; i < retention.size(); ++i) {
        rates[i] = rho_max - (rho_max - rho_min) * retention[i];
    }
    return rates;
}

NormalizeResult normalize_rates(const std::vector<double>& initial, double rho_v, double rho_min,
                                double rho_max) {
    NormalizeResult result;
    result.rates = initial;
    const std::size_t n = initial.size();
    if (n == 0) return result;

    const double lo = std::max(0.0, rho_min - kClampSlack);
    const double hi = std::min(1.0, rho_max + kClampSlack);
    const double target = rho_v * static_cast<double>(n);
    constexpr double kTol = 1e-9;

    auto total = [&] { return std::accumulate(result.rates.begin(), result.rates.end(), 0.0); };

    // All-equal inputs scale to exactly rho_v (or a common clamp); keeping
    // this path exact avoids drift the general loop cannot.
    const auto [min_it, max_it] = std::minmax_element(initial.begin(), initial.end());
    if (*min_it == *max_it) {
        const double value = std::clamp(rho_v, lo, hi);
        std::fill(result.rates.begin(), result.rates.end(), value);
        if (value != rho_v) {
            std::fill(result.rates.begin(), result.rates.end(), rho_v);
            result.infeasible = true;
        }
        return result;
    }

    std::vector<char> clamped(n, 0);
    const std::size_t max_rounds = 2 * n + 4;
    for (std::size_t round = 0; round < max_rounds; ++round) {
        if (std::abs(total() - target) <= kTol) return result;

        double clamped_sum = 0.0;
        double free_sum = 0.0;
        std::size_t free_count = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (clamped[i]) {
                clamped_sum += result.rates[i];
            } else {
                free_sum += result.rates[i];
                ++free_count;
            }
        }
        if (free_count == 0 || free_sum <= 0.0) break;

        const double scale = (target - clamped_sum) / free_sum;
        bool any_new_clamp = false;
        for (std::size_t i = 0; i < n; ++i) {
            if (clamped[i]) continue;
            double value = result.rates[i] * scale;
            if (value <= lo) {
                value = lo;
                clamped[i] = 1;
                any_new_clamp = true;
            } else if (value >= hi) {
                value = hi;
                clamped[i] = 1;
                any_new_clamp = true;
            }
            result.rates[i] = value;
        }
        if (!any_new_clamp) {
            // Pure rescale: the free rates now sum to the remaining budget.
            if (std::abs(total() - target) <= kTol) return result;
        }
    }

    // Every rate is pinned (or no progress is possible): spread the residual
    // uniformly and report the budget as infeasible under the clamps.
    const double residual = (target - total()) / static_cast<double>(n);
    if (std::abs(residual) > kTol / static_cast<double>(n)) {
        for (double& r : result.rates) r += residual;
        result.infeasible = true;
    }
    return result;
}

std::vector<int> apportion(const std::vector<double>& ideals, const std::vector<int>& caps,
                           std::int64_t total) {
    const std::size_t n = ideals.size();
    std::vector<int> counts(n, 0);
    std::vector<double> fraction(n, 0.0);
    std::int64_t assigned = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double ideal = std::clamp(ideals[i], 0.0, static_cast<double>(caps[i]));
        counts[i] = static_cast<int>(std::floor(ideal));
        fraction[i] = ideal - counts[i];
        assigned += counts[i];
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    if (assigned < total) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (fraction[a] != fraction[b]) return fraction[a] > fraction[b];
            return a < b;
        });
        std::int64_t remaining = total - assigned;
        while (remaining > 0) {
            bool progressed = false;
            for (std::size_t i : order) {
                if (remaining == 0) break;
                if (counts[i] < caps[i]) {
                    ++counts[i];
                    --remaining;
                    progressed = true;
                }
            }
            if (!progressed) break;
        }
    } else if (assigned > total) {
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (fraction[a] != fraction[b]) return fraction[a] < fraction[b];
            return a < b;
        });
        std::int64_t excess = assigned - total;
        while (excess > 0) {
            bool progressed = false;
            for (std::size_t i : order) {
                if (excess == 0) break;
                if (counts[i] > 0) {
                    --counts[i];
                    --excess;
                    progressed = true;
                }
            }
            if (!progressed) break;
        }
    }
    return counts;
}

std::vector<int> keep_counts(const std::vector<double>& final_rates, int tokens_per_window,
                             std::int64_t global_keep, int frames_per_window) {
    const std::size_t n = final_rates.size();
    if (n == 0) return {};

    std::vector<double> ideal(n);
    for (std::size_t i = 0; i < n; ++i) {
        ideal[i] = (1.0 - final_rates[i]) * tokens_per_window;
    }
    std::vector<int> caps(n, tokens_per_window);
    std::vector<int> counts = apportion(ideal, caps, global_keep);

    // Enforce the per-frame floor, paying from the largest windows. Keeps
    // the total invariant; if the whole budget is below N*F no donor exists
    // and the floor cannot be met (callers flag that case upstream).
    const int floor_count = std::min(frames_per_window, tokens_per_window);
    for (std::size_t i = 0; i < n; ++i) {
        while (counts[i] < floor_count) {
            // Donor: largest count above the floor, ties to lower index.
            std::size_t donor = n;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i || counts[j] <= floor_count) continue;
                if (donor == n || counts[j] > counts[donor]) donor = j;
            }
            if (donor == n) break;
            ++counts[i];
            --counts[donor];
        }
    }
    return counts;
}

}  // namespace omnizip::rate_alloc
