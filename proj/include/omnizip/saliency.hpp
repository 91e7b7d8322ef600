// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/types.hpp"

#include <vector>

namespace omnizip::saliency {

// Per-window partition of pooled audio tokens into salient and non-salient
// sets, plus the retention statistics derived from it.
struct SaliencyReport {
    std::vector<double> scores;                  // mean received attention, pooled, flat
    std::vector<std::vector<int>> salient;       // per window, sorted ascending
    std::vector<std::vector<int>> non_salient;   // per window, sorted ascending
    std::vector<double> window_retention;        // in [0, 1]
    std::vector<double> raw_retention_fraction;  // |salient_w| / n_a
};

// Row-stochastic attention from query/key matrices: softmax of Q K^T / sqrt(d_att)
// with row-max subtraction. Computed and returned in double.
MatrixD attention_from_qk(const MatrixF& q, const MatrixF& k, int d_att);

// score_j = (1/n) * sum_i A[i][j]. Scores sum to 1 for row-stochastic A.
std::vector<double> mean_received_attention(const MatrixD& attention);
std::vector<double> mean_received_attention(const MatrixF& attention);

// Same scores computed directly from Q/K in row blocks, without
// materializing the full attention matrix.
std::vector<double> mean_received_attention_qk(const MatrixF& q, const MatrixF& k, int d_att);

// Average-pools consecutive runs of `pool` scores; length must divide evenly.
std::vector<double> pool_scores(const std::vector<double>& scores, int pool);

struct SalientPartition {
    std::vector<std::vector<int>> salient;
    std::vector<std::vector<int>> non_salient;
};

// Global top-k over all windows: the `salient_budget` highest-scoring pooled
// tokens are salient, ties broken by lower (window, index). `pooled_scores`
// is flat with `tokens_per_window` entries per window.
SalientPartition select_salient(const std::vector<double>& pooled_scores, int num_windows,
                                int tokens_per_window, std::int64_t salient_budget);

struct WindowRetention {
    std::vector<double> raw;        // |salient_w| / n_a, 0 for silent windows
    std::vector<double> normalized; // min-max over windows, 0.5 when all equal
};

WindowRetention window_retention(const std::vector<std::vector<int>>& salient,
                                 int tokens_per_window);

}  // namespace omnizip::saliency
