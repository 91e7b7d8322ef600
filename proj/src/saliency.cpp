// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/saliency.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace omnizip::saliency {

namespace {

void check_finite(const MatrixF& m, const char* name) {
    const float* data = m.data();
    for (std::int64_t i = 0; i < m.size(); ++i) {
        if (!std::isfinite(data[i])) {
            throw Error(ErrorCode::NonFiniteValue, std::string("non-finite value in ") + name +
                                                       " at flat index " + std::to_string(i));
        }
    }
}

// Softmax of one logit row in place, with row-max subtraction.
void softmax_row(Eigen::Ref<Eigen::RowVectorXd> row) {
    const double max = row.maxCoeff();
    row = (row.array() - max).exp();
    row /= row.sum();
}

}  // namespace

MatrixD attention_from_qk(const MatrixF& q, const MatrixF& k, int d_att) {
    if (q.rows() < 1 || d_att < 1) {
        throw Error(ErrorCode::ValidationFailed, "attention needs n >= 1 and d_att >= 1");
    }
    if (q.rows() != k.rows() || q.cols() != k.cols() || q.cols() != d_att) {
        throw Error(ErrorCode::DimMismatch, "Q and K must both be n x d_att");
    }
    check_finite(q, "Q");
    check_finite(k, "K");

    const double scale = 1.0 / std::sqrt(static_cast<double>(d_att));
    MatrixD logits = (q.cast<double>() * k.cast<double>().transpose()) * scale;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) softmax_row(logits.row(i));
    return logits;
}

namespace {

template <typename Mat>
std::vector<double> column_means(const Mat& attention) {
    const Eigen::Index n = attention.rows();
    std::vector<double> sums(static_cast<std::size_t>(attention.cols()), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < attention.cols(); ++j) {
            sums[static_cast<std::size_t>(j)] += static_cast<double>(attention(i, j));
        }
    }
    for (double& s : sums) s /= static_cast<double>(n);
    return sums;
}

}  // namespace

std::vector<double> mean_received_attention(const MatrixD& attention) {
    return column_means(attention);
}

std::vector<double> mean_received_attention(const MatrixF& attention) {
    return column_means(attention);
}

std::vector<double> mean_received_attention_qk(const MatrixF& q, const MatrixF& k, int d_att) {
    if (q.rows() < 1 || d_att < 1) {
        throw Error(ErrorCode::ValidationFailed, "attention needs n >= 1 and d_att >= 1");
    }
    if (q.rows() != k.rows() || q.cols() != k.cols() || q.cols() != d_att) {
        throw Error(ErrorCode::DimMismatch, "Q and K must both be n x d_att");
    }
    check_finite(q, "Q");
    check_finite(k, "K");

    const Eigen::Index n = q.rows();
    const double scale = 1.0 / std::sqrt(static_cast<double>(d_att));
    const MatrixD kd = k.cast<double>();
    std::vector<double> sums(static_cast<std::size_t>(n), 0.0);

    constexpr Eigen::Index kBlock = 256;
    MatrixD block;
    for (Eigen::Index row0 = 0; row0 < n; row0 += kBlock) {
        const Eigen::Index rows = std::min(kBlock, n - row0);
        block.noalias() = (q.middleRows(row0, rows).cast<double>() * kd.transpose()) * scale;
        for (Eigen::Index i = 0; i < rows; ++i) {
            softmax_row(block.row(i));
            for (Eigen::Index j = 0; j < n; ++j) {
                sums[static_cast<std::size_t>(j)] += block(i, j);
            }
        }
    }
    for (double& s : sums) s /= static_cast<double>(n);
    return sums;
}

std::vector<double> pool_scores(const std::vector<double>& scores, int pool) {
    if (pool < 1) throw Error(ErrorCode::ValidationFailed, "pool must be positive");
    if (scores.size() % static_cast<std::size_t>(pool) != 0) {
        throw Error(ErrorCode::IndivisibleLength,
                    "score length " + std::to_string(scores.size()) +
                        " is not divisible by pool " + std::to_string(pool));
    }
    std::vector<double> pooled(scores.size() / static_cast<std::size_t>(pool));
    for (std::size_t j = 0; j < pooled.size(); ++j) {
        double sum = 0.0;
        for (int p = 0; p < pool; ++p) sum += scores[j * static_cast<std::size_t>(pool) + p];
        pooled[j] = sum / pool;
    }
    return pooled;
}

SalientPartition select_salient(const std::vector<double>& pooled_scores, int num_windows,
                                int tokens_per_window, std::int64_t salient_budget) {
    const std::int64_t total = static_cast<std::int64_t>(num_windows) * tokens_per_window;
    if (static_cast<std::int64_t>(pooled_scores.size()) != total) {
        throw Error(ErrorCode::DimMismatch, "pooled score length does not match window layout");
    }
    if (salient_budget < 0 || salient_budget > total) {
        throw Error(ErrorCode::BudgetOutOfRange,
                    "salient budget " + std::to_string(salient_budget) + " outside [0, " +
                        std::to_string(total) + "]");
    }

    // Order: score descending, then (window, index) ascending, which for a
    // flat layout is just the flat position.
    std::vector<std::int64_t> order(static_cast<std::size_t>(total));
    std::iota(order.begin(), order.end(), 0);
    auto better = [&](std::int64_t lhs, std::int64_t rhs) {
        if (pooled_scores[static_cast<std::size_t>(lhs)] !=
            pooled_scores[static_cast<std::size_t>(rhs)]) {
            return pooled_scores[static_cast<std::size_t>(lhs)] >
                   pooled_scores[static_cast<std::size_t>(rhs)];
        }
        return lhs < rhs;
    };
    if (salient_budget > 0 && salient_budget < total) {
        std::nth_element(order.begin(), order.begin() + salient_budget - 1, order.end(), better);
    }

    SalientPartition part;
    part.salient.resize(static_cast<std::size_t>(num_windows));
    part.non_salient.resize(static_cast<std::size_t>(num_windows));
    std::vector<char> is_salient(static_cast<std::size_t>(total), 0);
    for (std::int64_t i = 0; i < salient_budget; ++i) {
        is_salient[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = 1;
    }
    for (std::int64_t flat = 0; flat < total; ++flat) {
        const auto w = static_cast<std::size_t>(flat / tokens_per_window);
        const int idx = static_cast<int>(flat % tokens_per_window);
        if (is_salient[static_cast<std::size_t>(flat)]) {
            part.salient[w].push_back(idx);
        } else {
            part.non_salient[w].push_back(idx);
        }
    }
    return part;
}

WindowRetention window_retention(const std::vector<std::vector<int>>& salient,
                                 int tokens_per_window) {
    WindowRetention out;
    out.raw.reserve(salient.size());
    for (const auto& window : salient) {
        out.raw.push_back(tokens_per_window > 0
                              ? static_cast<double>(window.size()) / tokens_per_window
                              : 0.0);
    }
    const auto [min_it, max_it] = std::minmax_element(out.raw.begin(), out.raw.end());
    out.normalized.resize(out.raw.size());
    if (out.raw.empty() || *min_it == *max_it) {
        std::fill(out.normalized.begin(), out.normalized.end(), 0.5);
    } else {
        const double span = *max_it - *min_it;
        for (std::size_t i = 0; i < out.raw.size(); ++i) {
            out.normalized[i] = (out.raw[i] - *min_it) / span;
        }
    }
    return out;
}

}  // namespace omnizip::saliency
