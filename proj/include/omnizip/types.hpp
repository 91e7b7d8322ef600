// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace omnizip {

// Row-major storage throughout: the binary tensor format is row-major with
// the embedding dimension innermost, so matrices map 1:1 onto file bytes.
using MatrixF = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MatrixD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr std::string_view kEngineVersion = "0.1.0";

enum class ErrorCode {
    MissingFile,
    ShapeMismatch,
    NonFiniteValue,
    ConfigMismatch,
    IoFailure,
    IndivisibleLength,
    BudgetOutOfRange,
    DimMismatch,
    TooFewTokens,
    OrderViolation,
    ValidationFailed,
    InfeasibleBudget,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), m_code(code) {}

    ErrorCode code() const { return m_code; }

private:
    ErrorCode m_code;
};

// Geometry of one windowed token stream. Every window carries the same
// number of audio tokens and F x P video tokens.
struct StreamConfig {
    int embed_dim = 0;                // d
    int num_windows = 0;              // N
    int audio_tokens_per_window = 0;  // n_a, zero means a silent stream
    int frames_per_window = 0;        // F
    int video_tokens_per_frame = 0;   // P
    int audio_pool_size = 1;          // attention positions per pooled audio token

    int video_tokens_per_window() const { return frames_per_window * video_tokens_per_frame; }
    std::int64_t total_audio_tokens() const {
        return static_cast<std::int64_t>(num_windows) * audio_tokens_per_window;
    }
    std::int64_t total_video_tokens() const {
        return static_cast<std::int64_t>(num_windows) * video_tokens_per_window();
    }
    // Pre-pool audio positions, i.e. the side length of the attention matrix.
    std::int64_t raw_audio_tokens() const { return total_audio_tokens() * audio_pool_size; }

    bool operator==(const StreamConfig&) const = default;
};

enum class AttentionKind { QK, Precomputed };

// Last-encoder-layer audio attention, supplied as data: either the Q/K pair
// it is derived from or the already-softmaxed row-stochastic matrix.
struct AttentionSource {
    AttentionKind kind = AttentionKind::QK;
    MatrixF q;      // raw_audio x d_att
    MatrixF k;      // raw_audio x d_att
    int d_att = 0;
    MatrixF a;      // raw_audio x raw_audio, rows sum to 1
};

struct TokenStream {
    StreamConfig config;
    MatrixF audio_embeddings;  // (N * n_a) x d
    MatrixF video_embeddings;  // (N * F * P) x d
    AttentionSource attention;
    // Windows designated as events by the synthetic generator; empty for
    // real dumps. Kept for oracle tests and written to the manifest.
    std::vector<int> planted_event_windows;
};

enum class Severity { Warn, Error };

struct ValidationIssue {
    Severity severity = Severity::Error;
    std::string message;
    std::string location;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;

    bool ok() const {
        for (const auto& issue : issues) {
            if (issue.severity == Severity::Error) return false;
        }
        return true;
    }
    void add(Severity severity, std::string message, std::string location = {}) {
        issues.push_back({severity, std::move(message), std::move(location)});
    }
};

// Pruning hyperparameters. Field names mirror the CLI flags.
struct PruneConfig {
    double rho_a = 0.3;            // audio pruning ratio
    double rho_v = 0.6;            // global video pruning ratio
    double rho_max = 0.75;         // per-window video rate ceiling
    double rho_min = 0.35;         // per-window video rate floor
    int group_size = 3;            // G, merged tokens per audio anchor
    int knn_k = 5;                 // k for density-peak scoring
    double anchor_fraction = 0.2;  // share of the audio keep-budget spent on anchors
};

ValidationReport validate_config(const PruneConfig& config);

enum class Strategy { Omnizip, Random, TemporalMerge };

std::string_view to_string(Strategy strategy);
Strategy strategy_from_string(std::string_view name);

}  // namespace omnizip
