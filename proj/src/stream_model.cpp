// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/stream_model.hpp"

#include "omnizip/rng.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; big-endian hosts are unsupported");

namespace omnizip::stream_model {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

void fnv_bytes(std::uint64_t& state, const void* data, std::size_t len) {
    const auto* bytes = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        state ^= bytes[i];
        state *= kFnvPrime;
    }
}

void fnv_i64(std::uint64_t& state, std::int64_t value) { fnv_bytes(state, &value, sizeof(value)); }

void check_finite(const float* data, std::int64_t count, const std::string& tensor) {
    for (std::int64_t i = 0; i < count; ++i) {
        if (!std::isfinite(data[i])) {
            throw Error(ErrorCode::NonFiniteValue,
                        "non-finite value in " + tensor + " at flat index " + std::to_string(i));
        }
    }
}

MatrixF to_matrix(std::vector<float>&& data, std::int64_t rows, std::int64_t cols) {
    MatrixF m(rows, cols);
    std::memcpy(m.data(), data.data(), data.size() * sizeof(float));
    return m;
}

json require(const json& j, const char* key, const fs::path& manifest) {
    if (!j.contains(key)) {
        throw Error(ErrorCode::IoFailure,
                    "manifest " + manifest.string() + " is missing key \"" + key + "\"");
    }
    return j.at(key);
}

void fill_gaussian(MatrixF& m, Rng& rng) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = static_cast<float>(rng.gaussian());
}

}  // namespace

std::vector<float> read_f32(const fs::path& path, std::int64_t expected_count) {
    std::error_code ec;
    if (!fs::exists(path, ec) || ec) {
        throw Error(ErrorCode::MissingFile, "missing tensor file: " + path.string());
    }
    const auto actual_bytes = static_cast<std::int64_t>(fs::file_size(path, ec));
    if (ec) throw Error(ErrorCode::IoFailure, "cannot stat " + path.string());
    const std::int64_t expected_bytes = expected_count * 4;
    if (actual_bytes != expected_bytes) {
        throw Error(ErrorCode::ShapeMismatch,
                    path.string() + ": declared shape needs " + std::to_string(expected_bytes) +
                        " bytes but file holds " + std::to_string(actual_bytes));
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<float> data(static_cast<std::size_t>(expected_count));
    in.read(reinterpret_cast<char*>(data.data()), expected_bytes);
    if (!in) throw Error(ErrorCode::IoFailure, "short read on " + path.string());
    return data;
}

void write_f32(const fs::path& path, const float* data, std::int64_t count) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(data), count * 4);
    if (!out) throw Error(ErrorCode::IoFailure, "short write on " + path.string());
}

TokenStream load_stream(const fs::path& manifest_path) {
    std::error_code ec;
    if (!fs::exists(manifest_path, ec) || ec) {
        throw Error(ErrorCode::MissingFile, "missing manifest: " + manifest_path.string());
    }
    std::ifstream in(manifest_path);
    json manifest;
    try {
        in >> manifest;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoFailure,
                    "malformed manifest " + manifest_path.string() + ": " + e.what());
    }

    const fs::path dir = manifest_path.parent_path();
    TokenStream stream;
    auto& cfg = stream.config;
    cfg.embed_dim = require(manifest, "d", manifest_path).get<int>();
    cfg.num_windows = require(manifest, "num_windows", manifest_path).get<int>();
    cfg.audio_tokens_per_window =
        require(manifest, "audio_tokens_per_window", manifest_path).get<int>();
    cfg.frames_per_window = require(manifest, "frames_per_window", manifest_path).get<int>();
    cfg.video_tokens_per_frame =
        require(manifest, "video_tokens_per_frame", manifest_path).get<int>();
    cfg.audio_pool_size = require(manifest, "audio_pool_size", manifest_path).get<int>();
    if (cfg.embed_dim < 1 || cfg.num_windows < 1 || cfg.frames_per_window < 1 ||
        cfg.video_tokens_per_frame < 1 || cfg.audio_pool_size < 1 ||
        cfg.audio_tokens_per_window < 0) {
        throw Error(ErrorCode::ValidationFailed,
                    "manifest " + manifest_path.string() + " declares an invalid configuration");
    }

    const std::string audio_path = require(manifest, "audio_embeddings", manifest_path);
    const std::string video_path = require(manifest, "video_embeddings", manifest_path);
    auto audio = read_f32(dir / audio_path, cfg.total_audio_tokens() * cfg.embed_dim);
    check_finite(audio.data(), static_cast<std::int64_t>(audio.size()), audio_path);
    stream.audio_embeddings = to_matrix(std::move(audio), cfg.total_audio_tokens(), cfg.embed_dim);

    auto video = read_f32(dir / video_path, cfg.total_video_tokens() * cfg.embed_dim);
    check_finite(video.data(), static_cast<std::int64_t>(video.size()), video_path);
    stream.video_embeddings = to_matrix(std::move(video), cfg.total_video_tokens(), cfg.embed_dim);

    const json attention = require(manifest, "attention", manifest_path);
    const std::string kind = require(attention, "kind", manifest_path);
    const std::int64_t raw = cfg.raw_audio_tokens();
    if (kind == "qk") {
        stream.attention.kind = AttentionKind::QK;
        stream.attention.d_att = require(attention, "d_att", manifest_path).get<int>();
        if (stream.attention.d_att < 1) {
            throw Error(ErrorCode::ValidationFailed, "d_att must be positive");
        }
        const std::string q_path = require(attention, "q", manifest_path);
        const std::string k_path = require(attention, "k", manifest_path);
        auto q = read_f32(dir / q_path, raw * stream.attention.d_att);
        check_finite(q.data(), static_cast<std::int64_t>(q.size()), q_path);
        stream.attention.q = to_matrix(std::move(q), raw, stream.attention.d_att);
        auto k = read_f32(dir / k_path, raw * stream.attention.d_att);
        check_finite(k.data(), static_cast<std::int64_t>(k.size()), k_path);
        stream.attention.k = to_matrix(std::move(k), raw, stream.attention.d_att);
    } else if (kind == "precomputed") {
        stream.attention.kind = AttentionKind::Precomputed;
        const std::string a_path = require(attention, "a", manifest_path);
        auto a = read_f32(dir / a_path, raw * raw);
        check_finite(a.data(), static_cast<std::int64_t>(a.size()), a_path);
        stream.attention.a = to_matrix(std::move(a), raw, raw);
    } else {
        throw Error(ErrorCode::ValidationFailed, "unknown attention kind: " + kind);
    }

    if (manifest.contains("planted_event_windows")) {
        stream.planted_event_windows =
            manifest.at("planted_event_windows").get<std::vector<int>>();
    }
    return stream;
}

void save_stream(const TokenStream& stream, const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + dir.string());

    const auto& cfg = stream.config;
    json manifest{
        {"d", cfg.embed_dim},
        {"num_windows", cfg.num_windows},
        {"audio_tokens_per_window", cfg.audio_tokens_per_window},
        {"frames_per_window", cfg.frames_per_window},
        {"video_tokens_per_frame", cfg.video_tokens_per_frame},
        {"audio_pool_size", cfg.audio_pool_size},
        {"audio_embeddings", "audio.f32"},
        {"video_embeddings", "video.f32"},
    };
    write_f32(dir / "audio.f32", stream.audio_embeddings.data(), stream.audio_embeddings.size());
    write_f32(dir / "video.f32", stream.video_embeddings.data(), stream.video_embeddings.size());
    if (stream.attention.kind == AttentionKind::QK) {
        manifest["attention"] = {{"kind", "qk"}, {"q", "q.f32"}, {"k", "k.f32"},
                                 {"d_att", stream.attention.d_att}};
        write_f32(dir / "q.f32", stream.attention.q.data(), stream.attention.q.size());
        write_f32(dir / "k.f32", stream.attention.k.data(), stream.attention.k.size());
    } else {
        manifest["attention"] = {{"kind", "precomputed"}, {"a", "attn.f32"}};
        write_f32(dir / "attn.f32", stream.attention.a.data(), stream.attention.a.size());
    }
    if (!stream.planted_event_windows.empty()) {
        manifest["planted_event_windows"] = stream.planted_event_windows;
    }

    std::ofstream out(dir / "stream.json");
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

void save_compressed(const CompressionResult& result, const TokenStream& stream,
                     const fs::path& out_dir) {
    if (result.content_hash != content_hash(stream)) {
        throw Error(ErrorCode::ConfigMismatch,
                    "result was produced from a different stream (content hash mismatch)");
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw Error(ErrorCode::IoFailure, "cannot create " + out_dir.string());

    const MatrixF audio = materialize_audio(result, stream);
    const MatrixF video = materialize_video(result, stream);
    write_f32(out_dir / "compressed_audio.f32", audio.data(), audio.size());
    write_f32(out_dir / "compressed_video.f32", video.data(), video.size());

    std::ofstream out(out_dir / "result.json", std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, "cannot write result.json in " + out_dir.string());
    out << result_to_json(result);
}

TokenStream synth_stream(const StreamConfig& config, std::uint64_t seed, Scenario scenario) {
    TokenStream stream;
    stream.config = config;
    Rng root(seed);

    const std::int64_t audio_rows = config.total_audio_tokens();
    const std::int64_t video_rows = config.total_video_tokens();
    const std::int64_t raw = config.raw_audio_tokens();
    stream.audio_embeddings.resize(audio_rows, config.embed_dim);
    stream.video_embeddings.resize(video_rows, config.embed_dim);

    Rng audio_rng = root.derive(1);
    fill_gaussian(stream.audio_embeddings, audio_rng);

    if (scenario == Scenario::IidGaussian) {
        Rng video_rng = root.derive(2);
        fill_gaussian(stream.video_embeddings, video_rng);

        // Row-stochastic attention from positive draws, normalized in double.
        stream.attention.kind = AttentionKind::Precomputed;
        stream.attention.a.resize(raw, raw);
        Rng attn_rng = root.derive(3);
        std::vector<double> row(static_cast<std::size_t>(raw));
        for (std::int64_t i = 0; i < raw; ++i) {
            double sum = 0.0;
            for (std::int64_t j = 0; j < raw; ++j) {
                row[static_cast<std::size_t>(j)] = std::abs(attn_rng.gaussian()) + 0.05;
                sum += row[static_cast<std::size_t>(j)];
            }
            for (std::int64_t j = 0; j < raw; ++j) {
                stream.attention.a(i, j) = static_cast<float>(row[static_cast<std::size_t>(j)] / sum);
            }
        }
        return stream;
    }

    // Planted events: pick round(N/4) event windows, at least one.
    const int num_events =
        std::max<int>(1, static_cast<int>(std::llround(config.num_windows / 4.0)));
    Rng pick_rng = root.derive(4);
    stream.planted_event_windows =
        pick_rng.sample_without_replacement(config.num_windows, num_events);
    std::vector<char> is_event(static_cast<std::size_t>(config.num_windows), 0);
    for (int w : stream.planted_event_windows) is_event[static_cast<std::size_t>(w)] = 1;

    // Video: event windows decorrelate every frame; quiet windows repeat
    // frame 0 with small jitter.
    Rng video_rng = root.derive(5);
    const int frame_rows = config.video_tokens_per_frame;
    MatrixF base(frame_rows, config.embed_dim);
    for (int w = 0; w < config.num_windows; ++w) {
        const std::int64_t window_row0 =
            static_cast<std::int64_t>(w) * config.video_tokens_per_window();
        fill_gaussian(base, video_rng);
        for (int f = 0; f < config.frames_per_window; ++f) {
            auto block = stream.video_embeddings.block(window_row0 + f * frame_rows, 0, frame_rows,
                                                       config.embed_dim);
            if (is_event[static_cast<std::size_t>(w)] || f == 0) {
                if (f > 0) fill_gaussian(base, video_rng);
                block = base;
            } else {
                for (Eigen::Index i = 0; i < block.rows(); ++i)
                    for (Eigen::Index j = 0; j < block.cols(); ++j)
                        block(i, j) = base(i, j) + 0.01f * static_cast<float>(video_rng.gaussian());
            }
        }
    }

    // Attention as Q/K: all queries point along a fixed direction; keys in
    // event windows align with it, others oppose it, so the softmax piles
    // mass onto event columns.
    stream.attention.kind = AttentionKind::QK;
    stream.attention.d_att = kSynthAttentionDim;
    stream.attention.q.resize(raw, kSynthAttentionDim);
    stream.attention.k.resize(raw, kSynthAttentionDim);
    Rng attn_rng = root.derive(6);
    const std::int64_t raw_per_window =
        static_cast<std::int64_t>(config.audio_tokens_per_window) * config.audio_pool_size;
    for (std::int64_t i = 0; i < raw; ++i) {
        const int w = raw_per_window > 0 ? static_cast<int>(i / raw_per_window) : 0;
        const float key_sign = is_event[static_cast<std::size_t>(w)] ? 1.0f : -1.0f;
        for (int j = 0; j < kSynthAttentionDim; ++j) {
            const float q_noise = 0.01f * static_cast<float>(attn_rng.gaussian());
            const float k_noise = 0.01f * static_cast<float>(attn_rng.gaussian());
            stream.attention.q(i, j) = (j == 0 ? 4.0f : 0.0f) + q_noise;
            stream.attention.k(i, j) = (j == 0 ? key_sign * 4.0f : 0.0f) + k_noise;
        }
    }
    return stream;
}

ValidationReport validate(const TokenStream& stream) {
    ValidationReport report;
    const auto& cfg = stream.config;
    if (cfg.embed_dim < 1) report.add(Severity::Error, "embed_dim must be positive", "config.d");
    if (cfg.num_windows < 1)
        report.add(Severity::Error, "num_windows must be positive", "config.num_windows");
    if (cfg.frames_per_window < 1)
        report.add(Severity::Error, "frames_per_window must be positive", "config.frames_per_window");
    if (cfg.video_tokens_per_frame < 1)
        report.add(Severity::Error, "video_tokens_per_frame must be positive",
                   "config.video_tokens_per_frame");
    if (cfg.audio_pool_size < 1)
        report.add(Severity::Error, "audio_pool_size must be positive", "config.audio_pool_size");
    if (cfg.audio_tokens_per_window < 0)
        report.add(Severity::Error, "audio_tokens_per_window must be non-negative",
                   "config.audio_tokens_per_window");
    if (!report.ok()) return report;

    if (cfg.audio_tokens_per_window == 0)
        report.add(Severity::Warn, "silent stream; window retention will use the degenerate rule",
                   "config.audio_tokens_per_window");

    auto check_shape = [&](const MatrixF& m, std::int64_t rows, std::int64_t cols,
                           const char* name) {
        if (m.rows() != rows || m.cols() != cols) {
            report.add(Severity::Error,
                       std::string(name) + " shape is " + std::to_string(m.rows()) + "x" +
                           std::to_string(m.cols()) + ", expected " + std::to_string(rows) + "x" +
                           std::to_string(cols),
                       name);
        }
    };
    check_shape(stream.audio_embeddings, cfg.total_audio_tokens(), cfg.embed_dim, "audio_embeddings");
    check_shape(stream.video_embeddings, cfg.total_video_tokens(), cfg.embed_dim, "video_embeddings");

    auto check_finite_mat = [&](const MatrixF& m, const char* name) {
        const float* data = m.data();
        for (std::int64_t i = 0; i < m.size(); ++i) {
            if (!std::isfinite(data[i])) {
                report.add(Severity::Error,
                           std::string("non-finite value at flat index ") + std::to_string(i), name);
                return;
            }
        }
    };
    check_finite_mat(stream.audio_embeddings, "audio_embeddings");
    check_finite_mat(stream.video_embeddings, "video_embeddings");

    const std::int64_t raw = cfg.raw_audio_tokens();
    if (stream.attention.kind == AttentionKind::QK) {
        if (stream.attention.d_att < 1)
            report.add(Severity::Error, "d_att must be positive", "attention.d_att");
        check_shape(stream.attention.q, raw, stream.attention.d_att, "attention.q");
        check_shape(stream.attention.k, raw, stream.attention.d_att, "attention.k");
        check_finite_mat(stream.attention.q, "attention.q");
        check_finite_mat(stream.attention.k, "attention.k");
    } else {
        check_shape(stream.attention.a, raw, raw, "attention.a");
        check_finite_mat(stream.attention.a, "attention.a");
        if (stream.attention.a.rows() == raw && stream.attention.a.cols() == raw) {
            for (std::int64_t i = 0; i < raw; ++i) {
                double sum = 0.0;
                bool negative = false;
                for (std::int64_t j = 0; j < raw; ++j) {
                    const float v = stream.attention.a(i, j);
                    if (v < 0.0f) negative = true;
                    sum += v;
                }
                if (negative) {
                    report.add(Severity::Error, "negative attention entry in row " +
                                                    std::to_string(i),
                               "attention.a");
                }
                if (std::abs(sum - 1.0) > 1e-5) {
                    report.add(Severity::Error,
                               "row not stochastic: row " + std::to_string(i) + " sums to " +
                                   std::to_string(sum),
                               "attention.a");
                }
            }
        }
    }

    for (int w : stream.planted_event_windows) {
        if (w < 0 || w >= cfg.num_windows) {
            report.add(Severity::Error, "planted event window out of range: " + std::to_string(w),
                       "planted_event_windows");
        }
    }
    return report;
}

std::string content_hash(const TokenStream& stream) {
    std::uint64_t state = kFnvOffset;
    const auto& cfg = stream.config;
    fnv_i64(state, cfg.embed_dim);
    fnv_i64(state, cfg.num_windows);
    fnv_i64(state, cfg.audio_tokens_per_window);
    fnv_i64(state, cfg.frames_per_window);
    fnv_i64(state, cfg.video_tokens_per_frame);
    fnv_i64(state, cfg.audio_pool_size);
    fnv_bytes(state, stream.audio_embeddings.data(), stream.audio_embeddings.size() * 4);
    fnv_bytes(state, stream.video_embeddings.data(), stream.video_embeddings.size() * 4);
    if (stream.attention.kind == AttentionKind::QK) {
        fnv_i64(state, 1);
        fnv_i64(state, stream.attention.d_att);
        fnv_bytes(state, stream.attention.q.data(), stream.attention.q.size() * 4);
        fnv_bytes(state, stream.attention.k.data(), stream.attention.k.size() * 4);
    } else {
        fnv_i64(state, 2);
        fnv_bytes(state, stream.attention.a.data(), stream.attention.a.size() * 4);
    }
    char buf[32];
    std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(state));
    return buf;
}

}  // namespace omnizip::stream_model
