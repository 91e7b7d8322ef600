// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/result.hpp"
#include "omnizip/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace omnizip::stream_model {

enum class Scenario { IidGaussian, PlantedEvents };

// Attention head dimension used by the synthetic generator's Q/K streams.
inline constexpr int kSynthAttentionDim = 32;

// Reads a stream manifest (stream.json) and materializes every tensor it
// references. Shapes are checked against file sizes byte-exactly and all
// values must be finite.
TokenStream load_stream(const std::filesystem::path& manifest_path);

// Writes the manifest plus raw .f32 tensors for a stream into `dir`.
void save_stream(const TokenStream& stream, const std::filesystem::path& dir);

// Writes result.json plus the compressed embedding tensors into `out_dir`.
// `result` must have been produced from `stream` (content hashes match).
void save_compressed(const CompressionResult& result, const TokenStream& stream,
                     const std::filesystem::path& out_dir);

// Deterministic synthetic stream. PlantedEvents designates round(N/4)
// windows (at least one) as events: their audio positions receive
// concentrated attention mass and their video frames decorrelate sharply,
// while ordinary windows repeat near-identical frames.
TokenStream synth_stream(const StreamConfig& config, std::uint64_t seed, Scenario scenario);

// Checks every structural invariant of a stream without mutating it.
ValidationReport validate(const TokenStream& stream);

// FNV-1a over the config and all tensor bytes; identifies the input a
// compression result was computed from.
std::string content_hash(const TokenStream& stream);

// Raw little-endian float32 tensor files.
std::vector<float> read_f32(const std::filesystem::path& path, std::int64_t expected_count);
void write_f32(const std::filesystem::path& path, const float* data, std::int64_t count);

}  // namespace omnizip::stream_model
