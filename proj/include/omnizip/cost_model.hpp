// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "omnizip/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace omnizip::cost_model {

// Transformer geometry for the FLOPs approximation. The named presets carry
// public model-card numbers, not measurements.
struct ModelGeometry {
    std::int64_t hidden_dim = 0;        // d
    std::int64_t ffn_dim = 0;           // m
    std::int64_t layers = 0;            // T
    std::int64_t decode_steps = 100;    // R
};

struct GeometryPreset {
    std::string name;
    ModelGeometry geometry;
    // Benchmark-scale full-stream token count the published cost figures
    // correspond to; used when a ratio must be reported at that scale.
    std::int64_t reference_tokens = 10000;
};

std::optional<GeometryPreset> find_preset(std::string_view name);
const std::vector<GeometryPreset>& presets();

struct CostReport {
    double prefill_flops = 0.0;
    double decode_flops = 0.0;
    double total_flops = 0.0;
};

// Prefill: T * (4 n d^2 + 2 n^2 d + 2 n d m).
double prefill_flops(std::int64_t n, const ModelGeometry& g);

// Decode over R steps with a KV cache, closed form:
// T * (R (4 d^2 + 2 d m) + 2 d (R n + R (R + 1) / 2)).
double decode_flops(std::int64_t n, const ModelGeometry& g);

double total_flops(std::int64_t n, const ModelGeometry& g);

CostReport cost_report(std::int64_t n, const ModelGeometry& g);

// total(n_compressed) / total(n_full); requires n_compressed <= n_full.
double flops_ratio(std::int64_t n_compressed, std::int64_t n_full, const ModelGeometry& g);

}  // namespace omnizip::cost_model
