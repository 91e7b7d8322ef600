// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/cost_model.hpp"

namespace omnizip::cost_model {

const std::vector<GeometryPreset>& presets() {
    // Geometry numbers are public model-card figures for the Qwen2.5-Omni
    // family; reference_tokens is the full-stream count the published cost
    // table corresponds to.
    static const std::vector<GeometryPreset> kPresets = {
        {"qwen2.5-omni-7b", {3584, 18944, 28, 100}, 10000},
        {"qwen2.5-omni-3b", {2048, 11008, 36, 100}, 10000},
    };
    return kPresets;
}

std::optional<GeometryPreset> find_preset(std::string_view name) {
    for (const auto& preset : presets()) {
        if (preset.name == name) return preset;
    }
    return std::nullopt;
}

double prefill_flops(std::int64_t n, const ModelGeometry& g) {
    if (n < 0) throw Error(ErrorCode::ValidationFailed, "token count must be non-negative");
    const double nd = static_cast<double>(n);
    const double d = static_cast<double>(g.hidden_dim);
    const double m = static_cast<double>(g.ffn_dim);
    const double per_layer = 4.0 * nd * d * d + 2.0 * nd * nd * d + 2.0 * nd * d * m;
    return static_cast<double>(g.layers) * per_layer;
}

double decode_flops(std::int64_t n, const ModelGeometry& g) {
    if (n < 0) throw Error(ErrorCode::ValidationFailed, "token count must be non-negative");
    const double r = static_cast<double>(g.decode_steps);
    const double d = static_cast<double>(g.hidden_dim);
    const double m = static_cast<double>(g.ffn_dim);
    const double nd = static_cast<double>(n);
    const double per_layer = r * (4.0 * d * d + 2.0 * d * m) +
                             2.0 * d * (r * nd + r * (r + 1.0) / 2.0);
    return static_cast<double>(g.layers) * per_layer;
}

double total_flops(std::int64_t n, const ModelGeometry& g) {
    return prefill_flops(n, g) + decode_flops(n, g);
}

CostReport cost_report(std::int64_t n, const ModelGeometry& g) {
    CostReport report;
    report.prefill_flops = prefill_flops(n, g);
    report.decode_flops = decode_flops(n, g);
    report.total_flops = report.prefill_flops + report.decode_flops;
    return report;
}

double flops_ratio(std::int64_t n_compressed, std::int64_t n_full, const ModelGeometry& g) {
    if (n_compressed > n_full) {
        throw Error(ErrorCode::OrderViolation, "compressed token count exceeds full count");
    }
    return total_flops(n_compressed, g) / total_flops(n_full, g);
}

}  // namespace omnizip::cost_model
