// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/types.hpp"

namespace omnizip {

ValidationReport validate_config(const PruneConfig& config) {
    ValidationReport report;
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(config.rho_a)) report.add(Severity::Error, "rho_a outside [0,1]", "rho_a");
    if (!in_unit(config.rho_v)) report.add(Severity::Error, "rho_v outside [0,1]", "rho_v");
    if (!in_unit(config.rho_max)) report.add(Severity::Error, "rho_max outside [0,1]", "rho_max");
    if (!in_unit(config.rho_min)) report.add(Severity::Error, "rho_min outside [0,1]", "rho_min");
    if (config.rho_min > config.rho_max)
        report.add(Severity::Error, "rho_min exceeds rho_max", "rho_min");
    if (config.group_size < 0) report.add(Severity::Error, "G must be non-negative", "G");
    if (config.knn_k < 1) report.add(Severity::Error, "k must be at least 1", "k");
    if (config.anchor_fraction < 0.0 || config.anchor_fraction >= 1.0)
        report.add(Severity::Error, "anchor_fraction outside [0,1)", "anchor_fraction");
    if (report.ok() && config.rho_v < config.rho_a)
        report.add(Severity::Warn,
                   "video compression below audio compression; intended operating points prune "
                   "video at least as hard as audio",
                   "rho_v");
    return report;
}

std::string_view to_string(Strategy strategy) {
    switch (strategy) {
        case Strategy::Omnizip: return "omnizip";
        case Strategy::Random: return "random";
        case Strategy::TemporalMerge: return "temporal_merge";
    }
    return "unknown";
}

Strategy strategy_from_string(std::string_view name) {
    if (name == "omnizip") return Strategy::Omnizip;
    if (name == "random") return Strategy::Random;
    if (name == "temporal_merge") return Strategy::TemporalMerge;
    throw Error(ErrorCode::ValidationFailed, "unknown strategy: " + std::string(name));
}

}  // namespace omnizip
