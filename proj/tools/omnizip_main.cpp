// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/baselines.hpp"
#include "omnizip/cost_model.hpp"
#include "omnizip/pipeline.hpp"
#include "omnizip/stream_model.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

using namespace omnizip;
using nlohmann::json;

int exit_code_for(const Error& error) {
    switch (error.code()) {
        case ErrorCode::InfeasibleBudget:
            return 3;
        case ErrorCode::MissingFile:
        case ErrorCode::ShapeMismatch:
        case ErrorCode::NonFiniteValue:
        case ErrorCode::IoFailure:
            return 4;
        default:
            return 2;
    }
}

StreamConfig read_stream_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::MissingFile, "cannot open config " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::IoFailure, "malformed config " + path + ": " + e.what());
    }
    StreamConfig cfg;
    cfg.embed_dim = j.at("d").get<int>();
    cfg.num_windows = j.at("num_windows").get<int>();
    cfg.audio_tokens_per_window = j.at("audio_tokens_per_window").get<int>();
    cfg.frames_per_window = j.at("frames_per_window").get<int>();
    cfg.video_tokens_per_frame = j.at("video_tokens_per_frame").get<int>();
    cfg.audio_pool_size = j.value("audio_pool_size", 1);
    return cfg;
}

int default_workers() {
    if (const char* env = std::getenv("OMNIZIP_WORKERS")) {
        const int value = std::atoi(env);
        if (value >= 1) return value;
    }
    return 1;
}

std::vector<double> parse_fractions(const std::string& csv) {
    std::vector<double> values;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) values.push_back(std::stod(item));
    }
    return values;
}

std::vector<Strategy> parse_strategies(const std::string& csv) {
    std::vector<Strategy> strategies;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) strategies.push_back(strategy_from_string(item));
    }
    return strategies;
}

cost_model::ModelGeometry resolve_geometry(const std::string& preset_name, long long d,
                                           long long m, long long layers, long long decode_steps,
                                           std::int64_t* reference_tokens = nullptr) {
    if (!preset_name.empty()) {
        const auto preset = cost_model::find_preset(preset_name);
        if (!preset) {
            throw Error(ErrorCode::ValidationFailed, "unknown geometry preset: " + preset_name);
        }
        if (reference_tokens) *reference_tokens = preset->reference_tokens;
        return preset->geometry;
    }
    if (d < 1 || m < 1 || layers < 1 || decode_steps < 0) {
        throw Error(ErrorCode::ValidationFailed,
                    "geometry requires --preset or positive --d/--m/--layers");
    }
    return {d, m, layers, decode_steps};
}

int run_gen(const std::string& config_path, std::uint64_t seed, const std::string& scenario,
            const std::string& out_dir) {
    const StreamConfig cfg = read_stream_config(config_path);
    stream_model::Scenario sc;
    if (scenario == "iid") {
        sc = stream_model::Scenario::IidGaussian;
    } else if (scenario == "events") {
        sc = stream_model::Scenario::PlantedEvents;
    } else {
        throw Error(ErrorCode::ValidationFailed, "scenario must be iid or events");
    }
    const TokenStream stream = stream_model::synth_stream(cfg, seed, sc);
    const auto report = stream_model::validate(stream);
    for (const auto& issue : report.issues) {
        std::cerr << (issue.severity == Severity::Error ? "error: " : "warning: ")
                  << issue.message << "\n";
    }
    if (!report.ok()) return 2;
    stream_model::save_stream(stream, out_dir);
    std::cout << "wrote stream to " << out_dir << " (" << cfg.num_windows << " windows, "
              << cfg.total_audio_tokens() << " audio + " << cfg.total_video_tokens()
              << " video tokens)\n";
    return 0;
}

int run_compress(const std::string& stream_dir, const PruneConfig& config,
                 const std::string& out_dir, int workers) {
    const TokenStream stream =
        stream_model::load_stream(std::filesystem::path(stream_dir) / "stream.json");
    for (const auto& issue : validate_config(config).issues) {
        if (issue.severity == Severity::Warn) std::cerr << "warning: " << issue.message << "\n";
    }
    const CompressionResult result = pipeline::compress_stream(stream, config, workers);
    stream_model::save_compressed(result, stream, out_dir);
    pipeline::report(result, out_dir);

    std::printf("kept %lld/%lld audio and %lld/%lld video tokens (retained %.4f) in %.2f ms\n",
                static_cast<long long>(result.audio_kept),
                static_cast<long long>(result.audio_total),
                static_cast<long long>(result.video_kept),
                static_cast<long long>(result.video_total), result.retained_ratio,
                result.elapsed_ms);
    if (result.infeasible_budget) {
        std::cerr << "infeasible budget: rates clamped; output is best-effort\n";
        return 3;
    }
    return 0;
}

int run_cost(const cost_model::ModelGeometry& geometry, long long n_full, long long n_compressed,
             bool as_csv) {
    const auto full = cost_model::cost_report(n_full, geometry);
    const bool has_compressed = n_compressed >= 0;
    cost_model::CostReport compressed;
    double ratio = 1.0;
    if (has_compressed) {
        compressed = cost_model::cost_report(n_compressed, geometry);
        ratio = cost_model::flops_ratio(n_compressed, n_full, geometry);
    }

    if (as_csv) {
        std::printf("%lld,%lld,%.6e,%.6e,%.6e,%.6e,%.6e,%.6e,%.6f\n", n_full,
                    has_compressed ? n_compressed : n_full, full.prefill_flops, full.decode_flops,
                    full.total_flops, has_compressed ? compressed.prefill_flops : full.prefill_flops,
                    has_compressed ? compressed.decode_flops : full.decode_flops,
                    has_compressed ? compressed.total_flops : full.total_flops, ratio);
        return 0;
    }
    json j;
    j["geometry"] = {{"d", geometry.hidden_dim},
                     {"m", geometry.ffn_dim},
                     {"layers", geometry.layers},
                     {"decode_steps", geometry.decode_steps}};
    j["full"] = {{"n", n_full},
                 {"prefill_flops", full.prefill_flops},
                 {"decode_flops", full.decode_flops},
                 {"total_flops", full.total_flops}};
    if (has_compressed) {
        j["compressed"] = {{"n", n_compressed},
                           {"prefill_flops", compressed.prefill_flops},
                           {"decode_flops", compressed.decode_flops},
                           {"total_flops", compressed.total_flops}};
        j["flops_ratio"] = ratio;
    }
    std::cout << j.dump(2) << "\n";
    return 0;
}

int run_compare(const std::string& stream_dir, const std::string& strategies_csv,
                const std::string& retentions_csv, const std::string& preset_name,
                const std::string& out_csv, std::uint64_t seed) {
    const TokenStream stream =
        stream_model::load_stream(std::filesystem::path(stream_dir) / "stream.json");
    const auto preset = cost_model::find_preset(preset_name);
    if (!preset) {
        throw Error(ErrorCode::ValidationFailed, "unknown geometry preset: " + preset_name);
    }
    const auto rows = pipeline::compare(stream, parse_strategies(strategies_csv),
                                        parse_fractions(retentions_csv), *preset, seed);
    pipeline::write_compare_csv(rows, out_csv);
    std::cout << "wrote " << rows.size() << " rows to " << out_csv << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"omnizip: audio-guided audio-video token compression engine"};
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a synthetic token stream");
    std::string gen_config;
    std::string gen_scenario = "iid";
    std::string gen_out;
    std::uint64_t gen_seed = 0;
    gen->add_option("--config", gen_config, "stream config JSON")->required();
    gen->add_option("--seed", gen_seed, "RNG seed");
    gen->add_option("--scenario", gen_scenario, "iid|events");
    gen->add_option("--out", gen_out, "output directory")->required();

    // compress
    auto* compress = app.add_subcommand("compress", "run the compression pipeline");
    std::string compress_stream_dir;
    std::string compress_out;
    PruneConfig prune;
    int workers = default_workers();
    compress->add_option("--stream", compress_stream_dir, "stream directory")->required();
    compress->add_option("--rho-a", prune.rho_a, "audio pruning ratio");
    compress->add_option("--rho-v", prune.rho_v, "video pruning ratio");
    compress->add_option("--rho-max", prune.rho_max, "per-window rate ceiling");
    compress->add_option("--rho-min", prune.rho_min, "per-window rate floor");
    compress->add_option("-G,--group-size", prune.group_size, "merged tokens per anchor");
    compress->add_option("-k,--knn", prune.knn_k, "neighbors for density scoring");
    compress->add_option("--anchor-fraction", prune.anchor_fraction,
                         "share of audio keep-budget for anchors");
    compress->add_option("--workers", workers, "worker threads (env OMNIZIP_WORKERS)");
    compress->add_option("--out", compress_out, "output directory")->required();

    // cost
    auto* cost = app.add_subcommand("cost", "closed-form FLOPs accounting");
    std::string cost_preset;
    long long cost_d = 0, cost_m = 0, cost_layers = 0, cost_steps = 100;
    long long n_full = -1, n_compressed = -1;
    bool cost_csv = false;
    cost->add_option("--preset", cost_preset, "geometry preset name");
    cost->add_option("--d", cost_d, "hidden dimension");
    cost->add_option("--m", cost_m, "FFN intermediate dimension");
    cost->add_option("--layers", cost_layers, "transformer layer count");
    cost->add_option("-R,--decode-steps", cost_steps, "decode iterations");
    cost->add_option("--n-full", n_full, "full-stream token count")->required();
    cost->add_option("--n-compressed", n_compressed, "compressed token count");
    cost->add_flag("--csv", cost_csv, "emit a one-line CSV row");

    // compare
    auto* cmp = app.add_subcommand("compare", "compare strategies at fixed budgets");
    std::string cmp_stream_dir;
    std::string cmp_strategies = "omnizip,random,temporal_merge";
    std::string cmp_retentions = "1.0,0.45,0.35";
    std::string cmp_preset = "qwen2.5-omni-7b";
    std::string cmp_out;
    std::uint64_t cmp_seed = 0;
    cmp->add_option("--stream", cmp_stream_dir, "stream directory")->required();
    cmp->add_option("--strategies", cmp_strategies, "comma-separated strategy list");
    cmp->add_option("--retentions", cmp_retentions, "comma-separated retention ladder");
    cmp->add_option("--preset", cmp_preset, "geometry preset for FLOPs ratios");
    cmp->add_option("--seed", cmp_seed, "seed for the random baseline");
    cmp->add_option("--out", cmp_out, "output CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return run_gen(gen_config, gen_seed, gen_scenario, gen_out);
        if (compress->parsed())
            return run_compress(compress_stream_dir, prune, compress_out, workers);
        if (cost->parsed()) {
            const auto geometry =
                resolve_geometry(cost_preset, cost_d, cost_m, cost_layers, cost_steps);
            if (n_full < 0) throw Error(ErrorCode::ValidationFailed, "--n-full must be >= 0");
            if (n_compressed >= 0 && n_compressed > n_full) {
                throw Error(ErrorCode::OrderViolation, "--n-compressed exceeds --n-full");
            }
            return run_cost(geometry, n_full, n_compressed, cost_csv);
        }
        if (cmp->parsed())
            return run_compare(cmp_stream_dir, cmp_strategies, cmp_retentions, cmp_preset, cmp_out,
                               cmp_seed);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
