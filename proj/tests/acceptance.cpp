// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite: one criterion per function, one PASS/FAIL line each.

#include "omnizip/baselines.hpp"
#include "omnizip/cost_model.hpp"
#include "omnizip/istc.hpp"
#include "omnizip/pipeline.hpp"
#include "omnizip/rate_allocator.hpp"
#include "omnizip/rng.hpp"
#include "omnizip/saliency.hpp"
#include "omnizip/stream_model.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

using namespace omnizip;

namespace {

int g_failures = 0;

void report_line(int number, const char* title, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", number, title,
                detail.empty() ? "" : " -- ", detail.c_str());
    if (!pass) ++g_failures;
}

MatrixF random_matrix(int rows, int cols, Rng& rng) {
    MatrixF m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = static_cast<float>(rng.gaussian());
    return m;
}

bool within(double value, double target, double tolerance) {
    return std::abs(value - target) <= tolerance;
}

char detail_buffer[256];

// 1. FLOPs table reproduction at the published operating points.
void criterion_flops_table() {
    const cost_model::ModelGeometry g7{3584, 18944, 28, 100};
    const cost_model::ModelGeometry g3{2048, 11008, 36, 100};
    const double t_full = cost_model::total_flops(10000, g7);
    const double t_45 = cost_model::total_flops(4500, g7);
    const double t_3b = cost_model::total_flops(10000, g3);
    const bool pass = within(t_full, 73.2e12, 0.02 * 73.2e12) &&
                      within(t_45, 28.3e12, 0.02 * 28.3e12) &&
                      within(t_3b, 37.4e12, 0.03 * 37.4e12);
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "7B@10k=%.1fT (want 73.2), 7B@4.5k=%.1fT (want 28.3), 3B@10k=%.1fT (want 37.4)",
                  t_full / 1e12, t_45 / 1e12, t_3b / 1e12);
    report_line(1, "FLOPs table reproduction", pass, detail_buffer);
}

// 2. Retained-ratio arithmetic at the published pruning settings.
void criterion_retention_arithmetic() {
    StreamConfig cfg;
    cfg.embed_dim = 8;
    cfg.num_windows = 8;
    cfg.audio_tokens_per_window = 50;
    cfg.frames_per_window = 4;
    cfg.video_tokens_per_frame = 72;
    const auto stream = stream_model::synth_stream(cfg, 1001, stream_model::Scenario::IidGaussian);

    PruneConfig c45;
    c45.rho_a = 0.3;
    c45.rho_v = 0.6;
    const double r45 = pipeline::compress_stream(stream, c45).retained_ratio;

    PruneConfig c35;
    c35.rho_a = 0.4;
    c35.rho_v = 0.7;
    const double r35 = pipeline::compress_stream(stream, c35).retained_ratio;

    const bool pass = within(r45, 0.444, 0.005) && within(r35, 0.344, 0.005);
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "rho=(0.3,0.6) -> %.4f (want 0.444 +- 0.005); rho=(0.4,0.7) -> %.4f (want 0.344)",
                  r45, r35);
    report_line(2, "retention arithmetic", pass, detail_buffer);
}

// 3. Budget exactness over 500 random (stream, config) pairs.
void criterion_budget_exactness() {
    Rng rng(99991);
    int checked = 0;
    bool pass = true;
    std::string detail;
    for (int trial = 0; trial < 500 && pass; ++trial) {
        StreamConfig cfg;
        cfg.embed_dim = 2 + static_cast<int>(rng.uniform_int(7));
        cfg.num_windows = 1 + static_cast<int>(rng.uniform_int(6));
        cfg.audio_tokens_per_window = static_cast<int>(rng.uniform_int(11));
        cfg.frames_per_window = 1 + static_cast<int>(rng.uniform_int(5));
        cfg.video_tokens_per_frame = 4 + static_cast<int>(rng.uniform_int(6));
        cfg.audio_pool_size = 1 + static_cast<int>(rng.uniform_int(2));
        const auto scenario = (trial % 2 == 0) ? stream_model::Scenario::IidGaussian
                                               : stream_model::Scenario::PlantedEvents;
        const auto stream = stream_model::synth_stream(cfg, 3000 + trial, scenario);

        PruneConfig config;
        config.rho_a = 0.9 * rng.uniform();
        config.rho_v = 0.7 * rng.uniform();
        const auto result = pipeline::compress_stream(stream, config);

        const auto want_audio = std::llround((1.0 - config.rho_a) *
                                             static_cast<double>(cfg.total_audio_tokens()));
        const auto want_video = std::llround((1.0 - config.rho_v) *
                                             static_cast<double>(cfg.total_video_tokens()));
        if (result.audio_kept != want_audio || result.video_kept != want_video) {
            pass = false;
            detail = "kept counts diverged from modality budgets on trial " + std::to_string(trial);
        }
        if (!result.infeasible_budget) {
            const double sum =
                std::accumulate(result.final_rates.begin(), result.final_rates.end(), 0.0);
            if (std::abs(sum / cfg.num_windows - config.rho_v) > 1e-9) {
                pass = false;
                detail = "rate sum off budget on trial " + std::to_string(trial);
            }
        }
        ++checked;
    }
    if (pass) detail = std::to_string(checked) + " random (stream, config) pairs exact";
    report_line(3, "budget exactness property suite", pass, detail);
}

// 4. Density-peak scoring equals the brute-force oracle exactly.
void criterion_dpc_oracle() {
    Rng rng(424242);
    bool pass = true;
    std::string detail;
    for (int trial = 0; trial < 1000 && pass; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(63));
        const int d = 1 + static_cast<int>(rng.uniform_int(8));
        const int k = 1 + static_cast<int>(rng.uniform_int(8));
        const MatrixF pts = random_matrix(n, d, rng);
        const auto got = istc::dpc_knn_scores(pts, k);
        const auto want = oracles::dpc_brute_force(pts, k);
        for (int i = 0; i < n; ++i) {
            if (got[i].rho != want[i].rho || got[i].delta != want[i].delta ||
                got[i].score != want[i].score) {
                pass = false;
                detail = "mismatch on trial " + std::to_string(trial) + " token " +
                         std::to_string(i);
                break;
            }
        }
    }

    // Worked 1-D example: clusters at {0, 0.1} and {5, 5.1}, one survivor each.
    MatrixF line(4, 1);
    line << 0.0f, 0.1f, 5.0f, 5.1f;
    const auto scores = istc::dpc_knn_scores(line, 1);
    const double rho = std::exp(-0.01);
    const double expected_delta[] = {5.1, 0.1, 4.9, 0.1};
    for (int i = 0; i < 4; ++i) {
        if (!within(scores[i].rho, rho, 1e-9) ||
            !within(scores[i].delta, expected_delta[i], 1e-9)) {
            pass = false;
            detail = "worked example scores diverged";
        }
    }
    const auto kept = istc::spatial_prune(scores, 2);
    if (kept != std::vector<int>{0, 2}) {
        pass = false;
        detail = "worked example did not keep one token per cluster";
    }
    if (pass) detail = "1000 random instances bit-exact, worked example selects {0, 5}";
    report_line(4, "DPC-KNN oracle equivalence", pass, detail);
}

// 5. Normalization against the exhaustive fixed-point oracle, plus
// idempotence and monotonicity.
void criterion_normalization_oracle() {
    bool pass = true;
    std::string detail;
    const double rho_min = 0.35, rho_max = 0.75;
    std::vector<double> grid;
    for (double v = rho_min; v <= rho_max + 1e-9; v += 0.05) grid.push_back(v);

    for (std::size_t n = 1; n <= 4 && pass; ++n) {
        std::vector<std::size_t> idx(n, 0);
        while (pass) {
            std::vector<double> initial(n);
            for (std::size_t i = 0; i < n; ++i) initial[i] = grid[idx[i]];
            for (double rho_v : grid) {
                const auto got = rate_alloc::normalize_rates(initial, rho_v, rho_min, rho_max);
                const auto want =
                    oracles::waterfill_by_enumeration(initial, rho_v, rho_min, rho_max);
                if (!want.has_value()) {
                    pass = false;
                    detail = "oracle found no consistent assignment";
                    break;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    if (std::abs(got.rates[i] - (*want)[i]) > 1e-6) {
                        pass = false;
                        detail = "grid case diverged from the enumeration oracle";
                        break;
                    }
                }
                if (!pass) break;
            }
            std::size_t carry = 0;
            while (carry < n && ++idx[carry] == grid.size()) idx[carry++] = 0;
            if (carry == n) break;
        }
    }

    Rng rng(31415);
    for (int trial = 0; trial < 10000 && pass; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(12));
        std::vector<double> retention(static_cast<std::size_t>(n));
        for (double& s : retention) s = rng.uniform();
        const double rho_v = rho_min + (rho_max - rho_min) * rng.uniform();
        const auto initial = rate_alloc::initial_rates(retention, rho_max, rho_min);
        const auto result = rate_alloc::normalize_rates(initial, rho_v, rho_min, rho_max);
        const auto again = rate_alloc::normalize_rates(result.rates, rho_v, rho_min, rho_max);
        for (int i = 0; i < n && pass; ++i) {
            if (std::abs(again.rates[i] - result.rates[i]) > 1e-9) {
                pass = false;
                detail = "normalization is not idempotent";
            }
            for (int j = 0; j < n; ++j) {
                if (initial[i] > initial[j] && result.rates[i] < result.rates[j] - 1e-12) {
                    pass = false;
                    detail = "normalization broke the rate ordering";
                }
            }
        }
    }
    if (pass) detail = "grid cases match within 1e-6; 10^4 random vectors idempotent + monotone";
    report_line(5, "normalization oracle", pass, detail);
}

// 6. Rate interpolation endpoints at the default limits.
void criterion_rate_endpoints() {
    const auto rates = rate_alloc::initial_rates({0.0, 0.5, 1.0}, 0.75, 0.35);
    const bool pass = rates[0] == 0.75 && rates[1] == 0.55 && rates[2] == 0.35;
    std::snprintf(detail_buffer, sizeof(detail_buffer),
                  "S in {0, 0.5, 1} -> rates {%.2f, %.2f, %.2f}", rates[0], rates[1], rates[2]);
    report_line(6, "rate interpolation endpoints", pass, detail_buffer);
}

// 7. Numerical contracts: stochastic softmax rows, bounded similarities,
// decode closed form vs loop.
void criterion_numerical_contracts() {
    Rng rng(2718);
    bool pass = true;
    std::string detail;

    for (int trial = 0; trial < 100 && pass; ++trial) {
        const int n = 1 + static_cast<int>(rng.uniform_int(64));
        const int d_att = 1 + static_cast<int>(rng.uniform_int(16));
        const MatrixF q = random_matrix(n, d_att, rng);
        const MatrixF k = random_matrix(n, d_att, rng);
        const MatrixD a = saliency::attention_from_qk(q, k, d_att);
        for (int i = 0; i < n; ++i) {
            if (std::abs(a.row(i).sum() - 1.0) > 1e-6) {
                pass = false;
                detail = "softmax row sum off by more than 1e-6";
            }
        }
    }

    for (int trial = 0; trial < 100 && pass; ++trial) {
        const int n_a = 1 + static_cast<int>(rng.uniform_int(12));
        const int n_v = 1 + static_cast<int>(rng.uniform_int(16));
        const int d = 1 + static_cast<int>(rng.uniform_int(8));
        const MatrixF s =
            anchor_merge::cross_modal_similarity(random_matrix(n_a, d, rng),
                                                 random_matrix(n_v, d, rng));
        if ((s.array() < -1.0f - 1e-6f).any() || (s.array() > 1.0f + 1e-6f).any()) {
            pass = false;
            detail = "cross-modal similarity escaped [-1-1e-6, 1+1e-6]";
        }
    }

    for (int trial = 0; trial < 1000 && pass; ++trial) {
        cost_model::ModelGeometry g;
        g.hidden_dim = 1 + static_cast<std::int64_t>(rng.uniform_int(8192));
        g.ffn_dim = 1 + static_cast<std::int64_t>(rng.uniform_int(32768));
        g.layers = 1 + static_cast<std::int64_t>(rng.uniform_int(128));
        g.decode_steps = static_cast<std::int64_t>(rng.uniform_int(513));
        const auto n = static_cast<std::int64_t>(rng.uniform_int(1000001));
        const double closed = cost_model::decode_flops(n, g);
        const double loop = oracles::decode_flops_loop(n, g);
        const double next_up = std::nextafter(closed, std::numeric_limits<double>::infinity());
        const double next_down = std::nextafter(closed, -std::numeric_limits<double>::infinity());
        if (loop != closed && loop != next_up && loop != next_down) {
            pass = false;
            detail = "decode closed form drifted beyond 1 ulp from the loop";
        }
    }
    if (pass) detail = "softmax rows stochastic, similarities bounded, decode exact to <=1 ulp";
    report_line(7, "numerical contracts", pass, detail);
}

// 8. Determinism across repeated runs and worker counts.
void criterion_determinism() {
    StreamConfig cfg;
    cfg.embed_dim = 16;
    cfg.num_windows = 64;
    cfg.audio_tokens_per_window = 50;
    cfg.frames_per_window = 4;
    cfg.video_tokens_per_frame = 72;
    const auto stream = stream_model::synth_stream(cfg, 555, stream_model::Scenario::IidGaussian);
    PruneConfig config;
    const auto first = result_to_json(pipeline::compress_stream(stream, config, 1));
    const auto second = result_to_json(pipeline::compress_stream(stream, config, 1));
    const auto wide = result_to_json(pipeline::compress_stream(stream, config, 8));
    const bool pass = first == second && first == wide;
    report_line(8, "determinism and parallel safety", pass,
                pass ? "byte-identical result.json across runs and worker counts {1, 8}"
                     : "result.json differs between runs or worker counts");
}

// 9. Planted event windows end with the lowest video pruning rates.
void criterion_event_tracking() {
    bool pass = true;
    std::string detail;
    for (std::uint64_t seed : {11u, 12u, 13u}) {
        StreamConfig cfg;
        cfg.embed_dim = 12;
        cfg.num_windows = 8;
        cfg.audio_tokens_per_window = 12;
        cfg.frames_per_window = 4;
        cfg.video_tokens_per_frame = 8;
        const auto stream =
            stream_model::synth_stream(cfg, seed, stream_model::Scenario::PlantedEvents);
        PruneConfig config;
        config.rho_a = 0.3;
        config.rho_v = 0.6;
        const auto result = pipeline::compress_stream(stream, config);

        std::vector<char> planted(static_cast<std::size_t>(cfg.num_windows), 0);
        for (int w : stream.planted_event_windows) planted[w] = 1;
        double max_event = 0.0, min_quiet = 1.0;
        for (int w = 0; w < cfg.num_windows; ++w) {
            if (planted[w]) max_event = std::max(max_event, result.final_rates[w]);
            else min_quiet = std::min(min_quiet, result.final_rates[w]);
        }
        if (max_event > min_quiet + 1e-12) {
            pass = false;
            detail = "an event window was pruned harder than a quiet window (seed " +
                     std::to_string(seed) + ")";
        }
    }
    if (pass) detail = "every planted window rate <= every quiet window rate on 3 seeded streams";
    report_line(9, "event-tracking behavior", pass, detail);
}

// 10. Performance smoke: 128 x (50 + 288) tokens at d=128 in < 200 ms.
void criterion_performance() {
    StreamConfig cfg;
    cfg.embed_dim = 128;
    cfg.num_windows = 128;
    cfg.audio_tokens_per_window = 50;
    cfg.frames_per_window = 4;
    cfg.video_tokens_per_frame = 72;
    const auto stream = stream_model::synth_stream(cfg, 777, stream_model::Scenario::IidGaussian);
    PruneConfig config;
    config.rho_a = 0.3;
    config.rho_v = 0.6;

    // Warm-up run, then the measured single-threaded run.
    pipeline::compress_stream(stream, config, 1);
    const auto result = pipeline::compress_stream(stream, config, 1);
    const bool pass = result.elapsed_ms < 200.0;
    std::snprintf(detail_buffer, sizeof(detail_buffer), "%.1f ms (budget 200 ms)",
                  result.elapsed_ms);
    report_line(10, "performance smoke", pass, detail_buffer);
}

}  // namespace

int main() {
    criterion_flops_table();
    criterion_retention_arithmetic();
    criterion_budget_exactness();
    criterion_dpc_oracle();
    criterion_normalization_oracle();
    criterion_rate_endpoints();
    criterion_numerical_contracts();
    criterion_determinism();
    criterion_event_tracking();
    criterion_performance();

    if (g_failures > 0) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
