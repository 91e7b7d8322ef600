// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#include "omnizip/istc.hpp"

#include "omnizip/rng.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace omnizip;
using namespace omnizip::istc;

namespace {

MatrixF random_matrix(int rows, int cols, std::uint64_t seed) {
    Rng rng(seed);
    MatrixF m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = static_cast<float>(rng.gaussian());
    return m;
}

MatrixF column_points(std::initializer_list<float> values) {
    MatrixF m(static_cast<Eigen::Index>(values.size()), 1);
    Eigen::Index i = 0;
    for (float v : values) m(i++, 0) = v;
    return m;
}

}  // namespace

TEST_CASE("temporal similarity: identical, negated, and 45-degree positions") {
    MatrixF prev(3, 2), curr(3, 2);
    prev << 1.0f, 0.0f, 0.5f, 0.5f, 2.0f, -1.0f;
    curr = prev;
    auto sims = temporal_similarity(prev, curr);
    for (double s : sims) CHECK(s == doctest::Approx(1.0).epsilon(1e-6));

    curr = -prev;
    sims = temporal_similarity(prev, curr);
    for (double s : sims) CHECK(s == doctest::Approx(-1.0).epsilon(1e-6));

    prev.row(0) << 1.0f, 0.0f;
    curr.row(0) << 1.0f, 1.0f;
    sims = temporal_similarity(prev, curr);
    CHECK(sims[0] == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-4));

    prev.row(1).setZero();
    sims = temporal_similarity(prev, curr);
    CHECK(sims[1] == 0.0);

    try {
        temporal_similarity(prev, random_matrix(2, 2, 1));
        FAIL("expected DimMismatch");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimMismatch);
    }
}

TEST_CASE("density scores on the two-cluster line {0, 0.1, 5, 5.1}") {
    const MatrixF pts = column_points({0.0f, 0.1f, 5.0f, 5.1f});
    const auto scores = dpc_knn_scores(pts, 1);

    const double rho = std::exp(-0.1 * 0.1);
    for (const auto& s : scores) CHECK(s.rho == doctest::Approx(rho).epsilon(1e-9));
    CHECK(scores[0].delta == doctest::Approx(5.1).epsilon(1e-9));
    CHECK(scores[1].delta == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(scores[2].delta == doctest::Approx(4.9).epsilon(1e-9));
    CHECK(scores[3].delta == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(scores[0].score == doctest::Approx(rho * 5.1).epsilon(1e-9));
    CHECK(scores[2].score == doctest::Approx(rho * 4.9).epsilon(1e-9));

    // Top two by score pick one representative per cluster.
    const auto kept = spatial_prune(scores, 2);
    CHECK(kept == std::vector<int>{0, 2});
}

TEST_CASE("duplicate tokens tie to zero scores") {
    MatrixF pts(2, 3);
    pts.row(0) << 1.0f, 2.0f, 3.0f;
    pts.row(1) << 1.0f, 2.0f, 3.0f;
    const auto scores = dpc_knn_scores(pts, 5);
    CHECK(scores[0].rho == scores[1].rho);
    CHECK(scores[0].delta == 0.0);  // max distance to the only other token
    CHECK(scores[1].delta == 0.0);  // min distance to the higher-ordered twin
    CHECK(scores[0].score == 0.0);
    CHECK(scores[1].score == 0.0);
}

TEST_CASE("k clamps to n-1 and reacts to spread") {
    const auto tight = dpc_knn_scores(column_points({0.0f, 0.1f}), 5);
    const auto spread = dpc_knn_scores(column_points({0.0f, 1.0f}), 5);
    CHECK(tight[0].rho > spread[0].rho);
    try {
        dpc_knn_scores(column_points({0.0f}), 5);
        FAIL("expected TooFewTokens");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::TooFewTokens);
    }
}

TEST_CASE("density scoring matches the brute-force oracle bit-for-bit") {
    Rng rng(8080);
    for (int trial = 0; trial < 200; ++trial) {
        const int n = 2 + static_cast<int>(rng.uniform_int(63));
        const int d = 1 + static_cast<int>(rng.uniform_int(8));
        const int k = 1 + static_cast<int>(rng.uniform_int(8));
        const MatrixF pts = random_matrix(n, d, 10000 + trial);
        const auto got = dpc_knn_scores(pts, k);
        const auto want = oracles::dpc_brute_force(pts, k);
        REQUIRE(got.size() == want.size());
        for (std::size_t i = 0; i < got.size(); ++i) {
            CHECK(got[i].rho == want[i].rho);
            CHECK(got[i].delta == want[i].delta);
            CHECK(got[i].score == want[i].score);
        }
    }
}

TEST_CASE("density scores are translation invariant") {
    const MatrixF pts = random_matrix(12, 4, 5151);
    MatrixF shifted = pts;
    shifted.array() += 3.75f;
    const auto a = dpc_knn_scores(pts, 3);
    const auto b = dpc_knn_scores(shifted, 3);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].score == doctest::Approx(b[i].score).epsilon(1e-5));
    }
}

TEST_CASE("temporal pruning removes by similarity rank") {
    CHECK(temporal_prune({0.5, 0.6}, 0).empty());
    CHECK(temporal_prune({0.9, 0.1, 0.8, 0.2}, 2) == std::vector<int>{0, 2});
    CHECK(temporal_prune({0.7, 0.7, 0.7, 0.7}, 3) == std::vector<int>{0, 1, 2});
    try {
        temporal_prune({0.5}, 2);
        FAIL("expected BudgetOutOfRange");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::BudgetOutOfRange);
    }
}

TEST_CASE("spatial pruning keeps by score rank") {
    const MatrixF pts = column_points({0.0f, 0.1f, 5.0f, 5.1f});
    const auto scores = dpc_knn_scores(pts, 1);
    CHECK(spatial_prune(scores, 4) == std::vector<int>{0, 1, 2, 3});
    CHECK(spatial_prune(scores, 0).empty());
}

TEST_CASE("window compression: identity and fully redundant frames") {
    const int frames = 4, per_frame = 6;
    SUBCASE("identity keep") {
        const MatrixF window = random_matrix(frames * per_frame, 5, 71);
        const auto out = compress_window_video(window, frames, per_frame, frames * per_frame, 5);
        CHECK(out.removed_temporal.empty());
        CHECK(out.removed_spatial.empty());
        CHECK(static_cast<int>(out.kept.size()) == frames * per_frame);
    }
    SUBCASE("identical frames split removals between the pools") {
        MatrixF window(frames * per_frame, 5);
        const MatrixF frame = random_matrix(per_frame, 5, 72);
        for (int f = 0; f < frames; ++f) window.middleRows(f * per_frame, per_frame) = frame;
        const int keep = frames * per_frame - per_frame;
        const auto out = compress_window_video(window, frames, per_frame, keep, 3);
        CHECK(static_cast<int>(out.kept.size()) == keep);
        // Even pool has half the tokens, so it takes half the removals; all
        // similarities tie at 1, so the lowest even-frame indices go first.
        CHECK(static_cast<int>(out.removed_temporal.size()) == per_frame / 2);
        CHECK(static_cast<int>(out.removed_spatial.size()) == per_frame - per_frame / 2);
        for (std::size_t i = 0; i < out.removed_temporal.size(); ++i) {
            CHECK(out.removed_temporal[i] == per_frame + static_cast<int>(i));
        }
    }
}

TEST_CASE("planted clusters survive compression one representative each") {
    // Odd frames carry two tight clusters; even frames copy their
    // predecessor exactly. Budget keeps one token per cluster per odd frame.
    const int frames = 4, per_frame = 6, d = 3;
    MatrixF window(frames * per_frame, d);
    Rng rng(99);
    auto fill_frame = [&](int f) {
        for (int p = 0; p < per_frame; ++p) {
            const float center = p < per_frame / 2 ? 0.0f : 20.0f;
            for (int j = 0; j < d; ++j) {
                window(f * per_frame + p, j) =
                    center + 0.05f * static_cast<float>(rng.gaussian());
            }
        }
    };
    fill_frame(0);
    window.middleRows(per_frame, per_frame) = window.middleRows(0, per_frame);
    fill_frame(2);
    window.middleRows(3 * per_frame, per_frame) = window.middleRows(2 * per_frame, per_frame);

    // keep = 8 splits removals 8/8, leaving two tokens per odd frame.
    const int keep = 8;
    const auto out = compress_window_video(window, frames, per_frame, keep, 2);
    REQUIRE(static_cast<int>(out.kept.size()) == keep);
    for (int f : {0, 2}) {
        int low_cluster = 0, high_cluster = 0;
        for (int idx : out.kept) {
            if (idx >= f * per_frame && idx < (f + 1) * per_frame) {
                (window(idx, 0) < 10.0f ? low_cluster : high_cluster) += 1;
            }
        }
        CHECK(low_cluster == 1);
        CHECK(high_cluster == 1);
    }
}

TEST_CASE("identical even frames are preferred for removal over distinct ones") {
    const int frames = 4, per_frame = 4, d = 4;
    MatrixF window(frames * per_frame, d);
    window.middleRows(0, per_frame) = random_matrix(per_frame, d, 11);
    // Frame 1 equals frame 0 elementwise; frame 3 differs everywhere.
    window.middleRows(per_frame, per_frame) = window.middleRows(0, per_frame);
    window.middleRows(2 * per_frame, per_frame) = random_matrix(per_frame, d, 12);
    window.middleRows(3 * per_frame, per_frame) =
        random_matrix(per_frame, d, 13);

    const auto out = compress_window_video(window, frames, per_frame, 3 * per_frame, 2);
    REQUIRE(static_cast<int>(out.removed_temporal.size()) >= per_frame / 2);
    // Every removed temporal token should come from the duplicated frame 1
    // until that frame is exhausted.
    int from_frame1 = 0;
    for (int idx : out.removed_temporal) {
        if (idx >= per_frame && idx < 2 * per_frame) ++from_frame1;
    }
    CHECK(from_frame1 == std::min<int>(per_frame, static_cast<int>(out.removed_temporal.size())));
}

TEST_CASE("cardinality is exact for random shapes and budgets") {
    Rng rng(31337);
    for (int trial = 0; trial < 100; ++trial) {
        const int frames = 1 + static_cast<int>(rng.uniform_int(7));
        const int per_frame = 1 + static_cast<int>(rng.uniform_int(9));
        const int d = 1 + static_cast<int>(rng.uniform_int(6));
        const int total = frames * per_frame;
        const int keep =
            frames + static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(total - frames + 1)));
        const MatrixF window = random_matrix(total, d, 40000 + trial);
        const auto out = compress_window_video(window, frames, per_frame, keep, 5);

        CHECK(static_cast<int>(out.kept.size()) == keep);
        std::set<int> seen(out.kept.begin(), out.kept.end());
        for (int t : out.removed_temporal) CHECK(seen.insert(t).second);
        for (int t : out.removed_spatial) CHECK(seen.insert(t).second);
        CHECK(static_cast<int>(seen.size()) == total);
        CHECK(std::is_sorted(out.kept.begin(), out.kept.end()));
    }
}

TEST_CASE("shuffling one odd frame permutes its kept tokens the same way") {
    const int frames = 4, per_frame = 8, d = 4;
    const MatrixF window = random_matrix(frames * per_frame, d, 606);
    const int keep = 2 * per_frame;
    const auto base = compress_window_video(window, frames, per_frame, keep, 3);

    // Permute tokens inside frame 2 (an odd-rule frame).
    std::vector<int> perm{5, 2, 7, 0, 4, 1, 6, 3};
    MatrixF shuffled = window;
    for (int p = 0; p < per_frame; ++p) {
        shuffled.row(2 * per_frame + p) = window.row(2 * per_frame + perm[p]);
    }
    const auto moved = compress_window_video(shuffled, frames, per_frame, keep, 3);

    std::set<int> base_frame2, moved_frame2_mapped;
    for (int idx : base.kept) {
        if (idx >= 2 * per_frame && idx < 3 * per_frame) base_frame2.insert(idx - 2 * per_frame);
    }
    for (int idx : moved.kept) {
        if (idx >= 2 * per_frame && idx < 3 * per_frame) {
            moved_frame2_mapped.insert(perm[idx - 2 * per_frame]);
        }
    }
    CHECK(base_frame2 == moved_frame2_mapped);
}
