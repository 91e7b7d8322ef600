// Copyright (C) 2026 OmniZip Contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace omnizip {

// Deterministic random source. mt19937_64 defines its output sequence
// bit-exactly in the standard, and all value transforms are done here by
// hand, so identical seeds give identical streams on every platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : m_engine(seed), m_seed(seed) {}

    std::uint64_t next_bits() { return m_engine(); }

    // Uniform on [0, 1) with 53 random bits.
    double uniform() { return static_cast<double>(m_engine() >> 11) * 0x1.0p-53; }

    // Uniform integer in [0, bound) via rejection, bound > 0.
    std::uint64_t uniform_int(std::uint64_t bound) {
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t draw;
        do {
            draw = m_engine();
        } while (draw >= limit);
        return draw % bound;
    }

    // Standard normal via Box-Muller.
    double gaussian() {
        if (m_has_spare) {
            m_has_spare = false;
            return m_spare;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        m_spare = radius * std::sin(angle);
        m_has_spare = true;
        return radius * std::cos(angle);
    }

    // First `count` entries of a Fisher-Yates shuffle of 0..n-1, sorted.
    std::vector<int> sample_without_replacement(int n, int count) {
        std::vector<int> pool(n);
        for (int i = 0; i < n; ++i) pool[i] = i;
        for (int i = 0; i < count; ++i) {
            const int j = i + static_cast<int>(uniform_int(static_cast<std::uint64_t>(n - i)));
            std::swap(pool[i], pool[j]);
        }
        std::vector<int> picked(pool.begin(), pool.begin() + count);
        std::sort(picked.begin(), picked.end());
        return picked;
    }

    // Independent child stream; distinct tags give decorrelated sequences.
    Rng derive(std::uint64_t tag) const {
        std::uint64_t x = m_seed ^ (tag + 0x9e3779b97f4a7c15ULL);
        x ^= x >> 30;
        x *= 0xbf58476d1ce4e5b9ULL;
        x ^= x >> 27;
        x *= 0x94d049bb133111ebULL;
        x ^= x >> 31;
        return Rng(x);
    }

private:
    std::mt19937_64 m_engine;
    std::uint64_t m_seed = 0;
    double m_spare = 0.0;
    bool m_has_spare = false;
};

}  // namespace omnizip
