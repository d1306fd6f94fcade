// SPDX-License-Identifier: Apache-2.0
//
// bhdsim: balanced homodyne/heterodyne detection simulator
// Copyright (C) 2026 The bhdsim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

// Counter-based random numbers. Every Gaussian variate is a pure function of
// (seed, stream, index), so a long trace can be generated in any chunking or
// order and still agree bit-for-bit with a monolithic run.

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <span>
#include <string_view>

namespace bhd {

/// Philox4x64 with 10 rounds (Salmon et al., SC'11).
struct Philox4x64 {
    using Counter = std::array<std::uint64_t, 4>;
    using Key = std::array<std::uint64_t, 2>;

    static Counter block(Counter ctr, Key key) noexcept {
        for (int r = 0; r < 10; ++r) {
            if (r > 0) {
                key[0] += kWeyl0;
                key[1] += kWeyl1;
            }
            ctr = round(ctr, key);
        }
        return ctr;
    }

private:
    static constexpr std::uint64_t kMul0 = 0xD2E7470EE14C6C93ULL;
    static constexpr std::uint64_t kMul1 = 0xCA5A826395121157ULL;
    static constexpr std::uint64_t kWeyl0 = 0x9E3779B97F4A7C15ULL;
    static constexpr std::uint64_t kWeyl1 = 0xBB67AE8584CAA73BULL;

    static Counter round(const Counter& c, const Key& k) noexcept {
        const unsigned __int128 p0 = static_cast<unsigned __int128>(kMul0) * c[0];
        const unsigned __int128 p1 = static_cast<unsigned __int128>(kMul1) * c[2];
        const auto hi0 = static_cast<std::uint64_t>(p0 >> 64);
        const auto lo0 = static_cast<std::uint64_t>(p0);
        const auto hi1 = static_cast<std::uint64_t>(p1 >> 64);
        const auto lo1 = static_cast<std::uint64_t>(p1);
        return {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    }
};

/// Stable 64-bit stream id for a label (FNV-1a). Used to give each named
/// trace its own noise stream independent of how many other traces exist.
constexpr std::uint64_t stream_id(std::string_view label) noexcept {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const char ch : label) {
        h ^= static_cast<unsigned char>(ch);
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Unit-variance Gaussian sequence addressed by sample index.
///
/// Variates 2m and 2m+1 come from one Box-Muller pair drawn from the Philox
/// block at counter (m, stream, 0, 0) with key (seed, 0).
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream) noexcept : seed_(seed), stream_(stream) {}

    double operator()(std::uint64_t index) const noexcept {
        const auto [c, s] = pair(index >> 1);
        return (index & 1U) ? s : c;
    }

    void fill(std::uint64_t first, std::span<double> out) const noexcept {
        std::size_t i = 0;
        std::uint64_t idx = first;
        if (!out.empty() && (idx & 1U)) {
            out[i++] = (*this)(idx++);
        }
        for (; i + 1 < out.size(); i += 2, idx += 2) {
            const auto [c, s] = pair(idx >> 1);
            out[i] = c;
            out[i + 1] = s;
        }
        if (i < out.size()) {
            out[i] = (*this)(idx);
        }
    }

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t stream() const noexcept { return stream_; }

private:
    struct Pair {
        double c;
        double s;
    };

    Pair pair(std::uint64_t m) const noexcept {
        const auto w = Philox4x64::block({m, stream_, 0, 0}, {seed_, 0});
        constexpr double kInv53 = 1.0 / 9007199254740992.0;
        // u1 in (0, 1], u2 in [0, 1)
        const double u1 = static_cast<double>((w[0] >> 11) + 1) * kInv53;
        const double u2 = static_cast<double>(w[1] >> 11) * kInv53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(a), r * std::sin(a)};
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
};

} // namespace bhd
