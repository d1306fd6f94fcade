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

#include <catch_amalgamated.hpp>

#include <vector>

#include "bhd/rng.hpp"
#include "oracles.hpp"

using bhd::GaussianStream;
using bhd::Philox4x64;

// Known-answer vectors: the first is the published Random123 KAT for
// philox4x64-10 with zero counter and key; all four were cross-checked
// against numpy.random.Philox.
TEST_CASE("Philox4x64-10 known answers", "[rng]") {
    using C = Philox4x64::Counter;
    CHECK(Philox4x64::block({0, 0, 0, 0}, {0, 0}) ==
          C{0x16554d9eca36314cULL, 0xdb20fe9d672d0fdcULL, 0xd7e772cee186176bULL, 0x7e68b68aec7ba23bULL});
    CHECK(Philox4x64::block({1, 0, 0, 0}, {0, 0}) ==
          C{0x02f4ba6408e4d89bULL, 0x3dd62b0b9ca8c5b2ULL, 0x1c8667a55d902e79ULL, 0x907d7a052fd5b4dcULL});
    CHECK(Philox4x64::block({123456789, 42, 0, 0}, {0xdeadbeef, 0}) ==
          C{0x9c0ebdb5b42ea520ULL, 0xeaa193b01c4f7c0aULL, 0x9b59086eed328aebULL, 0x3309c50ce3692174ULL});
    constexpr auto M = ~0ULL;
    CHECK(Philox4x64::block({M, M, M, M}, {M, M}) ==
          C{0x87b092c3013fe90bULL, 0x438c3c67be8d0224ULL, 0x9cc7d7c69cd777b6ULL, 0xa09caebf594f0ba0ULL});
}

TEST_CASE("Gaussian stream is addressable by index and chunk-invariant", "[rng]") {
    const GaussianStream g(7, 3);
    std::vector<double> whole(1001);
    g.fill(0, whole);
    for (std::size_t i = 0; i < whole.size(); ++i) {
        REQUIRE(whole[i] == g(i));
    }
    // odd offsets and odd lengths exercise the pair-splitting paths
    for (const std::size_t start : {1U, 2U, 333U, 998U}) {
        std::vector<double> part(3);
        g.fill(start, part);
        for (std::size_t i = 0; i < part.size(); ++i) {
            CHECK(part[i] == whole[start + i]);
        }
    }
}

TEST_CASE("Gaussian stream statistics", "[rng]") {
    const GaussianStream a(1, bhd::stream_id("a"));
    const GaussianStream b(1, bhd::stream_id("b"));
    constexpr std::size_t n = 400000;
    std::vector<double> xa(n);
    std::vector<double> xb(n);
    a.fill(0, xa);
    b.fill(0, xb);
    // mean within ~5 sigma of 1/sqrt(n), variance within ~5 sigma of sqrt(2/n)
    CHECK(std::abs(oracle::mean(xa)) < 5.0 / std::sqrt(double(n)));
    CHECK(std::abs(oracle::variance(xa) - 1.0) < 5.0 * std::sqrt(2.0 / double(n)));
    double cross = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        cross += xa[i] * xb[i];
    }
    CHECK(std::abs(cross / double(n)) < 5.0 / std::sqrt(double(n)));
    CHECK(GaussianStream(2, 0)(0) != GaussianStream(1, 0)(0));
}
