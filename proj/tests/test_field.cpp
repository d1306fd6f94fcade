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

#include <cmath>
#include <numbers>
#include <random>

#include "bhd/field.hpp"

using namespace bhd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("make_two_sideband_field layouts", "[field]") {
    SECTION("symmetric sidebands at 5 MHz") {
        const auto f = make_two_sideband_field(1, 1, 5e6, 5e6, 0, 0);
        REQUIRE(f.size() == 2);
        CHECK(f.components()[0].offset_hz == -5e6);
        CHECK(f.components()[1].offset_hz == 5e6);
        CHECK(f.components()[0].amplitude == 1.0);
        CHECK(f.components()[1].amplitude == 1.0);
        CHECK(f.carrier_is_vacuum());
    }
    SECTION("zero amplitude sideband is dropped") {
        const auto f = make_two_sideband_field(1, 0, 5e6, 5e6, 0, 0);
        REQUIRE(f.size() == 1);
        CHECK(f.components()[0].offset_hz == 5e6);
    }
    SECTION("10 Hz mismatch about 5 MHz") {
        const auto f = make_two_sideband_field(1, 1, 5.000005e6, 4.999995e6, 0, 0);
        REQUIRE(f.size() == 2);
        CHECK(f.find(5.000005e6) != nullptr);
        CHECK(f.find(-4.999995e6) != nullptr);
        CHECK_THAT(5.000005e6 - 4.999995e6, WithinAbs(10.0, 1e-6));
    }
    SECTION("validation") {
        CHECK_THROWS_AS(make_two_sideband_field(-1, 1, 5e6, 5e6, 0, 0), ValidationError);
        CHECK_THROWS_AS(make_two_sideband_field(1, 1, 0, 5e6, 0, 0), ValidationError);
        CHECK_THROWS_AS(make_two_sideband_field(1, 1, 5e6, -5e6, 0, 0), ValidationError);
    }
}

TEST_CASE("total_power", "[field]") {
    CHECK(total_power(make_two_sideband_field(1, 1, 5e6, 5e6, 0, 0)) == 2.0);
    CHECK(total_power(OpticalField{}) == 0.0);
    CHECK(total_power(OpticalField{{1e6, 3, 0}, {2e6, 4, 1}}) == 25.0);
}

TEST_CASE("phases are normalized to [0, 2pi)", "[field]") {
    constexpr double two_pi = 2 * std::numbers::pi;
    CHECK(normalize_phase(-1e-300) == 0.0);
    CHECK(normalize_phase(two_pi) == 0.0);
    CHECK_THAT(normalize_phase(-std::numbers::pi / 2), WithinAbs(1.5 * std::numbers::pi, 1e-15));
    OpticalField f{{1e6, 1, -7.0}};
    const double p = f.components()[0].phase_rad;
    CHECK(p >= 0.0);
    CHECK(p < two_pi);
    CHECK_THAT(p, WithinAbs(-7.0 + 2 * two_pi, 1e-12));
}

TEST_CASE("insertion merges by complex addition", "[field]") {
    SECTION("equal amplitude, opposite phase cancels") {
        OpticalField f{{5e6, 1, 0.3}};
        f.insert({5e6, 1, 0.3 + std::numbers::pi});
        CHECK(f.empty());
    }
    SECTION("in-phase adds amplitudes") {
        OpticalField f{{5e6, 1, 0.3}};
        f.insert({5e6, 2, 0.3});
        REQUIRE(f.size() == 1);
        CHECK_THAT(f.components()[0].amplitude, WithinRel(3.0, 1e-14));
        CHECK_THAT(f.components()[0].phase_rad, WithinAbs(0.3, 1e-14));
    }
    SECTION("quadrature") {
        OpticalField f{{0, 3, 0}};
        f.insert({0, 4, std::numbers::pi / 2});
        CHECK_THAT(f.components()[0].amplitude, WithinRel(5.0, 1e-14));
        CHECK_FALSE(f.carrier_is_vacuum());
    }
    SECTION("sub-floor components are never stored") {
        OpticalField f{{1e6, 1e-16, 0}};
        CHECK(f.empty());
    }
    CHECK_THROWS_AS(OpticalField({{1e6, -1, 0}}), ValidationError);
}

TEST_CASE("total power is invariant under component phase changes", "[field][property]") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> amp(0.0, 3.0);
    std::uniform_real_distribution<double> ph(-10.0, 10.0);
    for (int trial = 0; trial < 200; ++trial) {
        OpticalField a;
        OpticalField b;
        for (int k = 0; k < 5; ++k) {
            const double f = 1e6 * (k - 2);
            const double A = amp(rng);
            a.insert({f, A, ph(rng)});
            b.insert({f, A, ph(rng)});
        }
        REQUIRE_THAT(total_power(a), WithinRel(total_power(b), 1e-12));
    }
}

TEST_CASE("component text records", "[field]") {
    const auto f = make_two_sideband_field(1.5, 0.25, 5e6, 4.99999e6, 0.1, 2.0);
    CHECK(parse_components(format_components(f)) == f);
    CHECK(parse_components("").empty());
    CHECK_THROWS_AS(parse_components("5e6 1"), ValidationError);
    CHECK_THROWS_AS(parse_components("5e6 1 0 9"), ValidationError);
}
