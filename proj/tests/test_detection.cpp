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
#include <complex>
#include <numbers>
#include <vector>

#include "bhd/detection.hpp"
#include "bhd/optics.hpp"
#include "oracles.hpp"

using namespace bhd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

DetectionConfig quiet(const OpticalField& sig, double lo_amp, double theta, double duration = 1e-3) {
    DetectionConfig cfg;
    cfg.lo = {lo_amp, theta, 0.0};
    cfg.signal = sig;
    cfg.duration_s = duration;
    cfg.noise_enabled = false;
    return cfg;
}

double max_abs(const std::vector<double>& x) {
    double m = 0.0;
    for (double v : x) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

} // namespace

TEST_CASE("beat signal of a single sideband", "[detection]") {
    const auto cfg = quiet(OpticalField{{5e6, 1, 0}}, 100, 0);
    const auto ts = beat_signal(cfg);
    REQUIRE(ts.size() == 32000);
    // 5 MHz at 32 MS/s repeats every 32 samples; 1 ms holds 5000 full cycles
    CHECK_THAT(max_abs(ts.samples), WithinRel(200.0, 1e-9));
    CHECK_THAT(oracle::mean_square(ts.samples), WithinRel(20000.0, 1e-9));
    for (std::size_t n = 0; n < 64; ++n) {
        REQUIRE_THAT(ts.samples[n], WithinAbs(200.0 * std::cos(2 * kPi * 5e6 * ts.time_at(n)), 1e-9));
    }
}

TEST_CASE("homodyne interference of two sidebands", "[detection]") {
    const auto two = make_two_sideband_field(1, 1, 5e6, 5e6, 0, 0);
    SECTION("theta = pi/2 cancels") {
        CHECK(max_abs(beat_signal(quiet(two, 100, kPi / 2)).samples) < 1e-9);
    }
    SECTION("theta = 0 doubles the amplitude") {
        const auto ts = beat_signal(quiet(two, 100, 0));
        CHECK_THAT(max_abs(ts.samples), WithinRel(400.0, 1e-9));
        CHECK_THAT(oracle::mean_square(ts.samples), WithinRel(4 * 20000.0, 1e-9));
    }
    SECTION("single-sideband power does not depend on theta") {
        const OpticalField one{{5e6, 1, 0}};
        for (const double th : {0.0, 0.4, kPi / 2, 2.0}) {
            CHECK_THAT(oracle::mean_square(beat_signal(quiet(one, 100, th)).samples), WithinRel(20000.0, 1e-9));
        }
    }
    SECTION("two-sideband power follows cos^2 theta") {
        for (const double th : {0.0, 0.3, 0.9, 1.3}) {
            const double ms = oracle::mean_square(beat_signal(quiet(two, 100, th)).samples);
            CHECK_THAT(ms, WithinAbs(80000.0 * std::pow(std::cos(th), 2), 1e-6));
        }
    }
}

TEST_CASE("sum of mismatched sidebands equals the product form", "[detection]") {
    const double fp = 5.000005e6;
    const double fm = 4.999995e6;
    const double theta = 0.37;
    auto cfg = quiet(make_two_sideband_field(1, 1, fp, fm, 0, 0), 100, theta, 0.01);
    const auto ts = beat_signal(cfg);
    const double carrier = 0.5 * (fp + fm);
    const double half_diff = 0.5 * (fp - fm);
    double worst = 0.0;
    for (std::size_t n = 0; n < ts.size(); n += 7) {
        const double t = ts.time_at(n);
        const double expect = 4 * 100 * std::cos(2 * kPi * half_diff * t - theta) * std::cos(2 * kPi * carrier * t);
        worst = std::max(worst, std::abs(ts.samples[n] - expect));
    }
    CHECK(worst < 1e-9 * 400 * 1e3);
}

TEST_CASE("balanced difference of the two mixer ports reproduces the beat", "[detection]") {
    // Propagate LO and signal through a 50/50 mixer, square the port fields
    // and subtract. A LO phasor of e^{i(theta - pi/2)} matches the cosine
    // convention of the detector model.
    const double lo = 50.0;
    const double theta = 0.8;
    const auto sig = make_two_sideband_field(0.7, 0.4, 5e6, 5.1e6, 0.2, 1.1);
    const OpticalField lo_field{{0.0, lo, theta - kPi / 2}};
    const auto ports = beamsplitter_mix(sig, lo_field, {0.5, 1.0});
    const auto ts = beat_signal(quiet(sig, lo, theta, 2e-6));

    auto intensity = [](const OpticalField& f, double t) {
        std::complex<double> e{};
        for (const auto& c : f.components()) {
            e += c.phasor() * std::polar(1.0, 2 * kPi * c.offset_hz * t);
        }
        return std::norm(e);
    };
    for (std::size_t n = 0; n < ts.size(); ++n) {
        const double t = ts.time_at(n);
        const double diff = intensity(ports.first, t) - intensity(ports.second, t);
        REQUIRE_THAT(diff, WithinAbs(ts.samples[n], 1e-8));
    }
}

TEST_CASE("beat signal is linear in the signal field", "[detection][property]") {
    const OpticalField a{{5e6, 0.3, 0.1}, {-2e6, 0.5, 2.0}};
    const OpticalField b{{3e6, 0.2, 1.0}, {-5e6, 0.4, 0.5}};
    OpticalField ab = a;
    for (const auto& c : b.components()) {
        ab.insert(c);
    }
    const auto sa = beat_signal(quiet(a, 100, 0.3, 1e-5));
    const auto sb = beat_signal(quiet(b, 100, 0.3, 1e-5));
    const auto sab = beat_signal(quiet(ab, 100, 0.3, 1e-5));
    for (std::size_t n = 0; n < sab.size(); ++n) {
        REQUIRE_THAT(sab.samples[n], WithinAbs(sa.samples[n] + sb.samples[n], 1e-9));
    }
}

TEST_CASE("shot noise statistics", "[detection]") {
    DetectionConfig cfg;
    cfg.lo = {100, 0, 0};
    cfg.duration_s = double(1 << 20) / cfg.sample_rate_hz;
    cfg.seed = 42;
    const auto ts = shot_noise(cfg);
    REQUIRE(ts.size() == (1U << 20));
    CHECK_THAT(oracle::variance(ts.samples), WithinRel(1.6e11, 0.01));

    const auto w = oracle::welch_psd(ts.samples, cfg.sample_rate_hz, 4096);
    REQUIRE(w.segments >= 100);
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t k = 1; k + 1 < w.psd.size(); ++k) {
        acc += w.psd[k];
        ++count;
    }
    CHECK_THAT(acc / double(count), WithinRel(1e4, 0.05));
    // flat: averages over 16 blocks of bins stay within 5%
    const std::size_t block = (w.psd.size() - 2) / 16;
    for (std::size_t b = 0; b < 16; ++b) {
        double s = 0.0;
        for (std::size_t k = 1 + b * block; k < 1 + (b + 1) * block; ++k) {
            s += w.psd[k];
        }
        CHECK_THAT(s / double(block), WithinRel(1e4, 0.05));
    }
}

TEST_CASE("noise contract", "[detection]") {
    DetectionConfig cfg;
    cfg.lo = {100, 0, 0};
    cfg.signal = OpticalField{{5e6, 1, 0}};
    cfg.duration_s = 1e-4;
    cfg.seed = 7;

    SECTION("zero LO gives silence") {
        auto z = cfg;
        z.lo.amplitude = 0.0;
        z.signal = OpticalField{};
        CHECK(max_abs(shot_noise(z).samples) == 0.0);
    }
    SECTION("same seed, same series; different seed differs") {
        CHECK(difference_photocurrent(cfg).samples == difference_photocurrent(cfg).samples);
        auto other = cfg;
        other.seed = 8;
        CHECK(difference_photocurrent(other).samples != difference_photocurrent(cfg).samples);
    }
    SECTION("noise off equals the beat exactly") {
        auto off = cfg;
        off.noise_enabled = false;
        CHECK(difference_photocurrent(off).samples == beat_signal(cfg).samples);
        CHECK_THROWS_AS(shot_noise(off), ValidationError);
    }
    SECTION("vacuum signal gives pure shot noise") {
        auto vac = cfg;
        vac.signal = OpticalField{};
        CHECK(difference_photocurrent(vac).samples == shot_noise(vac).samples);
    }
    SECTION("difference = beat + noise") {
        const auto d = difference_photocurrent(cfg);
        const auto b = beat_signal(cfg);
        const auto n = shot_noise(cfg);
        for (std::size_t i = 0; i < d.size(); ++i) {
            REQUIRE_THAT(d.samples[i], WithinAbs(b.samples[i] + n.samples[i], 1e-6));
        }
    }
    SECTION("chunked synthesis matches one pass") {
        const PhotocurrentSource src(cfg);
        const auto whole = src.materialize();
        std::vector<double> pieced(src.size());
        for (std::size_t first = 0; first < pieced.size(); first += 777) {
            const std::size_t n = std::min<std::size_t>(777, pieced.size() - first);
            src.fill(first, std::span(pieced).subspan(first, n));
        }
        CHECK(pieced == whole.samples);
    }
}

TEST_CASE("beat-to-shot ratio does not depend on the LO", "[detection][property]") {
    const OpticalField sig{{5e6, 0.5, 0}};
    auto ratio = [&](double lo) {
        DetectionConfig cfg = quiet(sig, lo, 0);
        cfg.noise_enabled = true;
        return oracle::mean_square(beat_signal(cfg).samples) / std::pow(cfg.noise_sigma(), 2);
    };
    CHECK_THAT(ratio(1e3), WithinRel(ratio(1e5), 1e-9));
}

TEST_CASE("detection preconditions", "[detection]") {
    SECTION("strong LO") {
        CHECK_THROWS_WITH(beat_signal(quiet(OpticalField{{5e6, 20, 0}}, 100, 0)),
                          Catch::Matchers::ContainsSubstring("strong-LO"));
    }
    SECTION("Nyquist names the offset") {
        auto cfg = quiet(OpticalField{{20e6, 1, 0}}, 100, 0);
        CHECK_THROWS_WITH(beat_signal(cfg), Catch::Matchers::ContainsSubstring("offset 2e+07 Hz"));
    }
    SECTION("duration") {
        CHECK_THROWS_AS(beat_signal(quiet(OpticalField{}, 100, 0, 0.0)), ValidationError);
    }
}

TEST_CASE("theta jitter track enters the beat phase", "[detection]") {
    const auto two = make_two_sideband_field(1, 1, 5e6, 5e6, 0, 0);
    auto cfg = quiet(two, 100, 0.0);
    cfg.theta_jitter = PhaseTrack{1e3, 0.0, std::vector<double>(10, kPi / 2)};
    CHECK(max_abs(beat_signal(cfg).samples) < 1e-9);
    auto drift = quiet(two, 100, 0.0);
    drift.lo.phase_drift_rad_per_s = kPi / 2 / 1e-3;
    const auto ts = beat_signal(drift);
    // amplitude envelope 400 cos(drift t) reaches zero at the end of the 1 ms record
    double tail = 0.0;
    for (std::size_t n = ts.size() - 32; n < ts.size(); ++n) {
        tail = std::max(tail, std::abs(ts.samples[n]));
    }
    CHECK(tail < 400 * 0.01);
}
