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
#include <vector>

#include "bhd/analyzer.hpp"
#include "bhd/detection.hpp"
#include "bhd/optics.hpp"
#include "bhd/phase_lock.hpp"

using namespace bhd;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kPi = std::numbers::pi;

GeneratorState gen(double f, double phase = 0.0, double noise = 0.0) {
    GeneratorState g;
    g.freq_hz = f;
    g.phase_rad = phase;
    g.phase_noise_std_rad_per_sqrt_hz = noise;
    return g;
}

double max_abs_tail(const std::vector<double>& x, std::size_t from) {
    double m = 0.0;
    for (std::size_t i = from; i < x.size(); ++i) {
        m = std::max(m, std::abs(x[i]));
    }
    return m;
}

} // namespace

TEST_CASE("mix_down", "[phase_lock]") {
    auto a = mix_down(115e6, 110e6, 0, 0);
    CHECK(a.freq_hz == 5e6);
    CHECK(a.phase_rad == 0.0);
    CHECK_FALSE(a.degenerate);
    auto b = mix_down(110e6, 105e6, 0, 0);
    CHECK(b.freq_hz == 5e6);
    CHECK(b.phase_rad == 0.0);
    auto c = mix_down(115e6, 110e6, kPi / 3, kPi / 6);
    CHECK(c.freq_hz == 5e6);
    CHECK_THAT(c.phase_rad, WithinAbs(kPi / 6, 1e-15));
    // swapping the inputs keeps the product's phase referenced to the higher tone
    auto d = mix_down(110e6, 115e6, kPi / 6, kPi / 3);
    CHECK(d.freq_hz == 5e6);
    CHECK_THAT(d.phase_rad, WithinAbs(kPi / 6, 1e-15));
    CHECK(mix_down(110e6, 110e6, 0.3, 0.1).degenerate);
}

TEST_CASE("noiseless method 1 lock converges to zero error", "[phase_lock]") {
    const PllConfig cfg;
    REQUIRE(pll_is_stable(cfg));
    // 40 Hz and -25 Hz initial detuning, large initial phase errors
    const auto r = pll_lock_method1(gen(110e6, 0.2), gen(115e6 + 40, 2.5), gen(105e6 + 25, -2.0), cfg, 0.05, 1);
    for (const auto* loop : {&r.upper, &r.lower}) {
        CHECK(loop->locked);
        CHECK(loop->residual_phase_std_rad < 1e-9);
        CHECK(loop->settle_time_s < 5e-3);
        CHECK(max_abs_tail(loop->phase_error_series.samples, loop->phase_error_series.size() / 2) < 1e-9);
    }
    CHECK(r.generators[1].freq_hz - r.generators[0].freq_hz == 5e6);
    CHECK(r.generators[0].freq_hz - r.generators[2].freq_hz == 5e6);
    CHECK(max_abs_tail(r.theta_jitter.values_rad, r.theta_jitter.values_rad.size() / 2) < 1e-9);
}

TEST_CASE("open loop does not lock and drifts freely", "[phase_lock]") {
    PllConfig cfg;
    cfg.kp = cfg.ki = cfg.kd = 0.0;
    const auto r = pll_lock_method1(gen(110e6), gen(115e6 + 10, 0.1), gen(105e6), cfg, 0.01, 1);
    CHECK_FALSE(r.upper.locked);
    CHECK_FALSE(r.lower.locked);
    CHECK_THAT(r.upper.diagnostics, Catch::Matchers::ContainsSubstring("open loop"));
    const auto& e = r.upper.phase_error_series.samples;
    const double dt = 1.0 / cfg.update_rate_hz;
    for (std::size_t n = 0; n < e.size(); n += 97) {
        REQUIRE_THAT(e[n], WithinAbs(wrap_phase(0.1 + 2 * kPi * 10 * dt * double(n + 1)), 1e-9));
    }
    // free diffusion: the spread of the error grows with time
    cfg = PllConfig{};
    cfg.kp = cfg.ki = cfg.kd = 0.0;
    const auto d = pll_lock_method1(gen(110e6, 0, 0.3), gen(115e6, 0, 0.3), gen(105e6, 0, 0.3), cfg, 1.0, 2);
    const auto& w = d.upper.phase_error_series.samples;
    CHECK(std::abs(w.back()) > 0.0);
}

TEST_CASE("noisy method 1 lock holds with a finite residual", "[phase_lock]") {
    const auto r = pll_lock_method1(gen(110e6, 0, 9.4), gen(115e6, 0.3, 9.4), gen(105e6, -0.3, 9.4), PllConfig{}, 0.5, 4);
    CHECK(r.upper.locked);
    CHECK(r.lower.locked);
    CHECK(r.upper.residual_phase_std_rad > 0.05);
    CHECK(r.upper.residual_phase_std_rad < 0.2);
    CHECK(r.lower.residual_phase_std_rad > 0.05);
    CHECK(r.lower.residual_phase_std_rad < 0.2);
}

TEST_CASE("method 1 is invariant under time-axis scaling", "[phase_lock][property]") {
    const auto at = [](double s) {
        const double n = 9.4 * std::sqrt(s);
        return pll_lock_method1(gen(110e6 * s, 0, n), gen(115e6 * s, 0.3, n), gen(105e6 * s, 0, n),
                                PllConfig{}.scaled(s), 0.2 / s, 8);
    };
    const auto a = at(1.0);
    const auto b = at(0.01);
    CHECK_THAT(b.upper.residual_phase_std_rad, WithinRel(a.upper.residual_phase_std_rad, 1e-6));
    CHECK_THAT(b.lower.residual_phase_std_rad, WithinRel(a.lower.residual_phase_std_rad, 1e-6));
}

TEST_CASE("linearized stability test agrees with simulation", "[phase_lock]") {
    auto grows = [](const PllConfig& c) {
        std::array<double, 4> x{1e-3, 0, 0, 0};
        for (int n = 0; n < 200000; ++n) {
            x = detail::pll_linear_step(c, x);
        }
        return !(std::abs(x[0]) + std::abs(x[3]) < 1e-6);
    };
    for (const double kp : {100.0, 1414.2, 5000.0, 20000.0, 1e5}) {
        for (const double ki : {1e5, 6.2832e6, 1e8}) {
            PllConfig c;
            c.kp = kp;
            c.ki = ki;
            INFO("kp " << kp << " ki " << ki);
            CHECK(pll_is_stable(c) == !grows(c));
        }
    }
    // the default sits well inside the stable region
    PllConfig c;
    c.kp *= 2;
    CHECK(pll_is_stable(c));
    c.kp = 1e6;
    CHECK_FALSE(pll_is_stable(c));
}

TEST_CASE("phase error envelope decays monotonically after a step", "[phase_lock]") {
    const PllConfig cfg;
    const auto r = pll_lock_method1(gen(110e6), gen(115e6, 0.5), gen(105e6, -0.5), cfg, 0.02, 1);
    const auto& e = r.upper.phase_error_series.samples;
    // envelope over 0.5 ms windows
    const std::size_t win = 50;
    double prev = std::numeric_limits<double>::infinity();
    for (std::size_t w = 0; (w + 1) * win <= 600; ++w) {
        const double m = *std::max_element(e.begin() + std::ptrdiff_t(w * win), e.begin() + std::ptrdiff_t((w + 1) * win),
                                           [](double x, double y) { return std::abs(x) < std::abs(y); });
        CHECK(std::abs(m) <= prev);
        prev = std::abs(m);
    }
}

TEST_CASE("method 1 preconditions", "[phase_lock]") {
    auto g3 = gen(105e6);
    g3.controllable = false;
    CHECK_THROWS_AS(pll_lock_method1(gen(110e6), gen(115e6), g3, PllConfig{}, 0.01, 1), ValidationError);
    PllConfig bad;
    bad.update_rate_hz = 30e3;
    CHECK_THROWS_AS(pll_lock_method1(gen(110e6), gen(115e6), gen(105e6), bad, 0.01, 1), ValidationError);
}

TEST_CASE("method 2 enforces exact sideband frequencies", "[phase_lock][property]") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> f1(50e6, 150e6);
    std::uniform_real_distribution<double> off(1e6, 10e6);
    std::uniform_real_distribution<double> skew(-50.0, 50.0);
    for (int trial = 0; trial < 500; ++trial) {
        const double base = f1(rng);
        const double o = off(rng);
        const auto g = lock_method2(gen(base), gen(base + o + skew(rng)), gen(base - o + skew(rng)));
        REQUIRE(sideband_mismatch_hz(g) == 0.0);
        const double up = g[1].freq_hz - g[0].freq_hz;
        REQUIRE(up == g[0].freq_hz - g[2].freq_hz);
        REQUIRE(std::fmod(up, kClockStepHz) == 0.0);
        REQUIRE(std::fmod(g[0].freq_hz, kClockStepHz) == 0.0);
    }
    const auto g = lock_method2(gen(110e6, 0.1), gen(115e6, 0.2), gen(105e6, 0.3));
    CHECK(g[1].freq_hz == 115e6);
    CHECK(g[2].freq_hz == 105e6);
    CHECK(g[1].phase_rad == 0.2);
    CHECK(method2_theta_track(g, 1e6, 0.0, 0.01, 1).empty());
    CHECK_THROWS_AS(lock_method2(gen(110e6), gen(105e6), gen(115e6)), ValidationError);
}

TEST_CASE("method 2 jitter produces second-order power flicker", "[phase_lock]") {
    const auto g = lock_method2(gen(110e6), gen(115e6), gen(105e6), 0.05);
    const double duration = 0.06;
    DetectionConfig cfg;
    cfg.lo = {100, 0, 0};
    cfg.signal = make_two_sideband_field(1, 1, 5e6, 5e6, 0, 0);
    cfg.duration_s = duration;
    cfg.noise_enabled = false;
    cfg.theta_jitter = method2_theta_track(g, 20e3, 0.0, duration, 3);
    REQUIRE(cfg.theta_jitter.values_rad.size() > 1000);
    AnalyzerConfig a;
    a.sweep_time_s = 0.05;
    const auto tr = zero_span(PhotocurrentSource(cfg), a);
    const auto p = tr.linear_power();
    const double full = 80000.0;
    double worst = 0.0;
    for (const double v : p) {
        worst = std::max(worst, 1.0 - v / full);
    }
    CHECK(worst > 0.0);
    CHECK(worst <= 0.05 * 0.05);
}

TEST_CASE("sideband_phase_to_theta", "[phase_lock]") {
    const auto in_phase = lock_method2(gen(110e6), gen(115e6), gen(105e6));
    CHECK_THAT(sideband_phase_to_theta(in_phase, {100, 0, 0}), WithinAbs(0.0, 1e-15));
    CHECK_THAT(sideband_phase_to_theta(in_phase, {100, kPi / 2, 0}), WithinAbs(kPi / 2, 1e-15));
    // relative phase psi_down - psi_up = pi/2
    const auto rel = lock_method2(gen(110e6), gen(115e6, -kPi / 4), gen(105e6, -kPi / 4));
    CHECK_THAT(sideband_phase_to_theta(rel, {100, kPi / 4, 0}), WithinAbs(kPi / 2, 1e-12));
    CHECK_THROWS_AS(sideband_phase_to_theta({gen(110e6), gen(115e6 + 1), gen(105e6)}, {100, 0, 0}),
                    ValidationError);
}

TEST_CASE("theta bookkeeping matches a full chain simulation", "[phase_lock]") {
    // generator phases reach the sidebands through the shifters; the combined
    // field beaten against the LO must vanish when theta = pi/2
    const auto g = lock_method2(gen(110e6, 0.3), gen(115e6, 1.1 - kPi / 4), gen(105e6, 0.5 - kPi / 4));
    const LocalOscillator lo{100, 0.9, 0};
    const double theta = sideband_phase_to_theta(g, lo);
    const OpticalField carrier{{0.0, 1.0, 0.0}};
    const auto shifted = aom_shift(carrier, {-g[0].freq_hz, 1.0, g[0].phase_rad});
    const auto up = aom_shift(shifted, {g[1].freq_hz, 1.0, g[1].phase_rad});
    const auto down = aom_shift(shifted, {g[2].freq_hz, 1.0, g[2].phase_rad});
    OpticalField both = up;
    for (const auto& c : down.components()) {
        both.insert(c);
    }
    auto power_at = [&](double lo_phase) {
        DetectionConfig cfg;
        cfg.lo = {lo.amplitude, lo_phase, 0};
        cfg.signal = both;
        cfg.duration_s = 1e-5;
        cfg.noise_enabled = false;
        const auto ts = beat_signal(cfg);
        double s = 0.0;
        for (const double v : ts.samples) {
            s += v * v;
        }
        return s / double(ts.size());
    };
    const double full = 4 * 2 * lo.amplitude * lo.amplitude;
    CHECK_THAT(power_at(lo.phase_rad) / full, WithinAbs(std::pow(std::cos(theta), 2), 1e-9));
    // steering the LO by pi/2 - theta lands exactly on the floor
    CHECK(power_at(lo.phase_rad + kPi / 2 - theta) / full < 1e-18);
}

TEST_CASE("methods agree exactly without noise", "[phase_lock]") {
    const PllConfig cfg;
    const auto g1 = gen(110e6, 0.7);
    const auto m1 = pll_lock_method1(g1, gen(115e6, 0.7), gen(105e6, 0.7), cfg, 0.01, 1);
    const auto m2 = lock_method2(g1, m1.generators[1], m1.generators[2]);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(m1.generators[i].freq_hz == m2[i].freq_hz);
        CHECK(m1.generators[i].phase_rad == m2[i].phase_rad);
    }
    CHECK(max_abs_tail(m1.theta_jitter.values_rad, 0) == 0.0);
}
