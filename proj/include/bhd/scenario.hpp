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

// Scenario description: what the simulated bench looks like and which traces
// to record. All values are in bench units (frequency_scale = 1); the runner
// applies the scale.

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bhd/analyzer.hpp"
#include "bhd/error.hpp"
#include "bhd/field.hpp"
#include "bhd/optics.hpp"
#include "bhd/phase_lock.hpp"

namespace bhd {

enum class LockMethod { none, method1, method2 };
enum class Arms { none, up, down, both };
enum class ThetaMode { fixed, scanned };

inline const char* to_string(LockMethod m) noexcept {
    switch (m) {
    case LockMethod::method1: return "method1";
    case LockMethod::method2: return "method2";
    default: return "none";
    }
}

inline const char* to_string(Arms a) noexcept {
    switch (a) {
    case Arms::up: return "up";
    case Arms::down: return "down";
    case Arms::both: return "both";
    default: return "none";
    }
}

inline const char* to_string(ThetaMode m) noexcept { return m == ThetaMode::fixed ? "fixed" : "scanned"; }

/// One recorded trace: which sideband arms are open and how theta is driven.
struct CurveConfig {
    std::string label;
    Arms arms = Arms::both;
    ThetaMode theta_mode = ThetaMode::fixed;
    double theta_rad = 0.0;
    double scan_rate_rad_per_s = 0.0;

    bool is_shot() const noexcept { return arms == Arms::none; }
    bool operator==(const CurveConfig&) const = default;
};

/// Defaults for the generator noise models. The method 1 value gives a
/// residual near 0.1 rad per loop with the default PLL.
inline constexpr double kDefaultGeneratorPhaseNoise = 9.4;
inline constexpr double kDefaultClockJitterRad = 0.01;
inline constexpr double kDefaultLoAmplitude = 1e5;
inline constexpr double kDefaultTargetSnrDb = 12.0;

struct ScenarioConfig {
    std::string name = "custom";
    std::string description;
    std::uint64_t seed = 1;
    double frequency_scale = 1.0;
    /// Off disables every random process: shot noise, generator phase noise
    /// and clock jitter.
    bool noise_enabled = true;
    LockMethod lock = LockMethod::none;
    double sample_rate_hz = 32e6;
    /// Lock acquisition time simulated before the measurement starts.
    double warmup_s = 0.02;
    std::string primary_curve;

    // generators: 1 drives the -1 order shifter, 2 and 3 the up and down arms
    std::array<double, 3> generator_hz{110e6, 115e6, 105e6};
    std::array<double, 3> generator_phase_rad{0.0, 0.0, 0.0};
    double generator_phase_noise = kDefaultGeneratorPhaseNoise;
    double clock_jitter_rad = kDefaultClockJitterRad;

    /// Per-sideband amplitude; 0 selects calibration to target_snr_db.
    double sideband_amplitude = 0.0;
    double target_snr_db = kDefaultTargetSnrDb;

    double aom_efficiency = kDefaultAomEfficiency;
    double combiner_reflectance = 0.5;
    double visibility = 1.0;
    double fiber_transmission = 1.0;

    double lo_amplitude = kDefaultLoAmplitude;
    PllConfig pll;
    AnalyzerConfig analyzer;

    /// Replaces the generator/optics chain with a fixed field.
    std::optional<OpticalField> explicit_signal;

    std::vector<CurveConfig> curves;

    bool operator==(const ScenarioConfig&) const = default;

    const CurveConfig* find_curve(std::string_view label) const noexcept {
        for (const auto& c : curves) {
            if (c.label == label) {
                return &c;
            }
        }
        return nullptr;
    }

    /// Sideband frequency mismatch of the free generators, (f2 - f1) - (f1 - f3).
    double mismatch_hz() const noexcept {
        return (generator_hz[1] - generator_hz[0]) - (generator_hz[0] - generator_hz[2]);
    }

    void validate() const {
        auto finite = [](double v) { return std::isfinite(v); };
        if (name.empty()) throw ValidationError("scenario name must not be empty");
        if (!(frequency_scale > 0.0) || !finite(frequency_scale)) throw ValidationError("frequency_scale must be > 0");
        if (!(sample_rate_hz > 0.0) || !finite(sample_rate_hz)) throw ValidationError("sample_rate_hz must be > 0");
        if (!(warmup_s >= 0.0) || !finite(warmup_s)) throw ValidationError("warmup_s must be >= 0");
        for (std::size_t i = 0; i < 3; ++i) {
            if (!(generator_hz[i] > 0.0) || !finite(generator_hz[i])) {
                throw ValidationError("generator frequencies must be > 0");
            }
            if (!finite(generator_phase_rad[i])) throw ValidationError("generator phases must be finite");
        }
        if (!(generator_phase_noise >= 0.0)) throw ValidationError("generator_phase_noise must be >= 0");
        if (!(clock_jitter_rad >= 0.0)) throw ValidationError("clock_jitter_rad must be >= 0");
        if (!(sideband_amplitude >= 0.0) || !finite(sideband_amplitude)) {
            throw ValidationError("sideband amplitude must be >= 0");
        }
        if (sideband_amplitude == 0.0 && !(target_snr_db > 0.0 && finite(target_snr_db))) {
            throw ValidationError("target_snr_db must be > 0 when the amplitude is calibrated");
        }
        if (!(aom_efficiency > 0.0 && aom_efficiency <= 1.0)) throw ValidationError("aom_efficiency must lie in (0, 1]");
        if (!(combiner_reflectance > 0.0 && combiner_reflectance < 1.0)) {
            throw ValidationError("combiner_reflectance must lie in (0, 1)");
        }
        if (!(visibility > 0.0 && visibility <= 1.0)) throw ValidationError("visibility must lie in (0, 1]");
        if (!(fiber_transmission > 0.0 && fiber_transmission <= 1.0)) {
            throw ValidationError("fiber_transmission must lie in (0, 1]");
        }
        if (!(lo_amplitude > 0.0) || !finite(lo_amplitude)) throw ValidationError("LO amplitude must be > 0");
        pll.validate();
        analyzer.validate();
        if (explicit_signal && lock != LockMethod::none) {
            throw ValidationError("an explicit signal field cannot be combined with a lock method");
        }
        if (curves.empty()) throw ValidationError("scenario has no curves");
        for (std::size_t i = 0; i < curves.size(); ++i) {
            const auto& c = curves[i];
            if (c.label.empty() || c.label.find_first_not_of("abcdefghijklmnopqrstuvwxyz0123456789_-") != std::string::npos) {
                throw ValidationError("curve labels must be non-empty [a-z0-9_-]: '" + c.label + "'");
            }
            for (std::size_t j = 0; j < i; ++j) {
                if (curves[j].label == c.label) throw ValidationError("duplicate curve label '" + c.label + "'");
            }
            if (!finite(c.theta_rad) || !finite(c.scan_rate_rad_per_s)) {
                throw ValidationError("curve theta settings must be finite");
            }
            if (c.theta_mode == ThetaMode::scanned && c.scan_rate_rad_per_s == 0.0) {
                throw ValidationError("scanned curve '" + c.label + "' needs a nonzero scan rate");
            }
        }
        if (!primary_curve.empty() && find_curve(primary_curve) == nullptr) {
            throw ValidationError("primary_curve '" + primary_curve + "' is not a curve of this scenario");
        }
    }
};

namespace detail {

inline CurveConfig curve(std::string label, Arms arms, double theta = 0.0) {
    return {std::move(label), arms, ThetaMode::fixed, theta, 0.0};
}

inline CurveConfig scanned_curve(std::string label, Arms arms, double rate) {
    return {std::move(label), arms, ThetaMode::scanned, 0.0, rate};
}

/// LO phase scan of the theta-scan traces: cos^2 theta repeats every 250 ms.
inline constexpr double kScanRateRadPerS = 4.0 * std::numbers::pi;

inline ScenarioConfig zero_span_base() {
    ScenarioConfig s;
    s.analyzer.center_hz = 5e6;
    s.analyzer.span_hz = 0.0;
    s.analyzer.rbw_hz = 100e3;
    s.analyzer.vbw_hz = 300.0;
    s.analyzer.sweep_time_s = 0.5;
    s.analyzer.points = 1001;
    return s;
}

inline ScenarioConfig swept_base() {
    ScenarioConfig s = zero_span_base();
    s.analyzer.span_hz = 3e6;
    s.analyzer.vbw_hz = 30.0;
    return s;
}

inline ScenarioConfig fig2(const char* name, double mismatch_hz) {
    ScenarioConfig s = zero_span_base();
    s.name = name;
    s.description = "zero span at 5 MHz, sideband mismatch " + std::to_string(static_cast<int>(mismatch_hz)) +
                    " Hz, theta = 0, generators free-running";
    s.lock = LockMethod::none;
    s.generator_hz[2] = 105e6 + mismatch_hz;  // down sideband at 5 MHz - mismatch
    s.curves = {curve("shot", Arms::none), curve("single", Arms::up), curve("double", Arms::both)};
    s.primary_curve = "double";
    return s;
}

inline ScenarioConfig fig5b(const char* name, const char* what, CurveConfig dbl) {
    ScenarioConfig s = zero_span_base();
    s.name = name;
    s.description = std::string("zero span at 5 MHz, common-clock lock, ") + what;
    s.lock = LockMethod::method2;
    s.curves = {curve("shot", Arms::none), curve("single", Arms::up), std::move(dbl)};
    s.primary_curve = "double";
    return s;
}

inline ScenarioConfig fig6(const char* name, const char* what, std::vector<CurveConfig> curves, std::string primary) {
    ScenarioConfig s = swept_base();
    s.name = name;
    s.description = std::string("swept 3.5-6.5 MHz, common-clock lock, ") + what;
    s.lock = LockMethod::method2;
    s.curves = std::move(curves);
    s.primary_curve = std::move(primary);
    return s;
}

} // namespace detail

inline std::vector<ScenarioConfig> builtin_scenarios() {
    using detail::curve;
    constexpr double half_pi = std::numbers::pi / 2.0;
    std::vector<ScenarioConfig> all;
    all.push_back(detail::fig2("fig2a", -10.0));
    all.push_back(detail::fig2("fig2b", -5.0));
    all.push_back(detail::fig2("fig2c", 0.0));
    all.push_back(detail::fig2("fig2d", 5.0));
    all.push_back(detail::fig2("fig2e", 10.0));

    ScenarioConfig f5a = detail::zero_span_base();
    f5a.name = "fig5a";
    f5a.description = "zero span at 5 MHz, two PLLs on a shared 5 MHz reference, theta 0 / pi/2 / scanned";
    f5a.lock = LockMethod::method1;
    f5a.curves = {curve("shot", Arms::none), curve("single", Arms::up), curve("theta0", Arms::both, 0.0),
                  curve("theta90", Arms::both, half_pi),
                  detail::scanned_curve("scan", Arms::both, detail::kScanRateRadPerS)};
    f5a.primary_curve = "theta0";
    all.push_back(f5a);

    all.push_back(detail::fig5b("fig5b_theta0", "theta = 0", curve("double", Arms::both, 0.0)));
    all.push_back(detail::fig5b("fig5b_theta90", "theta = pi/2", curve("double", Arms::both, half_pi)));
    all.push_back(detail::fig5b("fig5b_scan", "theta scanned",
                                detail::scanned_curve("double", Arms::both, detail::kScanRateRadPerS)));

    all.push_back(detail::fig6("fig6_single", "one sideband (heterodyne)",
                               {curve("shot", Arms::none), curve("single", Arms::up)}, "single"));
    all.push_back(detail::fig6("fig6_double_theta0", "two sidebands, theta = 0",
                               {curve("shot", Arms::none), curve("double", Arms::both, 0.0)}, "double"));
    all.push_back(detail::fig6("fig6_double_theta90", "two sidebands, theta = pi/2",
                               {curve("shot", Arms::none), curve("double", Arms::both, half_pi)}, "double"));
    return all;
}

inline std::optional<ScenarioConfig> find_builtin(std::string_view name) {
    for (auto& s : builtin_scenarios()) {
        if (s.name == name) {
            return s;
        }
    }
    return std::nullopt;
}

} // namespace bhd
