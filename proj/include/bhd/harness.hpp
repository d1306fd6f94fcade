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

// Scenario runner: generators -> phase lock -> optics chain -> balanced
// detection -> spectrum analyzer -> metrics.
//
// Frequency scaling: with scale s every frequency and rate is multiplied by s
// and every time divided by s. Amplitudes (LO and sidebands, in sqrt(photons
// per second)) are multiplied by sqrt(s), which keeps every dB ratio
// unchanged. Reported frequencies and times are converted back to bench units.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <limits>
#include <optional>
#include <sstream>
#include <string_view>
#include <string>
#include <utility>
#include <vector>

#include "bhd/analyzer.hpp"
#include "bhd/detection.hpp"
#include "bhd/error.hpp"
#include "bhd/field.hpp"
#include "bhd/metrics.hpp"
#include "bhd/optics.hpp"
#include "bhd/phase_lock.hpp"
#include "bhd/rng.hpp"
#include "bhd/scenario.hpp"
#include "bhd/series.hpp"

namespace bhd {

/// Per-sideband amplitude for which one sideband reads target_snr_db above
/// the shot floor: tone power 2 a_LO^2 a_s^2 over floor a_LO^2 ENBW.
inline double calibrate_signal_amplitude(double target_snr_db, const AnalyzerConfig& analyzer, double lo_amplitude) {
    if (!(target_snr_db > 0.0) || !std::isfinite(target_snr_db)) {
        throw ValidationError("target SNR must be > 0 dB");
    }
    if (!(analyzer.rbw_hz > 0.0)) {
        throw ValidationError("analyzer rbw_hz must be > 0");
    }
    if (!(lo_amplitude > 0.0)) {
        throw ValidationError("LO amplitude must be > 0");
    }
    const double snr = std::pow(10.0, target_snr_db / 10.0);
    const double amp = std::sqrt(snr * gaussian_enbw_hz(analyzer.rbw_hz) / 2.0);
    // both sidebands of this amplitude must still satisfy the strong-LO condition
    const double needed = std::sqrt(kStrongLoRatio * 2.0) * amp;
    if (lo_amplitude < needed) {
        std::ostringstream os;
        os << "strong-LO regime violated: " << target_snr_db << " dB needs sideband amplitude " << amp
           << ", which requires LO amplitude >= " << needed << " (have " << lo_amplitude << ")";
        throw ValidationError(os.str());
    }
    return amp;
}

struct Calibration {
    bool calibrated = false;
    double target_snr_db = 0.0;
    /// Bench units.
    double sideband_amplitude = 0.0;
    double lo_amplitude = 0.0;
};

struct LockSummary {
    LockMethod method = LockMethod::none;
    bool locked = false;
    /// Larger of the two beat-note residuals.
    double residual_phase_std_rad = 0.0;
    double residual_upper_rad = 0.0;
    double residual_lower_rad = 0.0;
    /// Bench units.
    double settle_time_s = 0.0;
    double sideband_mismatch_hz = 0.0;
    std::string diagnostics;
    TimeSeries upper_error;
    TimeSeries lower_error;
};

struct PreparedCurve {
    CurveConfig curve;
    DetectionConfig detection;
};

/// Everything needed to synthesize the photocurrents of a scenario.
struct PreparedScenario {
    ScenarioConfig config;
    double scale = 1.0;
    /// Scaled analyzer with the shot-floor reference (0 dB = a_LO^2 ENBW).
    AnalyzerConfig analyzer;
    GeneratorTriple generators{};
    LockSummary lock;
    Calibration calibration;
    /// Both-arm field at the detector (scaled units).
    OpticalField full_field;
    /// Absolute tone frequencies of the full field (scaled units).
    std::vector<double> tones_hz;
    /// Source amplitude feeding the optics chain (scaled units).
    double source_amplitude = 0.0;
    /// LO phase offset that makes the curve theta the homodyne phase.
    double theta_offset_rad = 0.0;
    std::vector<PreparedCurve> curves;
    std::vector<std::string> warnings;
};

namespace detail {

template <class F>
auto stage(const char* name, F&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StageError&) {
        throw;
    } catch (const std::exception& e) {
        const std::string_view n(name);
        throw StageError(name, n == "config" || n == "calibration", e.what());
    }
}

inline double snap_to_clock(double f) noexcept { return std::round(f / kClockStepHz) * kClockStepHz; }

/// Source -> shifter 1 -> 50/50 split -> shifters 2 / 3 (or blocked) ->
/// combiner -> fiber. Returns the combiner port sent to detection.
inline OpticalField optics_chain(const GeneratorTriple& g, const ScenarioConfig& cfg, Arms arms, double source_amp) {
    const OpticalField source{{0.0, source_amp, 0.0}};
    const auto shifted = aom_shift(source, {-g[0].freq_hz, cfg.aom_efficiency, g[0].phase_rad});
    const auto split = beamsplitter_mix(shifted, OpticalField{}, {0.5, 1.0});
    const bool up_open = arms == Arms::up || arms == Arms::both;
    const bool down_open = arms == Arms::down || arms == Arms::both;
    const auto up = up_open ? aom_shift(split.first, {g[1].freq_hz, cfg.aom_efficiency, g[1].phase_rad}) : OpticalField{};
    const auto down =
        down_open ? aom_shift(split.second, {g[2].freq_hz, cfg.aom_efficiency, g[2].phase_rad}) : OpticalField{};
    const auto combined = beamsplitter_mix(up, down, {cfg.combiner_reflectance, cfg.visibility});
    return attenuate(combined.first, cfg.fiber_transmission);
}

inline OpticalField select_arms(const OpticalField& f, Arms arms) {
    OpticalField out;
    for (const auto& c : f.components()) {
        const bool keep = arms == Arms::both || (arms == Arms::up && c.offset_hz > 0.0) ||
                          (arms == Arms::down && c.offset_hz < 0.0);
        if (keep) {
            out.insert(c);
        }
    }
    return out;
}

inline OpticalField scale_field(const OpticalField& f, double s) {
    OpticalField out;
    for (auto c : f.components()) {
        c.offset_hz *= s;
        c.amplitude *= std::sqrt(s);
        out.insert(c);
    }
    return out;
}

} // namespace detail

inline PreparedScenario prepare_scenario(const ScenarioConfig& cfg) {
    PreparedScenario p;
    p.config = cfg;
    p.warnings = detail::stage("config", [&] {
        cfg.validate();
        return cfg.analyzer.validate();
    });
    const double s = cfg.frequency_scale;
    p.scale = s;
    const double fs = cfg.sample_rate_hz * s;
    const double lo_amp = cfg.lo_amplitude * std::sqrt(s);

    AnalyzerConfig an = cfg.analyzer;
    an.center_hz *= s;
    an.span_hz *= s;
    an.rbw_hz *= s;
    an.vbw_hz *= s;
    an.sweep_time_s /= s;
    an.reference_power = lo_amp * lo_amp * gaussian_enbw_hz(an.rbw_hz);
    p.analyzer = an;

    // record length: the sweep plus RBW filter pre-roll on both sides
    const auto record = detail::stage("spectrum_analyzer", [&] {
        const GaussianRbwFilter filt(an.rbw_hz, fs);
        const auto needed = static_cast<std::size_t>(std::llround(an.sweep_time_s * fs));
        return needed + 2 * filt.half_length() + 2;
    });
    const double duration = static_cast<double>(record) / fs;
    const bool locked_method = cfg.lock != LockMethod::none;
    const double t0 = locked_method ? cfg.warmup_s / s : 0.0;

    p.calibration = detail::stage("calibration", [&] {
        Calibration c;
        c.lo_amplitude = cfg.lo_amplitude;
        c.target_snr_db = cfg.target_snr_db;
        if (cfg.sideband_amplitude > 0.0) {
            c.sideband_amplitude = cfg.sideband_amplitude;
        } else {
            c.calibrated = true;
            c.sideband_amplitude = calibrate_signal_amplitude(cfg.target_snr_db, cfg.analyzer, cfg.lo_amplitude);
        }
        return c;
    });
    const double side_amp = p.calibration.sideband_amplitude * std::sqrt(s);

    PhaseTrack theta_track;
    if (!cfg.explicit_signal) {
        detail::stage("phase_lock", [&] {
            GeneratorTriple g{};
            for (std::size_t i = 0; i < 3; ++i) {
                g[i].freq_hz = cfg.generator_hz[i] * s;
                if (locked_method) {
                    g[i].freq_hz = detail::snap_to_clock(g[i].freq_hz);
                }
                g[i].phase_rad = cfg.generator_phase_rad[i];
            }
            auto& lock = p.lock;
            lock.method = cfg.lock;
            const double total = t0 + duration;
            if (cfg.lock == LockMethod::none) {
                p.generators = g;
                lock.diagnostics = "free-running generators";
            } else if (cfg.lock == LockMethod::method1) {
                const double noise = cfg.noise_enabled ? cfg.generator_phase_noise * std::sqrt(s) : 0.0;
                for (auto& gi : g) {
                    gi.phase_noise_std_rad_per_sqrt_hz = noise;
                }
                const PllConfig pll = cfg.pll.scaled(s);
                auto r = pll_lock_method1(g[0], g[1], g[2], pll, total, cfg.seed);
                p.generators = r.generators;
                for (auto& gi : p.generators) {
                    gi.freq_hz = detail::snap_to_clock(gi.freq_hz);
                }
                theta_track = std::move(r.theta_jitter);
                lock.locked = r.upper.locked && r.lower.locked;
                lock.residual_upper_rad = r.upper.residual_phase_std_rad;
                lock.residual_lower_rad = r.lower.residual_phase_std_rad;
                lock.settle_time_s = std::max(r.upper.settle_time_s, r.lower.settle_time_s) * s;
                lock.diagnostics = "upper: " + r.upper.diagnostics + "; lower: " + r.lower.diagnostics;
                lock.upper_error = std::move(r.upper.phase_error_series);
                lock.lower_error = std::move(r.lower.phase_error_series);
                if (!lock.locked) {
                    p.warnings.push_back("phase lock not acquired: " + lock.diagnostics);
                } else if (std::max(r.upper.settle_time_s, r.lower.settle_time_s) > t0) {
                    p.warnings.push_back("phase lock settled after the measurement started");
                }
            } else {
                const double jitter = cfg.noise_enabled ? cfg.clock_jitter_rad : 0.0;
                p.generators = lock_method2(g[0], g[1], g[2], jitter);
                const double rate = cfg.pll.update_rate_hz * s;
                theta_track = method2_theta_track(p.generators, rate, 0.0, total, cfg.seed);
                const auto res = method2_beat_phase_std(p.generators, rate, total, cfg.seed);
                lock.locked = true;
                lock.residual_upper_rad = res[0];
                lock.residual_lower_rad = res[1];
                lock.diagnostics = "common clock";
            }
            lock.residual_phase_std_rad = std::max(lock.residual_upper_rad, lock.residual_lower_rad);
            lock.sideband_mismatch_hz = sideband_mismatch_hz(p.generators) / s;
            return 0;
        });
    }

    detail::stage("optics", [&] {
        if (cfg.explicit_signal) {
            p.full_field = detail::scale_field(*cfg.explicit_signal, s);
            p.theta_offset_rad = 0.0;
            return 0;
        }
        const auto unit = detail::optics_chain(p.generators, cfg, Arms::both, 1.0);
        const double f_up = p.generators[1].freq_hz - p.generators[0].freq_hz;
        const double f_down = p.generators[2].freq_hz - p.generators[0].freq_hz;
        const auto* up = unit.find(f_up);
        const auto* down = unit.find(f_down);
        if (up == nullptr || down == nullptr) {
            throw ValidationError("optics chain does not deliver both sidebands");
        }
        // source amplitude that puts side_amp into the up sideband
        p.source_amplitude = side_amp / up->amplitude;
        p.full_field = detail::optics_chain(p.generators, cfg, Arms::both, p.source_amplitude);
        // the beat of the two sidebands scales with cos(theta_LO - (phi_up + phi_down) / 2)
        p.theta_offset_rad = 0.5 * (up->phase_rad + down->phase_rad);
        return 0;
    });
    for (const auto& c : p.full_field.components()) {
        p.tones_hz.push_back(std::abs(c.offset_hz));
    }

    detail::stage("detection", [&] {
        for (const auto& curve : cfg.curves) {
            DetectionConfig d;
            const double theta = curve.theta_rad + p.theta_offset_rad;
            const double drift = curve.theta_mode == ThetaMode::scanned ? curve.scan_rate_rad_per_s * s : 0.0;
            // the scan starts at theta_rad when the measurement starts
            d.lo = {lo_amp, theta - drift * t0, drift};
            if (cfg.explicit_signal) {
                d.signal = detail::select_arms(p.full_field, curve.arms);
            } else {
                d.signal = detail::optics_chain(p.generators, cfg, curve.arms, p.source_amplitude);
            }
            d.visibility = cfg.visibility;
            d.duration_s = duration;
            d.sample_rate_hz = fs;
            d.t0_s = t0;
            d.noise_enabled = cfg.noise_enabled;
            d.seed = cfg.seed;
            d.noise_stream = stream_id("shot/" + curve.label);
            d.theta_jitter = theta_track;
            d.validate();
            p.curves.push_back({curve, std::move(d)});
        }
        return 0;
    });
    return p;
}

struct CurveMetrics {
    std::string label;
    bool swept = false;
    bool modulated = false;
    double mean_power_db = 0.0;
    /// Displayed signal-plus-noise level: fitted peak (swept), envelope
    /// maximum (modulated zero span) or trace mean.
    double peak_power_db = 0.0;
    /// Bench units; swept traces only.
    std::optional<double> peak_freq_hz;
    double floor_db = 0.0;
    double snr_db = 0.0;
    /// Peak with the floor removed, and its ratio to the floor.
    double signal_power_db = 0.0;
    double signal_snr_db = 0.0;
    /// Bench units.
    std::optional<double> envelope_period_s;
    std::optional<double> envelope_max_db;
    std::optional<double> envelope_min_db;
    /// Largest envelope modulation at the candidate sideband mismatches,
    /// relative to the floor power (locked homodyne curves only).
    std::optional<double> residual_beat_ratio;
};

struct ScenarioMetrics {
    std::string primary_curve;
    std::string floor_source;
    double peak_power_db = 0.0;
    double floor_db = 0.0;
    double snr_db = 0.0;
    double signal_power_db = 0.0;
    double signal_snr_db = 0.0;
    std::optional<double> envelope_period_s;
    std::optional<double> envelope_max_db;
    std::optional<double> envelope_min_db;
    /// Peak above the floor of the two-sideband curve at theta = pi/2.
    std::optional<double> theta_extinction_db;
};

struct CurveResult {
    CurveConfig curve;
    /// Bench-unit axes.
    Trace trace;
    CurveMetrics metrics;
};

struct ScenarioResult {
    PreparedScenario prepared;
    std::vector<CurveResult> curves;
    ScenarioMetrics metrics;

    const CurveResult* find(std::string_view label) const noexcept {
        for (const auto& c : curves) {
            if (c.curve.label == label) {
                return &c;
            }
        }
        return nullptr;
    }
};

/// Envelope modulation frequencies checked for a leftover sideband beat (bench Hz).
inline constexpr std::array<double, 4> kBeatCandidatesHz{2.5, 5.0, 10.0, 20.0};

namespace detail {

inline double to_db(double p, double ref) { return power_to_db(p, ref); }

inline bool is_extinction_curve(const CurveConfig& c) {
    return c.arms == Arms::both && c.theta_mode == ThetaMode::fixed && std::abs(std::cos(c.theta_rad)) < 1e-6;
}

inline bool curve_is_modulated(const PreparedScenario& p, const PreparedCurve& c) {
    if (p.analyzer.span_hz > 0.0) {
        return false;
    }
    if (c.curve.theta_mode == ThetaMode::scanned && c.curve.arms == Arms::both) {
        return true;
    }
    double up = 0.0;
    double down = 0.0;
    for (const auto& comp : c.detection.signal.components()) {
        (comp.offset_hz > 0.0 ? up : down) = std::abs(comp.offset_hz);
    }
    return up > 0.0 && down > 0.0 && up != down;
}

/// Trace with bench-unit axes and settings. Displayed dB values are unchanged
/// since the reference scales with the powers (a_LO^2 and ENBW both by s).
inline Trace bench_trace(Trace tr, double s) {
    auto& c = tr.config;
    const double x_factor = c.is_zero_span() ? s : 1.0 / s;
    for (auto& x : tr.x) {
        x *= x_factor;
    }
    c.center_hz /= s;
    c.span_hz /= s;
    c.rbw_hz /= s;
    c.vbw_hz /= s;
    c.sweep_time_s *= s;
    c.reference_power /= s * s;
    return tr;
}

inline double floor_power(const Trace& tr, const PreparedScenario& p) {
    if (tr.config.is_zero_span()) {
        auto lin = tr.linear_power();
        return metrics::mean(lin);
    }
    return metrics::off_tone_floor(tr, p.tones_hz, 3.0 * tr.config.rbw_hz);
}

} // namespace detail

inline CurveMetrics curve_metrics(const PreparedScenario& p, const PreparedCurve& pc, const Trace& tr,
                                  double floor_p) {
    const double ref = p.analyzer.reference_power;
    const double s = p.scale;
    CurveMetrics m;
    m.label = pc.curve.label;
    m.swept = !tr.config.is_zero_span();
    m.modulated = detail::curve_is_modulated(p, pc);
    const auto lin = tr.linear_power();
    const double mean_p = metrics::mean(lin);
    m.mean_power_db = detail::to_db(mean_p, ref);

    double peak_p = mean_p;
    if (m.swept) {
        double nominal = tr.config.center_hz;
        double best = std::numeric_limits<double>::infinity();
        for (const double f : p.tones_hz) {
            if (std::abs(f - tr.config.center_hz) < best) {
                best = std::abs(f - tr.config.center_hz);
                nominal = f;
            }
        }
        const auto fit = metrics::fit_swept_peak(tr, nominal, floor_p);
        peak_p = floor_p + fit.signal_power;
        m.peak_freq_hz = fit.freq_hz / s;
    } else if (m.modulated) {
        const double span_t = tr.x.back() - tr.x.front();
        const auto env = metrics::envelope(tr.x, lin, 0.5 / span_t, static_cast<double>(tr.size()) / (4.0 * span_t));
        m.envelope_period_s = env.period_s * s;
        m.envelope_max_db = detail::to_db(env.max_power, ref);
        m.envelope_min_db = detail::to_db(env.min_power, ref);
        peak_p = env.max_power;
    } else if (pc.curve.arms == Arms::both && p.lock.method != LockMethod::none) {
        double worst = 0.0;
        for (const double f : kBeatCandidatesHz) {
            worst = std::max(worst, metrics::fit_sine_at(tr.x, lin, f * s).amplitude());
        }
        m.residual_beat_ratio = worst / floor_p;
    }
    m.peak_power_db = detail::to_db(std::max(peak_p, 0.0), ref);
    m.floor_db = detail::to_db(floor_p, ref);
    m.snr_db = m.peak_power_db - m.floor_db;
    m.signal_power_db = detail::to_db(std::max(peak_p - floor_p, 0.0), ref);
    m.signal_snr_db = m.signal_power_db - m.floor_db;
    return m;
}

inline ScenarioResult run_prepared(PreparedScenario prepared) {
    ScenarioResult res;
    res.prepared = std::move(prepared);
    const auto& p = res.prepared;
    for (const auto& pc : p.curves) {
        auto tr = detail::stage("spectrum_analyzer", [&] { return measure(PhotocurrentSource(pc.detection), p.analyzer); });
        res.curves.push_back({pc.curve, std::move(tr), {}});
    }
    detail::stage("metrics", [&] {
        const CurveResult* shot = nullptr;
        for (const auto& c : res.curves) {
            if (c.curve.is_shot()) {
                shot = &c;
                break;
            }
        }
        for (std::size_t i = 0; i < res.curves.size(); ++i) {
            auto& c = res.curves[i];
            double floor_p = p.analyzer.reference_power;
            if (shot != nullptr) {
                floor_p = detail::floor_power(shot->trace, p);
            } else if (!c.trace.config.is_zero_span()) {
                floor_p = detail::floor_power(c.trace, p);
            }
            c.metrics = curve_metrics(p, p.curves[i], c.trace, floor_p);
        }
        auto& m = res.metrics;
        m.floor_source = shot != nullptr ? "curve '" + shot->curve.label + "'"
                                         : (p.analyzer.span_hz > 0.0 ? "off-tone bins" : "analytic shot level");
        m.primary_curve = p.config.primary_curve;
        if (m.primary_curve.empty()) {
            const auto it = std::find_if(res.curves.begin(), res.curves.end(),
                                         [](const CurveResult& c) { return !c.curve.is_shot(); });
            m.primary_curve = (it != res.curves.end() ? *it : res.curves.front()).curve.label;
        }
        const auto& pm = res.find(m.primary_curve)->metrics;
        m.peak_power_db = pm.peak_power_db;
        m.floor_db = pm.floor_db;
        m.snr_db = pm.snr_db;
        m.signal_power_db = pm.signal_power_db;
        m.signal_snr_db = pm.signal_snr_db;
        m.envelope_period_s = pm.envelope_period_s;
        m.envelope_max_db = pm.envelope_max_db;
        m.envelope_min_db = pm.envelope_min_db;
        for (const auto& c : res.curves) {
            if (detail::is_extinction_curve(c.curve)) {
                m.theta_extinction_db = c.metrics.peak_power_db - c.metrics.floor_db;
            }
        }
        for (auto& c : res.curves) {
            c.trace = detail::bench_trace(std::move(c.trace), p.scale);
        }
        return 0;
    });
    return res;
}

/// Runs every curve of a scenario. Failures raise StageError naming the stage.
inline ScenarioResult run_scenario(const ScenarioConfig& cfg) { return run_prepared(prepare_scenario(cfg)); }

} // namespace bhd
