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

// Locking the up and down sidebands.
//
// Generator 1 drives the -1 order AOM; generators 2 and 3 drive the +1 order
// AOMs of the up and down arms. The electrical beat notes
//   psi_up   = phi2 - phi1   at f2 - f1
//   psi_down = phi1 - phi3   at f1 - f3
// are what the mixers in method 1 produce, and the homodyne phase is
//   theta = theta_LO + (psi_down - psi_up) / 2.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "bhd/error.hpp"
#include "bhd/field.hpp"
#include "bhd/rng.hpp"
#include "bhd/series.hpp"

namespace bhd {

/// Frequency resolution of clock-referenced synthesizers. A power of two, so
/// integer multiples are exact doubles and so are their differences.
inline constexpr double kClockStepHz = 1.0 / 1024.0;

inline double wrap_phase(double p) noexcept {
    return p - 2.0 * std::numbers::pi * std::round(p / (2.0 * std::numbers::pi));
}

struct GeneratorState {
    double freq_hz = 0.0;
    double phase_rad = 0.0;
    /// Free-running Wiener phase diffusion: increment std over dt is sigma*sqrt(dt).
    double phase_noise_std_rad_per_sqrt_hz = 0.0;
    /// White phase jitter against a shared clock (method 2).
    double phase_jitter_rad = 0.0;
    bool controllable = true;

    void validate() const {
        if (!(freq_hz > 0.0) || !std::isfinite(freq_hz)) {
            throw ValidationError("generator frequency must be > 0");
        }
        if (!(phase_noise_std_rad_per_sqrt_hz >= 0.0) || !(phase_jitter_rad >= 0.0)) {
            throw ValidationError("generator noise strengths must be >= 0");
        }
    }
};

using GeneratorTriple = std::array<GeneratorState, 3>;

struct PllConfig {
    double reference_hz = 5e6;
    /// Phase of the shared reference; both beat notes are locked onto it.
    double reference_phase_rad = 0.0;
    double lpf_cutoff_hz = 20e3;
    // PID gains act on generator frequency (Hz) from phase error (rad).
    // Defaults place the loop at ~1 kHz natural frequency, damping 0.707.
    double kp = 1414.2;
    double ki = 6.2832e6;
    double kd = 0.0;
    double update_rate_hz = 100e3;
    double settle_threshold_rad = 0.75;

    bool open_loop() const noexcept { return kp == 0.0 && ki == 0.0 && kd == 0.0; }
    bool operator==(const PllConfig&) const = default;

    void validate() const {
        if (!std::isfinite(kp) || !std::isfinite(ki) || !std::isfinite(kd)) {
            throw ValidationError("PID gains must be finite");
        }
        if (!(reference_hz > 0.0) || !(lpf_cutoff_hz > 0.0) || !(update_rate_hz > 0.0)) {
            throw ValidationError("PLL reference, LPF cutoff and update rate must be > 0");
        }
        if (!(update_rate_hz > 2.0 * lpf_cutoff_hz)) {
            throw ValidationError("PLL update rate must exceed twice the LPF cutoff");
        }
        if (!(settle_threshold_rad > 0.0)) {
            throw ValidationError("PLL settle threshold must be > 0");
        }
    }

    /// Same loop on a time axis compressed by 1/s (all rates multiplied by s).
    PllConfig scaled(double s) const {
        PllConfig c = *this;
        c.reference_hz *= s;
        c.lpf_cutoff_hz *= s;
        c.update_rate_hz *= s;
        c.kp *= s;
        c.ki *= s * s;
        return c;
    }
};

struct MixProduct {
    double freq_hz = 0.0;
    double phase_rad = 0.0;
    /// Inputs at equal frequency: the product is a DC level, not a beat.
    bool degenerate = false;
};

/// Difference-frequency product of an ideal mixer followed by a low-pass.
inline MixProduct mix_down(double f1_hz, double f2_hz, double phi1, double phi2) {
    if (f1_hz == f2_hz) {
        return {0.0, wrap_phase(phi1 - phi2), true};
    }
    const double sign = f1_hz > f2_hz ? 1.0 : -1.0;
    return {std::abs(f1_hz - f2_hz), sign * (phi1 - phi2), false};
}

struct LockResult {
    bool locked = false;
    double settle_time_s = 0.0;
    double residual_phase_std_rad = 0.0;
    /// Wrapped phase error against the reference, at the loop update rate.
    TimeSeries phase_error_series;
    std::string diagnostics;
};

struct Method1Result {
    LockResult upper;
    LockResult lower;
    /// Nominal locked generator settings (f2 - f1 = f1 - f3 = reference).
    GeneratorTriple generators;
    /// Homodyne phase perturbation (e_down - e_up) / 2 over the run, starting at t = 0.
    PhaseTrack theta_jitter;
};

namespace detail {

using Mat4 = std::array<std::array<double, 4>, 4>;

/// One linearized loop update, state (e, y, y_prev, u).
inline std::array<double, 4> pll_linear_step(const PllConfig& c, const std::array<double, 4>& x) {
    const double dt = 1.0 / c.update_rate_hz;
    const double a = 1.0 - std::exp(-2.0 * std::numbers::pi * c.lpf_cutoff_hz * dt);
    const double e = x[0] + 2.0 * std::numbers::pi * dt * x[3];
    const double y = (1.0 - a) * x[1] + a * e;
    const double u = x[3] + c.kp * (x[1] - y) - c.ki * dt * y - c.kd * (y - 2.0 * x[1] + x[2]) / dt;
    return {e, y, x[1], u};
}

inline Mat4 pll_linear_map(const PllConfig& c) {
    Mat4 m{};
    for (std::size_t j = 0; j < 4; ++j) {
        std::array<double, 4> basis{};
        basis[j] = 1.0;
        const auto col = pll_linear_step(c, basis);
        for (std::size_t i = 0; i < 4; ++i) {
            m[i][j] = col[i];
        }
    }
    return m;
}

/// Characteristic polynomial by Faddeev-LeVerrier, leading coefficient first.
inline std::array<double, 5> characteristic_polynomial(const Mat4& a) {
    std::array<double, 5> c{};  // c[k] multiplies lambda^k
    c[4] = 1.0;
    Mat4 m{};
    for (int k = 1; k <= 4; ++k) {
        Mat4 am{};
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t j = 0; j < 4; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < 4; ++l) {
                    s += a[i][l] * m[l][j];
                }
                am[i][j] = s + (i == j ? c[static_cast<std::size_t>(4 - k + 1)] : 0.0);
            }
        }
        m = am;
        double tr = 0.0;
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t l = 0; l < 4; ++l) {
                tr += a[i][l] * m[l][i];
            }
        }
        c[static_cast<std::size_t>(4 - k)] = -tr / k;
    }
    return {c[4], c[3], c[2], c[1], c[0]};
}

/// Schur-Cohn test: all roots strictly inside the unit circle.
inline bool schur_stable(std::vector<double> p) {
    while (p.size() > 1) {
        if (p.front() == 0.0) {
            return false;
        }
        const double k = p.back() / p.front();
        if (!(std::abs(k) < 1.0)) {
            return false;
        }
        const std::size_t n = p.size() - 1;
        std::vector<double> q(n);
        for (std::size_t i = 0; i < n; ++i) {
            q[i] = p[i] - k * p[n - i];
        }
        p = std::move(q);
    }
    return true;
}

struct LoopSim {
    double e = 0.0;
    double y = 0.0;
    double y1 = 0.0;
    double y2 = 0.0;
    double u = 0.0;
    double err_prev = 0.0;

    // e is the phase error against the reference; the setpoint is zero and
    // the derivative acts on the measured (filtered) detector output
    void start(double e0) {
        e = e0;
        y = y1 = y2 = std::sin(e0);
        u = 0.0;
        err_prev = -y;
    }

    void update(const PllConfig& c, double a, double dt) {
        y2 = y1;
        y1 = y;
        y += a * (std::sin(e) - y);
        const double err = -y;
        u += c.kp * (err - err_prev) + c.ki * dt * err - c.kd * (y - 2.0 * y1 + y2) / dt;
        err_prev = err;
    }
};

inline LockResult summarize_loop(const PllConfig& cfg, std::vector<double> errors) {
    LockResult r;
    const double dt = 1.0 / cfg.update_rate_hz;
    const std::size_t n = errors.size();
    std::size_t settle = 0;
    for (std::size_t i = n; i-- > 0;) {
        if (std::abs(errors[i]) > cfg.settle_threshold_rad) {
            settle = i + 1;
            break;
        }
    }
    r.settle_time_s = static_cast<double>(settle) * dt;
    // the exponential tail of the acquisition transient is excluded by using
    // the latter half of the post-settle interval
    const std::size_t from = settle + (n - settle) / 2;
    double mean = 0.0;
    for (std::size_t i = from; i < n; ++i) {
        mean += errors[i];
    }
    const std::size_t m = n - from;
    if (m > 0) {
        mean /= static_cast<double>(m);
        double var = 0.0;
        for (std::size_t i = from; i < n; ++i) {
            var += (errors[i] - mean) * (errors[i] - mean);
        }
        r.residual_phase_std_rad = std::sqrt(var / static_cast<double>(m));
    }
    std::ostringstream diag;
    if (cfg.open_loop()) {
        diag << "open loop: all PID gains are zero";
    } else if (n - settle < std::max<std::size_t>(1, n / 10)) {
        diag << "no lock: |phase error| exceeded " << cfg.settle_threshold_rad << " rad until t = "
             << r.settle_time_s << " s of " << static_cast<double>(n) * dt << " s";
    } else {
        r.locked = true;
        diag << "locked after " << r.settle_time_s << " s, residual " << r.residual_phase_std_rad << " rad";
    }
    r.diagnostics = diag.str();
    r.phase_error_series = TimeSeries{cfg.update_rate_hz, 0.0, std::move(errors)};
    return r;
}

} // namespace detail

/// Whether the linearized discrete-time loop (phase detector, one-pole LPF,
/// velocity-form PID, generator as phase integrator) has all poles strictly
/// inside the unit circle.
inline bool pll_is_stable(const PllConfig& cfg) {
    cfg.validate();
    const auto p = detail::characteristic_polynomial(detail::pll_linear_map(cfg));
    return detail::schur_stable({p.begin(), p.end()});
}

/// Method 1: both beat notes are mixed down and phase-locked to a shared
/// reference by two PLLs whose PID outputs retune generators 2 and 3.
/// Never throws on failure to lock; see LockResult::locked and diagnostics.
inline Method1Result pll_lock_method1(const GeneratorState& gen1, const GeneratorState& gen2,
                                      const GeneratorState& gen3, const PllConfig& cfg, double duration_s,
                                      std::uint64_t seed) {
    gen1.validate();
    gen2.validate();
    gen3.validate();
    cfg.validate();
    if (!gen2.controllable || !gen3.controllable) {
        throw ValidationError("method 1 needs generators 2 and 3 to accept feedback");
    }
    if (!(duration_s > 0.0)) {
        throw ValidationError("lock duration must be > 0");
    }
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double dt = 1.0 / cfg.update_rate_hz;
    const auto steps = static_cast<std::size_t>(std::ceil(duration_s * cfg.update_rate_hz));
    const double a = 1.0 - std::exp(-two_pi * cfg.lpf_cutoff_hz * dt);

    const GaussianStream n1(seed, stream_id("pll/gen1"));
    const GaussianStream n2(seed, stream_id("pll/gen2"));
    const GaussianStream n3(seed, stream_id("pll/gen3"));
    const double s1 = gen1.phase_noise_std_rad_per_sqrt_hz * std::sqrt(dt);
    const double s2 = gen2.phase_noise_std_rad_per_sqrt_hz * std::sqrt(dt);
    const double s3 = gen3.phase_noise_std_rad_per_sqrt_hz * std::sqrt(dt);

    const double df_up = (gen2.freq_hz - gen1.freq_hz) - cfg.reference_hz;
    const double df_down = (gen1.freq_hz - gen3.freq_hz) - cfg.reference_hz;

    detail::LoopSim up;
    detail::LoopSim down;
    up.start(wrap_phase(gen2.phase_rad - gen1.phase_rad - cfg.reference_phase_rad));
    down.start(wrap_phase(gen1.phase_rad - gen3.phase_rad - cfg.reference_phase_rad));

    std::vector<double> err_up(steps);
    std::vector<double> err_down(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        const double w1 = s1 > 0.0 ? s1 * n1(n) : 0.0;
        const double w2 = s2 > 0.0 ? s2 * n2(n) : 0.0;
        const double w3 = s3 > 0.0 ? s3 * n3(n) : 0.0;
        // gen2 is retuned by +u_up, gen3 by -u_down
        up.e = wrap_phase(up.e + two_pi * dt * (df_up + up.u) + (w2 - w1));
        down.e = wrap_phase(down.e + two_pi * dt * (df_down + down.u) + (w1 - w3));
        up.update(cfg, a, dt);
        down.update(cfg, a, dt);
        err_up[n] = up.e;
        err_down[n] = down.e;
    }

    Method1Result res;
    res.theta_jitter.rate_hz = cfg.update_rate_hz;
    res.theta_jitter.t0_s = 0.0;
    res.theta_jitter.values_rad.resize(steps);
    for (std::size_t n = 0; n < steps; ++n) {
        res.theta_jitter.values_rad[n] = 0.5 * (err_down[n] - err_up[n]);
    }
    res.upper = detail::summarize_loop(cfg, std::move(err_up));
    res.lower = detail::summarize_loop(cfg, std::move(err_down));

    res.generators = {gen1, gen2, gen3};
    res.generators[1].freq_hz = gen1.freq_hz + cfg.reference_hz;
    res.generators[2].freq_hz = gen1.freq_hz - cfg.reference_hz;
    res.generators[1].phase_rad = normalize_phase(gen1.phase_rad + cfg.reference_phase_rad);
    res.generators[2].phase_rad = normalize_phase(gen1.phase_rad - cfg.reference_phase_rad);
    return res;
}

/// Method 2: all three generators run from one clock. Frequencies are placed
/// on the clock grid with gen2 and gen3 symmetric about gen1, so the two
/// sideband frequencies are identical. Relative phases are held constant up to
/// a white jitter of residual_jitter_rad on generators 2 and 3.
inline GeneratorTriple lock_method2(const GeneratorState& gen1, const GeneratorState& gen2,
                                    const GeneratorState& gen3, double residual_jitter_rad = 0.0,
                                    double clock_step_hz = kClockStepHz) {
    gen1.validate();
    gen2.validate();
    gen3.validate();
    if (!(residual_jitter_rad >= 0.0)) {
        throw ValidationError("residual jitter must be >= 0");
    }
    if (!(clock_step_hz > 0.0)) {
        throw ValidationError("clock step must be > 0");
    }
    const long long n1 = std::llround(gen1.freq_hz / clock_step_hz);
    const long long k = std::llround((gen2.freq_hz - gen3.freq_hz) / 2.0 / clock_step_hz);
    if (k <= 0 || k >= n1) {
        throw ValidationError("method 2 needs gen3 < gen1 < gen2 in frequency");
    }
    GeneratorTriple out{gen1, gen2, gen3};
    out[0].freq_hz = static_cast<double>(n1) * clock_step_hz;
    out[1].freq_hz = static_cast<double>(n1 + k) * clock_step_hz;
    out[2].freq_hz = static_cast<double>(n1 - k) * clock_step_hz;
    for (auto& g : out) {
        g.phase_rad = normalize_phase(g.phase_rad);
        g.phase_noise_std_rad_per_sqrt_hz = 0.0;
        g.phase_jitter_rad = residual_jitter_rad;
    }
    out[0].phase_jitter_rad = 0.0;  // master
    return out;
}

/// Sideband frequency mismatch (f2 - f1) - (f1 - f3).
inline double sideband_mismatch_hz(const GeneratorTriple& g) noexcept {
    return (g[1].freq_hz - g[0].freq_hz) - (g[0].freq_hz - g[2].freq_hz);
}

/// Homodyne phase from white generator jitter (method 2), sampled at rate_hz
/// from t0_s over duration_s. Empty when there is no jitter.
inline PhaseTrack method2_theta_track(const GeneratorTriple& g, double rate_hz, double t0_s, double duration_s,
                                      std::uint64_t seed) {
    PhaseTrack track;
    track.rate_hz = rate_hz;
    track.t0_s = t0_s;
    if (g[0].phase_jitter_rad == 0.0 && g[1].phase_jitter_rad == 0.0 && g[2].phase_jitter_rad == 0.0) {
        return track;
    }
    const auto n = static_cast<std::size_t>(std::ceil(duration_s * rate_hz)) + 1;
    const GaussianStream j1(seed, stream_id("clock/gen1"));
    const GaussianStream j2(seed, stream_id("clock/gen2"));
    const GaussianStream j3(seed, stream_id("clock/gen3"));
    track.values_rad.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        // psi_up = j2 - j1, psi_down = j1 - j3
        const double p1 = g[0].phase_jitter_rad * j1(i);
        const double p2 = g[1].phase_jitter_rad * j2(i);
        const double p3 = g[2].phase_jitter_rad * j3(i);
        track.values_rad[i] = 0.5 * ((p1 - p3) - (p2 - p1));
    }
    return track;
}

/// Sample standard deviation of the two beat-note phases psi_up and psi_down
/// under method 2 jitter, over the same samples as method2_theta_track.
inline std::array<double, 2> method2_beat_phase_std(const GeneratorTriple& g, double rate_hz, double duration_s,
                                                    std::uint64_t seed) {
    const auto n = static_cast<std::size_t>(std::ceil(duration_s * rate_hz)) + 1;
    const GaussianStream j1(seed, stream_id("clock/gen1"));
    const GaussianStream j2(seed, stream_id("clock/gen2"));
    const GaussianStream j3(seed, stream_id("clock/gen3"));
    std::array<double, 2> sum{};
    std::array<double, 2> sq{};
    for (std::size_t i = 0; i < n; ++i) {
        const double p1 = g[0].phase_jitter_rad * j1(i);
        const double up = g[1].phase_jitter_rad * j2(i) - p1;
        const double down = p1 - g[2].phase_jitter_rad * j3(i);
        sum[0] += up;
        sum[1] += down;
        sq[0] += up * up;
        sq[1] += down * down;
    }
    std::array<double, 2> out{};
    for (std::size_t k = 0; k < 2; ++k) {
        const double m = sum[k] / static_cast<double>(n);
        out[k] = std::sqrt(std::max(0.0, sq[k] / static_cast<double>(n) - m * m));
    }
    return out;
}

/// Effective homodyne phase entering cos^2(theta), from locked generators and
/// the LO phase. Only defined when both sidebands share one frequency.
inline double sideband_phase_to_theta(const GeneratorTriple& g, const LocalOscillator& lo) {
    const double mismatch = sideband_mismatch_hz(g);
    const double scale = std::max({g[0].freq_hz, g[1].freq_hz, g[2].freq_hz});
    if (std::abs(mismatch) > 1e-12 * scale) {
        std::ostringstream os;
        os << "sideband frequencies differ by " << mismatch << " Hz; theta is not static";
        throw ValidationError(os.str());
    }
    const double psi_up = g[1].phase_rad - g[0].phase_rad;
    const double psi_down = g[0].phase_rad - g[2].phase_rad;
    return normalize_phase(lo.phase_rad + 0.5 * (psi_down - psi_up));
}

} // namespace bhd
