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

// Trace read-out: floors, swept peak fits and envelope analysis of zero-span
// traces. All inputs and outputs are linear powers unless named *_db.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include "bhd/analyzer.hpp"
#include "bhd/error.hpp"

namespace bhd::metrics {

inline double mean(std::span<const double> x) {
    if (x.empty()) {
        throw ValidationError("mean of an empty range");
    }
    double s = 0.0;
    for (const double v : x) {
        s += v;
    }
    return s / static_cast<double>(x.size());
}

/// Least-squares p(t) ~ offset + a cos(2 pi f t) + b sin(2 pi f t).
struct SineFit {
    double freq_hz = 0.0;
    double offset = 0.0;
    double a = 0.0;
    double b = 0.0;
    double residual = 0.0;

    double amplitude() const noexcept { return std::hypot(a, b); }
    /// Time of the first maximum at or after t = 0 (within one period).
    double first_max_s() const noexcept {
        const double phase = std::atan2(b, a);
        double t = phase / (2.0 * std::numbers::pi * freq_hz);
        if (t < 0.0) {
            t += 1.0 / freq_hz;
        }
        return t;
    }
};

inline SineFit fit_sine_at(std::span<const double> t, std::span<const double> p, double freq_hz) {
    if (t.size() != p.size() || t.size() < 3) {
        throw ValidationError("sine fit needs at least three matching samples");
    }
    // normal equations for (offset, a, b); times are taken relative to t[0]
    // for conditioning and shifted back afterwards
    std::array<std::array<double, 4>, 3> m{};
    const double w = 2.0 * std::numbers::pi * freq_hz;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double c = std::cos(w * (t[i] - t[0]));
        const double s = std::sin(w * (t[i] - t[0]));
        const std::array<double, 3> row{1.0, c, s};
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t k = 0; k < 3; ++k) {
                m[r][k] += row[r] * row[k];
            }
            m[r][3] += row[r] * p[i];
        }
    }
    for (std::size_t col = 0; col < 3; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < 3; ++r) {
            if (std::abs(m[r][col]) > std::abs(m[piv][col])) {
                piv = r;
            }
        }
        std::swap(m[col], m[piv]);
        if (m[col][col] == 0.0) {
            throw ValidationError("sine fit is singular");
        }
        for (std::size_t r = 0; r < 3; ++r) {
            if (r != col) {
                const double f = m[r][col] / m[col][col];
                for (std::size_t k = col; k < 4; ++k) {
                    m[r][k] -= f * m[col][k];
                }
            }
        }
    }
    SineFit fit;
    fit.freq_hz = freq_hz;
    fit.offset = m[0][3] / m[0][0];
    const double a0 = m[1][3] / m[1][1];
    const double b0 = m[2][3] / m[2][2];
    // rotate the phase reference from t[0] back to t = 0
    const double c0 = std::cos(w * t[0]);
    const double s0 = std::sin(w * t[0]);
    fit.a = a0 * c0 - b0 * s0;
    fit.b = a0 * s0 + b0 * c0;
    double res = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double x = w * (t[i] - t[0]);
        const double d = p[i] - (fit.offset + a0 * std::cos(x) + b0 * std::sin(x));
        res += d * d;
    }
    fit.residual = res;
    return fit;
}

/// Best-fitting sinusoid with frequency in [f_lo, f_hi]: grid search at a
/// resolution of 1/(20 T), then golden-section refinement.
inline SineFit fit_sine(std::span<const double> t, std::span<const double> p, double f_lo, double f_hi) {
    if (!(f_hi > f_lo) || !(f_lo > 0.0)) {
        throw ValidationError("sine fit needs 0 < f_lo < f_hi");
    }
    const double span = t.back() - t.front();
    const double step = 1.0 / (20.0 * span);
    SineFit best = fit_sine_at(t, p, f_lo);
    for (double f = f_lo + step; f <= f_hi; f += step) {
        const auto cand = fit_sine_at(t, p, f);
        if (cand.residual < best.residual) {
            best = cand;
        }
    }
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::max(f_lo, best.freq_hz - step);
    double hi = std::min(f_hi, best.freq_hz + step);
    double x1 = hi - g * (hi - lo);
    double x2 = lo + g * (hi - lo);
    auto r1 = fit_sine_at(t, p, x1);
    auto r2 = fit_sine_at(t, p, x2);
    for (int it = 0; it < 60; ++it) {
        if (r1.residual < r2.residual) {
            hi = x2;
            x2 = x1;
            r2 = r1;
            x1 = hi - g * (hi - lo);
            r1 = fit_sine_at(t, p, x1);
        } else {
            lo = x1;
            x1 = x2;
            r1 = r2;
            x2 = lo + g * (hi - lo);
            r2 = fit_sine_at(t, p, x2);
        }
    }
    const auto refined = r1.residual < r2.residual ? r1 : r2;
    return refined.residual < best.residual ? refined : best;
}

struct Envelope {
    double period_s = 0.0;
    /// Mean linear power near the fitted maxima and minima.
    double max_power = 0.0;
    double min_power = 0.0;
    std::size_t maxima = 0;
    std::size_t minima = 0;
    SineFit fit;
};

/// Half-width of the averaging window around each fitted extremum, as a
/// fraction of the period.
inline constexpr double kExtremumWindow = 0.0156;

/// Envelope period and extremum levels of a zero-span power trace.
inline Envelope envelope(std::span<const double> t, std::span<const double> p, double f_lo, double f_hi) {
    Envelope env;
    env.fit = fit_sine(t, p, f_lo, f_hi);
    env.period_s = 1.0 / env.fit.freq_hz;
    const double half_w = kExtremumWindow * env.period_s;
    auto window_mean = [&](double centre, double& acc, std::size_t& count) {
        if (centre - half_w < t.front() || centre + half_w > t.back()) {
            return;
        }
        double s = 0.0;
        std::size_t n = 0;
        for (std::size_t i = 0; i < t.size(); ++i) {
            if (std::abs(t[i] - centre) <= half_w) {
                s += p[i];
                ++n;
            }
        }
        if (n > 0) {
            acc += s / static_cast<double>(n);
            ++count;
        }
    };
    const double t_max0 = env.fit.first_max_s();
    const auto k0 = static_cast<long long>(std::floor((t.front() - t_max0) / env.period_s)) - 1;
    double acc_max = 0.0;
    double acc_min = 0.0;
    for (long long k = k0;; ++k) {
        const double tm = t_max0 + static_cast<double>(k) * env.period_s;
        if (tm - env.period_s > t.back()) {
            break;
        }
        window_mean(tm, acc_max, env.maxima);
        window_mean(tm + 0.5 * env.period_s, acc_min, env.minima);
    }
    if (env.maxima == 0 || env.minima == 0) {
        throw ValidationError("trace is too short to hold a full envelope period");
    }
    env.max_power = acc_max / static_cast<double>(env.maxima);
    env.min_power = acc_min / static_cast<double>(env.minima);
    return env;
}

/// Mean linear power of swept bins farther than `exclusion_hz` from every tone.
inline double off_tone_floor(const Trace& tr, std::span<const double> tones_hz, double exclusion_hz) {
    const auto p = tr.linear_power();
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const bool clear = std::none_of(tones_hz.begin(), tones_hz.end(),
                                        [&](double f) { return std::abs(tr.x[i] - f) <= exclusion_hz; });
        if (clear) {
            s += p[i];
            ++n;
        }
    }
    if (n == 0) {
        throw ValidationError("no swept bins clear of the signal tones to estimate the floor");
    }
    return s / static_cast<double>(n);
}

struct PeakFit {
    double freq_hz = 0.0;
    /// Fitted tone power above the floor (may be slightly negative in noise).
    double signal_power = 0.0;
};

/// Fits the analyzer's Gaussian RBW power response, floor + S exp(-d^2/sf^2),
/// to the swept bins within one RBW of the tone. The floor is held fixed; the
/// tone frequency is searched within +-RBW/2 of the nominal value.
inline PeakFit fit_swept_peak(const Trace& tr, double nominal_hz, double floor_power) {
    const double rbw = tr.config.rbw_hz;
    const double sigma_f = (rbw / 2.0) / std::sqrt(std::numbers::ln2);
    const auto p = tr.linear_power();
    auto solve = [&](double f0, double& resid) {
        double num = 0.0;
        double den = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double d = tr.x[i] - f0;
            if (std::abs(d) <= rbw) {
                const double g = std::exp(-d * d / (sigma_f * sigma_f));
                num += g * (p[i] - floor_power);
                den += g * g;
            }
        }
        if (den == 0.0) {
            throw ValidationError("no swept bins near the tone");
        }
        const double s = num / den;
        resid = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double d = tr.x[i] - f0;
            if (std::abs(d) <= rbw) {
                const double e = p[i] - floor_power - s * std::exp(-d * d / (sigma_f * sigma_f));
                resid += e * e;
            }
        }
        return s;
    };
    PeakFit best;
    double best_resid = std::numeric_limits<double>::infinity();
    constexpr int kSteps = 100;
    for (int k = 0; k <= kSteps; ++k) {
        const double f0 = nominal_hz - rbw / 2.0 + rbw * static_cast<double>(k) / kSteps;
        double resid = 0.0;
        const double s = solve(f0, resid);
        if (resid < best_resid) {
            best_resid = resid;
            best = {f0, s};
        }
    }
    return best;
}

} // namespace bhd::metrics
