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

// Swept-tuned spectrum analyzer emulation.
//
// Chain per tuning frequency: complex down-conversion, Gaussian RBW filter,
// power detection (2|y|^2, so a tone reads its mean-square power and white
// noise of one-sided PSD N0 reads N0 * ENBW), single-pole video filter,
// display detector, dB conversion against a reference power.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bhd/error.hpp"
#include "bhd/series.hpp"

namespace bhd {

enum class Detector { sample, average };

inline const char* to_string(Detector d) noexcept { return d == Detector::sample ? "sample" : "average"; }

/// ENBW / (-3 dB width) for a Gaussian power response: sqrt(pi / (4 ln 2)) ~= 1.0645.
inline const double kGaussianEnbwFactor = std::sqrt(std::numbers::pi / (4.0 * std::numbers::ln2));

inline double gaussian_enbw_hz(double rbw_hz) noexcept { return kGaussianEnbwFactor * rbw_hz; }

struct AnalyzerConfig {
    double center_hz = 5e6;
    /// 0 selects zero-span (power versus time at center_hz).
    double span_hz = 0.0;
    double rbw_hz = 100e3;
    double vbw_hz = 300.0;
    double sweep_time_s = 0.5;
    std::size_t points = 1001;
    Detector detector = Detector::sample;
    /// Linear power displayed as 0 dB.
    double reference_power = 1.0;

    bool is_zero_span() const noexcept { return span_hz == 0.0; }
    bool operator==(const AnalyzerConfig&) const = default;

    /// Throws on invalid settings; returns non-fatal warnings.
    std::vector<std::string> validate() const {
        auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
        if (!positive(rbw_hz)) throw ValidationError("analyzer rbw_hz must be > 0");
        if (!positive(vbw_hz)) throw ValidationError("analyzer vbw_hz must be > 0");
        if (!positive(sweep_time_s)) throw ValidationError("analyzer sweep_time_s must be > 0");
        if (!positive(reference_power)) throw ValidationError("analyzer reference_power must be > 0");
        if (!(span_hz >= 0.0) || !std::isfinite(span_hz)) throw ValidationError("analyzer span_hz must be >= 0");
        if (!std::isfinite(center_hz)) throw ValidationError("analyzer center_hz must be finite");
        if (points < 1) throw ValidationError("analyzer needs at least one display point");
        if (vbw_hz > rbw_hz) throw ValidationError("analyzer vbw_hz must not exceed rbw_hz");
        std::vector<std::string> warnings;
        if (span_hz > 0.0) {
            if (points < 2) throw ValidationError("swept analyzer needs at least two display points");
            if (rbw_hz > span_hz) throw ValidationError("analyzer rbw_hz must not exceed span_hz");
            const double bin = span_hz / static_cast<double>(points - 1);
            if (rbw_hz / bin < 10.0) {
                std::ostringstream os;
                os << "only " << rbw_hz / bin << " display points per RBW (< 10); narrow features may be missed";
                warnings.push_back(os.str());
            }
        }
        return warnings;
    }
};

/// Displayed analyzer trace: x is seconds (zero span) or Hz (swept).
struct Trace {
    std::vector<double> x;
    std::vector<double> y_db;
    AnalyzerConfig config;

    std::size_t size() const noexcept { return x.size(); }

    std::vector<double> linear_power() const {
        std::vector<double> p(y_db.size());
        std::transform(y_db.begin(), y_db.end(), p.begin(),
                       [&](double db) { return config.reference_power * std::pow(10.0, db / 10.0); });
        return p;
    }
};

inline double power_to_db(double power, double reference) noexcept {
    return 10.0 * std::log10(std::max(power, reference * 1e-30) / reference);
}

/// Sampled Gaussian low-pass for the complex envelope. The -3 dB point of the
/// power response sits at rbw/2, i.e. a -3 dB bandpass width of rbw at the
/// tuned frequency. Taps are truncated at +-4.5 sigma and normalized to unit
/// DC gain.
class GaussianRbwFilter {
public:
    GaussianRbwFilter(double rbw_hz, double sample_rate_hz) {
        if (!(rbw_hz > 0.0) || !(sample_rate_hz > 0.0)) {
            throw ValidationError("RBW filter needs positive rbw and sample rate");
        }
        if (rbw_hz >= sample_rate_hz / 2.0) {
            std::ostringstream os;
            os << "RBW " << rbw_hz << " Hz is above the Nyquist frequency " << sample_rate_hz / 2.0
               << " Hz of the baseband series";
            throw ValidationError(os.str());
        }
        const double sigma_f = (rbw_hz / 2.0) / std::sqrt(std::numbers::ln2);
        const double sigma_n = sample_rate_hz / (2.0 * std::numbers::pi * sigma_f);
        half_ = static_cast<std::size_t>(std::ceil(4.5 * sigma_n));
        taps_.resize(2 * half_ + 1);
        double sum = 0.0;
        for (std::size_t k = 0; k < taps_.size(); ++k) {
            const double m = static_cast<double>(k) - static_cast<double>(half_);
            taps_[k] = std::exp(-0.5 * (m / sigma_n) * (m / sigma_n));
            sum += taps_[k];
        }
        for (auto& h : taps_) {
            h /= sum;
        }
    }

    std::span<const double> taps() const noexcept { return taps_; }
    std::size_t half_length() const noexcept { return half_; }

private:
    std::vector<double> taps_;
    std::size_t half_ = 0;
};

/// Applies the RBW filter to a complex baseband series ("same" length,
/// zero-extended at the edges).
inline std::vector<std::complex<double>> rbw_filter(std::span<const std::complex<double>> input,
                                                    double sample_rate_hz, double rbw_hz) {
    const GaussianRbwFilter filt(rbw_hz, sample_rate_hz);
    const auto h = filt.taps();
    const auto half = static_cast<std::ptrdiff_t>(filt.half_length());
    const auto n = static_cast<std::ptrdiff_t>(input.size());
    std::vector<std::complex<double>> out(input.size());
    for (std::ptrdiff_t i = 0; i < n; ++i) {
        std::complex<double> acc{};
        const std::ptrdiff_t k0 = std::max<std::ptrdiff_t>(0, half - i);
        const std::ptrdiff_t k1 = std::min<std::ptrdiff_t>(static_cast<std::ptrdiff_t>(h.size()), n - i + half);
        for (std::ptrdiff_t k = k0; k < k1; ++k) {
            acc += h[static_cast<std::size_t>(k)] * input[static_cast<std::size_t>(i - half + k)];
        }
        out[static_cast<std::size_t>(i)] = acc;
    }
    return out;
}

namespace detail {

/// RBW-filtered power 2|y|^2 at sample instants first, first+decim, ... < last,
/// after down-conversion by tune_hz. Samples outside the source read as zero.
template <SampleSource S>
void envelope_power(const S& src, const GaussianRbwFilter& filt, double tune_hz, std::size_t first,
                    std::size_t last, std::size_t decim, std::vector<double>& out) {
    out.clear();
    if (last <= first) {
        return;
    }
    constexpr std::size_t kInstantsPerChunk = 2048;
    constexpr std::size_t kResync = 1024;
    const double fs = src.sample_rate_hz();
    const double t0 = src.start_time_s();
    const auto h = filt.taps();
    const std::size_t half = filt.half_length();
    const std::size_t taps = h.size();
    const std::size_t n_src = src.size();
    const std::complex<double> rot = std::polar(1.0, -2.0 * std::numbers::pi * tune_hz / fs);

    std::vector<double> raw;
    std::vector<double> re;
    std::vector<double> im;
    const std::size_t count = (last - first + decim - 1) / decim;
    out.reserve(count);

    for (std::size_t j0 = 0; j0 < count; j0 += kInstantsPerChunk) {
        const std::size_t j1 = std::min(count, j0 + kInstantsPerChunk);
        const std::size_t n_a = first + j0 * decim;
        const std::size_t n_b = first + (j1 - 1) * decim;
        // buffer covers absolute indices [n_a - half, n_b + half]
        const auto base = static_cast<std::ptrdiff_t>(n_a) - static_cast<std::ptrdiff_t>(half);
        const std::size_t len = n_b - n_a + 2 * half + 1;
        raw.assign(len, 0.0);
        const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(base, 0);
        const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(base + static_cast<std::ptrdiff_t>(len),
                                                           static_cast<std::ptrdiff_t>(n_src));
        if (hi > lo) {
            src.fill(static_cast<std::size_t>(lo),
                     std::span<double>(raw).subspan(static_cast<std::size_t>(lo - base),
                                                    static_cast<std::size_t>(hi - lo)));
        }
        re.resize(len);
        im.resize(len);
        std::complex<double> lo_phasor;
        for (std::size_t m = 0; m < len; ++m) {
            if (m % kResync == 0) {
                const double t = t0 + static_cast<double>(base + static_cast<std::ptrdiff_t>(m)) / fs;
                const double cycles = tune_hz * t;
                lo_phasor = std::polar(1.0, -2.0 * std::numbers::pi * (cycles - std::floor(cycles)));
            }
            re[m] = raw[m] * lo_phasor.real();
            im[m] = raw[m] * lo_phasor.imag();
            lo_phasor *= rot;
        }
        for (std::size_t j = j0; j < j1; ++j) {
            const std::size_t off = (j - j0) * decim;
            const double* pr = re.data() + off;
            const double* pi = im.data() + off;
            double yr = 0.0;
            double yi = 0.0;
            for (std::size_t k = 0; k < taps; ++k) {
                yr += h[k] * pr[k];
                yi += h[k] * pi[k];
            }
            out.push_back(2.0 * (yr * yr + yi * yi));
        }
    }
}

inline std::size_t envelope_decimation(double fs, double rbw_hz) noexcept {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(fs / (4.0 * rbw_hz))));
}

/// Single-pole video filter over envelope samples, pre-settled on the mean of
/// the first time constant so that display values carry no start-up transient.
/// The first `skip` samples (RBW filter not yet filled) are left out of the
/// pre-settling mean.
inline void video_filter(std::vector<double>& env, double env_rate_hz, double vbw_hz, std::size_t skip = 0) {
    if (env.empty()) {
        return;
    }
    const double alpha = 1.0 - std::exp(-2.0 * std::numbers::pi * vbw_hz / env_rate_hz);
    const auto settle = static_cast<std::size_t>(std::ceil(env_rate_hz / (2.0 * std::numbers::pi * vbw_hz)));
    const std::size_t begin = std::min(skip, env.size() - 1);
    const std::size_t end = std::min(env.size(), begin + std::max<std::size_t>(settle, 1));
    double v = 0.0;
    for (std::size_t j = begin; j < end; ++j) {
        v += env[j];
    }
    v /= static_cast<double>(end - begin);
    const double settled = v;
    for (std::size_t j = begin; j < env.size(); ++j) {
        v += alpha * (env[j] - v);
        env[j] = v;
    }
    std::fill(env.begin(), env.begin() + static_cast<std::ptrdiff_t>(begin), settled);
}

struct Window {
    std::size_t first;
    std::size_t count;
};

/// Number of leading envelope instants (first, first + decim, ...) whose RBW
/// filter reaches before the start of the input.
inline std::size_t partial_instants(std::size_t first, std::size_t half, std::size_t decim) noexcept {
    return first >= half ? 0 : (half - first + decim - 1) / decim;
}

/// Measurement window of sweep_time_s inside the source. Spare samples on
/// either side are used as RBW filter pre-roll.
template <SampleSource S>
Window measurement_window(const S& src, const AnalyzerConfig& cfg, std::size_t halo) {
    const double fs = src.sample_rate_hz();
    const auto needed = static_cast<std::size_t>(std::llround(cfg.sweep_time_s * fs));
    if (src.size() < needed || needed == 0) {
        std::ostringstream os;
        os << "input too short: " << src.size() << " samples (" << static_cast<double>(src.size()) / fs
           << " s) for a " << cfg.sweep_time_s << " s sweep";
        throw ValidationError(os.str());
    }
    const std::size_t slack = src.size() - needed;
    return {std::min(halo, slack / 2), needed};
}

} // namespace detail

/// Zero-span measurement: displayed power in one RBW around center_hz versus time.
template <SampleSource S>
Trace zero_span(const S& input, const AnalyzerConfig& cfg) {
    cfg.validate();
    if (!cfg.is_zero_span()) {
        throw ValidationError("zero_span called with nonzero span");
    }
    const double fs = input.sample_rate_hz();
    if (!(std::abs(cfg.center_hz) < fs / 2.0)) {
        std::ostringstream os;
        os << "center frequency " << cfg.center_hz << " Hz is above the input Nyquist frequency " << fs / 2.0 << " Hz";
        throw ValidationError(os.str());
    }
    const GaussianRbwFilter filt(cfg.rbw_hz, fs);
    const auto win = detail::measurement_window(input, cfg, filt.half_length());
    const std::size_t decim = detail::envelope_decimation(fs, cfg.rbw_hz);

    std::vector<double> env;
    detail::envelope_power(input, filt, cfg.center_hz, win.first, win.first + win.count, decim, env);
    if (env.size() < cfg.points) {
        throw ValidationError("too few envelope samples for the requested display points");
    }
    detail::video_filter(env, fs / static_cast<double>(decim), cfg.vbw_hz,
                         detail::partial_instants(win.first, filt.half_length(), decim));

    Trace tr;
    tr.config = cfg;
    tr.x.reserve(cfg.points);
    tr.y_db.reserve(cfg.points);
    const std::size_t n_env = env.size();
    std::size_t prev_end = 0;
    for (std::size_t k = 0; k < cfg.points; ++k) {
        const std::size_t end = ((k + 1) * n_env) / cfg.points;
        const std::size_t j = end - 1;
        double p = env[j];
        if (cfg.detector == Detector::average) {
            double acc = 0.0;
            for (std::size_t i = prev_end; i < end; ++i) {
                acc += env[i];
            }
            p = acc / static_cast<double>(end - prev_end);
        }
        prev_end = end;
        tr.x.push_back(input.start_time_s() + static_cast<double>(win.first + j * decim) / fs);
        tr.y_db.push_back(power_to_db(p, cfg.reference_power));
    }
    return tr;
}

/// Swept measurement across [center - span/2, center + span/2]. Display bin k
/// analyses the k-th consecutive slice of the input tuned to its own frequency,
/// reproducing the time-frequency coupling of a real sweep. Bins are
/// independent of one another.
template <SampleSource S>
Trace sweep(const S& input, const AnalyzerConfig& cfg) {
    cfg.validate();
    if (cfg.is_zero_span()) {
        throw ValidationError("sweep requires span_hz > 0");
    }
    const double fs = input.sample_rate_hz();
    const double f_lo = cfg.center_hz - cfg.span_hz / 2.0;
    const double f_hi = cfg.center_hz + cfg.span_hz / 2.0;
    if (!(std::max(std::abs(f_lo), std::abs(f_hi)) < fs / 2.0)) {
        throw ValidationError("sweep range extends beyond the input Nyquist frequency");
    }
    const GaussianRbwFilter filt(cfg.rbw_hz, fs);
    const auto win = detail::measurement_window(input, cfg, filt.half_length());
    const std::size_t slice = win.count / cfg.points;
    if (slice == 0) {
        throw ValidationError("insufficient input length: fewer samples than display points");
    }
    const std::size_t decim = std::min(slice, detail::envelope_decimation(fs, cfg.rbw_hz));
    const double env_rate = fs / static_cast<double>(decim);

    Trace tr;
    tr.config = cfg;
    tr.x.resize(cfg.points);
    tr.y_db.resize(cfg.points);
    std::vector<double> env;
    for (std::size_t k = 0; k < cfg.points; ++k) {
        const double f = f_lo + cfg.span_hz * static_cast<double>(k) / static_cast<double>(cfg.points - 1);
        const std::size_t first = win.first + k * slice;
        detail::envelope_power(input, filt, f, first, first + slice, decim, env);
        detail::video_filter(env, env_rate, cfg.vbw_hz, detail::partial_instants(first, filt.half_length(), decim));
        double p = env.back();
        if (cfg.detector == Detector::average) {
            double acc = 0.0;
            for (const double e : env) {
                acc += e;
            }
            p = acc / static_cast<double>(env.size());
        }
        tr.x[k] = f;
        tr.y_db[k] = power_to_db(p, cfg.reference_power);
    }
    return tr;
}

/// Dispatches on span: zero span or swept.
template <SampleSource S>
Trace measure(const S& input, const AnalyzerConfig& cfg) {
    return cfg.is_zero_span() ? zero_span(input, cfg) : sweep(input, cfg);
}

} // namespace bhd
