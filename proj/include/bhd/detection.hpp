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

// Balanced detection. The difference photocurrent of the two detectors behind
// a 50/50 splitter is
//
//   di(t) = 2 <a_LO> V sum_k a_k cos(2 pi f_k t + phi_k - theta(t))  +  shot noise
//
// with f_k the signed sideband offset, so an up sideband at +W gives
// cos(W t - theta) and a down sideband at -W gives cos(W t + theta).
// The shot noise is white with one-sided PSD <a_LO>^2 per Hz.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bhd/error.hpp"
#include "bhd/field.hpp"
#include "bhd/rng.hpp"
#include "bhd/series.hpp"

namespace bhd {

inline constexpr double kDefaultSampleRateHz = 32e6;
/// Required ratio of LO power to total signal power.
inline constexpr double kStrongLoRatio = 100.0;

struct DetectionConfig {
    LocalOscillator lo;
    OpticalField signal;
    double visibility = 1.0;
    double duration_s = 0.0;
    double sample_rate_hz = kDefaultSampleRateHz;
    double t0_s = 0.0;
    bool noise_enabled = true;
    std::uint64_t seed = 0;
    std::uint64_t noise_stream = 0;
    /// Additional white detector noise, one-sided PSD per Hz. Off by default.
    double electronic_noise_psd = 0.0;
    /// Extra LO-signal phase on top of lo.phase_rad (e.g. residual lock error).
    PhaseTrack theta_jitter;

    std::size_t sample_count() const noexcept {
        return static_cast<std::size_t>(std::llround(duration_s * sample_rate_hz));
    }

    void validate() const {
        lo.validate();
        if (!(visibility >= 0.0 && visibility <= 1.0)) {
            throw ValidationError("visibility must lie in [0, 1]");
        }
        if (!(sample_rate_hz > 0.0) || !std::isfinite(sample_rate_hz)) {
            throw ValidationError("sample rate must be > 0");
        }
        if (!(duration_s > 0.0) || sample_count() == 0) {
            throw ValidationError("detection duration must cover at least one sample");
        }
        if (!(electronic_noise_psd >= 0.0)) {
            throw ValidationError("electronic noise PSD must be >= 0");
        }
        const double p_sig = total_power(signal);
        if (lo.amplitude * lo.amplitude < kStrongLoRatio * p_sig) {
            std::ostringstream os;
            os << "strong-LO regime violated: LO power " << lo.amplitude * lo.amplitude
               << " < " << kStrongLoRatio << " x signal power " << p_sig;
            throw ValidationError(os.str());
        }
        for (const auto& c : signal.components()) {
            if (!(sample_rate_hz > 2.0 * std::abs(c.offset_hz))) {
                std::ostringstream os;
                os << "Nyquist violation: beat at offset " << c.offset_hz << " Hz needs sample rate > "
                   << 2.0 * std::abs(c.offset_hz) << " Hz (have " << sample_rate_hz << " Hz)";
                throw ValidationError(os.str());
            }
        }
    }

    /// Standard deviation of one shot-noise sample.
    double noise_sigma() const noexcept {
        return std::sqrt((lo.amplitude * lo.amplitude + electronic_noise_psd) * sample_rate_hz / 2.0);
    }
};

/// Lazily synthesized difference photocurrent. Any index range can be filled
/// independently; the result does not depend on how the range is chunked.
class PhotocurrentSource {
public:
    enum class Parts { beat, noise, both };

    explicit PhotocurrentSource(DetectionConfig cfg, Parts parts = Parts::both)
        : cfg_(std::move(cfg)), parts_(parts), noise_(cfg_.seed, cfg_.noise_stream) {
        cfg_.validate();
        if (!cfg_.noise_enabled && parts_ == Parts::noise) {
            throw ValidationError("shot noise requested with noise disabled");
        }
        if (!cfg_.noise_enabled) {
            parts_ = Parts::beat;
        }
        sigma_ = cfg_.noise_sigma();
        const double gain = 2.0 * cfg_.lo.amplitude * cfg_.visibility;
        for (const auto& c : cfg_.signal.components()) {
            terms_.push_back({c.offset_hz, gain * c.amplitude, c.phase_rad});
        }
    }

    double sample_rate_hz() const noexcept { return cfg_.sample_rate_hz; }
    double start_time_s() const noexcept { return cfg_.t0_s; }
    std::size_t size() const noexcept { return cfg_.sample_count(); }
    const DetectionConfig& config() const noexcept { return cfg_; }

    void fill(std::size_t first, std::span<double> out) const {
        const bool beat = parts_ != Parts::noise;
        const bool noise = parts_ != Parts::beat && sigma_ > 0.0;
        if (noise) {
            noise_.fill(first, out);
            for (auto& v : out) {
                v *= sigma_;
            }
        } else {
            std::fill(out.begin(), out.end(), 0.0);
        }
        if (!beat || terms_.empty()) {
            return;
        }
        constexpr double two_pi = 2.0 * std::numbers::pi;
        const double fs = cfg_.sample_rate_hz;
        for (std::size_t i = 0; i < out.size(); ++i) {
            const double t = cfg_.t0_s + static_cast<double>(first + i) / fs;
            const double theta = cfg_.lo.phase_rad + cfg_.lo.phase_drift_rad_per_s * t + cfg_.theta_jitter.at(t);
            double acc = 0.0;
            for (const auto& term : terms_) {
                const double cycles = term.freq_hz * t;
                const double frac = cycles - std::floor(cycles);
                acc += term.amplitude * std::cos(two_pi * frac + term.phase - theta);
            }
            out[i] += acc;
        }
    }

    TimeSeries materialize() const {
        TimeSeries ts{cfg_.sample_rate_hz, cfg_.t0_s, std::vector<double>(size())};
        fill(0, ts.samples);
        return ts;
    }

private:
    struct Term {
        double freq_hz;
        double amplitude;
        double phase;
    };

    DetectionConfig cfg_;
    Parts parts_;
    GaussianStream noise_;
    double sigma_ = 0.0;
    std::vector<Term> terms_;
};

static_assert(SampleSource<PhotocurrentSource>);

/// Deterministic beat part of the difference photocurrent (noise ignored).
inline TimeSeries beat_signal(const DetectionConfig& cfg) {
    return PhotocurrentSource(cfg, PhotocurrentSource::Parts::beat).materialize();
}

/// LO-limited shot noise alone. Requires noise_enabled.
inline TimeSeries shot_noise(const DetectionConfig& cfg) {
    return PhotocurrentSource(cfg, PhotocurrentSource::Parts::noise).materialize();
}

/// Beat plus shot noise (beat only when noise is disabled).
inline TimeSeries difference_photocurrent(const DetectionConfig& cfg) {
    return PhotocurrentSource(cfg, PhotocurrentSource::Parts::both).materialize();
}

} // namespace bhd
