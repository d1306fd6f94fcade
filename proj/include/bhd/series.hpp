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

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <span>
#include <vector>

#include "bhd/error.hpp"

namespace bhd {

/// Anything that can hand out uniformly sampled real data by index range.
/// Both materialized series and lazily synthesized photocurrents model this.
template <class S>
concept SampleSource = requires(const S& s, std::size_t first, std::span<double> out) {
    { s.sample_rate_hz() } -> std::convertible_to<double>;
    { s.start_time_s() } -> std::convertible_to<double>;
    { s.size() } -> std::convertible_to<std::size_t>;
    s.fill(first, out);
};

/// Uniformly sampled real trace.
struct TimeSeries {
    double sample_rate = 1.0;
    double t0_s = 0.0;
    std::vector<double> samples;

    double sample_rate_hz() const noexcept { return sample_rate; }
    double start_time_s() const noexcept { return t0_s; }
    std::size_t size() const noexcept { return samples.size(); }
    double duration_s() const noexcept { return static_cast<double>(samples.size()) / sample_rate; }
    double time_at(std::size_t n) const noexcept { return t0_s + static_cast<double>(n) / sample_rate; }

    /// Copies samples [first, first + out.size()); positions past the end are zero.
    void fill(std::size_t first, std::span<double> out) const {
        std::fill(out.begin(), out.end(), 0.0);
        if (first >= samples.size()) {
            return;
        }
        const std::size_t n = std::min(out.size(), samples.size() - first);
        std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(first), n, out.begin());
    }

    void validate() const {
        if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
            throw ValidationError("time series sample rate must be > 0");
        }
        if (samples.empty()) {
            throw ValidationError("time series must not be empty");
        }
    }
};

static_assert(SampleSource<TimeSeries>);

/// Slowly varying phase sampled at a fixed rate, linearly interpolated and
/// held constant outside its support. An empty track is identically zero.
struct PhaseTrack {
    double rate_hz = 1.0;
    double t0_s = 0.0;
    std::vector<double> values_rad;

    bool empty() const noexcept { return values_rad.empty(); }

    double at(double t) const noexcept {
        if (values_rad.empty()) {
            return 0.0;
        }
        const double pos = (t - t0_s) * rate_hz;
        if (pos <= 0.0) {
            return values_rad.front();
        }
        const auto last = values_rad.size() - 1;
        if (pos >= static_cast<double>(last)) {
            return values_rad.back();
        }
        const auto i = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(i);
        return values_rad[i] + frac * (values_rad[i + 1] - values_rad[i]);
    }
};

} // namespace bhd
