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

// Passive optics of the sideband generation chain: acousto-optic frequency
// shifters, beam splitters and lossy couplings.

#include <cmath>
#include <complex>
#include <set>
#include <utility>

#include "bhd/error.hpp"
#include "bhd/field.hpp"

namespace bhd {

inline constexpr double kDefaultAomEfficiency = 0.70;

struct AomConfig {
    /// Signed drive frequency; negative selects the -1 diffraction order.
    double shift_hz = 0.0;
    double efficiency = kDefaultAomEfficiency;
    /// Phase of the RF drive. The diffracted beam picks it up with the sign of
    /// the diffraction order.
    double drive_phase_rad = 0.0;

    void validate() const {
        if (!(efficiency > 0.0 && efficiency <= 1.0)) {
            throw ValidationError("AOM efficiency must lie in (0, 1]");
        }
        if (!std::isfinite(shift_hz) || !std::isfinite(drive_phase_rad)) {
            throw ValidationError("AOM shift and drive phase must be finite");
        }
    }
};

struct SplitterConfig {
    /// Power reflectance R.
    double reflectance = 0.5;
    /// Mode overlap at the detection port. Not applied to the fields; it is
    /// carried along and scales the detected beat amplitude.
    double visibility = 1.0;

    void validate() const {
        if (!(reflectance >= 0.0 && reflectance <= 1.0)) {
            throw ValidationError("beam splitter reflectance must lie in [0, 1]");
        }
        if (!(visibility >= 0.0 && visibility <= 1.0)) {
            throw ValidationError("visibility must lie in [0, 1]");
        }
    }
};

struct SplitterOutputs {
    OpticalField first;
    OpticalField second;
    double visibility = 1.0;
};

inline OpticalField aom_shift(const OpticalField& field, const AomConfig& cfg) {
    cfg.validate();
    const double gain = std::sqrt(cfg.efficiency);
    const double order = cfg.shift_hz < 0.0 ? -1.0 : (cfg.shift_hz > 0.0 ? 1.0 : 0.0);
    OpticalField out;
    for (auto c : field.components()) {
        c.offset_hz += cfg.shift_hz;
        c.amplitude *= gain;
        c.phase_rad += order * cfg.drive_phase_rad;
        out.insert(c);
    }
    return out;
}

/// Lossless two-port mixing, applied independently at every frequency offset
/// present in either input (symmetric convention, i on reflection):
///   out1 = sqrt(1-R) a + i sqrt(R) b
///   out2 = i sqrt(R) a + sqrt(1-R) b
inline SplitterOutputs beamsplitter_mix(const OpticalField& a, const OpticalField& b, const SplitterConfig& cfg) {
    cfg.validate();
    const double t = std::sqrt(1.0 - cfg.reflectance);
    const std::complex<double> ir{0.0, std::sqrt(cfg.reflectance)};

    std::set<double> offsets;
    for (const auto& c : a.components()) {
        offsets.insert(c.offset_hz);
    }
    for (const auto& c : b.components()) {
        offsets.insert(c.offset_hz);
    }

    SplitterOutputs out;
    out.visibility = cfg.visibility;
    for (const double f : offsets) {
        const auto za = a.phasor_at(f);
        const auto zb = b.phasor_at(f);
        out.first.insert(SpectralComponent::from_phasor(f, t * za + ir * zb));
        out.second.insert(SpectralComponent::from_phasor(f, ir * za + t * zb));
    }
    return out;
}

/// Power transmission loss (fiber coupling and similar).
inline OpticalField attenuate(const OpticalField& field, double transmission) {
    if (!(transmission >= 0.0 && transmission <= 1.0)) {
        throw ValidationError("transmission must lie in [0, 1]");
    }
    return field.scaled(std::sqrt(transmission));
}

} // namespace bhd
