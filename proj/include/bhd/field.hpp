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

// Optical fields as sparse sets of coherent spectral components at frequency
// offsets from a common carrier. Amplitudes are sqrt(photon flux) in
// normalized units; the optical carrier frequency itself never appears.

#include <algorithm>
#include <cmath>
#include <complex>
#include <initializer_list>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "bhd/error.hpp"

namespace bhd {

/// Components weaker than this are dropped on insert.
inline constexpr double kAmplitudeFloor = 1e-15;

/// Wraps a phase into [0, 2*pi).
inline double normalize_phase(double phase) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double p = std::fmod(phase, two_pi);
    if (p < 0.0) {
        p += two_pi;
    }
    // fmod of a tiny negative value can round up to exactly 2*pi
    return p >= two_pi ? 0.0 : p;
}

struct SpectralComponent {
    double offset_hz = 0.0;
    double amplitude = 0.0;
    double phase_rad = 0.0;

    std::complex<double> phasor() const { return std::polar(amplitude, phase_rad); }

    static SpectralComponent from_phasor(double offset_hz, std::complex<double> z) {
        return {offset_hz, std::abs(z), normalize_phase(std::arg(z))};
    }

    friend bool operator==(const SpectralComponent&, const SpectralComponent&) = default;
};

/// A sparse optical field. Components are kept sorted by offset and no two
/// share an offset: inserting at an occupied offset adds the phasors.
class OpticalField {
public:
    OpticalField() = default;

    OpticalField(std::initializer_list<SpectralComponent> components) {
        for (const auto& c : components) {
            insert(c);
        }
    }

    void insert(SpectralComponent c) {
        if (!(c.amplitude >= 0.0) || !std::isfinite(c.amplitude)) {
            throw ValidationError("spectral component amplitude must be finite and >= 0");
        }
        if (!std::isfinite(c.offset_hz) || !std::isfinite(c.phase_rad)) {
            throw ValidationError("spectral component offset and phase must be finite");
        }
        c.phase_rad = normalize_phase(c.phase_rad);
        auto it = std::lower_bound(components_.begin(), components_.end(), c.offset_hz,
                                   [](const SpectralComponent& a, double f) { return a.offset_hz < f; });
        if (it != components_.end() && it->offset_hz == c.offset_hz) {
            const auto merged = SpectralComponent::from_phasor(c.offset_hz, it->phasor() + c.phasor());
            if (merged.amplitude < kAmplitudeFloor) {
                components_.erase(it);
            } else {
                *it = merged;
            }
            return;
        }
        if (c.amplitude < kAmplitudeFloor) {
            return;
        }
        components_.insert(it, c);
    }

    std::span<const SpectralComponent> components() const noexcept { return components_; }
    std::size_t size() const noexcept { return components_.size(); }
    bool empty() const noexcept { return components_.empty(); }

    /// True when nothing occupies the carrier frequency itself.
    bool carrier_is_vacuum() const noexcept { return find(0.0) == nullptr; }

    const SpectralComponent* find(double offset_hz) const noexcept {
        auto it = std::lower_bound(components_.begin(), components_.end(), offset_hz,
                                   [](const SpectralComponent& a, double f) { return a.offset_hz < f; });
        return (it != components_.end() && it->offset_hz == offset_hz) ? &*it : nullptr;
    }

    std::complex<double> phasor_at(double offset_hz) const {
        const auto* c = find(offset_hz);
        return c ? c->phasor() : std::complex<double>{};
    }

    /// Largest |offset| present, 0 for vacuum.
    double max_abs_offset_hz() const noexcept {
        double m = 0.0;
        for (const auto& c : components_) {
            m = std::max(m, std::abs(c.offset_hz));
        }
        return m;
    }

    /// Field with every amplitude multiplied by a nonnegative factor.
    OpticalField scaled(double factor) const {
        if (!(factor >= 0.0)) {
            throw ValidationError("amplitude scale factor must be >= 0");
        }
        OpticalField out;
        for (auto c : components_) {
            c.amplitude *= factor;
            out.insert(c);
        }
        return out;
    }

    friend bool operator==(const OpticalField&, const OpticalField&) = default;

private:
    std::vector<SpectralComponent> components_;
};

inline double total_power(const OpticalField& field) noexcept {
    double p = 0.0;
    for (const auto& c : field.components()) {
        p += c.amplitude * c.amplitude;
    }
    return p;
}

/// Signal field with an up sideband at +omega_plus_hz and a down sideband at
/// -omega_minus_hz. The carrier is vacuum; zero-amplitude sidebands are omitted.
inline OpticalField make_two_sideband_field(double amp_plus, double amp_minus, double omega_plus_hz,
                                            double omega_minus_hz, double phi_plus, double phi_minus) {
    if (!(amp_plus >= 0.0) || !(amp_minus >= 0.0)) {
        throw ValidationError("sideband amplitudes must be >= 0");
    }
    if (!(omega_plus_hz > 0.0) || !(omega_minus_hz > 0.0)) {
        throw ValidationError("sideband frequencies must be > 0 (the down sideband is stored at -omega_minus)");
    }
    OpticalField field;
    field.insert({omega_plus_hz, amp_plus, phi_plus});
    field.insert({-omega_minus_hz, amp_minus, phi_minus});
    return field;
}

struct LocalOscillator {
    double amplitude = 0.0;
    double phase_rad = 0.0;
    /// Linear LO phase ramp for scanned-phase measurements.
    double phase_drift_rad_per_s = 0.0;

    void validate() const {
        if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) {
            throw ValidationError("local oscillator amplitude must be finite and >= 0");
        }
        if (!std::isfinite(phase_rad) || !std::isfinite(phase_drift_rad_per_s)) {
            throw ValidationError("local oscillator phase and drift must be finite");
        }
    }
};

/// Text form used in scenario files: "offset amplitude phase" records
/// separated by ';'.
inline std::string format_components(const OpticalField& field) {
    std::ostringstream os;
    os.precision(17);
    bool first = true;
    for (const auto& c : field.components()) {
        if (!first) {
            os << "; ";
        }
        first = false;
        os << c.offset_hz << ' ' << c.amplitude << ' ' << c.phase_rad;
    }
    return os.str();
}

inline OpticalField parse_components(const std::string& text) {
    OpticalField field;
    std::istringstream records(text);
    std::string record;
    while (std::getline(records, record, ';')) {
        if (record.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        std::istringstream is(record);
        SpectralComponent c;
        std::string trailing;
        if (!(is >> c.offset_hz >> c.amplitude >> c.phase_rad) || (is >> trailing)) {
            throw ValidationError("malformed spectral component record '" + record +
                                  "' (expected: offset_hz amplitude phase_rad)");
        }
        field.insert(c);
    }
    return field;
}

} // namespace bhd
