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

// Scenario files: INI text read and written with Boost.PropertyTree.
//
//   [scenario]   name, base, description, seed, frequency_scale, noise,
//                lock (none|method1|method2), sample_rate_hz, warmup_s,
//                primary_curve
//   [generators] f1_hz, f2_hz, f3_hz, phase1_rad, phase2_rad, phase3_rad,
//                phase_noise_rad_per_sqrt_hz, clock_jitter_rad
//   [sidebands]  amplitude (0 = calibrate), target_snr_db
//   [optics]     aom_efficiency, combiner_reflectance, visibility,
//                fiber_transmission
//   [lo]         amplitude
//   [lock]       reference_hz, reference_phase_rad, lpf_cutoff_hz, kp, ki, kd,
//                update_rate_hz, settle_threshold_rad
//   [analyzer]   center_hz, span_hz, rbw_hz, vbw_hz, sweep_time_s, points,
//                detector (sample|average)
//   [signal]     components = "offset_hz amplitude phase_rad; ..."
//   [curve.<label>]  arms (none|up|down|both), theta_mode (fixed|scanned),
//                theta_rad, scan_rate_rad_per_s
//
// `base` names a built-in scenario to start from; every other key overrides
// it. Curve sections, when present, replace the base's curve list in file
// order. Unknown sections and keys are errors.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <system_error>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bhd/error.hpp"
#include "bhd/io.hpp"
#include "bhd/scenario.hpp"

namespace bhd {

namespace detail {

using boost::property_tree::ptree;

inline std::string trim(std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) {
        return {};
    }
    const auto b = s.find_last_not_of(" \t\r");
    s = s.substr(a, b - a + 1);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

template <class T>
T parse_number(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    T v{};
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc{} || res.ptr != t.data() + t.size()) {
        throw ValidationError(where + ": cannot parse '" + t + "' as a number");
    }
    return v;
}

inline bool parse_bool(const std::string& where, const std::string& text) {
    const std::string t = trim(text);
    if (t == "on" || t == "true" || t == "yes" || t == "1") return true;
    if (t == "off" || t == "false" || t == "no" || t == "0") return false;
    throw ValidationError(where + ": expected on/off, got '" + t + "'");
}

template <class E>
E parse_enum(const std::string& where, const std::string& text, std::initializer_list<E> values) {
    const std::string t = trim(text);
    for (const E v : values) {
        if (t == to_string(v)) {
            return v;
        }
    }
    throw ValidationError(where + ": unknown value '" + t + "'");
}

/// Binds keys of one section to setters and rejects anything else.
class SectionReader {
public:
    explicit SectionReader(std::string section) : section_(std::move(section)) {}

    SectionReader& real(const char* key, double& target) {
        handlers_[key] = [&target, this, key](const std::string& v) {
            target = parse_number<double>(where(key), v);
        };
        return *this;
    }
    SectionReader& uint(const char* key, std::uint64_t& target) {
        handlers_[key] = [&target, this, key](const std::string& v) {
            target = parse_number<std::uint64_t>(where(key), v);
        };
        return *this;
    }
    SectionReader& size(const char* key, std::size_t& target) {
        handlers_[key] = [&target, this, key](const std::string& v) {
            target = parse_number<std::size_t>(where(key), v);
        };
        return *this;
    }
    SectionReader& flag(const char* key, bool& target) {
        handlers_[key] = [&target, this, key](const std::string& v) { target = parse_bool(where(key), v); };
        return *this;
    }
    SectionReader& text(const char* key, std::string& target) {
        handlers_[key] = [&target](const std::string& v) { target = trim(v); };
        return *this;
    }
    SectionReader& custom(const char* key, std::function<void(const std::string&, const std::string&)> fn) {
        handlers_[key] = [fn = std::move(fn), this, key](const std::string& v) { fn(where(key), v); };
        return *this;
    }

    void apply(const ptree& section) const {
        for (const auto& [key, node] : section) {
            const auto it = handlers_.find(key);
            if (it == handlers_.end()) {
                throw ValidationError("[" + section_ + "]: unknown key '" + key + "'");
            }
            it->second(node.data());
        }
    }

private:
    std::string where(const char* key) const { return "[" + section_ + "] " + key; }

    std::string section_;
    std::map<std::string, std::function<void(const std::string&)>> handlers_;
};

inline void apply_curve(const std::string& section, const ptree& node, CurveConfig& c) {
    SectionReader r(section);
    r.custom("arms", [&](const std::string& w, const std::string& v) {
         c.arms = parse_enum(w, v, {Arms::none, Arms::up, Arms::down, Arms::both});
     })
        .custom("theta_mode", [&](const std::string& w, const std::string& v) {
            c.theta_mode = parse_enum(w, v, {ThetaMode::fixed, ThetaMode::scanned});
        })
        .real("theta_rad", c.theta_rad)
        .real("scan_rate_rad_per_s", c.scan_rate_rad_per_s);
    r.apply(node);
}

inline void apply_section(const std::string& name, const ptree& node, ScenarioConfig& s) {
    if (name == "scenario") {
        SectionReader r(name);
        std::string ignored_base;
        r.text("name", s.name)
            .text("base", ignored_base)
            .text("description", s.description)
            .uint("seed", s.seed)
            .real("frequency_scale", s.frequency_scale)
            .flag("noise", s.noise_enabled)
            .custom("lock",
                    [&](const std::string& w, const std::string& v) {
                        s.lock = parse_enum(w, v, {LockMethod::none, LockMethod::method1, LockMethod::method2});
                    })
            .real("sample_rate_hz", s.sample_rate_hz)
            .real("warmup_s", s.warmup_s)
            .text("primary_curve", s.primary_curve);
        r.apply(node);
    } else if (name == "generators") {
        SectionReader r(name);
        r.real("f1_hz", s.generator_hz[0])
            .real("f2_hz", s.generator_hz[1])
            .real("f3_hz", s.generator_hz[2])
            .real("phase1_rad", s.generator_phase_rad[0])
            .real("phase2_rad", s.generator_phase_rad[1])
            .real("phase3_rad", s.generator_phase_rad[2])
            .real("phase_noise_rad_per_sqrt_hz", s.generator_phase_noise)
            .real("clock_jitter_rad", s.clock_jitter_rad);
        r.apply(node);
    } else if (name == "sidebands") {
        SectionReader r(name);
        r.real("amplitude", s.sideband_amplitude).real("target_snr_db", s.target_snr_db);
        r.apply(node);
    } else if (name == "optics") {
        SectionReader r(name);
        r.real("aom_efficiency", s.aom_efficiency)
            .real("combiner_reflectance", s.combiner_reflectance)
            .real("visibility", s.visibility)
            .real("fiber_transmission", s.fiber_transmission);
        r.apply(node);
    } else if (name == "lo") {
        SectionReader r(name);
        r.real("amplitude", s.lo_amplitude);
        r.apply(node);
    } else if (name == "lock") {
        SectionReader r(name);
        r.real("reference_hz", s.pll.reference_hz)
            .real("reference_phase_rad", s.pll.reference_phase_rad)
            .real("lpf_cutoff_hz", s.pll.lpf_cutoff_hz)
            .real("kp", s.pll.kp)
            .real("ki", s.pll.ki)
            .real("kd", s.pll.kd)
            .real("update_rate_hz", s.pll.update_rate_hz)
            .real("settle_threshold_rad", s.pll.settle_threshold_rad);
        r.apply(node);
    } else if (name == "analyzer") {
        SectionReader r(name);
        r.real("center_hz", s.analyzer.center_hz)
            .real("span_hz", s.analyzer.span_hz)
            .real("rbw_hz", s.analyzer.rbw_hz)
            .real("vbw_hz", s.analyzer.vbw_hz)
            .real("sweep_time_s", s.analyzer.sweep_time_s)
            .size("points", s.analyzer.points)
            .custom("detector", [&](const std::string& w, const std::string& v) {
                s.analyzer.detector = parse_enum(w, v, {Detector::sample, Detector::average});
            });
        r.apply(node);
    } else if (name == "signal") {
        SectionReader r(name);
        r.custom("components", [&](const std::string& w, const std::string& v) {
            try {
                s.explicit_signal = parse_components(trim(v));
            } catch (const ValidationError& e) {
                throw ValidationError(w + ": " + e.what());
            }
        });
        r.apply(node);
    } else {
        throw ValidationError("unknown section [" + name + "]");
    }
}

} // namespace detail

/// Parses scenario text. Errors name the section and key.
inline ScenarioConfig parse_scenario_ini(const std::string& text) {
    detail::ptree tree;
    std::istringstream is(text);
    try {
        boost::property_tree::ini_parser::read_ini(is, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
        throw ValidationError(std::string("malformed scenario file: ") + e.message() + " (line " +
                              std::to_string(e.line()) + ")");
    }
    for (const auto& [key, node] : tree) {
        if (node.empty() && !node.data().empty()) {
            throw ValidationError("key '" + key + "' outside any section");
        }
    }

    ScenarioConfig s;
    if (const auto sec = tree.find("scenario"); sec != tree.not_found()) {
        if (const auto base = sec->second.find("base"); base != sec->second.not_found()) {
            const auto name = detail::trim(base->second.data());
            auto b = find_builtin(name);
            if (!b) {
                throw ValidationError("[scenario] base: unknown built-in scenario '" + name + "'");
            }
            s = *b;
        }
    }

    std::vector<CurveConfig> curves;
    for (const auto& [key, node] : tree) {
        constexpr std::string_view prefix = "curve.";
        if (key.rfind(prefix, 0) == 0) {
            CurveConfig c;
            c.label = key.substr(prefix.size());
            detail::apply_curve(key, node, c);
            curves.push_back(std::move(c));
        } else {
            detail::apply_section(key, node, s);
        }
    }
    if (!curves.empty()) {
        s.curves = std::move(curves);
    }
    return s;
}

inline ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ValidationError("cannot open scenario file '" + path + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario_ini(ss.str());
}

/// Full effective configuration as INI text; parse_scenario_ini reads it back
/// to an equal configuration.
inline std::string format_scenario_ini(const ScenarioConfig& s) {
    std::ostringstream os;
    const auto num = [](double v) { return format_number(v); };
    os << "[scenario]\n"
       << "name = " << s.name << '\n'
       << "description = " << s.description << '\n'
       << "seed = " << s.seed << '\n'
       << "frequency_scale = " << num(s.frequency_scale) << '\n'
       << "noise = " << (s.noise_enabled ? "on" : "off") << '\n'
       << "lock = " << to_string(s.lock) << '\n'
       << "sample_rate_hz = " << num(s.sample_rate_hz) << '\n'
       << "warmup_s = " << num(s.warmup_s) << '\n'
       << "primary_curve = " << s.primary_curve << "\n\n";
    os << "[generators]\n";
    for (std::size_t i = 0; i < 3; ++i) {
        os << 'f' << i + 1 << "_hz = " << num(s.generator_hz[i]) << '\n';
    }
    for (std::size_t i = 0; i < 3; ++i) {
        os << "phase" << i + 1 << "_rad = " << num(s.generator_phase_rad[i]) << '\n';
    }
    os << "phase_noise_rad_per_sqrt_hz = " << num(s.generator_phase_noise) << '\n'
       << "clock_jitter_rad = " << num(s.clock_jitter_rad) << "\n\n";
    os << "[sidebands]\n"
       << "amplitude = " << num(s.sideband_amplitude) << '\n'
       << "target_snr_db = " << num(s.target_snr_db) << "\n\n";
    os << "[optics]\n"
       << "aom_efficiency = " << num(s.aom_efficiency) << '\n'
       << "combiner_reflectance = " << num(s.combiner_reflectance) << '\n'
       << "visibility = " << num(s.visibility) << '\n'
       << "fiber_transmission = " << num(s.fiber_transmission) << "\n\n";
    os << "[lo]\n"
       << "amplitude = " << num(s.lo_amplitude) << "\n\n";
    os << "[lock]\n"
       << "reference_hz = " << num(s.pll.reference_hz) << '\n'
       << "reference_phase_rad = " << num(s.pll.reference_phase_rad) << '\n'
       << "lpf_cutoff_hz = " << num(s.pll.lpf_cutoff_hz) << '\n'
       << "kp = " << num(s.pll.kp) << '\n'
       << "ki = " << num(s.pll.ki) << '\n'
       << "kd = " << num(s.pll.kd) << '\n'
       << "update_rate_hz = " << num(s.pll.update_rate_hz) << '\n'
       << "settle_threshold_rad = " << num(s.pll.settle_threshold_rad) << "\n\n";
    os << "[analyzer]\n"
       << "center_hz = " << num(s.analyzer.center_hz) << '\n'
       << "span_hz = " << num(s.analyzer.span_hz) << '\n'
       << "rbw_hz = " << num(s.analyzer.rbw_hz) << '\n'
       << "vbw_hz = " << num(s.analyzer.vbw_hz) << '\n'
       << "sweep_time_s = " << num(s.analyzer.sweep_time_s) << '\n'
       << "points = " << s.analyzer.points << '\n'
       << "detector = " << to_string(s.analyzer.detector) << '\n';
    if (s.explicit_signal) {
        os << "\n[signal]\ncomponents = " << format_components(*s.explicit_signal) << '\n';
    }
    for (const auto& c : s.curves) {
        os << "\n[curve." << c.label << "]\n"
           << "arms = " << to_string(c.arms) << '\n'
           << "theta_mode = " << to_string(c.theta_mode) << '\n'
           << "theta_rad = " << num(c.theta_rad) << '\n'
           << "scan_rate_rad_per_s = " << num(c.scan_rate_rad_per_s) << '\n';
    }
    return os.str();
}

} // namespace bhd
