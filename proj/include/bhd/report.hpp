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

// Run output and report aggregation.
//
// A run writes <out>/<scenario>/:
//   trace_<label>.csv   analyzer trace per curve (see io.hpp)
//   lock_upper.csv, lock_lower.csv   PLL phase error (method 1 only)
//   config.ini          effective configuration
//   report.json         metrics, lock and calibration summary
//
// All dB values are relative to the analytic shot floor a_LO^2 * ENBW(RBW);
// frequencies and times are in bench units.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "bhd/config_io.hpp"
#include "bhd/error.hpp"
#include "bhd/harness.hpp"
#include "bhd/io.hpp"

namespace bhd {

using Json = nlohmann::ordered_json;

namespace detail {

inline Json opt(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw ValidationError("cannot write '" + path.string() + "'");
    }
}

} // namespace detail

inline std::string trace_file_name(const std::string& label) { return "trace_" + label + ".csv"; }

inline Json to_json(const ScenarioResult& r) {
    const auto& p = r.prepared;
    const auto& cfg = p.config;
    Json j;
    j["scenario"] = cfg.name;
    j["description"] = cfg.description;
    j["seed"] = cfg.seed;
    j["frequency_scale"] = cfg.frequency_scale;
    j["noise"] = cfg.noise_enabled;
    j["mode"] = p.analyzer.is_zero_span() ? "zero_span" : "swept";

    const auto& m = r.metrics;
    Json jm;
    jm["primary_curve"] = m.primary_curve;
    jm["peak_power_db"] = m.peak_power_db;
    jm["floor_db"] = m.floor_db;
    jm["snr_db"] = m.snr_db;
    jm["signal_power_db"] = m.signal_power_db;
    jm["signal_snr_db"] = m.signal_snr_db;
    jm["envelope_period_s"] = detail::opt(m.envelope_period_s);
    jm["envelope_max_db"] = detail::opt(m.envelope_max_db);
    jm["envelope_min_db"] = detail::opt(m.envelope_min_db);
    jm["theta_extinction_db"] = detail::opt(m.theta_extinction_db);
    jm["floor_source"] = m.floor_source;
    j["metrics"] = jm;

    Json curves = Json::array();
    for (const auto& c : r.curves) {
        const auto& cm = c.metrics;
        Json jc;
        jc["label"] = c.curve.label;
        jc["trace_file"] = trace_file_name(c.curve.label);
        jc["arms"] = to_string(c.curve.arms);
        jc["theta_mode"] = to_string(c.curve.theta_mode);
        jc["theta_rad"] = c.curve.theta_rad;
        jc["scan_rate_rad_per_s"] = c.curve.scan_rate_rad_per_s;
        jc["modulated"] = cm.modulated;
        jc["mean_power_db"] = cm.mean_power_db;
        jc["peak_power_db"] = cm.peak_power_db;
        jc["peak_freq_hz"] = detail::opt(cm.peak_freq_hz);
        jc["floor_db"] = cm.floor_db;
        jc["snr_db"] = cm.snr_db;
        jc["signal_power_db"] = cm.signal_power_db;
        jc["signal_snr_db"] = cm.signal_snr_db;
        jc["envelope_period_s"] = detail::opt(cm.envelope_period_s);
        jc["envelope_max_db"] = detail::opt(cm.envelope_max_db);
        jc["envelope_min_db"] = detail::opt(cm.envelope_min_db);
        jc["residual_beat_ratio"] = detail::opt(cm.residual_beat_ratio);
        curves.push_back(jc);
    }
    j["curves"] = curves;

    const auto& l = p.lock;
    Json jl;
    jl["method"] = to_string(l.method);
    jl["locked"] = l.locked;
    jl["residual_phase_std_rad"] = l.residual_phase_std_rad;
    jl["residual_upper_rad"] = l.residual_upper_rad;
    jl["residual_lower_rad"] = l.residual_lower_rad;
    jl["settle_time_s"] = l.settle_time_s;
    jl["sideband_mismatch_hz"] = l.sideband_mismatch_hz;
    jl["diagnostics"] = l.diagnostics;
    j["lock"] = jl;

    Json jc;
    jc["calibrated"] = p.calibration.calibrated;
    jc["target_snr_db"] = p.calibration.target_snr_db;
    jc["sideband_amplitude"] = p.calibration.sideband_amplitude;
    jc["lo_amplitude"] = p.calibration.lo_amplitude;
    j["calibration"] = jc;

    Json jr;
    jr["enbw_hz"] = gaussian_enbw_hz(cfg.analyzer.rbw_hz);
    jr["zero_db_power"] = p.analyzer.reference_power;
    j["reference"] = jr;

    j["warnings"] = p.warnings;
    j["config"] = format_scenario_ini(cfg);
    return j;
}

/// Writes the run directory and returns its path.
inline std::filesystem::path write_run(const ScenarioResult& r, const std::filesystem::path& out_root) {
    return detail::stage("output", [&] {
        const auto dir = out_root / r.prepared.config.name;
        std::error_code ec;
        std::filesystem::create_directories(dir, ec);
        if (ec) {
            throw ValidationError("cannot create '" + dir.string() + "': " + ec.message());
        }
        for (const auto& c : r.curves) {
            std::ostringstream os;
            write_trace_csv(os, c.trace);
            detail::write_text(dir / trace_file_name(c.curve.label), os.str());
        }
        const auto& l = r.prepared.lock;
        if (l.method == LockMethod::method1) {
            for (const auto& [name, series] : {std::pair{"lock_upper.csv", &l.upper_error},
                                               std::pair{"lock_lower.csv", &l.lower_error}}) {
                // bench time axis
                TimeSeries bench = *series;
                bench.sample_rate *= r.prepared.scale;
                std::ostringstream os;
                write_csv(os, bench);
                detail::write_text(dir / name, os.str());
            }
        }
        detail::write_text(dir / "config.ini", format_scenario_ini(r.prepared.config));
        detail::write_text(dir / "report.json", to_json(r).dump(2) + "\n");
        return dir;
    });
}

/// Reports found in <dir>/*/report.json, keyed by scenario name.
inline std::map<std::string, Json> load_reports(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw ValidationError("'" + dir.string() + "' is not a directory");
    }
    std::map<std::string, Json> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        const auto path = entry.path() / "report.json";
        if (!entry.is_directory() || !std::filesystem::exists(path)) {
            continue;
        }
        std::ifstream in(path);
        try {
            auto j = Json::parse(in);
            const auto name = j.at("scenario").get<std::string>();
            out[name] = std::move(j);
        } catch (const Json::exception& e) {
            throw ValidationError("malformed report '" + path.string() + "': " + e.what());
        }
    }
    return out;
}

struct CheckResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

namespace detail {

inline const Json* curve_json(const Json& report, const std::string& label) {
    for (const auto& c : report.at("curves")) {
        if (c.at("label") == label) {
            return &c;
        }
    }
    return nullptr;
}

inline double from_db(double db) { return std::pow(10.0, db / 10.0); }

inline CheckResult within(std::string name, double value, double target, double tol, const char* unit) {
    std::ostringstream os;
    os << value << ' ' << unit << " (expected " << target << " +- " << tol << ')';
    return {std::move(name), std::abs(value - target) <= tol, os.str()};
}

inline CheckResult at_most(std::string name, double value, double limit, const char* unit) {
    std::ostringstream os;
    os << value << ' ' << unit << " (limit " << limit << ')';
    return {std::move(name), value <= limit, os.str()};
}

} // namespace detail

/// Checks of the scenario metrics against the expected physics, for every
/// scenario present in `reports`. Scenarios that are absent are skipped.
inline std::vector<CheckResult> check_reports(const std::map<std::string, Json>& reports) {
    using detail::curve_json;
    using detail::from_db;
    std::vector<CheckResult> out;
    const auto get = [&](const char* name) -> const Json* {
        const auto it = reports.find(name);
        return it == reports.end() ? nullptr : &it->second;
    };
    const auto sig = [](const Json& r) { return r.at("metrics").at("signal_snr_db").get<double>(); };

    if (const auto* r = get("fig6_single"); r && r->at("calibration").at("calibrated").get<bool>()) {
        out.push_back(detail::within("fig6_single S/N at calibration target", sig(*r),
                                     r->at("calibration").at("target_snr_db").get<double>(), 0.5, "dB"));
    }
    if (const auto* a = get("fig6_double_theta0"); a) {
        if (const auto* b = get("fig6_single"); b) {
            out.push_back(detail::within("two sidebands vs one (swept)", sig(*a) - sig(*b), 6.0, 0.5, "dB"));
        }
    }
    if (const auto* r = get("fig6_double_theta90"); r && !r->at("metrics").at("theta_extinction_db").is_null()) {
        out.push_back(detail::at_most("extinction at theta = pi/2 (swept)",
                                      std::abs(r->at("metrics").at("theta_extinction_db").get<double>()), 1.0, "dB"));
    }
    if (const auto* r = get("fig2c"); r) {
        const auto* s = curve_json(*r, "single");
        const auto* d = curve_json(*r, "double");
        if (s && d) {
            out.push_back(detail::within("fig2c two sidebands vs one",
                                         d->at("signal_snr_db").get<double>() - s->at("signal_snr_db").get<double>(),
                                         6.0, 0.5, "dB"));
        }
    }
    for (const char* name : {"fig2a", "fig2b", "fig2d", "fig2e"}) {
        const auto* r = get(name);
        if (!r) continue;
        const auto& m = r->at("metrics");
        const double mismatch = r->at("lock").at("sideband_mismatch_hz").get<double>();
        if (m.at("envelope_period_s").is_null() || mismatch == 0.0) {
            out.push_back({std::string(name) + " envelope", false, "no envelope modulation measured"});
            continue;
        }
        const double expected = 1.0 / std::abs(mismatch);
        const double period = m.at("envelope_period_s").get<double>();
        out.push_back(detail::within(std::string(name) + " envelope period", period / expected, 1.0, 0.02,
                                     "x 1/|mismatch|"));
        const double floor_db = m.at("floor_db").get<double>();
        out.push_back(detail::at_most(std::string(name) + " envelope minimum above floor",
                                      m.at("envelope_min_db").get<double>() - floor_db, 1.0, "dB"));
        if (const auto* s = curve_json(*r, "single"); s) {
            const double n = from_db(floor_db);
            const double top = from_db(m.at("envelope_max_db").get<double>()) - n;
            const double one = from_db(s->at("peak_power_db").get<double>()) - n;
            out.push_back(detail::within(std::string(name) + " envelope maximum vs one sideband",
                                         10.0 * std::log10(top / one), 6.0, 0.5, "dB"));
        }
    }
    for (const char* name : {"fig5a", "fig5b_scan"}) {
        const auto* r = get(name);
        if (!r) continue;
        for (const auto& c : r->at("curves")) {
            if (c.at("theta_mode") == "scanned" && !c.at("envelope_period_s").is_null()) {
                const double expected = std::numbers::pi / c.at("scan_rate_rad_per_s").get<double>();
                out.push_back(detail::within(std::string(name) + " theta scan period",
                                             c.at("envelope_period_s").get<double>() / expected, 1.0, 0.02,
                                             "x pi/rate"));
            }
        }
    }
    std::optional<double> m1;
    std::optional<double> m2;
    for (const auto& [name, r] : reports) {
        const auto& l = r.at("lock");
        const auto method = l.at("method").get<std::string>();
        if (method == "none") continue;
        const double res = l.at("residual_phase_std_rad").get<double>();
        if (method == "method1") m1 = m1 ? std::min(*m1, res) : res;
        if (method == "method2") m2 = m2 ? std::max(*m2, res) : res;
        for (const auto& c : r.at("curves")) {
            if (!c.at("residual_beat_ratio").is_null()) {
                out.push_back(detail::at_most(name + "/" + c.at("label").get<std::string>() +
                                                  " leftover sideband beat",
                                              c.at("residual_beat_ratio").get<double>(), 1.0, "x floor"));
            }
        }
    }
    if (m1 && m2) {
        std::ostringstream os;
        os << "method 2 " << *m2 << " rad vs method 1 " << *m1 << " rad";
        out.push_back({"common clock locks tighter than the PLLs", *m2 < *m1, os.str()});
    }
    return out;
}

} // namespace bhd
