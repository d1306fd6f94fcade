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


// bhdsim: command-line front end of the balanced-detection simulator.
//
//   bhdsim list
//   bhdsim run <scenario|file.ini>... [--seed N] [--out DIR] [--frequency-scale S]
//                                     [--noise on|off] [--dump-config]
//   bhdsim report <dir> [--check]
//
// Exit codes: 0 success, 2 configuration error, 3 simulation error,
// 4 failed check.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bhd/bhd.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitSimulation = 3;
constexpr int kExitCheck = 4;

bhd::ScenarioConfig resolve(const std::string& target) {
    const std::filesystem::path path(target);
    if (std::filesystem::is_regular_file(path)) {
        return bhd::load_scenario_file(target);
    }
    if (auto builtin = bhd::find_builtin(target)) {
        return *builtin;
    }
    if (path.extension() == ".ini") {
        throw bhd::ValidationError("scenario file '" + target + "' not found");
    }
    throw bhd::ValidationError("unknown scenario '" + target + "' (see 'bhdsim list')");
}

std::string fmt(double v, int precision = 2) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", precision, v);
    return buf;
}

void print_summary(const bhd::ScenarioResult& r, const std::filesystem::path& dir, double seconds) {
    const auto& m = r.metrics;
    std::cout << r.prepared.config.name << ": " << dir.string() << " (" << fmt(seconds, 1) << " s)\n";
    for (const auto& c : r.curves) {
        const auto& cm = c.metrics;
        if (c.curve.is_shot()) {
            std::cout << "  " << cm.label << ": mean " << fmt(cm.mean_power_db) << " dB\n";
            continue;
        }
        std::cout << "  " << cm.label << ": peak " << fmt(cm.peak_power_db) << " dB, S/N " << fmt(cm.signal_snr_db)
                  << " dB";
        if (cm.envelope_period_s) {
            std::cout << ", envelope period " << fmt(*cm.envelope_period_s, 4) << " s";
        }
        if (cm.peak_freq_hz) {
            std::cout << ", at " << fmt(*cm.peak_freq_hz / 1e6, 4) << " MHz";
        }
        std::cout << '\n';
    }
    std::cout << "  floor " << fmt(m.floor_db) << " dB (" << m.floor_source << ")";
    if (r.prepared.lock.method != bhd::LockMethod::none) {
        std::cout << ", lock residual " << fmt(r.prepared.lock.residual_phase_std_rad, 4) << " rad";
    }
    std::cout << '\n';
    for (const auto& w : r.prepared.warnings) {
        std::cerr << "warning: " << r.prepared.config.name << ": " << w << '\n';
    }
}

int cmd_list() {
    for (const auto& s : bhd::builtin_scenarios()) {
        std::cout << s.name << std::string(s.name.size() < 22 ? 22 - s.name.size() : 1, ' ') << s.description
                  << '\n';
    }
    return 0;
}

struct RunOptions {
    std::vector<std::string> targets;
    std::optional<std::uint64_t> seed;
    std::optional<double> scale;
    std::optional<std::string> noise;
    std::string out;
    bool dump = false;
};

int cmd_run(const RunOptions& o) {
    std::vector<bhd::ScenarioConfig> configs;
    try {
        for (const auto& t : o.targets) {
            if (t == "all") {
                for (auto& s : bhd::builtin_scenarios()) configs.push_back(std::move(s));
                continue;
            }
            configs.push_back(resolve(t));
        }
        for (auto& c : configs) {
            if (o.seed) c.seed = *o.seed;
            if (o.scale) c.frequency_scale = *o.scale;
            if (o.noise) c.noise_enabled = *o.noise == "on";
            c.validate();
        }
    } catch (const std::exception& e) {
        std::cerr << "error: config: " << e.what() << '\n';
        return kExitConfig;
    }
    if (o.dump) {
        for (const auto& c : configs) {
            std::cout << bhd::format_scenario_ini(c);
        }
        return 0;
    }
    for (const auto& c : configs) {
        try {
            const auto start = std::chrono::steady_clock::now();
            const auto result = bhd::run_scenario(c);
            const auto dir = bhd::write_run(result, o.out);
            const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            print_summary(result, dir, secs);
        } catch (const bhd::StageError& e) {
            std::cerr << "error: " << c.name << ": " << e.what() << '\n';
            return e.is_config_error() ? kExitConfig : kExitSimulation;
        } catch (const std::exception& e) {
            std::cerr << "error: " << c.name << ": " << e.what() << '\n';
            return kExitSimulation;
        }
    }
    return 0;
}

int cmd_report(const std::string& dir, bool check) {
    std::map<std::string, bhd::Json> reports;
    try {
        reports = bhd::load_reports(dir);
    } catch (const std::exception& e) {
        std::cerr << "error: report: " << e.what() << '\n';
        return kExitConfig;
    }
    if (reports.empty()) {
        std::cerr << "error: report: no run directories with report.json under '" << dir << "'\n";
        return kExitConfig;
    }
    bhd::Json summary = bhd::Json::array();
    std::cout << "scenario              primary   peak_dB  floor_dB  snr_dB  S/N_dB  period_s  residual_rad\n";
    for (const auto& [name, r] : reports) {
        const auto& m = r.at("metrics");
        char line[256];
        std::snprintf(line, sizeof line, "%-21s %-9s %7.2f %9.2f %7.2f %7.2f %9s %13s\n", name.c_str(),
                      m.at("primary_curve").get<std::string>().c_str(), m.at("peak_power_db").get<double>(),
                      m.at("floor_db").get<double>(), m.at("snr_db").get<double>(),
                      m.at("signal_snr_db").get<double>(),
                      m.at("envelope_period_s").is_null() ? "-" : fmt(m.at("envelope_period_s").get<double>(), 4).c_str(),
                      r.at("lock").at("method") == "none"
                          ? "-"
                          : fmt(r.at("lock").at("residual_phase_std_rad").get<double>(), 4).c_str());
        std::cout << line;
        bhd::Json row = m;
        row["scenario"] = name;
        row["lock_method"] = r.at("lock").at("method");
        row["residual_phase_std_rad"] = r.at("lock").at("residual_phase_std_rad");
        summary.push_back(row);
    }
    {
        std::ofstream out(std::filesystem::path(dir) / "summary.json");
        out << summary.dump(2) << '\n';
    }
    if (!check) {
        return 0;
    }
    const auto results = bhd::check_reports(reports);
    bool ok = true;
    for (const auto& c : results) {
        std::cout << (c.passed ? "PASS  " : "FAIL  ") << c.name << ": " << c.detail << '\n';
        ok = ok && c.passed;
    }
    if (results.empty()) {
        std::cout << "no checks apply to the runs found\n";
    }
    return ok ? 0 : kExitCheck;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Balanced homodyne/heterodyne detection simulator"};
    app.require_subcommand(1);

    app.add_subcommand("list", "List built-in scenarios");

    RunOptions run;
    const char* env_out = std::getenv("BHD_OUT_DIR");
    run.out = env_out != nullptr && *env_out != '\0' ? env_out : "bhd_out";
    auto* run_cmd = app.add_subcommand("run", "Run scenarios by name ('all' for every built-in) or INI file");
    run_cmd->add_option("targets", run.targets, "Scenario names or config files")->required();
    run_cmd->add_option("--seed", run.seed, "Random seed");
    run_cmd->add_option("--out,-o", run.out, "Output directory (default $BHD_OUT_DIR or ./bhd_out)");
    run_cmd->add_option("--frequency-scale", run.scale, "Scale all frequencies by S and times by 1/S")
        ->check(CLI::PositiveNumber);
    run_cmd->add_option("--noise", run.noise, "Random processes on or off")->check(CLI::IsMember({"on", "off"}));
    run_cmd->add_flag("--dump-config", run.dump, "Print the effective configuration and exit");

    std::string report_dir;
    bool check = false;
    auto* report_cmd = app.add_subcommand("report", "Aggregate report.json files of a run directory");
    report_cmd->add_option("dir", report_dir, "Directory holding run subdirectories")->required();
    report_cmd->add_flag("--check", check, "Check the scenario metrics against the expected physics");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }
    if (app.got_subcommand("list")) {
        return cmd_list();
    }
    if (app.got_subcommand("run")) {
        return cmd_run(run);
    }
    return cmd_report(report_dir, check);
}
