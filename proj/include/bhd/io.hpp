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

// File formats.
//
// TimeSeries CSV:   header "time_s,value", one row per sample.
// TimeSeries binary (little-endian):
//   offset 0   8 bytes  magic "BHDTS001"
//   offset 8   f64      sample rate (Hz)
//   offset 16  f64      start time (s)
//   offset 24  u64      sample count N
//   offset 32  N x f64  samples
// Trace CSV: '#'-prefixed "key = value" lines echoing the analyzer
//   configuration, then header "x,y_db" ("x" is seconds for zero span, Hz
//   for swept traces).
// Numbers are written in shortest round-trip form, so identical data gives
// byte-identical files.

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <system_error>
#include <vector>

#include "bhd/analyzer.hpp"
#include "bhd/error.hpp"
#include "bhd/series.hpp"

namespace bhd {

static_assert(std::endian::native == std::endian::little, "binary I/O assumes a little-endian host");

inline std::string format_number(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

inline void write_csv(std::ostream& os, const TimeSeries& ts) {
    os << "time_s,value\n";
    for (std::size_t n = 0; n < ts.size(); ++n) {
        os << format_number(ts.time_at(n)) << ',' << format_number(ts.samples[n]) << '\n';
    }
}

inline constexpr std::array<char, 8> kTimeSeriesMagic{'B', 'H', 'D', 'T', 'S', '0', '0', '1'};

inline void write_binary(std::ostream& os, const TimeSeries& ts) {
    os.write(kTimeSeriesMagic.data(), kTimeSeriesMagic.size());
    const std::uint64_t n = ts.size();
    os.write(reinterpret_cast<const char*>(&ts.sample_rate), sizeof(double));
    os.write(reinterpret_cast<const char*>(&ts.t0_s), sizeof(double));
    os.write(reinterpret_cast<const char*>(&n), sizeof(n));
    os.write(reinterpret_cast<const char*>(ts.samples.data()), static_cast<std::streamsize>(n * sizeof(double)));
}

inline TimeSeries read_binary(std::istream& is) {
    std::array<char, 8> magic{};
    is.read(magic.data(), magic.size());
    if (!is || magic != kTimeSeriesMagic) {
        throw ValidationError("not a time series block (bad magic)");
    }
    TimeSeries ts;
    std::uint64_t n = 0;
    is.read(reinterpret_cast<char*>(&ts.sample_rate), sizeof(double));
    is.read(reinterpret_cast<char*>(&ts.t0_s), sizeof(double));
    is.read(reinterpret_cast<char*>(&n), sizeof(n));
    if (!is) {
        throw ValidationError("truncated time series header");
    }
    ts.samples.resize(n);
    is.read(reinterpret_cast<char*>(ts.samples.data()), static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) {
        throw ValidationError("truncated time series payload");
    }
    return ts;
}

inline void write_trace_csv(std::ostream& os, const Trace& tr) {
    const auto& c = tr.config;
    os << "# mode = " << (c.is_zero_span() ? "zero_span" : "swept") << '\n'
       << "# center_hz = " << format_number(c.center_hz) << '\n'
       << "# span_hz = " << format_number(c.span_hz) << '\n'
       << "# rbw_hz = " << format_number(c.rbw_hz) << '\n'
       << "# vbw_hz = " << format_number(c.vbw_hz) << '\n'
       << "# sweep_time_s = " << format_number(c.sweep_time_s) << '\n'
       << "# points = " << c.points << '\n'
       << "# detector = " << to_string(c.detector) << '\n'
       << "# reference_power = " << format_number(c.reference_power) << '\n'
       << "x,y_db\n";
    for (std::size_t i = 0; i < tr.size(); ++i) {
        os << format_number(tr.x[i]) << ',' << format_number(tr.y_db[i]) << '\n';
    }
}

/// Reads the data rows of a trace CSV (comment block ignored).
inline Trace read_trace_csv(std::istream& is) {
    Trace tr;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (line.empty() || line.front() == '#') {
            continue;
        }
        if (!header_seen) {
            if (line != "x,y_db") {
                throw ValidationError("trace CSV: expected header 'x,y_db'");
            }
            header_seen = true;
            continue;
        }
        const auto comma = line.find(',');
        if (comma == std::string::npos) {
            throw ValidationError("trace CSV: malformed row '" + line + "'");
        }
        double x = 0.0;
        double y = 0.0;
        const auto r1 = std::from_chars(line.data(), line.data() + comma, x);
        const auto r2 = std::from_chars(line.data() + comma + 1, line.data() + line.size(), y);
        if (r1.ec != std::errc{} || r2.ec != std::errc{}) {
            throw ValidationError("trace CSV: malformed row '" + line + "'");
        }
        tr.x.push_back(x);
        tr.y_db.push_back(y);
    }
    return tr;
}

} // namespace bhd
