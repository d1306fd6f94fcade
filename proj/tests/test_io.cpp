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

#include <catch_amalgamated.hpp>

#include <sstream>

#include "bhd/io.hpp"

using namespace bhd;

TEST_CASE("shortest round-trip number formatting", "[io]") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(5e6) == "5e+06");
    CHECK(format_number(-2.5e-300) == "-2.5e-300");
    for (const double v : {1.0 / 3.0, 6.02214076e23, -1e-17, 123456.789}) {
        REQUIRE(std::stod(format_number(v)) == v);
    }
}

TEST_CASE("time series CSV", "[io]") {
    const TimeSeries ts{4.0, 1.0, {0.5, -1.25, 3.0}};
    std::ostringstream os;
    write_csv(os, ts);
    CHECK(os.str() == "time_s,value\n1,0.5\n1.25,-1.25\n1.5,3\n");
}

TEST_CASE("time series binary round trip", "[io]") {
    const TimeSeries ts{32e6, -0.125, {1.0 / 3.0, -7.5e-12, 0.0, 4e9}};
    std::stringstream ss;
    write_binary(ss, ts);
    CHECK(ss.str().size() == 32 + 4 * 8);
    CHECK(ss.str().substr(0, 8) == "BHDTS001");
    const auto back = read_binary(ss);
    CHECK(back.sample_rate == ts.sample_rate);
    CHECK(back.t0_s == ts.t0_s);
    CHECK(back.samples == ts.samples);

    std::stringstream bad("NOTMAGIC........");
    CHECK_THROWS_AS(read_binary(bad), ValidationError);
    std::stringstream cut(ss.str().substr(0, 40));
    CHECK_THROWS_AS(read_binary(cut), ValidationError);
}

TEST_CASE("trace CSV round trip", "[io]") {
    Trace tr;
    tr.config.span_hz = 3e6;
    tr.config.points = 3;
    tr.x = {3.5e6, 5e6, 6.5e6};
    tr.y_db = {0.01, 12.345678901234567, -0.2};
    std::stringstream ss;
    write_trace_csv(ss, tr);
    const auto text = ss.str();
    CHECK(text.find("# mode = swept\n") == 0);
    CHECK(text.find("# rbw_hz = 1e+05\n") != std::string::npos);
    CHECK(text.find("# detector = sample\n") != std::string::npos);
    const auto back = read_trace_csv(ss);
    CHECK(back.x == tr.x);
    CHECK(back.y_db == tr.y_db);

    std::stringstream wrong("a,b\n1,2\n");
    CHECK_THROWS_AS(read_trace_csv(wrong), ValidationError);
    std::stringstream row("x,y_db\n1;2\n");
    CHECK_THROWS_AS(read_trace_csv(row), ValidationError);
}
