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

#include <stdexcept>
#include <string>
#include <utility>

namespace bhd {

/// Raised when a configuration value or operation precondition is invalid.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised by the scenario runner. Carries the name of the pipeline stage that
/// failed ("config", "phase_lock", "optics", "detection", "spectrum_analyzer",
/// "metrics", "output") and whether the failure was a configuration problem.
class StageError : public std::runtime_error {
public:
    StageError(std::string stage, bool config_error, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(std::move(stage)), config_error_(config_error) {}

    const std::string& stage() const noexcept { return stage_; }
    bool is_config_error() const noexcept { return config_error_; }

private:
    std::string stage_;
    bool config_error_;
};

} // namespace bhd
