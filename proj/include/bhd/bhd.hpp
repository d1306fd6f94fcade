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

#include "bhd/analyzer.hpp"
#include "bhd/config_io.hpp"
#include "bhd/detection.hpp"
#include "bhd/error.hpp"
#include "bhd/field.hpp"
#include "bhd/harness.hpp"
#include "bhd/io.hpp"
#include "bhd/metrics.hpp"
#include "bhd/optics.hpp"
#include "bhd/phase_lock.hpp"
#include "bhd/report.hpp"
#include "bhd/rng.hpp"
#include "bhd/scenario.hpp"
#include "bhd/series.hpp"
