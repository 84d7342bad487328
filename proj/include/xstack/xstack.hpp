// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Umbrella header.
#ifndef XSTACK_XSTACK_HPP
#define XSTACK_XSTACK_HPP

#include "xstack/calibration.hpp"
#include "xstack/correction.hpp"
#include "xstack/kv_file.hpp"
#include "xstack/metrics.hpp"
#include "xstack/overlap.hpp"
#include "xstack/procview.hpp"
#include "xstack/synth/brute_force.hpp"
#include "xstack/synth/random_trace.hpp"
#include "xstack/synth/workload.hpp"
#include "xstack/trace_io.hpp"
#include "xstack/trace_model.hpp"

#endif  // XSTACK_XSTACK_HPP
