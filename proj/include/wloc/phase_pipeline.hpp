// SPDX-License-Identifier: Apache-2.0
//
// wloc: angular-domain assisted WiFi CSI localization toolkit
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

#include "wloc/types.hpp"

namespace wloc
{

// Per-row phase angles, unwrapped along the subcarrier axis (adjacent
// jumps > pi are corrected by +/-2pi). Throws std::domain_error on a
// zero-magnitude entry, where the phase is undefined.
PhaseMatrix extract_phase(const CsiMatrix &csi);

// Entrywise modulus.
AmplitudeMatrix extract_amplitude(const CsiMatrix &csi);

// Standard +/-2pi unwrap of a single phase sequence.
Eigen::VectorXd unwrap(const Eigen::VectorXd &wrapped);

// Removes the linear phase distortion of a single antenna row:
//   p_i = p^_i - k*i - b,  k = (p^_N - p^_1)/(N - 1),
//   b = mean_j(p^_j - k*j)
// with 1-based index i. The intercept is the mean of the slope-removed
// sequence (not the raw mean), so the output is exactly invariant to any
// added linear term a*i + c and has zero mean. `least_squares` swaps the
// endpoint slope for an ordinary least-squares fit. Input must be
// unwrapped; throws std::domain_error for fewer than 2 entries.
Eigen::VectorXd calibrate_phase(const Eigen::VectorXd &raw, bool least_squares = false);

// calibrate_phase applied to every antenna row independently.
PhaseMatrix calibrate_phase_matrix(const PhaseMatrix &raw, bool least_squares = false);

} // namespace wloc
