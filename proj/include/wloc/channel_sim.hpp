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

// Half-wavelength ULA steering vector; element n (1-based) is
// exp(-j*pi*(n-1)*cos(theta)). Throws std::domain_error outside [0, 180].
Eigen::VectorXcd steering_vector(double aoa_deg, int num_antennas);

// Superposition of per-path rank-1 contributions:
//   h(n, i) = sum_p gain_p * exp(-j*2*pi*f_i*delay_p) * a(aoa_p)[n]
CsiMatrix synth_csi(const MultipathProfile &profile, const ArrayLayout &layout,
                    const SubcarrierGrid &grid);

// Phase-domain CFO/SFO distortion plus optional phase noise and complex
// AWGN. The phase of entry (n, i) is shifted by
//   2*pi*(i/N_SC)*sfo_delta_t + cfo_beta + z_i
// with z_i shared across antennas on the same receive chain; AWGN is
// added afterwards at snr_db relative to mean entry power.
CsiMatrix apply_impairments(const CsiMatrix &csi, const ImpairmentSpec &spec);

// Angle in [0, 180] degrees between the array axis and the direction from
// the array (placed at ap_loc) to the transmitter at loc. Throws
// std::domain_error for coincident points.
double compute_true_aoa(const Point2D &loc, const Point2D &ap_loc,
                        const ArrayLayout &layout);

struct NlosSpec
{
    int count = 3;
    double min_rel_gain = 0.1;     // of LOS gain magnitude
    double max_rel_gain = 0.5;
    double max_excess_delay_s = 100e-9;
};

// LOS path from geometry (free-space 1/d gain, delay d/c) plus `count`
// random NLOS paths with larger delays and weaker gains. Deterministic
// for a fixed seed. `loc` is the transmitter, the array at ap_loc receives.
MultipathProfile scenario_profile(const Point2D &loc, const Point2D &ap_loc,
                                  const ArrayLayout &layout, const NlosSpec &nlos,
                                  std::uint64_t rng_seed);

struct Scatterer
{
    Point2D pos{};
    double rel_gain = 0.3; // of LOS gain magnitude at equal distance
};

// Environment-driven alternative to scenario_profile: every NLOS path
// reflects off a fixed scatterer, so profiles vary smoothly with loc.
// Used by the benchmark so held-out points share the multipath geometry
// of the training points.
MultipathProfile profile_from_scatterers(const Point2D &loc, const Point2D &ap_loc,
                                         const ArrayLayout &layout,
                                         const std::vector<Scatterer> &scatterers);

} // namespace wloc
