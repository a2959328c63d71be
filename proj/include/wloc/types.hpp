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

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <vector>

namespace wloc
{

using cplx = std::complex<double>;

// Complex channel frequency response, antennas x subcarriers.
using CsiMatrix = Eigen::MatrixXcd;

// Real-valued decompositions of a CsiMatrix, same shape.
using PhaseMatrix = Eigen::MatrixXd;
using AmplitudeMatrix = Eigen::MatrixXd;

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

struct Point2D
{
    double x = 0.0; // meters
    double y = 0.0; // meters
};

// Uniform linear array; spacing fixed to half-wavelength units of the
// carrier (spacing_wavelengths must stay 0.5 for the phase-difference
// estimator to be valid).
struct ArrayLayout
{
    int num_antennas = 12;
    double spacing_wavelengths = 0.5;
    Point2D origin{};
    double orientation_deg = 0.0; // array axis direction, CCW from +x
};

struct SubcarrierGrid
{
    int num_subcarriers = 30;
    double carrier_freq_hz = 5.32e9;
    double spacing_hz = 312.5e3;

    // f_i for 1-based subcarrier index i, centered on the carrier.
    double freq_hz(int i) const
    {
        return carrier_freq_hz + (i - 0.5 * (num_subcarriers + 1)) * spacing_hz;
    }
};

struct PathComponent
{
    double aoa_deg = 90.0; // in (0, 180)
    double delay_s = 0.0;
    cplx gain{1.0, 0.0};
};

// Ordered list of propagation paths; index 0 is the LOS path when present.
struct MultipathProfile
{
    std::vector<PathComponent> paths;
    bool has_los = true;
};

// Per-packet hardware distortion. sfo_delta_t is a dimensionless phase
// slope across the band (radians per normalized subcarrier index), not a
// time lag; cfo_beta is a constant phase in radians. noise_std is the
// std of per-subcarrier phase noise; snr_db scales complex AWGN relative
// to mean entry power (infinity disables it).
struct ImpairmentSpec
{
    double sfo_delta_t = 0.0;
    double cfo_beta = 0.0;
    double noise_std = 0.0;
    double snr_db = std::numeric_limits<double>::infinity();
    std::uint64_t seed = 0;
};

} // namespace wloc
