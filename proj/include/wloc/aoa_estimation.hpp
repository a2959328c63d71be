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

// One complex observation vector across the array per snapshot.
struct SnapshotSet
{
    std::vector<Eigen::VectorXcd> snapshots;
};

// Subcarrier columns become snapshots (one CsiMatrix yields num_subcarriers
// of them); multiple packets concatenate.
SnapshotSet snapshots_from_csi(const CsiMatrix &csi);
void append_snapshots(SnapshotSet &set, const CsiMatrix &csi);

using CorrelationMatrix = Eigen::MatrixXcd;

struct SubspaceSplit
{
    Eigen::MatrixXcd signal_basis; // num_antennas x p
    Eigen::MatrixXcd noise_basis;  // num_antennas x (num_antennas - p)
    Eigen::VectorXd eigenvalues;   // descending
};

struct AoaSpectrum
{
    std::vector<double> grid_deg; // ascending, within (0, 180)
    std::vector<double> values;   // positive
};

struct PeakResult
{
    std::vector<double> peaks_deg;     // sorted by descending spectrum value
    std::vector<double> boundary_deg;  // boundary half-peaks, flagged separately
    bool shortfall = false;            // fewer interior peaks than requested
};

struct PhaseDiffAoa
{
    double aoa_deg = 0.0;
    int clamped = 0; // arccos arguments clamped into [-1, 1]
};

// Eq.-(5)-style estimator: arccos of the adjacent-antenna phase difference
// over pi, averaged over subcarriers and adjacent antenna pairs. Valid for
// half-wavelength spacing only. Differences are wrapped into [-pi, pi]
// before arccos; out-of-domain values are clamped and counted.
PhaseDiffAoa phase_diff_aoa(const PhaseMatrix &phase);

// Sample correlation (1/K) * sum_k y_k y_k^H.
CorrelationMatrix correlation_matrix(const SnapshotSet &snaps);

// Eigendecomposition of the Hermitian-symmetrized matrix; the p dominant
// eigenvectors form the signal basis, the rest the noise basis.
SubspaceSplit subspace_split(const CorrelationMatrix &r, int num_sources);

// B(theta) = 1 / ||U_N^H a(theta)||^2, denominator floored at 1e-15.
AoaSpectrum music_spectrum(const SubspaceSplit &split,
                           const std::vector<double> &grid_deg);

// Strict local maxima sorted by descending value, ties broken by smaller
// angle; boundary points are reported separately as half-peaks.
PeakResult peak_search(const AoaSpectrum &spec, int num_peaks);

std::vector<double> make_grid(double lo_deg, double hi_deg, double step_deg);

// Full MUSIC pipeline; returns the top peak of the spectrum.
double estimate_aoa_music(const SnapshotSet &snaps, int num_sources,
                          double grid_step_deg = 0.1);
double estimate_aoa_music(const CsiMatrix &csi, int num_sources,
                          double grid_step_deg = 0.1);

// Largest-consecutive-eigenvalue-ratio heuristic for the source count;
// optional, off by default everywhere.
int estimate_num_sources(const Eigen::VectorXd &eigenvalues_desc);

} // namespace wloc
