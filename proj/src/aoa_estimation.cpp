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

#include "wloc/aoa_estimation.hpp"

#include "wloc/channel_sim.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace wloc
{

namespace
{
constexpr double kPi = std::numbers::pi;

double wrap_pi(double x)
{
    x = std::fmod(x + kPi, 2.0 * kPi);
    if (x < 0.0)
        x += 2.0 * kPi;
    return x - kPi;
}
} // namespace

SnapshotSet snapshots_from_csi(const CsiMatrix &csi)
{
    SnapshotSet set;
    append_snapshots(set, csi);
    return set;
}

void append_snapshots(SnapshotSet &set, const CsiMatrix &csi)
{
    if (!set.snapshots.empty() && set.snapshots.front().size() != csi.rows())
        throw std::invalid_argument("append_snapshots: antenna count mismatch");
    for (Eigen::Index i = 0; i < csi.cols(); ++i)
        set.snapshots.push_back(csi.col(i));
}

PhaseDiffAoa phase_diff_aoa(const PhaseMatrix &phase)
{
    const Eigen::Index num_ant = phase.rows();
    const Eigen::Index num_sc = phase.cols();
    if (num_ant < 2)
        throw std::invalid_argument("phase_diff_aoa: need at least 2 antennas");

    // For the steering convention a_n = exp(-j*pi*(n-1)*cos(theta)) the
    // adjacent difference p(n) - p(n+1) equals pi*cos(theta).
    PhaseDiffAoa result;
    double acc = 0.0;
    for (Eigen::Index n = 0; n + 1 < num_ant; ++n)
        for (Eigen::Index i = 0; i < num_sc; ++i)
        {
            double d = wrap_pi(phase(n, i) - phase(n + 1, i));
            double c = d / kPi;
            if (c < -1.0 || c > 1.0)
            {
                c = std::clamp(c, -1.0, 1.0);
                ++result.clamped;
            }
            acc += std::acos(c);
        }
    result.aoa_deg =
        acc / static_cast<double>((num_ant - 1) * num_sc) * 180.0 / kPi;
    return result;
}

CorrelationMatrix correlation_matrix(const SnapshotSet &snaps)
{
    if (snaps.snapshots.empty())
        throw std::invalid_argument("correlation_matrix: no snapshots");
    const Eigen::Index n = snaps.snapshots.front().size();
    CorrelationMatrix r = CorrelationMatrix::Zero(n, n);
    for (const Eigen::VectorXcd &y : snaps.snapshots)
    {
        if (y.size() != n)
            throw std::invalid_argument("correlation_matrix: ragged snapshots");
        r.noalias() += y * y.adjoint();
    }
    return r / static_cast<double>(snaps.snapshots.size());
}

SubspaceSplit subspace_split(const CorrelationMatrix &r, int num_sources)
{
    const Eigen::Index n = r.rows();
    if (r.cols() != n)
        throw std::invalid_argument("subspace_split: matrix not square");
    if (num_sources < 1 || num_sources >= n)
        throw std::domain_error("subspace_split: need 1 <= p < num_antennas");

    const CorrelationMatrix sym = 0.5 * (r + r.adjoint());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(sym);
    if (solver.info() != Eigen::Success)
        throw std::runtime_error("subspace_split: eigendecomposition failed");

    // Eigen returns ascending order; flip to descending.
    SubspaceSplit split;
    split.eigenvalues = solver.eigenvalues().reverse();
    Eigen::MatrixXcd vecs = solver.eigenvectors().rowwise().reverse();
    split.signal_basis = vecs.leftCols(num_sources);
    split.noise_basis = vecs.rightCols(n - num_sources);
    return split;
}

AoaSpectrum music_spectrum(const SubspaceSplit &split,
                           const std::vector<double> &grid_deg)
{
    if (grid_deg.empty())
        throw std::invalid_argument("music_spectrum: empty grid");
    const int n = static_cast<int>(split.noise_basis.rows());

    AoaSpectrum spec;
    spec.grid_deg = grid_deg;
    spec.values.reserve(grid_deg.size());
    for (double theta : grid_deg)
    {
        const Eigen::VectorXcd a = steering_vector(theta, n);
        const double denom = (split.noise_basis.adjoint() * a).squaredNorm();
        spec.values.push_back(1.0 / std::max(denom, 1e-15));
    }
    return spec;
}

PeakResult peak_search(const AoaSpectrum &spec, int num_peaks)
{
    if (spec.values.empty())
        throw std::domain_error("peak_search: empty spectrum");
    if (num_peaks < 1)
        throw std::domain_error("peak_search: num_peaks must be >= 1");

    const std::size_t n = spec.values.size();
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < n; ++i)
        if (spec.values[i] > spec.values[i - 1] && spec.values[i] > spec.values[i + 1])
            peaks.push_back(i);

    std::stable_sort(peaks.begin(), peaks.end(), [&](std::size_t a, std::size_t b) {
        if (spec.values[a] != spec.values[b])
            return spec.values[a] > spec.values[b];
        return spec.grid_deg[a] < spec.grid_deg[b];
    });

    PeakResult result;
    for (std::size_t i = 0; i < peaks.size() && static_cast<int>(i) < num_peaks; ++i)
        result.peaks_deg.push_back(spec.grid_deg[peaks[i]]);
    result.shortfall = static_cast<int>(result.peaks_deg.size()) < num_peaks;

    if (n == 1)
    {
        result.boundary_deg.push_back(spec.grid_deg[0]);
    }
    else
    {
        if (spec.values[0] > spec.values[1])
            result.boundary_deg.push_back(spec.grid_deg[0]);
        if (spec.values[n - 1] > spec.values[n - 2])
            result.boundary_deg.push_back(spec.grid_deg[n - 1]);
    }
    return result;
}

std::vector<double> make_grid(double lo_deg, double hi_deg, double step_deg)
{
    if (step_deg <= 0.0 || hi_deg <= lo_deg)
        throw std::invalid_argument("make_grid: bad grid parameters");
    std::vector<double> grid;
    const int count = static_cast<int>(std::floor((hi_deg - lo_deg) / step_deg)) + 1;
    grid.reserve(count);
    for (int i = 0; i < count; ++i)
        grid.push_back(lo_deg + i * step_deg);
    return grid;
}

double estimate_aoa_music(const SnapshotSet &snaps, int num_sources,
                          double grid_step_deg)
{
    const int num_ant = static_cast<int>(snaps.snapshots.front().size());
    if (num_ant <= num_sources)
        throw std::domain_error(
            "estimate_aoa_music: need num_antennas > num_sources");

    const SubspaceSplit split =
        subspace_split(correlation_matrix(snaps), num_sources);
    const AoaSpectrum spec = music_spectrum(
        split, make_grid(grid_step_deg, 180.0 - grid_step_deg, grid_step_deg));
    const PeakResult peaks = peak_search(spec, 1);
    if (!peaks.peaks_deg.empty())
        return peaks.peaks_deg.front();
    if (!peaks.boundary_deg.empty())
        return peaks.boundary_deg.front();
    // Flat spectrum; fall back to the global argmax.
    const auto it = std::max_element(spec.values.begin(), spec.values.end());
    return spec.grid_deg[static_cast<std::size_t>(it - spec.values.begin())];
}

double estimate_aoa_music(const CsiMatrix &csi, int num_sources,
                          double grid_step_deg)
{
    return estimate_aoa_music(snapshots_from_csi(csi), num_sources, grid_step_deg);
}

int estimate_num_sources(const Eigen::VectorXd &eigenvalues_desc)
{
    const Eigen::Index n = eigenvalues_desc.size();
    if (n < 2)
        return 1;
    int best = 1;
    double best_ratio = 0.0;
    for (Eigen::Index i = 0; i + 1 < n; ++i)
    {
        const double denom = std::max(eigenvalues_desc(i + 1), 1e-300);
        const double ratio = eigenvalues_desc(i) / denom;
        if (ratio > best_ratio)
        {
            best_ratio = ratio;
            best = static_cast<int>(i) + 1;
        }
    }
    return best;
}

} // namespace wloc
