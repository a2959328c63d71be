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

#include "wloc/channel_sim.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

namespace wloc
{

namespace
{
constexpr double kPi = std::numbers::pi;

double deg2rad(double d) { return d * kPi / 180.0; }

double hypot2(const Point2D &a, const Point2D &b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}
} // namespace

Eigen::VectorXcd steering_vector(double aoa_deg, int num_antennas)
{
    if (!(aoa_deg >= 0.0 && aoa_deg <= 180.0))
        throw std::domain_error("steering_vector: aoa_deg must be in [0, 180]");
    if (num_antennas < 1)
        throw std::domain_error("steering_vector: num_antennas must be >= 1");

    const double step = -kPi * std::cos(deg2rad(aoa_deg));
    Eigen::VectorXcd a(num_antennas);
    for (int n = 0; n < num_antennas; ++n)
        a(n) = std::polar(1.0, step * n);
    return a;
}

CsiMatrix synth_csi(const MultipathProfile &profile, const ArrayLayout &layout,
                    const SubcarrierGrid &grid)
{
    if (profile.paths.empty())
        throw std::invalid_argument("synth_csi: empty multipath profile");
    if (layout.num_antennas < 1 || grid.num_subcarriers < 1)
        throw std::invalid_argument("synth_csi: invalid layout or grid");

    CsiMatrix h = CsiMatrix::Zero(layout.num_antennas, grid.num_subcarriers);
    for (const PathComponent &p : profile.paths)
    {
        const Eigen::VectorXcd a = steering_vector(p.aoa_deg, layout.num_antennas);
        Eigen::RowVectorXcd freq(grid.num_subcarriers);
        for (int i = 1; i <= grid.num_subcarriers; ++i)
            freq(i - 1) = std::polar(1.0, -2.0 * kPi * grid.freq_hz(i) * p.delay_s);
        h.noalias() += p.gain * (a * freq);
    }
    return h;
}

CsiMatrix apply_impairments(const CsiMatrix &csi, const ImpairmentSpec &spec)
{
    if (spec.noise_std < 0.0)
        throw std::domain_error("apply_impairments: noise_std must be >= 0");
    const double snr_lin = std::pow(10.0, spec.snr_db / 10.0);
    if (std::isfinite(spec.snr_db) && snr_lin <= 0.0)
        throw std::domain_error("apply_impairments: non-positive linear SNR");

    const int num_ant = static_cast<int>(csi.rows());
    const int num_sc = static_cast<int>(csi.cols());
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    CsiMatrix out(num_ant, num_sc);
    for (int i = 1; i <= num_sc; ++i)
    {
        double shift = 2.0 * kPi * (static_cast<double>(i) / num_sc) * spec.sfo_delta_t +
                       spec.cfo_beta;
        if (spec.noise_std > 0.0)
            shift += spec.noise_std * gauss(rng); // shared across the receive chain
        out.col(i - 1) = csi.col(i - 1) * std::polar(1.0, shift);
    }

    if (std::isfinite(spec.snr_db))
    {
        const double mean_pow = csi.squaredNorm() / static_cast<double>(csi.size());
        const double sigma = std::sqrt(mean_pow / snr_lin / 2.0);
        for (int n = 0; n < num_ant; ++n)
            for (int i = 0; i < num_sc; ++i)
                out(n, i) += cplx(sigma * gauss(rng), sigma * gauss(rng));
    }
    return out;
}

double compute_true_aoa(const Point2D &loc, const Point2D &ap_loc,
                        const ArrayLayout &layout)
{
    const double dx = loc.x - ap_loc.x;
    const double dy = loc.y - ap_loc.y;
    const double dist = std::hypot(dx, dy);
    if (dist == 0.0)
        throw std::domain_error("compute_true_aoa: coincident transmitter and array");

    const double axis = deg2rad(layout.orientation_deg);
    const double dot = (dx * std::cos(axis) + dy * std::sin(axis)) / dist;
    return std::acos(std::clamp(dot, -1.0, 1.0)) * 180.0 / kPi;
}

MultipathProfile scenario_profile(const Point2D &loc, const Point2D &ap_loc,
                                  const ArrayLayout &layout, const NlosSpec &nlos,
                                  std::uint64_t rng_seed)
{
    const double dist = hypot2(loc, ap_loc);
    const double los_aoa = compute_true_aoa(loc, ap_loc, layout);
    const double los_gain = 1.0 / std::max(dist, 1e-3);

    MultipathProfile profile;
    profile.has_los = true;
    profile.paths.push_back({los_aoa, dist / kSpeedOfLight, cplx(los_gain, 0.0)});

    std::mt19937_64 rng(rng_seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    for (int k = 0; k < nlos.count; ++k)
    {
        PathComponent p;
        p.aoa_deg = 0.1 + u01(rng) * 179.8;
        p.delay_s = profile.paths[0].delay_s +
                    (0.01 + 0.99 * u01(rng)) * nlos.max_excess_delay_s;
        const double mag =
            los_gain * (nlos.min_rel_gain +
                        u01(rng) * (nlos.max_rel_gain - nlos.min_rel_gain));
        p.gain = std::polar(mag, 2.0 * kPi * u01(rng));
        profile.paths.push_back(p);
    }
    return profile;
}

MultipathProfile profile_from_scatterers(const Point2D &loc, const Point2D &ap_loc,
                                         const ArrayLayout &layout,
                                         const std::vector<Scatterer> &scatterers)
{
    const double d_los = hypot2(loc, ap_loc);
    const double los_gain = 1.0 / std::max(d_los, 1e-3);

    MultipathProfile profile;
    profile.has_los = true;
    profile.paths.push_back({compute_true_aoa(loc, ap_loc, layout),
                             d_los / kSpeedOfLight, cplx(los_gain, 0.0)});

    for (const Scatterer &s : scatterers)
    {
        const double d_bounce = hypot2(loc, s.pos) + hypot2(s.pos, ap_loc);
        PathComponent p;
        p.aoa_deg = compute_true_aoa(s.pos, ap_loc, layout);
        p.delay_s = d_bounce / kSpeedOfLight;
        // rel_gain is the received amplitude relative to the LOS path, the
        // same convention scenario_profile uses for its random NLOS draws.
        p.gain = cplx(s.rel_gain * los_gain, 0.0);
        profile.paths.push_back(p);
    }
    return profile;
}

} // namespace wloc
