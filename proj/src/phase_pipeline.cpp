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

#include "wloc/phase_pipeline.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace wloc
{

namespace
{
constexpr double kPi = std::numbers::pi;
}

Eigen::VectorXd unwrap(const Eigen::VectorXd &wrapped)
{
    Eigen::VectorXd out = wrapped;
    double correction = 0.0;
    for (Eigen::Index i = 1; i < wrapped.size(); ++i)
    {
        double d = wrapped(i) - wrapped(i - 1);
        while (d > kPi)
        {
            correction -= 2.0 * kPi;
            d -= 2.0 * kPi;
        }
        while (d < -kPi)
        {
            correction += 2.0 * kPi;
            d += 2.0 * kPi;
        }
        out(i) = wrapped(i) + correction;
    }
    return out;
}

PhaseMatrix extract_phase(const CsiMatrix &csi)
{
    PhaseMatrix wrapped(csi.rows(), csi.cols());
    for (Eigen::Index n = 0; n < csi.rows(); ++n)
        for (Eigen::Index i = 0; i < csi.cols(); ++i)
        {
            if (std::abs(csi(n, i)) == 0.0)
                throw std::domain_error("extract_phase: zero-magnitude entry at (" +
                                        std::to_string(n) + ", " + std::to_string(i) +
                                        ")");
            wrapped(n, i) = std::arg(csi(n, i));
        }

    PhaseMatrix out(csi.rows(), csi.cols());
    for (Eigen::Index n = 0; n < csi.rows(); ++n)
        out.row(n) = unwrap(wrapped.row(n).transpose()).transpose();
    return out;
}

AmplitudeMatrix extract_amplitude(const CsiMatrix &csi)
{
    return csi.cwiseAbs();
}

Eigen::VectorXd calibrate_phase(const Eigen::VectorXd &raw, bool least_squares)
{
    const Eigen::Index n = raw.size();
    if (n < 2)
        throw std::domain_error("calibrate_phase: need at least 2 subcarriers");

    double k;
    if (least_squares)
    {
        // Ordinary least squares slope on (i, p_i), i = 1..N.
        const double mean_i = 0.5 * (n + 1);
        const double mean_p = raw.mean();
        double sxx = 0.0, sxy = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
        {
            const double di = (i + 1) - mean_i;
            sxx += di * di;
            sxy += di * (raw(i) - mean_p);
        }
        k = sxy / sxx;
    }
    else
    {
        k = (raw(n - 1) - raw(0)) / static_cast<double>(n - 1);
    }

    // Intercept taken as the mean of the slope-removed sequence. Taking
    // the raw mean instead would leave a slope-dependent constant behind,
    // breaking invariance to linear distortion.
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i)
        out(i) = raw(i) - k * (i + 1);
    out.array() -= out.mean();
    return out;
}

PhaseMatrix calibrate_phase_matrix(const PhaseMatrix &raw, bool least_squares)
{
    // Per-row calibration cancels the CFO/SFO term exactly, but it also
    // zero-means every row, and unwrapping leaves each row with an arbitrary
    // 2*pi offset -- together these would erase the cross-antenna phase
    // offsets that AoA estimation consumes. Re-attach them with a circular
    // mean of each row's phase difference to the first row: the common
    // linear distortion cancels inside the difference, and the complex
    // exponential is immune to the 2*pi unwrap ambiguity.
    PhaseMatrix out(raw.rows(), raw.cols());
    for (Eigen::Index n = 0; n < raw.rows(); ++n)
        out.row(n) =
            calibrate_phase(raw.row(n).transpose(), least_squares).transpose();
    for (Eigen::Index n = 1; n < raw.rows(); ++n)
    {
        cplx acc(0.0, 0.0);
        for (Eigen::Index i = 0; i < raw.cols(); ++i)
            acc += std::polar(1.0, raw(n, i) - raw(0, i));
        out.row(n).array() += std::arg(acc);
    }
    return out;
}

} // namespace wloc
