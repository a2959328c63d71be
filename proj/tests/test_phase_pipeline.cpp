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
#include "wloc/phase_pipeline.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace wloc;

namespace
{
constexpr double kPi = std::numbers::pi;

// Independent cumulative-sum unwrap oracle.
Eigen::VectorXd unwrap_oracle(const Eigen::VectorXd &wrapped)
{
    Eigen::VectorXd out(wrapped.size());
    out(0) = wrapped(0);
    for (Eigen::Index i = 1; i < wrapped.size(); ++i)
    {
        double d = wrapped(i) - wrapped(i - 1);
        d = std::remainder(d, 2.0 * kPi);
        out(i) = out(i - 1) + d;
    }
    return out;
}
} // namespace

TEST_CASE("extract_phase of all-ones is zero")
{
    const CsiMatrix h = CsiMatrix::Ones(3, 8);
    const PhaseMatrix p = extract_phase(h);
    CHECK(p.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("extract_phase recovers a small linear phase")
{
    CsiMatrix h(1, 10);
    for (int i = 1; i <= 10; ++i)
        h(0, i - 1) = std::polar(1.0, 0.1 * i);
    const PhaseMatrix p = extract_phase(h);
    for (int i = 1; i <= 10; ++i)
        CHECK(p(0, i - 1) == doctest::Approx(0.1 * i).epsilon(1e-12));
}

TEST_CASE("extract_phase unwraps a steep linear phase without 2pi jumps")
{
    CsiMatrix h(1, 12);
    for (int i = 1; i <= 12; ++i)
        h(0, i - 1) = std::polar(1.0, 3.0 * i);
    const PhaseMatrix p = extract_phase(h);

    Eigen::VectorXd wrapped(12);
    for (int i = 1; i <= 12; ++i)
        wrapped(i - 1) = std::arg(h(0, i - 1));
    const Eigen::VectorXd expect = unwrap_oracle(wrapped);
    for (int i = 0; i < 12; ++i)
        CHECK(p(0, i) == doctest::Approx(expect(i)).epsilon(1e-12));
    for (int i = 0; i + 1 < 12; ++i)
        CHECK(p(0, i + 1) - p(0, i) == doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("extract_phase flags zero-magnitude entries")
{
    CsiMatrix h = CsiMatrix::Ones(2, 4);
    h(1, 2) = cplx(0.0, 0.0);
    CHECK_THROWS_AS(extract_phase(h), std::domain_error);
}

TEST_CASE("extract_amplitude examples and elementwise oracle")
{
    CHECK(extract_amplitude(CsiMatrix::Ones(2, 3)).isApprox(Eigen::MatrixXd::Ones(2, 3)));

    CsiMatrix h(1, 1);
    h(0, 0) = cplx(3.0, 4.0);
    CHECK(extract_amplitude(h)(0, 0) == doctest::Approx(5.0));

    std::mt19937_64 rng(11);
    std::normal_distribution<double> g(0.0, 1.0);
    CsiMatrix r(4, 7);
    for (Eigen::Index n = 0; n < 4; ++n)
        for (Eigen::Index i = 0; i < 7; ++i)
            r(n, i) = cplx(g(rng), g(rng));
    const AmplitudeMatrix a = extract_amplitude(r);
    for (Eigen::Index n = 0; n < 4; ++n)
        for (Eigen::Index i = 0; i < 7; ++i)
            CHECK(a(n, i) == doctest::Approx(std::sqrt(std::norm(r(n, i)))));
}

TEST_CASE("calibrate_phase maps linear inputs to zero")
{
    // Pure linear input: slope and intercept are removed entirely.
    Eigen::VectorXd raw(30);
    for (int i = 1; i <= 30; ++i)
        raw(i - 1) = 0.1 * i + 0.5;
    const Eigen::VectorXd out = calibrate_phase(raw);
    CHECK(out.cwiseAbs().maxCoeff() < 1e-12);

    Eigen::VectorXd pis(3);
    pis << kPi, 2.0 * kPi, 3.0 * kPi;
    CHECK(calibrate_phase(pis).cwiseAbs().maxCoeff() < 1e-12);

    CHECK(calibrate_phase(Eigen::VectorXd::Constant(8, 1.37)).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("calibrate_phase is invariant to added linear terms")
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd x(30);
    for (int i = 0; i < 30; ++i)
        x(i) = g(rng);
    const Eigen::VectorXd base = calibrate_phase(x);

    for (int trial = 0; trial < 50; ++trial)
    {
        const double a = 3.0 * g(rng);
        const double c = 5.0 * g(rng);
        Eigen::VectorXd distorted = x;
        for (int i = 1; i <= 30; ++i)
            distorted(i - 1) += a * i + c;
        CHECK((calibrate_phase(distorted) - base).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("calibrate_phase is idempotent")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd x(17);
    for (int i = 0; i < 17; ++i)
        x(i) = g(rng);
    const Eigen::VectorXd once = calibrate_phase(x);
    CHECK((calibrate_phase(once) - once).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("calibrate_phase least-squares variant is also linear-invariant")
{
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::VectorXd x(30);
    for (int i = 0; i < 30; ++i)
        x(i) = g(rng);
    const Eigen::VectorXd base = calibrate_phase(x, true);
    Eigen::VectorXd distorted = x;
    for (int i = 1; i <= 30; ++i)
        distorted(i - 1) += -0.8 * i + 2.2;
    CHECK((calibrate_phase(distorted, true) - base).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("calibrate_phase rejects short inputs")
{
    CHECK_THROWS_AS(calibrate_phase(Eigen::VectorXd::Ones(1)), std::domain_error);
}

TEST_CASE("amplitude is invariant to phase-only impairment")
{
    const ArrayLayout layout{4, 0.5, {}, 0.0};
    MultipathProfile profile{{{70.0, 30e-9, {0.9, 0.0}}, {120.0, 90e-9, {0.3, 0.2}}},
                             true};
    const CsiMatrix h = synth_csi(profile, layout, SubcarrierGrid{});
    ImpairmentSpec spec;
    spec.sfo_delta_t = 0.9;
    spec.cfo_beta = 1.1;
    spec.noise_std = 0.3;
    spec.seed = 21;
    const CsiMatrix distorted = apply_impairments(h, spec);
    CHECK((extract_amplitude(distorted) - extract_amplitude(h)).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("amplitude and phase reconstruct the CSI")
{
    std::mt19937_64 rng(9);
    std::normal_distribution<double> g(0.0, 1.0);
    CsiMatrix h(3, 30);
    for (Eigen::Index n = 0; n < 3; ++n)
        for (Eigen::Index i = 0; i < 30; ++i)
            h(n, i) = cplx(g(rng), g(rng));

    const AmplitudeMatrix amp = extract_amplitude(h);
    const PhaseMatrix phase = extract_phase(h); // unwrapped; exp is periodic
    for (Eigen::Index n = 0; n < 3; ++n)
        for (Eigen::Index i = 0; i < 30; ++i)
        {
            const cplx rebuilt = amp(n, i) * std::polar(1.0, phase(n, i));
            CHECK(std::abs(rebuilt - h(n, i)) / std::abs(h(n, i)) < 1e-12);
        }
}
