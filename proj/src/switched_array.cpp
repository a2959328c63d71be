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

#include "wloc/switched_array.hpp"

#include "wloc/phase_pipeline.hpp"

#include <cmath>
#include <stdexcept>

namespace wloc
{

SwitchSchedule make_schedule(int num_chains, int throws)
{
    if (num_chains < 1 || throws < 1)
        throw std::invalid_argument("make_schedule: chains and throws must be >= 1");

    SwitchSchedule schedule;
    schedule.num_chains = num_chains;
    schedule.throws_per_switch = throws;
    schedule.slots.resize(throws);
    for (int s = 0; s < throws; ++s)
    {
        schedule.slots[s].reserve(num_chains);
        for (int chain = 0; chain < num_chains; ++chain)
            schedule.slots[s].push_back(chain * throws + s);
    }
    return schedule;
}

GroupedCapture capture_grouped(const std::vector<MultipathProfile> &profile_per_slot,
                               const SwitchSchedule &schedule,
                               const ArrayLayout &layout, const SubcarrierGrid &grid,
                               const PortOffsetTable &offsets)
{
    const int num_slots = static_cast<int>(schedule.slots.size());
    if (static_cast<int>(profile_per_slot.size()) != num_slots)
        throw std::domain_error("capture_grouped: one profile per slot required");
    if (static_cast<int>(offsets.offsets.size()) != schedule.total_antennas())
        throw std::invalid_argument("capture_grouped: offset table size mismatch");
    if (layout.num_antennas != schedule.total_antennas())
        throw std::invalid_argument("capture_grouped: layout/schedule mismatch");

    GroupedCapture capture;
    capture.fragments.reserve(num_slots);
    for (int s = 0; s < num_slots; ++s)
    {
        const CsiMatrix full = synth_csi(profile_per_slot[s], layout, grid);
        SlotFragment frag;
        frag.slot_index = s;
        frag.csi.resize(schedule.num_chains, grid.num_subcarriers);
        for (int chain = 0; chain < schedule.num_chains; ++chain)
        {
            const int ant = schedule.slots[s][chain];
            frag.csi.row(chain) =
                full.row(ant) * std::polar(1.0, offsets.offsets[ant]);
        }
        capture.fragments.push_back(std::move(frag));
    }
    return capture;
}

namespace
{

// Band phase slope of one chain row, used as the drift statistic: for a
// static channel it is set by the path delays alone and is identical
// across slots up to multipath-induced variation.
double band_slope(const Eigen::RowVectorXcd &row)
{
    Eigen::VectorXd ph(row.size());
    for (Eigen::Index i = 0; i < row.size(); ++i)
        ph(i) = std::arg(row(i));
    const Eigen::VectorXd un = unwrap(ph);
    return (un(un.size() - 1) - un(0)) / static_cast<double>(un.size() - 1);
}

} // namespace

ReassembledCsi reassemble(const GroupedCapture &capture, const SwitchSchedule &schedule,
                          const PortOffsetTable &offsets, bool compensate,
                          double drift_threshold_rad)
{
    const int num_slots = static_cast<int>(schedule.slots.size());
    if (static_cast<int>(offsets.offsets.size()) != schedule.total_antennas())
        throw std::invalid_argument("reassemble: offset table size mismatch");

    std::vector<const SlotFragment *> by_slot(num_slots, nullptr);
    for (const SlotFragment &frag : capture.fragments)
    {
        if (frag.slot_index < 0 || frag.slot_index >= num_slots)
            throw std::runtime_error("reassemble: fragment slot index out of range");
        by_slot[frag.slot_index] = &frag;
    }
    for (int s = 0; s < num_slots; ++s)
        if (by_slot[s] == nullptr)
            throw std::runtime_error("reassemble: missing slot " + std::to_string(s));

    const Eigen::Index num_sc = by_slot[0]->csi.cols();
    ReassembledCsi out;
    out.csi.resize(schedule.total_antennas(), num_sc);
    for (int s = 0; s < num_slots; ++s)
    {
        const SlotFragment &frag = *by_slot[s];
        if (frag.csi.rows() != schedule.num_chains || frag.csi.cols() != num_sc)
            throw std::runtime_error("reassemble: fragment shape mismatch");
        for (int chain = 0; chain < schedule.num_chains; ++chain)
        {
            const int ant = schedule.slots[s][chain];
            const double rot = compensate ? -offsets.offsets[ant] : 0.0;
            out.csi.row(ant) = frag.csi.row(chain) * std::polar(1.0, rot);
        }
    }

    for (int chain = 0; chain < schedule.num_chains && !out.drift_detected; ++chain)
    {
        const double ref = band_slope(by_slot[0]->csi.row(chain));
        for (int s = 1; s < num_slots; ++s)
            if (std::abs(band_slope(by_slot[s]->csi.row(chain)) - ref) >
                drift_threshold_rad)
            {
                out.drift_detected = true;
                break;
            }
    }
    return out;
}

} // namespace wloc
