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

#include "wloc/channel_sim.hpp"
#include "wloc/types.hpp"

namespace wloc
{

// Time-division switching plan extending num_chains RF chains to
// num_chains * throws antennas. Slot s activates antenna
// chain * throws + s (0-based) on each chain.
struct SwitchSchedule
{
    int num_chains = 3;
    int throws_per_switch = 4;
    std::vector<std::vector<int>> slots; // slot -> antenna indices, one per chain
    int slot_duration_packets = 1;

    int total_antennas() const { return num_chains * throws_per_switch; }
};

// Per-antenna switch-path insertion phase, radians.
struct PortOffsetTable
{
    std::vector<double> offsets;

    static PortOffsetTable zeros(int total_antennas)
    {
        return PortOffsetTable{std::vector<double>(total_antennas, 0.0)};
    }
};

struct SlotFragment
{
    int slot_index = 0;
    int packet_index = 0;
    CsiMatrix csi; // num_chains x num_subcarriers
};

struct GroupedCapture
{
    std::vector<SlotFragment> fragments; // one per slot
};

struct ReassembledCsi
{
    CsiMatrix csi;              // total_antennas x num_subcarriers
    bool drift_detected = false;
};

SwitchSchedule make_schedule(int num_chains, int throws);

// One CSI fragment per slot: the rows of synth_csi(profile_slot) selected
// by that slot's antennas, rotated by the per-antenna port offsets.
// Supplying distinct per-slot profiles models channel drift between slots.
GroupedCapture capture_grouped(const std::vector<MultipathProfile> &profile_per_slot,
                               const SwitchSchedule &schedule,
                               const ArrayLayout &layout, const SubcarrierGrid &grid,
                               const PortOffsetTable &offsets);

// Stitches the fragments back into a full-array CsiMatrix in antenna-index
// order, de-rotating the port offsets. `compensate = false` leaves the
// offsets in place to study the resulting AoA bias. The drift flag trips
// when per-chain band phase slopes jump by more than drift_threshold_rad
// between slots.
ReassembledCsi reassemble(const GroupedCapture &capture, const SwitchSchedule &schedule,
                          const PortOffsetTable &offsets, bool compensate = true,
                          double drift_threshold_rad = 0.1);

} // namespace wloc
