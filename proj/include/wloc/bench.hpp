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
#include "wloc/mlp.hpp"
#include "wloc/switched_array.hpp"
#include "wloc/types.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace wloc
{

// Corridor benchmark scenario. Reference points (RPs) train the networks,
// test points (TPs) evaluate them; the array sits at the access point and
// receives from the surveyed point.
struct ScenarioConfig
{
    double corridor_x_m = 1.2;
    double corridor_y_m = 12.0;
    // The array sits against the long wall at mid-corridor, axis along the
    // corridor, so the angle of arrival sweeps the full (0, 180) range over
    // the surveyed area and disambiguates the mirror-symmetric distances.
    Point2D ap_location{0.0, 6.0};
    double array_orientation_deg = 90.0;
    int num_reference_points = 20;
    int num_test_points = 9;
    std::vector<Point2D> reference_points; // filled by gen_scenario if empty
    std::vector<Point2D> test_points;
    std::vector<int> antenna_counts{3, 6, 9, 12};
    int packets_per_rp = 500;
    int packets_per_tp = 100;
    int num_chains = 3;
    int throws_per_switch = 4;
    // CFO/SFO linear distortion, per-subcarrier phase noise (radians), and
    // 20 dB AWGN per packet. The phase noise models oscillator and
    // measurement jitter that calibration cannot remove.
    ImpairmentSpec impairments{0.5, 0.3, 0.6, 20.0, 0};
    NlosSpec nlos{};
    std::uint64_t seed = 1;
    SubcarrierGrid grid{};

    int total_antennas() const { return num_chains * throws_per_switch; }
    ArrayLayout layout() const
    {
        return ArrayLayout{total_antennas(), 0.5, ap_location, array_orientation_deg};
    }
};

// Default point placement: RPs on a two-column grid along the corridor,
// TPs alternating between the RP columns at interleaved depths, AP against
// the long wall at mid-corridor. Validates an explicit config instead of generating one.
ScenarioConfig gen_scenario(std::optional<ScenarioConfig> config = std::nullopt);

ScenarioConfig load_scenario_config(const std::string &path);
void save_scenario_config(const ScenarioConfig &config, const std::string &path);

enum class PointKind
{
    Reference,
    Test
};

struct CsiRecord
{
    int point_id = 0;
    PointKind kind = PointKind::Reference;
    int packet_index = 0;
    int slot_index = -1; // -1 = reassembled full array
    Point2D location{};
    double true_aoa_deg = 0.0;
    CsiMatrix csi;
};

struct Dataset
{
    std::vector<CsiRecord> train; // RPs
    std::vector<CsiRecord> eval;  // TPs
};

// Fixed environment scatterers derived from the scenario seed; every
// point's multipath profile reflects off the same geometry, so held-out
// points interpolate rather than face fresh random paths.
std::vector<Scatterer> scenario_scatterers(const ScenarioConfig &config);

// Per-antenna switch-path insertion phases, fixed per scenario.
PortOffsetTable scenario_port_offsets(const ScenarioConfig &config);

// Full synthesis pipeline per point and packet: scatterer profile ->
// grouped switched capture -> reassembly -> impairments. Deterministic
// for a fixed scenario seed.
Dataset gen_dataset(const ScenarioConfig &config);

// Line-oriented record files; one packet per line, complex entries as
// real/imag float64 decimal pairs.
void write_records(const std::vector<CsiRecord> &records, const std::string &path);
std::vector<CsiRecord> read_records(const std::string &path);

struct CdfSeries
{
    std::vector<double> values;    // sorted distinct error values
    std::vector<double> fractions; // nondecreasing, ends at 1.0
};

double compute_mae(const std::vector<double> &pred, const std::vector<double> &truth);

struct RmseResult
{
    double rmse = 0.0;
    double mean_dist = 0.0;
};
RmseResult compute_rmse(const std::vector<Point2D> &pred,
                        const std::vector<Point2D> &truth);

CdfSeries compute_cdf(const std::vector<double> &errors);

struct CellResult
{
    int antennas = 0;
    double aoa_mae_deg = 0.0;
    double loc_mean_err_m = 0.0;
    double loc_rmse_m = 0.0;
    // Ablation: DNN2 without the DNN1 angle features; NaN when not run.
    double ablation_mean_err_m = std::numeric_limits<double>::quiet_NaN();
    double ablation_rmse_m = std::numeric_limits<double>::quiet_NaN();
    CdfSeries aoa_cdf;
    CdfSeries loc_cdf;
    bool failed = false;
    std::string error;
};

struct RunReport
{
    std::uint64_t scenario_seed = 0;
    std::uint64_t train_seed = 0;
    std::vector<int> antenna_counts;
    std::vector<CellResult> cells;
    double wall_clock_s = 0.0;
    ScenarioConfig config;
};

struct ExperimentOptions
{
    bool run_ablation = true;
    // Restrict the ablation to the largest antenna count (what the
    // comparison needs) to save training time.
    bool ablation_max_count_only = true;
};

// Trained two-stage pipeline for one antenna count.
struct StageModels
{
    MlpModel dnn1;
    MlpModel dnn2;
    int antennas = 0;
};

// Trains DNN1 (calibrated phases -> per-antenna AoA) and DNN2
// (amplitudes + phases + DNN1 angles -> coordinates) on the training
// partition, truncating the array to the first `antennas` rows.
StageModels train_two_stage(const Dataset &dataset, const ScenarioConfig &config,
                            const TrainConfig &train_cfg, int antennas);

// Evaluates a trained pipeline on the eval partition.
CellResult evaluate_two_stage(const StageModels &models, const Dataset &dataset,
                              const ScenarioConfig &config);

// Full benchmark across all configured antenna counts.
RunReport run_experiment(const ScenarioConfig &config, const TrainConfig &train_cfg,
                         const ExperimentOptions &options = {});

// Emits report.json, metrics.csv and per-cell CDF CSVs under out_dir.
void emit_report(const RunReport &report, const std::string &out_dir);
RunReport parse_report(const std::string &path);

// Reference values from the hardware measurements the benchmark mirrors;
// embedded in report.json as metadata, never used as targets.
struct ReferenceRow
{
    int antennas;
    double aoa_mae_deg;
    double loc_err_m;
};
const std::vector<ReferenceRow> &reference_baseline();

} // namespace wloc
