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
#include "wloc/bench.hpp"
#include "wloc/channel_sim.hpp"
#include "wloc/mlp.hpp"
#include "wloc/phase_pipeline.hpp"
#include "wloc/switched_array.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace wloc;

PYBIND11_MODULE(_core, m)
{
    m.doc() = "wloc core: CSI synthesis, phase calibration, AoA estimation, "
              "switched arrays, MLP regression and the corridor benchmark";

    py::class_<Point2D>(m, "Point2D")
        .def(py::init<>())
        .def(py::init<double, double>(), py::arg("x"), py::arg("y"))
        .def_readwrite("x", &Point2D::x)
        .def_readwrite("y", &Point2D::y)
        .def("__repr__", [](const Point2D &p) {
            return "Point2D(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
        });

    py::class_<ArrayLayout>(m, "ArrayLayout")
        .def(py::init<>())
        .def_readwrite("num_antennas", &ArrayLayout::num_antennas)
        .def_readwrite("spacing_wavelengths", &ArrayLayout::spacing_wavelengths)
        .def_readwrite("origin", &ArrayLayout::origin)
        .def_readwrite("orientation_deg", &ArrayLayout::orientation_deg);

    py::class_<SubcarrierGrid>(m, "SubcarrierGrid")
        .def(py::init<>())
        .def_readwrite("num_subcarriers", &SubcarrierGrid::num_subcarriers)
        .def_readwrite("carrier_freq_hz", &SubcarrierGrid::carrier_freq_hz)
        .def_readwrite("spacing_hz", &SubcarrierGrid::spacing_hz)
        .def("freq_hz", &SubcarrierGrid::freq_hz, py::arg("i"));

    py::class_<PathComponent>(m, "PathComponent")
        .def(py::init<>())
        .def_readwrite("aoa_deg", &PathComponent::aoa_deg)
        .def_readwrite("delay_s", &PathComponent::delay_s)
        .def_readwrite("gain", &PathComponent::gain);

    py::class_<MultipathProfile>(m, "MultipathProfile")
        .def(py::init<>())
        .def_readwrite("paths", &MultipathProfile::paths)
        .def_readwrite("has_los", &MultipathProfile::has_los);

    py::class_<ImpairmentSpec>(m, "ImpairmentSpec")
        .def(py::init<>())
        .def_readwrite("sfo_delta_t", &ImpairmentSpec::sfo_delta_t)
        .def_readwrite("cfo_beta", &ImpairmentSpec::cfo_beta)
        .def_readwrite("noise_std", &ImpairmentSpec::noise_std)
        .def_readwrite("snr_db", &ImpairmentSpec::snr_db)
        .def_readwrite("seed", &ImpairmentSpec::seed);

    // channel_sim
    m.def("steering_vector", &steering_vector, py::arg("aoa_deg"),
          py::arg("num_antennas"));
    m.def("synth_csi", &synth_csi, py::arg("profile"), py::arg("layout"),
          py::arg("grid"));
    m.def("apply_impairments", &apply_impairments, py::arg("csi"), py::arg("spec"));
    m.def("compute_true_aoa", &compute_true_aoa, py::arg("loc"), py::arg("ap_loc"),
          py::arg("layout"));

    // phase_pipeline
    m.def("extract_phase", &extract_phase, py::arg("csi"));
    m.def("extract_amplitude", &extract_amplitude, py::arg("csi"));
    m.def("calibrate_phase", &calibrate_phase, py::arg("raw"),
          py::arg("least_squares") = false);
    m.def("calibrate_phase_matrix", &calibrate_phase_matrix, py::arg("raw"),
          py::arg("least_squares") = false);

    // aoa_estimation
    py::class_<PhaseDiffAoa>(m, "PhaseDiffAoa")
        .def_readonly("aoa_deg", &PhaseDiffAoa::aoa_deg)
        .def_readonly("clamped", &PhaseDiffAoa::clamped);
    m.def("phase_diff_aoa", &phase_diff_aoa, py::arg("phase"));
    m.def(
        "correlation_matrix",
        [](const CsiMatrix &csi) { return correlation_matrix(snapshots_from_csi(csi)); },
        py::arg("csi"));
    m.def(
        "music_spectrum",
        [](const CsiMatrix &csi, int num_sources, double grid_step_deg) {
            const SubspaceSplit split =
                subspace_split(correlation_matrix(snapshots_from_csi(csi)), num_sources);
            const AoaSpectrum spec = music_spectrum(
                split, make_grid(grid_step_deg, 180.0 - grid_step_deg, grid_step_deg));
            return py::make_tuple(spec.grid_deg, spec.values);
        },
        py::arg("csi"), py::arg("num_sources") = 1, py::arg("grid_step_deg") = 0.1);
    m.def("estimate_aoa_music",
          py::overload_cast<const CsiMatrix &, int, double>(&estimate_aoa_music),
          py::arg("csi"), py::arg("num_sources") = 1, py::arg("grid_step_deg") = 0.1);

    // switched_array
    py::class_<SwitchSchedule>(m, "SwitchSchedule")
        .def_readonly("num_chains", &SwitchSchedule::num_chains)
        .def_readonly("throws_per_switch", &SwitchSchedule::throws_per_switch)
        .def_readonly("slots", &SwitchSchedule::slots);
    m.def("make_schedule", &make_schedule, py::arg("num_chains"), py::arg("throws"));

    // mlp
    py::class_<MlpSpec>(m, "MlpSpec")
        .def(py::init<>())
        .def_static("standard", &MlpSpec::standard, py::arg("input_dim"),
                    py::arg("output_dim"), py::arg("dropout") = 0.3)
        .def_readwrite("layer_widths", &MlpSpec::layer_widths)
        .def_readwrite("dropout_rate", &MlpSpec::dropout_rate)
        .def_readwrite("dropout_hidden_layer", &MlpSpec::dropout_hidden_layer);
    py::class_<MlpModel>(m, "MlpModel")
        .def_readonly("spec", &MlpModel::spec)
        .def("num_parameters", &MlpModel::num_parameters);
    py::class_<TrainConfig>(m, "TrainConfig")
        .def(py::init<>())
        .def_readwrite("learning_rate", &TrainConfig::learning_rate)
        .def_readwrite("epochs", &TrainConfig::epochs)
        .def_readwrite("batch_size", &TrainConfig::batch_size)
        .def_readwrite("seed", &TrainConfig::seed)
        .def_readwrite("input_noise_std", &TrainConfig::input_noise_std);
    py::class_<TrainResult>(m, "TrainResult")
        .def_readonly("model", &TrainResult::model)
        .def_readonly("loss_history", &TrainResult::loss_history);
    m.def("init_model", &init_model, py::arg("spec"), py::arg("seed"));
    m.def("forward", &forward, py::arg("model"), py::arg("x"));
    m.def("loss_aoa", &loss_aoa, py::arg("pred"), py::arg("truth"));
    m.def("loss_loc", &loss_loc, py::arg("pred"), py::arg("truth"));
    m.def(
        "train",
        [](const MlpModel &model, const Eigen::MatrixXd &features,
           const Eigen::MatrixXd &targets, const TrainConfig &config, bool loc_loss) {
            return train(model, RegressionDataset{features, targets}, config,
                         loc_loss ? LossKind::LocEuclid : LossKind::AoaMae);
        },
        py::arg("model"), py::arg("features"), py::arg("targets"), py::arg("config"),
        py::arg("loc_loss") = false);
    m.def("grad_check",
          [](const MlpModel &model, const Eigen::VectorXd &x,
             const Eigen::VectorXd &target, bool loc_loss) {
              return grad_check(model, x, target,
                                loc_loss ? LossKind::LocEuclid : LossKind::AoaMae);
          },
          py::arg("model"), py::arg("x"), py::arg("target"),
          py::arg("loc_loss") = false);
    m.def("save_model", &save_model, py::arg("model"), py::arg("path"));
    m.def("load_model", &load_model, py::arg("path"));

    // bench
    py::class_<ScenarioConfig>(m, "ScenarioConfig")
        .def(py::init<>())
        .def_readwrite("corridor_x_m", &ScenarioConfig::corridor_x_m)
        .def_readwrite("corridor_y_m", &ScenarioConfig::corridor_y_m)
        .def_readwrite("ap_location", &ScenarioConfig::ap_location)
        .def_readwrite("num_reference_points", &ScenarioConfig::num_reference_points)
        .def_readwrite("num_test_points", &ScenarioConfig::num_test_points)
        .def_readwrite("reference_points", &ScenarioConfig::reference_points)
        .def_readwrite("test_points", &ScenarioConfig::test_points)
        .def_readwrite("antenna_counts", &ScenarioConfig::antenna_counts)
        .def_readwrite("packets_per_rp", &ScenarioConfig::packets_per_rp)
        .def_readwrite("packets_per_tp", &ScenarioConfig::packets_per_tp)
        .def_readwrite("impairments", &ScenarioConfig::impairments)
        .def_readwrite("seed", &ScenarioConfig::seed);
    m.def(
        "gen_scenario",
        [](std::optional<ScenarioConfig> cfg) { return gen_scenario(std::move(cfg)); },
        py::arg("config") = std::nullopt);
    m.def("save_scenario_config", &save_scenario_config, py::arg("config"),
          py::arg("path"));
    m.def("load_scenario_config", &load_scenario_config, py::arg("path"));
    m.def("compute_mae", &compute_mae, py::arg("pred"), py::arg("truth"));
    m.def(
        "compute_rmse",
        [](const std::vector<Point2D> &pred, const std::vector<Point2D> &truth) {
            const RmseResult r = compute_rmse(pred, truth);
            return py::make_tuple(r.rmse, r.mean_dist);
        },
        py::arg("pred"), py::arg("truth"));
    m.def(
        "compute_cdf",
        [](const std::vector<double> &errors) {
            const CdfSeries s = compute_cdf(errors);
            return py::make_tuple(s.values, s.fractions);
        },
        py::arg("errors"));
}
