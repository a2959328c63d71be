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

#include <stdexcept>
#include <string>

namespace wloc
{

enum class LossKind
{
    AoaMae,   // mean absolute error, elementwise
    LocEuclid // mean per-sample l2 distance
};

// Fully-connected regression network: ReLU hidden layers, linear output.
// Dropout (inverted) acts on a single hidden layer's activations.
struct MlpSpec
{
    std::vector<int> layer_widths;  // [input, hidden..., output]
    double dropout_rate = 0.0;
    int dropout_hidden_layer = -1;  // 0-based hidden layer index, -1 = none

    // The configuration used by both networks: four FC-256 hidden layers
    // with dropout 0.3 on the last one.
    static MlpSpec standard(int input_dim, int output_dim, double dropout = 0.3)
    {
        return MlpSpec{{input_dim, 256, 256, 256, 256, output_dim}, dropout, 3};
    }

    int num_layers() const { return static_cast<int>(layer_widths.size()) - 1; }
};

struct MlpModel
{
    MlpSpec spec;
    std::vector<Eigen::MatrixXd> weights; // out x in per layer
    std::vector<Eigen::VectorXd> biases;
    bool training_mode = false;

    std::size_t num_parameters() const;
};

struct TrainConfig
{
    double learning_rate = 1e-3;
    int epochs = 20;
    int batch_size = 128;
    std::uint64_t seed = 0;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    // Standard deviation of Gaussian noise added to the input features of
    // each training batch (denoising-style augmentation). train() treats any
    // non-positive value as disabled; a negative value additionally tells
    // higher-level pipelines (train_two_stage) to substitute their own
    // default, while an explicit 0.0 forces augmentation off everywhere.
    double input_noise_std = -1.0;
};

struct RegressionDataset
{
    Eigen::MatrixXd features; // samples x input_dim
    Eigen::MatrixXd targets;  // samples x output_dim
};

struct TrainResult
{
    MlpModel model;
    std::vector<double> loss_history; // per epoch, mean training loss
};

// Thrown when training loss goes non-finite; carries the history up to
// the failing epoch.
struct TrainingError : std::runtime_error
{
    TrainingError(const std::string &msg, std::vector<double> history)
        : std::runtime_error(msg), loss_history(std::move(history))
    {
    }
    std::vector<double> loss_history;
};

// Fan-in-scaled normal initialization (variance 2/fan_in), deterministic
// for a fixed seed.
MlpModel init_model(const MlpSpec &spec, std::uint64_t seed);

// Antenna-major row flattening of a calibrated phase matrix.
Eigen::VectorXd build_aoa_features(const PhaseMatrix &phase);

// Per antenna: num_subcarriers amplitudes, num_subcarriers calibrated
// phases, then one angle (61 values per antenna on the 30-subcarrier
// grid).
Eigen::VectorXd build_loc_features(const AmplitudeMatrix &amp, const PhaseMatrix &phase,
                                   const Eigen::VectorXd &aoa_per_antenna);

// Amplitude+phase features without the angle slots (the ablation input).
Eigen::VectorXd build_loc_features_no_angle(const AmplitudeMatrix &amp,
                                            const PhaseMatrix &phase);

// Single-sample forward pass. Dropout applies only when training_mode is
// set, using the supplied rng stream; inference is deterministic.
Eigen::VectorXd forward(const MlpModel &model, const Eigen::VectorXd &x);

// Batch losses; rows are samples.
double loss_aoa(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth);
double loss_loc(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth);

// Mini-batch Adam on the chosen loss. Deterministic for a fixed seed;
// throws std::runtime_error (with the history message) on divergence.
TrainResult train(const MlpModel &model, const RegressionDataset &dataset,
                  const TrainConfig &config, LossKind loss);

struct MlpGradients
{
    std::vector<Eigen::MatrixXd> weights;
    std::vector<Eigen::VectorXd> biases;
};

// Full-batch analytic gradient (rows are samples), dropout off.
MlpGradients analytic_gradients(const MlpModel &model, const Eigen::MatrixXd &features,
                                const Eigen::MatrixXd &targets, LossKind loss);

// Max relative error between the analytic gradient and central finite
// differences (step 1e-5) over all parameters, dropout off.
double grad_check(const MlpModel &model, const Eigen::VectorXd &x,
                  const Eigen::VectorXd &target, LossKind loss);

// Flat binary checkpoint (magic, spec header, little-endian float64
// parameters in declaration order) plus a sidecar text manifest at
// path + ".manifest.txt".
void save_model(const MlpModel &model, const std::string &path);
MlpModel load_model(const std::string &path);

void save_loss_history_csv(const std::vector<double> &history,
                           const std::string &path);

} // namespace wloc
