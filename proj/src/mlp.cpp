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

#include "wloc/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

namespace wloc
{

std::size_t MlpModel::num_parameters() const
{
    std::size_t n = 0;
    for (std::size_t l = 0; l < weights.size(); ++l)
        n += static_cast<std::size_t>(weights[l].size()) + biases[l].size();
    return n;
}

MlpModel init_model(const MlpSpec &spec, std::uint64_t seed)
{
    if (spec.layer_widths.size() < 2)
        throw std::invalid_argument("init_model: need at least input and output widths");
    for (int w : spec.layer_widths)
        if (w < 1)
            throw std::invalid_argument("init_model: layer widths must be >= 1");
    if (spec.dropout_rate < 0.0 || spec.dropout_rate >= 1.0)
        throw std::invalid_argument("init_model: dropout_rate must be in [0, 1)");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);

    MlpModel model;
    model.spec = spec;
    for (int l = 0; l < spec.num_layers(); ++l)
    {
        const int fan_in = spec.layer_widths[l];
        const int fan_out = spec.layer_widths[l + 1];
        const double std_dev = std::sqrt(2.0 / fan_in);
        Eigen::MatrixXd w(fan_out, fan_in);
        for (int r = 0; r < fan_out; ++r)
            for (int c = 0; c < fan_in; ++c)
                w(r, c) = std_dev * gauss(rng);
        model.weights.push_back(std::move(w));
        model.biases.push_back(Eigen::VectorXd::Zero(fan_out));
    }
    return model;
}

Eigen::VectorXd build_aoa_features(const PhaseMatrix &phase)
{
    Eigen::VectorXd out(phase.size());
    Eigen::Index k = 0;
    for (Eigen::Index n = 0; n < phase.rows(); ++n)
        for (Eigen::Index i = 0; i < phase.cols(); ++i)
            out(k++) = phase(n, i);
    return out;
}

Eigen::VectorXd build_loc_features(const AmplitudeMatrix &amp, const PhaseMatrix &phase,
                                   const Eigen::VectorXd &aoa_per_antenna)
{
    if (amp.rows() != phase.rows() || amp.cols() != phase.cols() ||
        aoa_per_antenna.size() != amp.rows())
        throw std::invalid_argument("build_loc_features: shape mismatch");

    const Eigen::Index num_ant = amp.rows();
    const Eigen::Index num_sc = amp.cols();
    Eigen::VectorXd out(num_ant * (2 * num_sc + 1));
    Eigen::Index k = 0;
    for (Eigen::Index n = 0; n < num_ant; ++n)
    {
        for (Eigen::Index i = 0; i < num_sc; ++i)
            out(k++) = amp(n, i);
        for (Eigen::Index i = 0; i < num_sc; ++i)
            out(k++) = phase(n, i);
        out(k++) = aoa_per_antenna(n);
    }
    return out;
}

Eigen::VectorXd build_loc_features_no_angle(const AmplitudeMatrix &amp,
                                            const PhaseMatrix &phase)
{
    if (amp.rows() != phase.rows() || amp.cols() != phase.cols())
        throw std::invalid_argument("build_loc_features_no_angle: shape mismatch");

    const Eigen::Index num_ant = amp.rows();
    const Eigen::Index num_sc = amp.cols();
    Eigen::VectorXd out(num_ant * 2 * num_sc);
    Eigen::Index k = 0;
    for (Eigen::Index n = 0; n < num_ant; ++n)
    {
        for (Eigen::Index i = 0; i < num_sc; ++i)
            out(k++) = amp(n, i);
        for (Eigen::Index i = 0; i < num_sc; ++i)
            out(k++) = phase(n, i);
    }
    return out;
}

namespace
{

// Batched forward pass; columns are samples. Dropout masks, when given,
// are applied after the ReLU of the matching hidden layer.
Eigen::MatrixXd forward_batch(const MlpModel &model, const Eigen::MatrixXd &x,
                              const Eigen::MatrixXd *dropout_mask,
                              std::vector<Eigen::MatrixXd> *activations)
{
    Eigen::MatrixXd a = x;
    if (activations)
        activations->push_back(a);
    const int layers = model.spec.num_layers();
    for (int l = 0; l < layers; ++l)
    {
        Eigen::MatrixXd z = (model.weights[l] * a).colwise() + model.biases[l];
        if (l + 1 < layers)
        {
            z = z.cwiseMax(0.0);
            if (dropout_mask && l == model.spec.dropout_hidden_layer)
                z = z.cwiseProduct(*dropout_mask);
        }
        a = std::move(z);
        if (activations)
            activations->push_back(a);
    }
    return a;
}

struct LossGrad
{
    double value = 0.0;
    Eigen::MatrixXd grad; // d loss / d pred, same shape as pred
};

// pred, truth: output_dim x batch.
LossGrad eval_loss(LossKind kind, const Eigen::MatrixXd &pred,
                   const Eigen::MatrixXd &truth)
{
    if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
        throw std::invalid_argument("loss: shape mismatch");
    if (pred.cols() == 0)
        throw std::domain_error("loss: empty batch");

    LossGrad out;
    const Eigen::MatrixXd err = pred - truth;
    if (kind == LossKind::AoaMae)
    {
        const double scale = 1.0 / static_cast<double>(err.size());
        out.value = err.cwiseAbs().sum() * scale;
        out.grad = err.unaryExpr([](double e) {
                       return e > 0.0 ? 1.0 : (e < 0.0 ? -1.0 : 0.0);
                   }) *
                   scale;
    }
    else
    {
        const double scale = 1.0 / static_cast<double>(err.cols());
        out.grad.resize(err.rows(), err.cols());
        for (Eigen::Index c = 0; c < err.cols(); ++c)
        {
            const double d = err.col(c).norm();
            out.value += d * scale;
            out.grad.col(c) = d > 0.0 ? Eigen::VectorXd(err.col(c) * (scale / d))
                                      : Eigen::VectorXd::Zero(err.rows());
        }
    }
    return out;
}

struct Gradients
{
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
};

// Backpropagation through the stored activations.
Gradients backward_batch(const MlpModel &model,
                         const std::vector<Eigen::MatrixXd> &activations,
                         const Eigen::MatrixXd *dropout_mask,
                         const Eigen::MatrixXd &dloss_dpred)
{
    const int layers = model.spec.num_layers();
    Gradients g;
    g.w.resize(layers);
    g.b.resize(layers);

    Eigen::MatrixXd delta = dloss_dpred;
    for (int l = layers - 1; l >= 0; --l)
    {
        g.w[l].noalias() = delta * activations[l].transpose();
        g.b[l] = delta.rowwise().sum();
        if (l > 0)
        {
            Eigen::MatrixXd back = model.weights[l].transpose() * delta;
            // activations[l] already includes ReLU (and dropout); its
            // zeros kill the gradient, the dropout scale is reapplied.
            const Eigen::MatrixXd &act = activations[l];
            Eigen::MatrixXd gate =
                act.unaryExpr([](double v) { return v > 0.0 ? 1.0 : 0.0; });
            if (dropout_mask && (l - 1) == model.spec.dropout_hidden_layer)
                gate = gate.cwiseProduct(*dropout_mask);
            delta = back.cwiseProduct(gate);
        }
    }
    return g;
}

} // namespace

Eigen::VectorXd forward(const MlpModel &model, const Eigen::VectorXd &x)
{
    if (x.size() != model.spec.layer_widths.front())
        throw std::invalid_argument("forward: input size mismatch");
    const Eigen::MatrixXd out = forward_batch(model, x, nullptr, nullptr);
    if (!out.allFinite())
        throw std::runtime_error("forward: non-finite output");
    return out.col(0);
}

// Public wrappers take rows-as-samples matrices, matching
// RegressionDataset; the internal batch layout is transposed.
double loss_aoa(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth)
{
    return eval_loss(LossKind::AoaMae, pred.transpose(), truth.transpose()).value;
}

double loss_loc(const Eigen::MatrixXd &pred, const Eigen::MatrixXd &truth)
{
    return eval_loss(LossKind::LocEuclid, pred.transpose(), truth.transpose()).value;
}

TrainResult train(const MlpModel &model, const RegressionDataset &dataset,
                  const TrainConfig &config, LossKind loss)
{
    if (config.learning_rate <= 0.0)
        throw std::invalid_argument("train: learning_rate must be > 0");
    if (dataset.features.rows() != dataset.targets.rows())
        throw std::invalid_argument("train: feature/target row mismatch");
    if (dataset.features.cols() != model.spec.layer_widths.front() ||
        dataset.targets.cols() != model.spec.layer_widths.back())
        throw std::invalid_argument("train: dataset width mismatch");

    TrainResult result;
    result.model = model;
    if (config.epochs == 0)
    {
        result.model.training_mode = false;
        return result;
    }

    const Eigen::Index num_samples = dataset.features.rows();
    const int batch_size = std::max(1, config.batch_size);
    const double keep =
        1.0 - (model.spec.dropout_hidden_layer >= 0 ? model.spec.dropout_rate : 0.0);

    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    std::normal_distribution<double> unit_gauss(0.0, 1.0);

    Gradients m, v;
    m.w.resize(model.weights.size());
    m.b.resize(model.biases.size());
    v.w.resize(model.weights.size());
    v.b.resize(model.biases.size());
    for (std::size_t l = 0; l < model.weights.size(); ++l)
    {
        m.w[l] = Eigen::MatrixXd::Zero(model.weights[l].rows(), model.weights[l].cols());
        v.w[l] = m.w[l];
        m.b[l] = Eigen::VectorXd::Zero(model.biases[l].size());
        v.b[l] = m.b[l];
    }

    MlpModel &net = result.model;
    net.training_mode = true;
    std::vector<Eigen::Index> order(num_samples);
    std::iota(order.begin(), order.end(), 0);

    long step = 0;
    for (int epoch = 0; epoch < config.epochs; ++epoch)
    {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        Eigen::Index seen = 0;

        for (Eigen::Index start = 0; start < num_samples; start += batch_size)
        {
            const Eigen::Index bsz = std::min<Eigen::Index>(batch_size, num_samples - start);
            Eigen::MatrixXd x(dataset.features.cols(), bsz);
            Eigen::MatrixXd t(dataset.targets.cols(), bsz);
            for (Eigen::Index k = 0; k < bsz; ++k)
            {
                x.col(k) = dataset.features.row(order[start + k]).transpose();
                t.col(k) = dataset.targets.row(order[start + k]).transpose();
            }

            if (config.input_noise_std > 0.0)
            {
                for (Eigen::Index c = 0; c < bsz; ++c)
                    for (Eigen::Index r = 0; r < x.rows(); ++r)
                        x(r, c) += config.input_noise_std * unit_gauss(rng);
            }

            Eigen::MatrixXd mask;
            const Eigen::MatrixXd *mask_ptr = nullptr;
            if (net.spec.dropout_hidden_layer >= 0 && net.spec.dropout_rate > 0.0)
            {
                const int width =
                    net.spec.layer_widths[net.spec.dropout_hidden_layer + 1];
                mask.resize(width, bsz);
                for (Eigen::Index c = 0; c < bsz; ++c)
                    for (int r = 0; r < width; ++r)
                        mask(r, c) = u01(rng) < keep ? 1.0 / keep : 0.0;
                mask_ptr = &mask;
            }

            std::vector<Eigen::MatrixXd> acts;
            const Eigen::MatrixXd pred = forward_batch(net, x, mask_ptr, &acts);
            const LossGrad lg = eval_loss(loss, pred, t);
            if (!std::isfinite(lg.value))
                throw TrainingError("train: loss diverged at epoch " +
                                        std::to_string(epoch),
                                    result.loss_history);
            epoch_loss += lg.value * static_cast<double>(bsz);
            seen += bsz;

            const Gradients g = backward_batch(net, acts, mask_ptr, lg.grad);

            ++step;
            const double bc1 = 1.0 - std::pow(config.adam_beta1, step);
            const double bc2 = 1.0 - std::pow(config.adam_beta2, step);
            for (std::size_t l = 0; l < net.weights.size(); ++l)
            {
                m.w[l] = config.adam_beta1 * m.w[l] + (1.0 - config.adam_beta1) * g.w[l];
                v.w[l] = config.adam_beta2 * v.w[l] +
                         (1.0 - config.adam_beta2) * g.w[l].cwiseProduct(g.w[l]);
                net.weights[l].array() -=
                    config.learning_rate * (m.w[l].array() / bc1) /
                    ((v.w[l].array() / bc2).sqrt() + config.adam_eps);

                m.b[l] = config.adam_beta1 * m.b[l] + (1.0 - config.adam_beta1) * g.b[l];
                v.b[l] = config.adam_beta2 * v.b[l] +
                         (1.0 - config.adam_beta2) * g.b[l].cwiseProduct(g.b[l]);
                net.biases[l].array() -=
                    config.learning_rate * (m.b[l].array() / bc1) /
                    ((v.b[l].array() / bc2).sqrt() + config.adam_eps);
            }
        }
        result.loss_history.push_back(epoch_loss / static_cast<double>(seen));
    }

    net.training_mode = false;
    return result;
}

MlpGradients analytic_gradients(const MlpModel &model, const Eigen::MatrixXd &features,
                                const Eigen::MatrixXd &targets, LossKind loss)
{
    MlpModel net = model;
    net.training_mode = false;
    const Eigen::MatrixXd x = features.transpose();
    const Eigen::MatrixXd t = targets.transpose();

    std::vector<Eigen::MatrixXd> acts;
    const Eigen::MatrixXd pred = forward_batch(net, x, nullptr, &acts);
    const LossGrad lg = eval_loss(loss, pred, t);
    Gradients g = backward_batch(net, acts, nullptr, lg.grad);
    return MlpGradients{std::move(g.w), std::move(g.b)};
}

double grad_check(const MlpModel &model, const Eigen::VectorXd &x,
                  const Eigen::VectorXd &target, LossKind loss)
{
    MlpModel net = model;
    net.training_mode = false;

    std::vector<Eigen::MatrixXd> acts;
    const Eigen::MatrixXd pred = forward_batch(net, x, nullptr, &acts);
    const LossGrad lg = eval_loss(loss, pred, target);
    const Gradients g = backward_batch(net, acts, nullptr, lg.grad);

    const double step = 1e-5;
    const auto loss_at = [&]() {
        return eval_loss(loss, forward_batch(net, x, nullptr, nullptr), target).value;
    };

    double max_rel = 0.0;
    const auto check = [&](double &param, double analytic) {
        const double orig = param;
        param = orig + step;
        const double up = loss_at();
        param = orig - step;
        const double down = loss_at();
        param = orig;
        const double numeric = (up - down) / (2.0 * step);
        const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, std::abs(analytic - numeric) / denom);
    };

    for (std::size_t l = 0; l < net.weights.size(); ++l)
    {
        for (Eigen::Index r = 0; r < net.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < net.weights[l].cols(); ++c)
                check(net.weights[l](r, c), g.w[l](r, c));
        for (Eigen::Index r = 0; r < net.biases[l].size(); ++r)
            check(net.biases[l](r), g.b[l](r));
    }
    return max_rel;
}

namespace
{
constexpr char kMagic[8] = {'W', 'L', 'O', 'C', 'M', 'L', 'P', '1'};

void write_i64(std::ostream &os, std::int64_t v)
{
    os.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

void write_f64(std::ostream &os, double v)
{
    os.write(reinterpret_cast<const char *>(&v), sizeof(v));
}

std::int64_t read_i64(std::istream &is)
{
    std::int64_t v = 0;
    is.read(reinterpret_cast<char *>(&v), sizeof(v));
    return v;
}

double read_f64(std::istream &is)
{
    double v = 0.0;
    is.read(reinterpret_cast<char *>(&v), sizeof(v));
    return v;
}
} // namespace

void save_model(const MlpModel &model, const std::string &path)
{
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw std::runtime_error("save_model: cannot open " + path);

    os.write(kMagic, sizeof(kMagic));
    write_i64(os, static_cast<std::int64_t>(model.spec.layer_widths.size()));
    for (int w : model.spec.layer_widths)
        write_i64(os, w);
    write_f64(os, model.spec.dropout_rate);
    write_i64(os, model.spec.dropout_hidden_layer);
    for (std::size_t l = 0; l < model.weights.size(); ++l)
    {
        for (Eigen::Index r = 0; r < model.weights[l].rows(); ++r)
            for (Eigen::Index c = 0; c < model.weights[l].cols(); ++c)
                write_f64(os, model.weights[l](r, c));
        for (Eigen::Index r = 0; r < model.biases[l].size(); ++r)
            write_f64(os, model.biases[l](r));
    }
    if (!os)
        throw std::runtime_error("save_model: write failed for " + path);

    std::ofstream manifest(path + ".manifest.txt");
    manifest << "format: wloc-mlp-checkpoint v1\n";
    manifest << "layer_widths:";
    for (int w : model.spec.layer_widths)
        manifest << ' ' << w;
    manifest << "\ndropout_rate: " << model.spec.dropout_rate << '\n';
    manifest << "dropout_hidden_layer: " << model.spec.dropout_hidden_layer << '\n';
    manifest << "parameters: " << model.num_parameters() << '\n';
    manifest << "dtype: float64 little-endian, weights row-major then bias per layer\n";
}

MlpModel load_model(const std::string &path)
{
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw std::runtime_error("load_model: cannot open " + path);

    char magic[8];
    is.read(magic, sizeof(magic));
    if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw std::runtime_error("load_model: bad magic in " + path);

    MlpSpec spec;
    const std::int64_t num_widths = read_i64(is);
    if (num_widths < 2 || num_widths > 64)
        throw std::runtime_error("load_model: corrupt header");
    for (std::int64_t i = 0; i < num_widths; ++i)
        spec.layer_widths.push_back(static_cast<int>(read_i64(is)));
    spec.dropout_rate = read_f64(is);
    spec.dropout_hidden_layer = static_cast<int>(read_i64(is));

    MlpModel model;
    model.spec = spec;
    for (int l = 0; l < spec.num_layers(); ++l)
    {
        Eigen::MatrixXd w(spec.layer_widths[l + 1], spec.layer_widths[l]);
        for (Eigen::Index r = 0; r < w.rows(); ++r)
            for (Eigen::Index c = 0; c < w.cols(); ++c)
                w(r, c) = read_f64(is);
        Eigen::VectorXd b(spec.layer_widths[l + 1]);
        for (Eigen::Index r = 0; r < b.size(); ++r)
            b(r) = read_f64(is);
        model.weights.push_back(std::move(w));
        model.biases.push_back(std::move(b));
    }
    if (!is)
        throw std::runtime_error("load_model: truncated file " + path);
    return model;
}

void save_loss_history_csv(const std::vector<double> &history, const std::string &path)
{
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("save_loss_history_csv: cannot open " + path);
    os << "epoch,loss\n";
    os.precision(17);
    for (std::size_t i = 0; i < history.size(); ++i)
        os << i << ',' << history[i] << '\n';
}

} // namespace wloc
