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
//
// wloc command-line interface.
//
//   scenario  emit a (default or validated) scenario config
//   gen       synthesize the CSI dataset for a scenario
//   train     train the two-stage pipeline from generated records
//   eval      evaluate trained checkpoints and emit metrics
//   run       scenario + gen + train + eval end to end
//   report    re-render CSV outputs from an existing report.json
//
// Exit codes: 0 success, 1 config error, 2 data error, 3 training failure.

#include "wloc/bench.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace wloc;

namespace
{

struct CommonArgs
{
    std::string config_path;
    std::string out_dir = ".";
    std::optional<std::uint64_t> seed;
    std::string antennas; // comma-separated list
    int packets_per_rp = -1;
    int packets_per_tp = -1;
    int rps = -1;
    int tps = -1;
    int epochs = -1;
};

void add_common(CLI::App *cmd, CommonArgs &args)
{
    cmd->add_option("--config", args.config_path, "scenario config JSON");
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "scenario and training seed");
    cmd->add_option("--antennas", args.antennas,
                    "comma-separated antenna counts, e.g. 3,6,9,12");
    cmd->add_option("--packets-per-rp", args.packets_per_rp,
                    "packets per reference point");
    cmd->add_option("--packets-per-tp", args.packets_per_tp,
                    "packets per test point");
    cmd->add_option("--rps", args.rps, "number of reference points");
    cmd->add_option("--tps", args.tps, "number of test points");
    cmd->add_option("--epochs", args.epochs, "training epochs");
}

std::vector<int> parse_counts(const std::string &list)
{
    std::vector<int> counts;
    std::istringstream is(list);
    std::string item;
    while (std::getline(is, item, ','))
    {
        if (item.empty())
            throw std::invalid_argument("--antennas: empty list entry");
        std::size_t used = 0;
        const int v = std::stoi(item, &used);
        if (used != item.size() || v < 1)
            throw std::invalid_argument("--antennas: bad count '" + item + "'");
        counts.push_back(v);
    }
    if (counts.empty())
        throw std::invalid_argument("--antennas: empty list");
    return counts;
}

// Loads the config (or defaults), applies CLI overrides, and validates.
ScenarioConfig resolve_scenario(const CommonArgs &args)
{
    ScenarioConfig cfg;
    if (!args.config_path.empty())
        cfg = load_scenario_config(args.config_path);
    if (args.seed)
        cfg.seed = *args.seed;
    if (!args.antennas.empty())
        cfg.antenna_counts = parse_counts(args.antennas);
    if (args.packets_per_rp >= 0)
        cfg.packets_per_rp = args.packets_per_rp;
    if (args.packets_per_tp >= 0)
        cfg.packets_per_tp = args.packets_per_tp;
    if (args.rps >= 0)
    {
        cfg.num_reference_points = args.rps;
        cfg.reference_points.clear();
    }
    if (args.tps >= 0)
    {
        cfg.num_test_points = args.tps;
        cfg.test_points.clear();
    }
    return gen_scenario(cfg);
}

TrainConfig resolve_train(const CommonArgs &args, const ScenarioConfig &cfg)
{
    TrainConfig tc;
    tc.seed = cfg.seed;
    if (args.epochs >= 0)
        tc.epochs = args.epochs;
    return tc;
}

void ensure_out(const CommonArgs &args)
{
    fs::create_directories(args.out_dir);
}

fs::path out_path(const CommonArgs &args, const std::string &name)
{
    return fs::path(args.out_dir) / name;
}

int cmd_scenario(const CommonArgs &args)
{
    const ScenarioConfig cfg = resolve_scenario(args);
    ensure_out(args);
    save_scenario_config(cfg, out_path(args, "scenario.json").string());
    std::cout << "wrote " << out_path(args, "scenario.json").string() << '\n';
    return 0;
}

int cmd_gen(const CommonArgs &args)
{
    const ScenarioConfig cfg = resolve_scenario(args);
    ensure_out(args);
    const Dataset data = gen_dataset(cfg);
    save_scenario_config(cfg, out_path(args, "scenario.json").string());
    write_records(data.train, out_path(args, "train.csirec").string());
    write_records(data.eval, out_path(args, "eval.csirec").string());
    std::cout << "wrote " << data.train.size() << " training and "
              << data.eval.size() << " evaluation records under " << args.out_dir
              << '\n';
    return 0;
}

Dataset load_dataset(const CommonArgs &args)
{
    Dataset data;
    data.train = read_records(out_path(args, "train.csirec").string());
    data.eval = read_records(out_path(args, "eval.csirec").string());
    return data;
}

std::string model_name(const char *stage, int antennas)
{
    return std::string(stage) + "_" + std::to_string(antennas) + ".wlocmlp";
}

int cmd_train(const CommonArgs &args)
{
    const ScenarioConfig cfg = resolve_scenario(args);
    const TrainConfig tc = resolve_train(args, cfg);
    ensure_out(args);
    const Dataset data = load_dataset(args);
    for (int k : cfg.antenna_counts)
    {
        const StageModels models = train_two_stage(data, cfg, tc, k);
        save_model(models.dnn1, out_path(args, model_name("dnn1", k)).string());
        save_model(models.dnn2, out_path(args, model_name("dnn2", k)).string());
        std::cout << "trained antenna count " << k << '\n';
    }
    return 0;
}

int cmd_eval(const CommonArgs &args)
{
    const ScenarioConfig cfg = resolve_scenario(args);
    ensure_out(args);
    const Dataset data = load_dataset(args);
    RunReport report;
    report.scenario_seed = cfg.seed;
    report.train_seed = cfg.seed;
    report.antenna_counts = cfg.antenna_counts;
    report.config = cfg;
    for (int k : cfg.antenna_counts)
    {
        StageModels models;
        models.dnn1 = load_model(out_path(args, model_name("dnn1", k)).string());
        models.dnn2 = load_model(out_path(args, model_name("dnn2", k)).string());
        models.antennas = k;
        report.cells.push_back(evaluate_two_stage(models, data, cfg));
    }
    emit_report(report, args.out_dir);
    std::cout << "wrote report under " << args.out_dir << '\n';
    return 0;
}

int cmd_run(const CommonArgs &args)
{
    const ScenarioConfig cfg = resolve_scenario(args);
    const TrainConfig tc = resolve_train(args, cfg);
    ensure_out(args);
    save_scenario_config(cfg, out_path(args, "scenario.json").string());
    const RunReport report = run_experiment(cfg, tc);
    emit_report(report, args.out_dir);
    for (const CellResult &cell : report.cells)
    {
        std::cout << cell.antennas << " antennas: ";
        if (cell.failed)
            std::cout << "FAILED (" << cell.error << ")\n";
        else
            std::cout << "aoa mae " << cell.aoa_mae_deg << " deg, loc err "
                      << cell.loc_mean_err_m << " m, rmse " << cell.loc_rmse_m
                      << " m\n";
    }
    std::cout << "wrote report under " << args.out_dir << '\n';
    return 0;
}

int cmd_report(const CommonArgs &args)
{
    const std::string path = args.config_path.empty()
                                 ? out_path(args, "report.json").string()
                                 : args.config_path;
    const RunReport report = parse_report(path);
    ensure_out(args);
    emit_report(report, args.out_dir);
    std::cout << "re-rendered report under " << args.out_dir << '\n';
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"wloc: angular-domain assisted WiFi CSI localization toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App *scenario = app.add_subcommand("scenario", "emit a scenario config");
    CLI::App *gen = app.add_subcommand("gen", "synthesize the CSI dataset");
    CLI::App *train_cmd = app.add_subcommand("train", "train the two-stage pipeline");
    CLI::App *eval_cmd = app.add_subcommand("eval", "evaluate trained checkpoints");
    CLI::App *run_cmd = app.add_subcommand("run", "end-to-end benchmark run");
    CLI::App *report_cmd = app.add_subcommand("report", "re-render report CSVs");
    for (CLI::App *cmd : {scenario, gen, train_cmd, eval_cmd, run_cmd, report_cmd})
        add_common(cmd, args);

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try
    {
        if (scenario->parsed())
            return cmd_scenario(args);
        if (gen->parsed())
            return cmd_gen(args);
        if (train_cmd->parsed())
            return cmd_train(args);
        if (eval_cmd->parsed())
            return cmd_eval(args);
        if (run_cmd->parsed())
            return cmd_run(args);
        if (report_cmd->parsed())
            return cmd_report(args);
    }
    catch (const TrainingError &e)
    {
        std::cerr << "training failure: " << e.what() << '\n';
        return 3;
    }
    catch (const std::invalid_argument &e)
    {
        std::cerr << "config error: " << e.what() << '\n';
        return 1;
    }
    catch (const std::domain_error &e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
    catch (const std::runtime_error &e)
    {
        std::cerr << "data error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
