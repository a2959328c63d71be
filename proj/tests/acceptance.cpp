// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance checks for the toolkit. Each criterion prints one
// PASS/FAIL line; the process exits nonzero if any criterion fails.

#include "wloc/aoa_estimation.hpp"
#include "wloc/bench.hpp"
#include "wloc/channel_sim.hpp"
#include "wloc/mlp.hpp"
#include "wloc/phase_pipeline.hpp"
#include "wloc/switched_array.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace wloc;

namespace
{

int g_failures = 0;

void report(int index, const std::string &name, bool ok, const std::string &detail)
{
    std::printf("[%s] criterion %2d: %s (%s)\n", ok ? "PASS" : "FAIL", index,
                name.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok)
        ++g_failures;
}

double now_s()
{
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double>(clock::now().time_since_epoch()).count();
}

CsiMatrix single_path_csi(double aoa_deg, int num_antennas, const SubcarrierGrid &grid)
{
    MultipathProfile profile;
    profile.paths.push_back(PathComponent{aoa_deg, 30e-9, cplx{1.0, 0.0}});
    return synth_csi(profile, ArrayLayout{num_antennas, 0.5, {}, 0.0}, grid);
}

// --- Criterion 1: MUSIC exactness on noiseless single-path CSI. ------------

void criterion_1()
{
    const double t0 = now_s();
    const SubcarrierGrid grid{};
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> angle(20.0, 160.0);

    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const double truth = angle(rng);
        const CsiMatrix csi = single_path_csi(truth, 8, grid);
        const double est = estimate_aoa_music(csi, 1, 0.1);
        worst = std::max(worst, std::abs(est - truth));
    }
    const double elapsed = now_s() - t0;

    std::ostringstream detail;
    detail << "max error " << worst << " deg over 100 angles, " << elapsed << " s";
    report(1, "MUSIC exactness, noiseless single path", worst <= 0.1 && elapsed < 10.0,
           detail.str());
}

// --- Criterion 2: MUSIC accuracy at 20 dB SNR with 500 snapshots. ----------

void criterion_2()
{
    const double t0 = now_s();
    const SubcarrierGrid grid{};
    std::mt19937_64 rng(202);
    std::uniform_real_distribution<double> angle(20.0, 160.0);

    double abs_err_sum = 0.0;
    const int trials = 100;
    for (int trial = 0; trial < trials; ++trial)
    {
        const double truth = angle(rng);
        const CsiMatrix clean = single_path_csi(truth, 8, grid);

        SnapshotSet snaps;
        int packet = 0;
        while (static_cast<int>(snaps.snapshots.size()) < 500)
        {
            ImpairmentSpec spec;
            spec.snr_db = 20.0;
            spec.seed = 1000003ULL * static_cast<std::uint64_t>(trial) +
                        static_cast<std::uint64_t>(packet++);
            append_snapshots(snaps, apply_impairments(clean, spec));
        }
        snaps.snapshots.resize(500);

        const double est = estimate_aoa_music(snaps, 1, 0.1);
        abs_err_sum += std::abs(est - truth);
    }
    const double mae = abs_err_sum / trials;
    const double elapsed = now_s() - t0;

    std::ostringstream detail;
    detail << "MAE " << mae << " deg over " << trials << " trials, " << elapsed
           << " s";
    report(2, "MUSIC MAE at 20 dB SNR, 500 snapshots", mae <= 1.0 && elapsed < 60.0,
           detail.str());
}

// --- Criterion 3: calibration invariance under impairment draws. ------------

void criterion_3()
{
    const SubcarrierGrid grid{};
    MultipathProfile profile;
    profile.paths.push_back(PathComponent{72.0, 25e-9, cplx{1.0, 0.0}});
    profile.paths.push_back(PathComponent{118.0, 60e-9, cplx{0.4, 0.2}});
    const CsiMatrix clean = synth_csi(profile, ArrayLayout{4, 0.5, {}, 0.0}, grid);
    const PhaseMatrix base = calibrate_phase_matrix(extract_phase(clean));

    std::mt19937_64 rng(303);
    std::uniform_real_distribution<double> dt(-5.0, 5.0);
    std::uniform_real_distribution<double> beta(-M_PI, M_PI);

    double worst = 0.0;
    for (int draw = 0; draw < 1000; ++draw)
    {
        ImpairmentSpec spec;
        spec.sfo_delta_t = dt(rng);
        spec.cfo_beta = beta(rng);
        const CsiMatrix dirty = apply_impairments(clean, spec);
        const PhaseMatrix cal = calibrate_phase_matrix(extract_phase(dirty));
        worst = std::max(worst, (cal - base).cwiseAbs().maxCoeff());
    }

    std::ostringstream detail;
    detail << "max deviation " << worst << " rad over 1000 draws";
    report(3, "calibration invariance to CFO/SFO", worst <= 1e-9, detail.str());
}

// --- Criterion 4: phase-difference estimator and MUSIC agreement. -----------

void criterion_4()
{
    const SubcarrierGrid grid{};
    double worst_pd = 0.0;
    double worst_gap = 0.0;
    for (double truth : {30.0, 60.0, 90.0, 120.0, 150.0})
    {
        const CsiMatrix csi = single_path_csi(truth, 8, grid);
        const PhaseDiffAoa pd = phase_diff_aoa(extract_phase(csi));
        const double music = estimate_aoa_music(csi, 1, 0.1);
        worst_pd = std::max(worst_pd, std::abs(pd.aoa_deg - truth));
        worst_gap = std::max(worst_gap, std::abs(pd.aoa_deg - music));
    }

    std::ostringstream detail;
    detail << "max phase-diff error " << worst_pd << " deg, max gap to MUSIC "
           << worst_gap << " deg";
    report(4, "phase-difference AoA estimator", worst_pd <= 1e-6 && worst_gap <= 2.0,
           detail.str());
}

// --- Criterion 5: switched-array capture round trip. ------------------------

void criterion_5()
{
    const SubcarrierGrid grid{};
    const ArrayLayout layout{12, 0.5, {}, 0.0};
    MultipathProfile profile;
    profile.paths.push_back(PathComponent{64.0, 20e-9, cplx{1.0, 0.0}});
    profile.paths.push_back(PathComponent{131.0, 55e-9, cplx{0.3, -0.1}});
    const CsiMatrix direct = synth_csi(profile, layout, grid);

    const SwitchSchedule schedule = make_schedule(3, 4);
    const std::vector<MultipathProfile> static_channel(4, profile);

    double worst = 0.0;
    // Zero offsets, then a nonzero compensated table.
    for (int variant = 0; variant < 2; ++variant)
    {
        PortOffsetTable offsets = PortOffsetTable::zeros(12);
        if (variant == 1)
        {
            std::mt19937_64 rng(505);
            std::uniform_real_distribution<double> off(-M_PI, M_PI);
            for (double &o : offsets.offsets)
                o = off(rng);
        }
        const GroupedCapture capture =
            capture_grouped(static_channel, schedule, layout, grid, offsets);
        const ReassembledCsi back = reassemble(capture, schedule, offsets, true);
        worst = std::max(worst, (back.csi - direct).cwiseAbs().maxCoeff());
    }

    std::ostringstream detail;
    detail << "max entrywise deviation " << worst;
    report(5, "switched-array round trip losslessness", worst <= 1e-12, detail.str());
}

// --- Criterion 6: analytic gradients against finite differences. ------------

void criterion_6()
{
    MlpSpec spec;
    spec.layer_widths = {10, 32, 32, 2};
    spec.dropout_hidden_layer = -1;
    const MlpModel model = init_model(spec, 606);

    std::mt19937_64 rng(607);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd x(10), t(2);
    for (int i = 0; i < 10; ++i)
        x(i) = gauss(rng);
    t << 0.3, -0.7;

    const double err_aoa = grad_check(model, x, t, LossKind::AoaMae);
    const double err_loc = grad_check(model, x, t, LossKind::LocEuclid);

    std::ostringstream detail;
    detail << "max relative error: aoa " << err_aoa << ", loc " << err_loc;
    report(6, "gradient check on [10,32,32,2]", err_aoa <= 1e-4 && err_loc <= 1e-4,
           detail.str());
}

// --- Criteria 7 and 8: antenna trend and AoA-stage benefit. ------------------

void criteria_7_8()
{
    const double t0 = now_s();
    const std::vector<std::uint64_t> seeds{1, 2, 3};
    const std::vector<int> counts{3, 6, 9, 12};

    std::vector<double> mean_err(counts.size(), 0.0);
    double ablation_at_max = 0.0;
    bool any_failed = false;

    for (std::uint64_t seed : seeds)
    {
        ScenarioConfig cfg;
        cfg.seed = seed;
        TrainConfig tc;
        tc.epochs = 5;
        tc.seed = seed;
        const RunReport rep = run_experiment(cfg, tc, ExperimentOptions{});
        for (std::size_t i = 0; i < rep.cells.size(); ++i)
        {
            if (rep.cells[i].failed)
                any_failed = true;
            else
                mean_err[i] += rep.cells[i].loc_mean_err_m / seeds.size();
        }
        ablation_at_max += rep.cells.back().ablation_mean_err_m / seeds.size();
    }
    const double elapsed = now_s() - t0;

    bool strictly_decreasing = !any_failed;
    for (std::size_t i = 1; i < mean_err.size(); ++i)
        if (!(mean_err[i] < mean_err[i - 1]))
            strictly_decreasing = false;
    const double reduction = 1.0 - mean_err.back() / mean_err.front();

    std::ostringstream d7;
    d7 << "mean err [m]:";
    for (std::size_t i = 0; i < counts.size(); ++i)
        d7 << " " << counts[i] << "->" << mean_err[i];
    d7 << ", reduction " << 100.0 * reduction << "%, " << elapsed << " s";
    report(7, "localization improves with antenna count",
           strictly_decreasing && reduction >= 0.25 && elapsed < 600.0, d7.str());

    std::ostringstream d8;
    d8 << "12-antenna mean err: with angles " << mean_err.back() << " m, ablation "
       << ablation_at_max << " m";
    report(8, "AoA features beat amplitude+phase ablation",
           !any_failed && mean_err.back() < ablation_at_max, d8.str());
}

// --- Criterion 9: byte-identical metric CSVs for identical seeds. -----------

std::string read_bytes(const std::filesystem::path &path)
{
    std::ifstream is(path, std::ios::binary);
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

void criterion_9()
{
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "wloc_acceptance_det";
    fs::remove_all(base);

    ScenarioConfig cfg;
    cfg.seed = 42;
    cfg.num_reference_points = 6;
    cfg.num_test_points = 3;
    cfg.packets_per_rp = 24;
    cfg.packets_per_tp = 12;
    cfg.antenna_counts = {3, 6};
    TrainConfig tc;
    tc.epochs = 2;
    tc.seed = 42;

    std::vector<std::string> bytes;
    for (int pass = 0; pass < 2; ++pass)
    {
        const fs::path out = base / ("pass" + std::to_string(pass));
        const RunReport rep = run_experiment(cfg, tc, ExperimentOptions{});
        emit_report(rep, out.string());
        bytes.push_back(read_bytes(out / "metrics.csv"));
    }

    const bool ok = !bytes[0].empty() && bytes[0] == bytes[1];
    std::ostringstream detail;
    detail << "metrics.csv sizes " << bytes[0].size() << " / " << bytes[1].size()
           << (ok ? ", identical" : ", DIFFER");
    report(9, "end-to-end run determinism", ok, detail.str());
}

// --- Criterion 10: brute-force oracle equivalence. ---------------------------

void criterion_10()
{
    bool ok = true;
    std::ostringstream detail;

    // Correlation matrix: (1/K) sum of y y^H.
    {
        const SubcarrierGrid grid{};
        MultipathProfile profile;
        profile.paths.push_back(PathComponent{77.0, 35e-9, cplx{1.0, 0.0}});
        profile.paths.push_back(PathComponent{103.0, 70e-9, cplx{0.5, 0.3}});
        const CsiMatrix csi =
            synth_csi(profile, ArrayLayout{6, 0.5, {}, 0.0}, grid);
        const SnapshotSet snaps = snapshots_from_csi(csi);

        Eigen::MatrixXcd brute = Eigen::MatrixXcd::Zero(6, 6);
        for (const Eigen::VectorXcd &y : snaps.snapshots)
            brute += y * y.adjoint();
        brute /= static_cast<double>(snaps.snapshots.size());

        const double dev = (correlation_matrix(snaps) - brute).cwiseAbs().maxCoeff();
        detail << "corr " << dev;
        ok = ok && dev <= 1e-12;

        // Spectrum values: 1 / max(||U_N^H a(theta)||^2, eps).
        const SubspaceSplit split = subspace_split(correlation_matrix(snaps), 2);
        const std::vector<double> probe_grid{20.0, 45.0, 77.0, 103.0, 150.0};
        const AoaSpectrum spec = music_spectrum(split, probe_grid);
        double spec_dev = 0.0;
        for (std::size_t i = 0; i < probe_grid.size(); ++i)
        {
            const Eigen::VectorXcd a = steering_vector(probe_grid[i], 6);
            const double denom =
                std::max((split.noise_basis.adjoint() * a).squaredNorm(), 1e-15);
            spec_dev = std::max(
                spec_dev, std::abs(spec.values[i] - 1.0 / denom) /
                              std::max(1.0, std::abs(1.0 / denom)));
        }
        detail << ", spectrum " << spec_dev;
        ok = ok && spec_dev <= 1e-9;
    }

    // MAE and RMSE against direct sums.
    {
        const std::vector<double> pred{1.0, 2.5, -0.5, 4.0};
        const std::vector<double> truth{1.5, 2.0, 0.0, 3.0};
        double mae_brute = 0.0;
        for (std::size_t i = 0; i < pred.size(); ++i)
            mae_brute += std::abs(pred[i] - truth[i]);
        mae_brute /= static_cast<double>(pred.size());
        const double mae_dev = std::abs(compute_mae(pred, truth) - mae_brute);

        const std::vector<Point2D> p{{0.0, 0.0}, {1.0, 2.0}, {3.0, 1.0}};
        const std::vector<Point2D> q{{0.5, 0.0}, {1.0, 0.0}, {0.0, 1.0}};
        double mean_brute = 0.0, sq_brute = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i)
        {
            const double d = std::hypot(p[i].x - q[i].x, p[i].y - q[i].y);
            mean_brute += d / static_cast<double>(p.size());
            sq_brute += d * d / static_cast<double>(p.size());
        }
        const RmseResult r = compute_rmse(p, q);
        const double rmse_dev = std::max(std::abs(r.mean_dist - mean_brute),
                                         std::abs(r.rmse - std::sqrt(sq_brute)));
        detail << ", mae " << mae_dev << ", rmse " << rmse_dev;
        ok = ok && mae_dev <= 1e-12 && rmse_dev <= 1e-12;
    }

    // CDF: sorted distinct values with tie-aware cumulative fractions.
    {
        const std::vector<double> errors{0.4, 0.1, 0.4, 0.9, 0.1, 0.4};
        const CdfSeries cdf = compute_cdf(errors);
        std::vector<double> sorted = errors;
        std::sort(sorted.begin(), sorted.end());
        double cdf_dev = 0.0;
        bool shape_ok = true;
        for (std::size_t i = 0; i < cdf.values.size(); ++i)
        {
            const auto upper =
                std::upper_bound(sorted.begin(), sorted.end(), cdf.values[i]);
            const double frac = static_cast<double>(upper - sorted.begin()) /
                                static_cast<double>(sorted.size());
            cdf_dev = std::max(cdf_dev, std::abs(cdf.fractions[i] - frac));
            if (i > 0 && !(cdf.values[i] > cdf.values[i - 1]))
                shape_ok = false;
        }
        detail << ", cdf " << cdf_dev;
        ok = ok && shape_ok && cdf.values.size() == 3 && cdf_dev <= 1e-12;
    }

    report(10, "oracle equivalence suite", ok, detail.str());
}

} // namespace

int main()
{
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criteria_7_8();
    criterion_9();
    criterion_10();

    std::printf("%s: %d criterion failure(s)\n",
                g_failures == 0 ? "ACCEPTANCE PASSED" : "ACCEPTANCE FAILED",
                g_failures);
    return g_failures == 0 ? 0 : 1;
}
