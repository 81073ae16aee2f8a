// Command-line frontend: simulate synthetic FTM ranging datasets, train
// unknown-AP coordinates and per-device calibration curves on ranging logs,
// localize tracks with the trained parameters, and evaluate the results.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ftmloc/io.hpp"
#include "ftmloc/metrics.hpp"
#include "ftmloc/rng.hpp"
#include "ftmloc/simulator.hpp"
#include "ftmloc/trainer.hpp"
#include "ftmloc/trilateration.hpp"

namespace fs = std::filesystem;
using namespace ftmloc;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitInput = 2;

Algo parse_algo(const std::string& name) {
    if (name == "ls") return Algo::LS;
    if (name == "wls") return Algo::WLS;
    if (name == "ekf") return Algo::EKF;
    throw ValidationError("unknown algorithm '" + name + "' (expected ls|wls|ekf)");
}

struct SimulateArgs {
    std::string scene_path;
    std::string out_dir;
    int devices = 3;
    int steps = 600;
    double dt = 0.5;
    double speed = 0.833;
    int burst = 8;
    double noise = 1.0;
    std::vector<double> distortion = {3.0, 1.08, 0.003};
    double range_limit = 40.0;
    int test_steps = 480;
    std::uint64_t seed = 1;
};

int cmd_simulate(const SimulateArgs& a) {
    const Scene scene = load_scene(a.scene_path);
    if (a.distortion.size() != 3)
        throw ValidationError("--distortion needs exactly 3 coefficients e0,e1,e2");

    DistortionModel model;
    model.forward = Eigen::Vector3d(a.distortion[0], a.distortion[1], a.distortion[2]);
    model.noise_sigma = a.noise;
    model.burst_size = a.burst;
    model.range_limit = a.range_limit;
    std::vector<DistortionModel> models(static_cast<std::size_t>(a.devices), model);

    const SimDataset train_set = simulate_dataset(scene, models, a.steps, a.dt, a.speed, a.seed);

    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    save_ranging_log(train_set.tracks, out / "train.rlog");
    PointSeries truth_tracks;
    for (const DeviceTrack& t : train_set.tracks) {
        auto& series = truth_tracks[t.device_id];
        for (std::size_t i = 0; i < t.truth.size(); ++i)
            series.emplace_back(t.snapshots[i].step, t.truth[i]);
    }
    save_tracks(truth_tracks, out / "train_truth.track");
    save_params(train_set.truth, out / "truth.params");

    if (a.test_steps > 0) {
        const SimDataset test_set = simulate_dataset(scene, models, a.test_steps, a.dt, a.speed,
                                                     derive_seed(a.seed, "test"));
        save_ranging_log(test_set.tracks, out / "test.rlog");
        PointSeries test_truth;
        for (const DeviceTrack& t : test_set.tracks) {
            auto& series = test_truth[t.device_id];
            for (std::size_t i = 0; i < t.truth.size(); ++i)
                series.emplace_back(t.snapshots[i].step, t.truth[i]);
        }
        save_tracks(test_truth, out / "test_truth.track");
        // Reference coefficients refit on the held-out data: the upper-bound
        // benchmark calibration.
        save_params(test_set.truth, out / "benchmark.params");
    }
    return 0;
}

struct TrainArgs {
    std::string scene_path;
    std::vector<std::string> logs;
    std::string out_params;
    std::string report_path;
    TrainerConfig cfg;
    std::string algo = "ekf";
};

int cmd_train(const TrainArgs& a) {
    const Scene scene = load_scene(a.scene_path);
    std::vector<DeviceTrack> tracks;
    std::set<std::string> seen;
    for (const std::string& log : a.logs) {
        for (DeviceTrack& t : load_ranging_log(log)) {
            if (!seen.insert(t.device_id).second)
                throw ValidationError("device '" + t.device_id + "' appears in multiple logs");
            tracks.push_back(std::move(t));
        }
    }

    TrainerConfig cfg = a.cfg;
    cfg.algo = parse_algo(a.algo);

    TrainReport report;
    try {
        const ParamSet best = train(tracks, scene, cfg, report);
        save_params(best, a.out_params);
    } catch (...) {
        if (!a.report_path.empty()) save_report(report, a.report_path);
        throw;
    }
    if (!a.report_path.empty()) save_report(report, a.report_path);
    return 0;
}

struct LocateArgs {
    std::string scene_path;
    std::string params_path;
    std::string log_path;
    std::string out_path;
    std::string algo = "ekf";
    int k_max = 5;
    double std_floor = 0.1;
    double ekf_q = 1.0;
};

int cmd_locate(const LocateArgs& a) {
    const Scene scene = load_scene(a.scene_path);
    const ParamSet params = load_params(a.params_path);
    const std::vector<DeviceTrack> tracks = load_ranging_log(a.log_path);

    LocalizeConfig cfg;
    cfg.algo = parse_algo(a.algo);
    cfg.k_max = a.k_max;
    cfg.std_floor = a.std_floor;
    cfg.ekf_q = a.ekf_q;

    PointSeries fixes_out;
    for (const DeviceTrack& t : tracks) {
        const FixSeries fixes = localize_track(t, scene, params, cfg);
        auto& series = fixes_out[t.device_id];
        for (const FixEntry& e : fixes.entries) series.emplace_back(e.step, e.estimate);
    }
    save_tracks(fixes_out, a.out_path);
    return 0;
}

struct EvalArgs {
    std::string which;
    std::string params_path;
    std::string truth_params_path;
    std::string scene_path;
    std::string log_path;
    std::string truth_tracks_path;
    std::string est_path;
    std::string out_path;
    std::string cdf_path;
};

void write_metrics(const std::vector<std::pair<std::string, double>>& rows,
                   const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(path + ": cannot open for writing");
    out << "ftmloc-metrics v1\n";
    for (const auto& [name, value] : rows) out << name << " " << fmt_double(value) << "\n";
    out.flush();
    if (!out) throw Error(path + ": write failed");
}

void write_cdf(const std::vector<std::pair<std::string, CdfSeries>>& series,
               const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw Error(path + ": cannot open for writing");
    out << "ftmloc-cdf v1\n";
    for (const auto& [label, cdf] : series)
        for (const auto& [err, frac] : cdf)
            out << label << " " << fmt_double(err) << " " << fmt_double(frac) << "\n";
    out.flush();
    if (!out) throw Error(path + ": write failed");
}

int cmd_eval(const EvalArgs& a) {
    if (a.which == "ap-coords") {
        const ParamSet est = load_params(a.params_path);
        const ParamSet truth = load_params(a.truth_params_path);
        const ErrorStats stats = coord_errors(est.unknown_coords, truth.unknown_coords);
        write_metrics({{"ap-coords-mae", stats.mae},
                       {"ap-coords-rmse", stats.rmse},
                       {"ap-coords-max", stats.max}},
                      a.out_path);
        return 0;
    }

    if (a.which == "ranging") {
        const Scene scene = load_scene(a.scene_path);
        const ParamSet params = load_params(a.params_path);
        const ParamSet truth_params = load_params(a.truth_params_path);
        const PointSeries truth_tracks = load_tracks(a.truth_tracks_path);

        auto true_ap = [&](const std::string& id) -> Vec2 {
            if (auto it = truth_params.unknown_coords.find(id);
                it != truth_params.unknown_coords.end())
                return it->second;
            const ApNode* ap = scene.find(id);
            if (ap == nullptr || !ap->coords)
                throw KeyMismatch("no true position for AP '" + id + "'");
            return *ap->coords;
        };

        std::vector<std::pair<double, double>> raw_pairs;
        std::vector<std::pair<double, double>> cal_pairs;
        for (const DeviceTrack& t : load_ranging_log(a.log_path)) {
            const auto truth_it = truth_tracks.find(t.device_id);
            if (truth_it == truth_tracks.end())
                throw KeyMismatch("no truth trajectory for device '" + t.device_id + "'");
            std::map<int, Vec2> truth_by_step(truth_it->second.begin(), truth_it->second.end());
            const auto calib_it = params.calib.find(t.device_id);
            if (calib_it == params.calib.end())
                throw KeyMismatch("no calibration for device '" + t.device_id + "'");

            for (const RangingSnapshot& snap : t.snapshots) {
                const auto pos_it = truth_by_step.find(snap.step);
                if (pos_it == truth_by_step.end()) {
                    if (!snap.pairs.empty())
                        throw LengthMismatch("no truth position for device '" + t.device_id +
                                             "' step " + std::to_string(snap.step));
                    continue;
                }
                for (const RangingPair& p : snap.pairs) {
                    const double d_true = distance<double>(pos_it->second, true_ap(p.ap_id));
                    raw_pairs.emplace_back(p.d_ftm, d_true);
                    cal_pairs.emplace_back(calibrate(calib_it->second, p.d_ftm), d_true);
                }
            }
        }
        const RangingErrors raw = ranging_errors(raw_pairs);
        const RangingErrors cal = ranging_errors(cal_pairs);
        write_metrics({{"ranging-raw-mae", raw.stats.mae},
                       {"ranging-raw-rmse", raw.stats.rmse},
                       {"ranging-raw-max", raw.stats.max},
                       {"ranging-cal-mae", cal.stats.mae},
                       {"ranging-cal-rmse", cal.stats.rmse},
                       {"ranging-cal-max", cal.stats.max}},
                      a.out_path);
        if (!a.cdf_path.empty()) write_cdf({{"raw", raw.cdf}, {"calibrated", cal.cdf}}, a.cdf_path);
        return 0;
    }

    if (a.which == "positioning") {
        const PointSeries est = load_tracks(a.est_path);
        const PointSeries truth = load_tracks(a.truth_tracks_path);
        std::vector<double> errors;
        for (const auto& [dev, series] : est) {
            const auto truth_it = truth.find(dev);
            if (truth_it == truth.end())
                throw KeyMismatch("no truth trajectory for device '" + dev + "'");
            std::map<int, Vec2> truth_by_step(truth_it->second.begin(), truth_it->second.end());
            for (const auto& [step, p] : series) {
                const auto pos_it = truth_by_step.find(step);
                if (pos_it == truth_by_step.end())
                    throw LengthMismatch("no truth position for device '" + dev + "' step " +
                                         std::to_string(step));
                errors.push_back(distance<double>(p, pos_it->second));
            }
        }
        const ErrorStats stats = summarize_errors(errors);
        write_metrics({{"positioning-mae", stats.mae},
                       {"positioning-rmse", stats.rmse},
                       {"positioning-max", stats.max}},
                      a.out_path);
        if (!a.cdf_path.empty()) write_cdf({{"positioning", empirical_cdf(errors)}}, a.cdf_path);
        return 0;
    }

    throw ValidationError("--which must be one of ap-coords|ranging|positioning");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unsupervised Wi-Fi AP coordinate discovery and FTM ranging calibration"};
    app.require_subcommand(1);

    SimulateArgs sim;
    CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic ranging dataset");
    simulate->add_option("--scene", sim.scene_path, "Scene file")->required();
    simulate->add_option("--out", sim.out_dir, "Output directory")->required();
    simulate->add_option("--devices", sim.devices, "Number of simulated devices");
    simulate->add_option("--steps", sim.steps, "Training steps per device");
    simulate->add_option("--dt", sim.dt, "Measurement interval, seconds");
    simulate->add_option("--speed", sim.speed, "Walking speed, m/s");
    simulate->add_option("--burst", sim.burst, "Burst size per ranging request");
    simulate->add_option("--noise", sim.noise, "Per-sample noise std-dev, meters");
    simulate->add_option("--distortion", sim.distortion, "Forward distortion e0,e1,e2")
        ->delimiter(',')
        ->expected(3);
    simulate->add_option("--range-limit", sim.range_limit, "Max measurable distance, meters");
    simulate->add_option("--test-steps", sim.test_steps, "Held-out test steps (0 disables)");
    simulate->add_option("--seed", sim.seed, "Random seed");

    TrainArgs tr;
    CLI::App* train_cmd = app.add_subcommand("train", "Train AP coordinates and calibration");
    train_cmd->add_option("--scene", tr.scene_path, "Scene file")->required();
    train_cmd->add_option("--log", tr.logs, "Ranging log(s)")->required();
    train_cmd->add_option("--out", tr.out_params, "Output parameter file")->required();
    train_cmd->add_option("--report", tr.report_path, "Run report file");
    train_cmd->add_option("--alpha", tr.cfg.learning_rate, "Learning rate");
    train_cmd->add_option("--iters", tr.cfg.iterations, "Training iterations");
    train_cmd->add_option("--batch-len", tr.cfg.batch_len, "Consecutive steps per minibatch");
    std::vector<double> lambdas = {1.0, 0.1, 0.1};
    train_cmd->add_option("--lambdas", lambdas, "Cost weights l1,l2,l3")
        ->delimiter(',')
        ->expected(3);
    train_cmd->add_option("--algo", tr.algo, "Localizer: ls|wls|ekf");
    train_cmd->add_option("--k-max", tr.cfg.k_max, "Max APs per step");
    train_cmd->add_option("--std-floor", tr.cfg.std_floor, "Std-dev floor, meters");
    train_cmd->add_option("--seed", tr.cfg.seed, "Random seed");
    train_cmd->add_option("--eval-every", tr.cfg.eval_every, "Full-data evaluation period");
    std::string grad_mode = "fd";
    train_cmd->add_option("--grad-mode", grad_mode, "Gradient mode: fd|analytic");
    train_cmd->add_option("--fd-step", tr.cfg.fd_step, "Finite-difference step");
    train_cmd->add_option("--coef-scale", tr.cfg.coef_scale,
                          "Distance scale preconditioning coefficient updates");
    train_cmd->add_option("--ekf-q", tr.cfg.ekf_q, "EKF process-noise intensity");

    LocateArgs loc;
    CLI::App* locate = app.add_subcommand("locate", "Localize logged tracks");
    locate->add_option("--scene", loc.scene_path, "Scene file")->required();
    locate->add_option("--params", loc.params_path, "Parameter file")->required();
    locate->add_option("--log", loc.log_path, "Ranging log")->required();
    locate->add_option("--out", loc.out_path, "Output fixes file")->required();
    locate->add_option("--algo", loc.algo, "Localizer: ls|wls|ekf");
    locate->add_option("--k-max", loc.k_max, "Max APs per step");
    locate->add_option("--std-floor", loc.std_floor, "Std-dev floor, meters");
    locate->add_option("--ekf-q", loc.ekf_q, "EKF process-noise intensity");

    EvalArgs ev;
    CLI::App* eval_cmd = app.add_subcommand("eval", "Evaluate estimates against ground truth");
    eval_cmd->add_option("--which", ev.which, "ap-coords|ranging|positioning")->required();
    eval_cmd->add_option("--params", ev.params_path, "Estimated parameter file");
    eval_cmd->add_option("--truth-params", ev.truth_params_path, "True parameter file");
    eval_cmd->add_option("--scene", ev.scene_path, "Scene file");
    eval_cmd->add_option("--log", ev.log_path, "Ranging log");
    eval_cmd->add_option("--truth-tracks", ev.truth_tracks_path, "Ground-truth trajectory file");
    eval_cmd->add_option("--est", ev.est_path, "Estimated fixes file");
    eval_cmd->add_option("--out", ev.out_path, "Metrics output file")->required();
    eval_cmd->add_option("--cdf", ev.cdf_path, "CDF series output file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (simulate->parsed()) return cmd_simulate(sim);
        if (train_cmd->parsed()) {
            tr.cfg.weights = {lambdas[0], lambdas[1], lambdas[2]};
            if (grad_mode == "fd")
                tr.cfg.grad_mode = GradMode::FiniteDiff;
            else if (grad_mode == "analytic")
                tr.cfg.grad_mode = GradMode::Analytic;
            else
                throw ValidationError("--grad-mode must be fd or analytic");
            return cmd_train(tr);
        }
        if (locate->parsed()) return cmd_locate(loc);
        if (eval_cmd->parsed()) return cmd_eval(ev);
    } catch (const ParseError& e) {
        std::cerr << "error: input: " << e.what() << "\n";
        return kExitInput;
    } catch (const ValidationError& e) {
        std::cerr << "error: validation: " << e.what() << "\n";
        return kExitInput;
    } catch (const KeyMismatch& e) {
        std::cerr << "error: evaluation: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const LengthMismatch& e) {
        std::cerr << "error: evaluation: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return 0;
}
