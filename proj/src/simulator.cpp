#include "ftmloc/simulator.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "ftmloc/rng.hpp"

namespace ftmloc {

double forward_distort(const DistortionModel& model, double d_true) {
    return model.forward[0] + model.forward[1] * d_true + model.forward[2] * d_true * d_true;
}

void validate_distortion(const DistortionModel& model, double max_distance) {
    if (model.burst_size < 2)
        throw ValidationError("burst_size must be >= 2 so a sample std-dev exists");
    if (!(model.range_limit > 0.0)) throw ValidationError("range_limit must be > 0");
    if (!(model.noise_sigma >= 0.0)) throw ValidationError("noise_sigma must be >= 0");
    const int samples = 256;
    double prev = forward_distort(model, 0.0);
    for (int i = 1; i <= samples; ++i) {
        const double d = max_distance * static_cast<double>(i) / samples;
        const double cur = forward_distort(model, d);
        if (!(cur > prev))
            throw ValidationError("forward distortion not strictly increasing near d=" +
                                  std::to_string(d));
        prev = cur;
    }
}

std::vector<Vec2> gen_walk(const Scene& scene, double speed, double dt, int steps,
                           std::mt19937_64& rng) {
    if (!(speed > 0.0)) throw ValidationError("speed must be > 0");
    if (steps < 1) throw ValidationError("steps must be >= 1");

    std::uniform_real_distribution<double> ux(0.0, scene.width);
    std::uniform_real_distribution<double> uy(0.0, scene.height);
    auto draw_point = [&]() { return Vec2(ux(rng), uy(rng)); };

    std::vector<Vec2> path;
    path.reserve(static_cast<std::size_t>(steps));
    Vec2 pos = draw_point();
    Vec2 waypoint = draw_point();
    path.push_back(pos);

    const double step_len = speed * dt;
    for (int i = 1; i < steps; ++i) {
        const double remaining = (waypoint - pos).norm();
        if (remaining > step_len) {
            pos += (waypoint - pos) * (step_len / remaining);
        } else {
            // Arrive and end the step at the waypoint; next step heads to a
            // fresh one.
            pos = waypoint;
            waypoint = draw_point();
        }
        path.push_back(pos);
    }
    return path;
}

std::optional<BurstMeasurement> measure(double d_true, const DistortionModel& model,
                                        std::mt19937_64& rng) {
    if (d_true > model.range_limit) return std::nullopt;
    const double mean_true = forward_distort(model, d_true);
    if (model.noise_sigma == 0.0) return BurstMeasurement{mean_true, 0.0};
    std::normal_distribution<double> noise(0.0, model.noise_sigma);

    const int n = model.burst_size;
    std::vector<double> samples(static_cast<std::size_t>(n));
    double sum = 0.0;
    for (double& s : samples) {
        s = mean_true + noise(rng);
        sum += s;
    }
    const double mean = sum / n;
    double sq = 0.0;
    for (double s : samples) sq += (s - mean) * (s - mean);
    return BurstMeasurement{mean, std::sqrt(sq / (n - 1))};
}

namespace {

std::string device_name(std::size_t index) {
    std::string num = std::to_string(index + 1);
    if (num.size() < 2) num.insert(0, "0");
    return "dev" + num;
}

// MSE-optimal quadratic mapping observed raw distances back to true
// distances; the reference calibration a trained device should approach.
CalibrationPoly fit_inverse_quadratic(const std::vector<std::pair<double, double>>& raw_true) {
    if (raw_true.size() < 3)
        throw ValidationError("too few measurements to fit a reference calibration");
    Eigen::MatrixXd vand(raw_true.size(), 3);
    Eigen::VectorXd target(raw_true.size());
    for (std::size_t i = 0; i < raw_true.size(); ++i) {
        const double x = raw_true[i].first;
        vand(static_cast<Eigen::Index>(i), 0) = 1.0;
        vand(static_cast<Eigen::Index>(i), 1) = x;
        vand(static_cast<Eigen::Index>(i), 2) = x * x;
        target[static_cast<Eigen::Index>(i)] = raw_true[i].second;
    }
    return CalibrationPoly(vand.colPivHouseholderQr().solve(target).eval());
}

}  // namespace

SimDataset simulate_dataset(const Scene& scene, const std::vector<DistortionModel>& models,
                            int duration_steps, double dt, double speed, std::uint64_t seed) {
    if (models.empty()) throw ValidationError("need at least one device model");
    if (!(dt > 0.0)) throw ValidationError("dt must be > 0");
    const double diag = std::hypot(scene.width, scene.height);
    for (const DistortionModel& m : models) validate_distortion(m, diag);
    for (const ApNode& ap : scene.aps)
        if (!ap.coords)
            throw ValidationError("AP '" + ap.id + "' has no true coordinates to simulate from");

    SimDataset out;
    for (const ApNode& ap : scene.aps)
        if (ap.kind == ApKind::Unknown) out.truth.unknown_coords[ap.id] = *ap.coords;

    for (std::size_t k = 0; k < models.size(); ++k) {
        std::mt19937_64 walk_rng = substream(seed, "walk", k);
        std::mt19937_64 noise_rng = substream(seed, "noise", k);

        DeviceTrack track;
        track.device_id = device_name(k);
        track.dt = dt;
        track.truth = gen_walk(scene, speed, dt, duration_steps, walk_rng);

        std::vector<std::pair<double, double>> raw_true;
        for (int step = 0; step < duration_steps; ++step) {
            RangingSnapshot snap;
            snap.step = step;
            for (const ApNode& ap : scene.aps) {
                const double d_true = distance<double>(track.truth[step], *ap.coords);
                if (auto m = measure(d_true, models[k], noise_rng)) {
                    snap.pairs.push_back({ap.id, m->d_ftm, m->s_ftm});
                    raw_true.emplace_back(m->d_ftm, d_true);
                }
            }
            std::sort(snap.pairs.begin(), snap.pairs.end(),
                      [](const RangingPair& a, const RangingPair& b) { return a.ap_id < b.ap_id; });
            track.snapshots.push_back(std::move(snap));
        }

        out.truth.calib[track.device_id] = fit_inverse_quadratic(raw_true);
        out.tracks.push_back(std::move(track));
    }
    return out;
}

}  // namespace ftmloc
