#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "ftmloc/types.hpp"

namespace ftmloc {

// Forward distortion applied by a simulated device: measured distance is
// e0 + e1*d + e2*d^2 plus per-sample Gaussian noise, averaged over a burst.
struct DistortionModel {
    Eigen::Vector3d forward = Eigen::Vector3d(0.0, 1.0, 0.0);
    double noise_sigma = 0.0;
    int burst_size = 8;
    double range_limit = 40.0;
};

double forward_distort(const DistortionModel& model, double d_true);

// Rejects models whose forward polynomial is not strictly increasing over
// [0, max_distance] (sampled), or with burst_size < 2.
void validate_distortion(const DistortionModel& model, double max_distance);

// Random-waypoint trajectory: walk at constant speed toward successive
// uniform waypoints. Displacement per step is speed*dt except on waypoint
// arrival; all points stay inside the scene rectangle.
std::vector<Vec2> gen_walk(const Scene& scene, double speed, double dt, int steps,
                           std::mt19937_64& rng);

struct BurstMeasurement {
    double d_ftm = 0.0;
    double s_ftm = 0.0;
};

// One burst-mode ranging exchange: burst_size distorted noisy samples,
// reported as their mean and sample std-dev. No measurement beyond
// range_limit.
std::optional<BurstMeasurement> measure(double d_true, const DistortionModel& model,
                                        std::mt19937_64& rng);

struct SimDataset {
    std::vector<DeviceTrack> tracks;  // with ground-truth trajectories
    // True unknown-AP coordinates plus, per device, the MSE-optimal quadratic
    // fit of the inverse map over the observed measurements (the reference
    // calibration).
    ParamSet truth;
};

// One walk plus measurement set per device; models.size() devices, ids
// dev01, dev02, ... Every AP in the scene must carry true coordinates.
SimDataset simulate_dataset(const Scene& scene, const std::vector<DistortionModel>& models,
                            int duration_steps, double dt, double speed, std::uint64_t seed);

}  // namespace ftmloc
