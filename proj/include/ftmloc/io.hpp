#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ftmloc/trainer.hpp"
#include "ftmloc/types.hpp"

namespace ftmloc {

// On-disk formats. All three primary formats carry a version tag on line 1
// and reject unknown versions:
//   scene   "ftmloc-scene v1"   area + one AP per line (meters)
//   rlog    "ftmloc-rlog v1"    interval header + one measurement per line
//                               (millimeter integers)
//   params  "ftmloc-params v1"  unknown-AP coordinates + per-device
//                               calibration coefficients (17 significant
//                               digits, lossless round-trip)
// Plus two plot-ready auxiliary formats: track (per-device per-step points)
// and the train-report row log.

Scene load_scene(const std::filesystem::path& path);
void save_scene(const Scene& scene, const std::filesystem::path& path);

std::vector<DeviceTrack> load_ranging_log(const std::filesystem::path& path);
void save_ranging_log(const std::vector<DeviceTrack>& tracks, const std::filesystem::path& path);

ParamSet load_params(const std::filesystem::path& path);
void save_params(const ParamSet& params, const std::filesystem::path& path);

// Point series keyed by device: (step, position) pairs. Used both for
// ground-truth trajectories and for localizer output.
using PointSeries = std::map<std::string, std::vector<std::pair<int, Vec2>>>;

PointSeries load_tracks(const std::filesystem::path& path);
void save_tracks(const PointSeries& series, const std::filesystem::path& path);

std::string format_report(const TrainReport& report);
void save_report(const TrainReport& report, const std::filesystem::path& path);

// Full-precision decimal formatting shared by all writers.
std::string fmt_double(double x);

}  // namespace ftmloc
