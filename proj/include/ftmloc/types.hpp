#pragma once

#include <Eigen/Core>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftmloc/errors.hpp"

namespace ftmloc {

template <class S>
using Vec2T = Eigen::Matrix<S, 2, 1>;
using Vec2 = Vec2T<double>;

// Euclidean distance between two points.
template <class S>
inline S distance(const Vec2T<S>& a, const Vec2T<S>& b) {
    return (a - b).norm();
}

enum class ApKind { Anchor, Unknown };

// An access point. Anchors carry fixed ground-truth coordinates; unknown APs
// may carry true coordinates (simulation / evaluation only) or none at all.
struct ApNode {
    std::string id;
    ApKind kind = ApKind::Unknown;
    std::optional<Vec2> coords;
};

// Rectangular area with its installed APs.
struct Scene {
    double width = 0.0;
    double height = 0.0;
    std::vector<ApNode> aps;

    const ApNode* find(const std::string& id) const {
        for (const auto& ap : aps)
            if (ap.id == id) return &ap;
        return nullptr;
    }
    std::vector<const ApNode*> anchors() const {
        std::vector<const ApNode*> out;
        for (const auto& ap : aps)
            if (ap.kind == ApKind::Anchor) out.push_back(&ap);
        return out;
    }
    std::vector<const ApNode*> unknowns() const {
        std::vector<const ApNode*> out;
        for (const auto& ap : aps)
            if (ap.kind == ApKind::Unknown) out.push_back(&ap);
        return out;
    }
};

// One raw FTM measurement: reported distance and std-dev. Raw distances may
// be negative (clock/hardware offsets); the std-dev is never negative.
struct RangingPair {
    std::string ap_id;
    double d_ftm = 0.0;
    double s_ftm = 0.0;
};

// All measurement pairs available at one time step, at most one per AP,
// kept sorted by ap_id.
struct RangingSnapshot {
    int step = 0;
    std::vector<RangingPair> pairs;
};

// A device's ordered measurement sequence at fixed interval dt. `truth` is
// the ground-truth trajectory (evaluation only); empty when unavailable.
struct DeviceTrack {
    std::string device_id;
    double dt = 0.5;
    std::vector<RangingSnapshot> snapshots;
    std::vector<Vec2> truth;

    bool has_truth() const { return !truth.empty(); }
};

// Inverse-distortion polynomial, coefficients (c_0, ..., c_L).
template <class S>
struct CalibrationPolyT {
    Eigen::Matrix<S, Eigen::Dynamic, 1> coeffs;

    CalibrationPolyT() = default;
    explicit CalibrationPolyT(Eigen::Matrix<S, Eigen::Dynamic, 1> c) : coeffs(std::move(c)) {}

    int order() const { return static_cast<int>(coeffs.size()) - 1; }
};
using CalibrationPoly = CalibrationPolyT<double>;

inline CalibrationPoly make_poly(std::initializer_list<double> cs) {
    Eigen::VectorXd c(static_cast<Eigen::Index>(cs.size()));
    Eigen::Index i = 0;
    for (double x : cs) c[i++] = x;
    return CalibrationPoly(std::move(c));
}

// The full trainable state: unknown-AP coordinates plus one calibration
// polynomial per device. Keys are kept in std::map order so every iteration
// over parameters is deterministic.
template <class S>
struct ParamSetT {
    std::map<std::string, Vec2T<S>> unknown_coords;
    std::map<std::string, CalibrationPolyT<S>> calib;
};
using ParamSet = ParamSetT<double>;

struct CostWeights {
    double lambda1 = 1.0;
    double lambda2 = 0.1;
    double lambda3 = 0.1;
};

// One AP as used by the localizer at one step: calibrated distance and
// std estimate, recorded for later cost evaluation.
template <class S>
struct SelectedApT {
    std::string ap_id;
    S d_hat{};
    double s_hat = 0.0;
};

template <class S>
struct FixEntryT {
    int step = 0;
    Vec2T<S> estimate = Vec2T<S>::Zero();
    std::vector<SelectedApT<S>> aps;
};

// Localizer output: one entry per step that produced an estimate. Steps with
// insufficient geometry are simply absent.
template <class S>
struct FixSeriesT {
    std::vector<FixEntryT<S>> entries;
};
using FixSeries = FixSeriesT<double>;
using FixEntry = FixEntryT<double>;
using SelectedAp = SelectedApT<double>;

// Resolves an AP's working position: anchors from the scene, unknowns from
// the parameter set.
template <class S>
inline Vec2T<S> ap_position(const Scene& scene, const ParamSetT<S>& params, const std::string& id) {
    if (auto it = params.unknown_coords.find(id); it != params.unknown_coords.end())
        return it->second;
    const ApNode* ap = scene.find(id);
    if (ap == nullptr || !ap->coords)
        throw ValidationError("no position available for AP '" + id + "'");
    if (ap->kind == ApKind::Unknown)
        throw ValidationError("unknown AP '" + id + "' missing from parameter set");
    return ap->coords->cast<S>();
}

}  // namespace ftmloc
