#pragma once

#include <vector>

#include "ftmloc/trilateration.hpp"
#include "ftmloc/types.hpp"

namespace ftmloc {

// Circle-consistency cost: sum of squared std-normalized residuals between
// each estimate and the calibrated distances of the APs used to produce it.
// Evaluated with the AP sets recorded in the fix series; selection is not
// re-run.
template <class S>
S geometric_cost(const FixSeriesT<S>& fixes, const Scene& scene, const ParamSetT<S>& params) {
    S total = S(0.0);
    for (const FixEntryT<S>& e : fixes.entries) {
        for (const SelectedApT<S>& ap : e.aps) {
            const Vec2T<S> z = ap_position(scene, params, ap.ap_id);
            const S residual = ((e.estimate - z).norm() - ap.d_hat) / ap.s_hat;
            total += residual * residual;
        }
    }
    return total;
}

// Position-smoothness cost over consecutive estimated steps. Gaps break
// consecutiveness and contribute nothing across the gap.
template <class S>
S position_cost(const FixSeriesT<S>& fixes) {
    S total = S(0.0);
    for (std::size_t i = 1; i < fixes.entries.size(); ++i) {
        if (fixes.entries[i].step != fixes.entries[i - 1].step + 1) continue;
        total += (fixes.entries[i].estimate - fixes.entries[i - 1].estimate).squaredNorm();
    }
    return total;
}

// Velocity-smoothness cost over triples of consecutive estimated steps,
// with per-step velocity (z(i) - z(i-1)) / dt.
template <class S>
S velocity_cost(const FixSeriesT<S>& fixes, double dt) {
    S total = S(0.0);
    for (std::size_t i = 2; i < fixes.entries.size(); ++i) {
        if (fixes.entries[i].step != fixes.entries[i - 1].step + 1 ||
            fixes.entries[i - 1].step != fixes.entries[i - 2].step + 1)
            continue;
        const Vec2T<S> v_cur =
            (fixes.entries[i].estimate - fixes.entries[i - 1].estimate) / dt;
        const Vec2T<S> v_prev =
            (fixes.entries[i - 1].estimate - fixes.entries[i - 2].estimate) / dt;
        total += (v_cur - v_prev).squaredNorm();
    }
    return total;
}

template <class S>
S unified_cost(const FixSeriesT<S>& fixes, const Scene& scene, const ParamSetT<S>& params,
               const CostWeights& w, double dt) {
    return w.lambda1 * geometric_cost(fixes, scene, params) + w.lambda2 * position_cost(fixes) +
           w.lambda3 * velocity_cost(fixes, dt);
}

// Full per-device pipeline: localize, then weigh.
template <class S>
S device_cost(const DeviceTrack& track, const Scene& scene, const ParamSetT<S>& params,
              const CostWeights& w, const LocalizeConfig& cfg) {
    const FixSeriesT<S> fixes = localize_track(track, scene, params, cfg);
    return unified_cost(fixes, scene, params, w, track.dt);
}

// Sum of per-device costs in ascending device_id order. Devices that produce
// no fix are excluded (reported via `excluded` when given); only when every
// device fails is the failure propagated.
template <class S>
S combined_cost(const std::vector<DeviceTrack>& tracks, const Scene& scene,
                const ParamSetT<S>& params, const CostWeights& w, const LocalizeConfig& cfg,
                std::vector<std::string>* excluded = nullptr) {
    std::vector<const DeviceTrack*> ordered;
    ordered.reserve(tracks.size());
    for (const DeviceTrack& t : tracks) ordered.push_back(&t);
    std::sort(ordered.begin(), ordered.end(),
              [](const DeviceTrack* a, const DeviceTrack* b) { return a->device_id < b->device_id; });

    S total = S(0.0);
    std::size_t usable = 0;
    for (const DeviceTrack* t : ordered) {
        try {
            total += device_cost(*t, scene, params, w, cfg);
            ++usable;
        } catch (const NoFixAvailable&) {
            if (excluded != nullptr) excluded->push_back(t->device_id);
        }
    }
    if (usable == 0 && !tracks.empty())
        throw NoFixAvailable("no device produced a usable fix");
    return total;
}

}  // namespace ftmloc
