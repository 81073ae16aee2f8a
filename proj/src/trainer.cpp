#include "ftmloc/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "ftmloc/dual.hpp"
#include "ftmloc/rng.hpp"

namespace ftmloc {

ParamLayout ParamLayout::of(const ParamSet& params) {
    ParamLayout layout;
    for (const auto& [id, _] : params.unknown_coords) layout.ap_ids.push_back(id);
    int offset = layout.coord_count();
    for (const auto& [id, poly] : params.calib) {
        layout.device_ids.push_back(id);
        layout.poly_len.push_back(static_cast<int>(poly.coeffs.size()));
        layout.device_offset.push_back(offset);
        offset += static_cast<int>(poly.coeffs.size());
    }
    return layout;
}

int ParamLayout::size() const {
    int n = coord_count();
    for (int len : poly_len) n += len;
    return n;
}

std::pair<int, int> ParamLayout::coeff_pos(int idx) const {
    for (std::size_t d = 0; d < device_ids.size(); ++d) {
        const int rel = idx - device_offset[d];
        if (rel >= 0 && rel < poly_len[d]) return {static_cast<int>(d), rel};
    }
    throw Error("parameter index out of range");
}

Eigen::VectorXd ParamLayout::flatten(const ParamSet& params) const {
    Eigen::VectorXd flat(size());
    for (std::size_t a = 0; a < ap_ids.size(); ++a) {
        const Vec2& p = params.unknown_coords.at(ap_ids[a]);
        flat[2 * static_cast<int>(a)] = p.x();
        flat[2 * static_cast<int>(a) + 1] = p.y();
    }
    for (std::size_t d = 0; d < device_ids.size(); ++d) {
        const auto& c = params.calib.at(device_ids[d]).coeffs;
        flat.segment(device_offset[d], c.size()) = c;
    }
    return flat;
}

ParamSet ParamLayout::unflatten(const Eigen::VectorXd& flat) const {
    ParamSet params;
    for (std::size_t a = 0; a < ap_ids.size(); ++a)
        params.unknown_coords[ap_ids[a]] =
            Vec2(flat[2 * static_cast<int>(a)], flat[2 * static_cast<int>(a) + 1]);
    for (std::size_t d = 0; d < device_ids.size(); ++d)
        params.calib[device_ids[d]] =
            CalibrationPoly(flat.segment(device_offset[d], poly_len[d]).eval());
    return params;
}

double ParamLayout::fd_step_for(int idx, double base) const {
    if (is_coord(idx)) return base;
    const int degree = coeff_pos(idx).second;
    return base * std::pow(100.0, 1 - degree);
}

double ParamLayout::update_scale(int idx, double coef_scale) const {
    if (is_coord(idx)) return 1.0;
    const int degree = coeff_pos(idx).second;
    return std::pow(coef_scale, -2.0 * degree);
}

ParamSet init_params(const Scene& scene, const std::vector<std::string>& device_ids) {
    Vec2 centroid = Vec2::Zero();
    int anchors = 0;
    for (const ApNode& ap : scene.aps) {
        if (ap.kind != ApKind::Anchor) continue;
        if (!ap.coords) throw ValidationError("anchor '" + ap.id + "' has no coordinates");
        centroid += *ap.coords;
        ++anchors;
    }
    if (anchors == 0) throw NoAnchors("scene has no anchor APs");
    centroid /= static_cast<double>(anchors);

    ParamSet params;
    for (const ApNode& ap : scene.aps)
        if (ap.kind == ApKind::Unknown) params.unknown_coords[ap.id] = centroid;
    for (const std::string& dev : device_ids) params.calib[dev] = make_poly({0.0, 1.0, 0.0});
    return params;
}

DeviceTrack sample_minibatch(const DeviceTrack& track, int batch_len, std::mt19937_64& rng) {
    const int n = static_cast<int>(track.snapshots.size());
    if (n < batch_len)
        throw TrackTooShort("track '" + track.device_id + "' has " + std::to_string(n) +
                            " steps, need " + std::to_string(batch_len));
    std::uniform_int_distribution<int> dist(0, n - batch_len);
    const int start = dist(rng);

    DeviceTrack window;
    window.device_id = track.device_id;
    window.dt = track.dt;
    window.snapshots.assign(track.snapshots.begin() + start,
                            track.snapshots.begin() + start + batch_len);
    if (track.has_truth())
        window.truth.assign(track.truth.begin() + start, track.truth.begin() + start + batch_len);
    return window;
}

namespace {

// Tracks ordered by device id; one track per device expected upstream.
std::vector<const DeviceTrack*> ordered_tracks(const std::vector<DeviceTrack>& tracks) {
    std::vector<const DeviceTrack*> out;
    out.reserve(tracks.size());
    for (const DeviceTrack& t : tracks) out.push_back(&t);
    std::sort(out.begin(), out.end(),
              [](const DeviceTrack* a, const DeviceTrack* b) { return a->device_id < b->device_id; });
    return out;
}

struct GradientDetail {
    Eigen::VectorXd grad;
    // Per-device cost at the unperturbed parameters; devices with no usable
    // fix are absent.
    std::map<std::string, double> device_costs;
};

ParamSetT<Dual> to_dual(const ParamSet& params) {
    ParamSetT<Dual> out;
    for (const auto& [id, p] : params.unknown_coords)
        out.unknown_coords[id] = Vec2T<Dual>(Dual(p.x()), Dual(p.y()));
    for (const auto& [id, poly] : params.calib) {
        Eigen::Matrix<Dual, Eigen::Dynamic, 1> c(poly.coeffs.size());
        for (Eigen::Index i = 0; i < poly.coeffs.size(); ++i) c[i] = Dual(poly.coeffs[i]);
        out.calib[id] = CalibrationPolyT<Dual>(std::move(c));
    }
    return out;
}

void seed_direction(ParamSetT<Dual>& params, const ParamLayout& layout, int idx, double value) {
    if (layout.is_coord(idx)) {
        params.unknown_coords.at(layout.ap_ids[idx / 2])[idx % 2].d = value;
    } else {
        const auto [dev, degree] = layout.coeff_pos(idx);
        params.calib.at(layout.device_ids[dev]).coeffs[degree].d = value;
    }
}

GradientDetail gradient_detail(const std::vector<DeviceTrack>& tracks, const Scene& scene,
                               const ParamSet& params, const TrainerConfig& cfg) {
    const ParamLayout layout = ParamLayout::of(params);
    const LocalizeConfig loc = cfg.localize();
    const auto ordered = ordered_tracks(tracks);

    GradientDetail result;
    result.grad = Eigen::VectorXd::Zero(layout.size());

    // Establish which devices are usable at the current parameters; the
    // exclusion set stays fixed for the whole gradient evaluation.
    std::vector<const DeviceTrack*> usable;
    for (const DeviceTrack* t : ordered) {
        try {
            result.device_costs[t->device_id] = device_cost(*t, scene, params, cfg.weights, loc);
            usable.push_back(t);
        } catch (const NoFixAvailable&) {
        }
    }
    if (usable.empty()) throw NoFixAvailable("no device usable for gradient evaluation");

    auto track_of = [&](const std::string& device_id) -> const DeviceTrack* {
        for (const DeviceTrack* t : usable)
            if (t->device_id == device_id) return t;
        return nullptr;
    };

    if (cfg.grad_mode == GradMode::FiniteDiff) {
        const Eigen::VectorXd base = layout.flatten(params);
        auto eval = [&](int idx, double delta, const DeviceTrack* only) -> double {
            Eigen::VectorXd flat = base;
            flat[idx] += delta;
            const ParamSet p = layout.unflatten(flat);
            try {
                double total = 0.0;
                if (only != nullptr) return device_cost(*only, scene, p, cfg.weights, loc);
                for (const DeviceTrack* t : usable)
                    total += device_cost(*t, scene, p, cfg.weights, loc);
                return total;
            } catch (const NoFixAvailable&) {
                throw NonFiniteGradient("fix availability changed within a finite-difference probe");
            }
        };
        for (int idx = 0; idx < layout.size(); ++idx) {
            const double h = layout.fd_step_for(idx, cfg.fd_step);
            const DeviceTrack* only = nullptr;
            if (!layout.is_coord(idx)) {
                // A device's coefficients only enter its own cost term.
                only = track_of(layout.device_ids[layout.coeff_pos(idx).first]);
                if (only == nullptr) continue;  // excluded device: gradient 0
            }
            result.grad[idx] = (eval(idx, h, only) - eval(idx, -h, only)) / (2.0 * h);
        }
    } else {
        ParamSetT<Dual> dual_params = to_dual(params);
        for (int idx = 0; idx < layout.size(); ++idx) {
            const DeviceTrack* only = nullptr;
            if (!layout.is_coord(idx)) {
                only = track_of(layout.device_ids[layout.coeff_pos(idx).first]);
                if (only == nullptr) continue;
            }
            seed_direction(dual_params, layout, idx, 1.0);
            Dual total(0.0);
            try {
                if (only != nullptr) {
                    total = device_cost(*only, scene, dual_params, cfg.weights, loc);
                } else {
                    for (const DeviceTrack* t : usable)
                        total += device_cost(*t, scene, dual_params, cfg.weights, loc);
                }
            } catch (const NoFixAvailable&) {
                seed_direction(dual_params, layout, idx, 0.0);
                throw NonFiniteGradient("fix availability changed within a derivative pass");
            }
            seed_direction(dual_params, layout, idx, 0.0);
            result.grad[idx] = total.d;
        }
    }

    if (!result.grad.allFinite())
        throw NonFiniteGradient("gradient has non-finite components (degenerate geometry)");
    return result;
}

}  // namespace

Eigen::VectorXd compute_gradient(const std::vector<DeviceTrack>& tracks, const Scene& scene,
                                 const ParamSet& params, const TrainerConfig& cfg) {
    return gradient_detail(tracks, scene, params, cfg).grad;
}

ParamSet gd_step(const ParamSet& params, const Eigen::VectorXd& grad, double alpha,
                 double coef_scale) {
    const ParamLayout layout = ParamLayout::of(params);
    if (grad.size() != layout.size())
        throw Error("gradient size does not match parameter layout");
    Eigen::VectorXd flat = layout.flatten(params);
    for (int idx = 0; idx < layout.size(); ++idx)
        flat[idx] -= alpha * layout.update_scale(idx, coef_scale) * grad[idx];
    return layout.unflatten(flat);
}

ParamSet train(const std::vector<DeviceTrack>& tracks, const Scene& scene,
               const TrainerConfig& cfg, TrainReport& report) {
    report = TrainReport{};
    if (cfg.iterations < 1) throw ValidationError("iterations must be >= 1");
    if (cfg.batch_len < 3) throw ValidationError("batch_len must be >= 3");
    if (!(cfg.learning_rate > 0.0)) throw ValidationError("learning_rate must be > 0");
    if (tracks.empty()) throw ValidationError("no training tracks");
    {
        std::set<std::string> ids;
        for (const DeviceTrack& t : tracks)
            if (!ids.insert(t.device_id).second)
                throw ValidationError("duplicate device id '" + t.device_id + "'");
    }

    const auto ordered = ordered_tracks(tracks);
    std::vector<std::string> device_ids;
    for (const DeviceTrack* t : ordered) device_ids.push_back(t->device_id);

    ParamSet params = init_params(scene, device_ids);
    if (params.unknown_coords.empty()) throw ValidationError("scene has no unknown APs to train");
    const LocalizeConfig loc = cfg.localize();

    auto snapshot_params = [&](int iteration, const ParamSet& p) {
        for (const auto& [id, coords] : p.unknown_coords)
            report.coord_trace.push_back({iteration, id, coords});
        for (const auto& [id, poly] : p.calib)
            report.coeff_trace.push_back({iteration, id, poly.coeffs});
    };
    auto evaluate_full = [&](int iteration, const ParamSet& p) {
        const double full = combined_cost(tracks, scene, p, cfg.weights, loc);
        if (full < report.best_cost) {
            report.best_cost = full;
            report.best_iteration = iteration;
            report.best_params = p;
        }
        report.evaluations.push_back({iteration, full, report.best_cost});
        snapshot_params(iteration, p);
        return full;
    };

    report.initial_cost = evaluate_full(0, params);

    std::mt19937_64 minibatch_rng = substream(cfg.seed, "minibatch");
    for (int it = 1; it <= cfg.iterations; ++it) {
        std::vector<DeviceTrack> windows;
        windows.reserve(ordered.size());
        for (const DeviceTrack* t : ordered)
            windows.push_back(sample_minibatch(*t, cfg.batch_len, minibatch_rng));

        GradientDetail detail;
        try {
            detail = gradient_detail(windows, scene, params, cfg);
        } catch (const NoFixAvailable&) {
            // Every window of this iteration was unusable (typically early
            // iterations whose windows never leave the co-located unknown
            // APs); skip the update and draw fresh windows next iteration.
            if (it % cfg.eval_every == 0 || it == cfg.iterations) evaluate_full(it, params);
            continue;
        }
        for (const DeviceTrack* t : ordered) {
            const auto it_cost = detail.device_costs.find(t->device_id);
            if (it_cost != detail.device_costs.end())
                report.minibatch_costs.push_back({it, t->device_id, it_cost->second});
        }

        const ParamLayout layout = ParamLayout::of(params);
        Eigen::VectorXd step(layout.size());
        for (int idx = 0; idx < layout.size(); ++idx)
            step[idx] =
                cfg.learning_rate * layout.update_scale(idx, cfg.coef_scale) * detail.grad[idx];
        const double norm = step.norm();
        if (norm > cfg.max_step) step *= cfg.max_step / norm;
        params = layout.unflatten(layout.flatten(params) - step);

        if (it % cfg.eval_every == 0 || it == cfg.iterations) evaluate_full(it, params);
    }

    return report.best_params;
}

std::pair<ParamSet, TrainReport> train(const std::vector<DeviceTrack>& tracks, const Scene& scene,
                                       const TrainerConfig& cfg) {
    TrainReport report;
    ParamSet best = train(tracks, scene, cfg, report);
    return {std::move(best), std::move(report)};
}

}  // namespace ftmloc
