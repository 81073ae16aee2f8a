#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ftmloc/calibration.hpp"
#include "ftmloc/dual.hpp"
#include "ftmloc/types.hpp"

namespace ftmloc {

enum class Algo { LS, WLS, EKF };

inline const char* to_string(Algo a) {
    switch (a) {
        case Algo::LS: return "ls";
        case Algo::WLS: return "wls";
        default: return "ekf";
    }
}

struct LocalizeConfig {
    Algo algo = Algo::EKF;
    int k_max = 5;
    double std_floor = 0.1;
    double ekf_q = 1.0;  // white-acceleration intensity, m^2/s^3
    Eigen::Vector4d ekf_init_cov = Eigen::Vector4d(25.0, 25.0, 4.0, 4.0);
    double cond_limit = 1e10;
};

// One range observation as consumed by the solvers: AP position, calibrated
// distance, std estimate.
template <class S>
struct RangeObsT {
    Vec2T<S> pos = Vec2T<S>::Zero();
    S d_hat{};
    double s_hat = 1.0;
};
using RangeObs = RangeObsT<double>;

namespace detail {

// Shared linearized solver. Subtracts the last observation's circle equation
// from the others: rows A_j = 2(z_j - z_m)^T, b_j = ||z_j||^2 - ||z_m||^2
// - d_j^2 + d_m^2. Solves the (optionally weighted) normal equations.
template <class S>
Vec2T<S> solve_linearized(const std::vector<RangeObsT<S>>& obs, bool weighted, double cond_limit) {
    const std::size_t k = obs.size();
    if (k < 3) throw DegenerateGeometry("need at least 3 APs, got " + std::to_string(k));
    const RangeObsT<S>& ref = obs[k - 1];

    Eigen::Matrix<S, 2, 2> nm = Eigen::Matrix<S, 2, 2>::Zero();
    Vec2T<S> rhs = Vec2T<S>::Zero();
    for (std::size_t j = 0; j + 1 < k; ++j) {
        const double w = weighted ? 1.0 / (obs[j].s_hat * obs[j].s_hat) : 1.0;
        const Vec2T<S> a = 2.0 * (obs[j].pos - ref.pos);
        const S b = obs[j].pos.squaredNorm() - ref.pos.squaredNorm()
                    - obs[j].d_hat * obs[j].d_hat + ref.d_hat * ref.d_hat;
        nm.noalias() += w * (a * a.transpose());
        rhs.noalias() += w * (a * b);
    }

    // Collinearity gate on the value parts: eigenvalue ratio of the 2x2
    // PSD normal matrix.
    const double m00 = value_of(nm(0, 0));
    const double m01 = value_of(nm(0, 1));
    const double m11 = value_of(nm(1, 1));
    const double half_tr = 0.5 * (m00 + m11);
    const double det = m00 * m11 - m01 * m01;
    const double disc = std::sqrt(std::max(half_tr * half_tr - det, 0.0));
    const double lmin = half_tr - disc;
    const double lmax = half_tr + disc;
    if (!(lmin > 0.0) || lmax > cond_limit * lmin)
        throw DegenerateGeometry("normal matrix singular within tolerance (collinear APs)");

    const S det_s = nm(0, 0) * nm(1, 1) - nm(0, 1) * nm(1, 0);
    Vec2T<S> u;
    u[0] = (nm(1, 1) * rhs[0] - nm(0, 1) * rhs[1]) / det_s;
    u[1] = (nm(0, 0) * rhs[1] - nm(1, 0) * rhs[0]) / det_s;
    return u;
}

}  // namespace detail

// Linear least-squares trilateration on the standard linearization.
template <class S>
Vec2T<S> solve_ls(const std::vector<RangeObsT<S>>& obs, double cond_limit = 1e10) {
    return detail::solve_linearized(obs, false, cond_limit);
}

// Weighted variant, per-row weights 1/s^2. Equals solve_ls when all s match.
template <class S>
Vec2T<S> solve_wls(const std::vector<RangeObsT<S>>& obs, double cond_limit = 1e10) {
    return detail::solve_linearized(obs, true, cond_limit);
}

// Constant-velocity EKF state: (x, y, v_x, v_y).
template <class S>
struct EkfStateT {
    Eigen::Matrix<S, 4, 1> mean = Eigen::Matrix<S, 4, 1>::Zero();
    Eigen::Matrix<S, 4, 4> cov = Eigen::Matrix<S, 4, 4>::Zero();
};
using EkfState = EkfStateT<double>;

template <class S>
EkfStateT<S> ekf_predict(const EkfStateT<S>& state, double dt, double q) {
    Eigen::Matrix<double, 4, 4> f = Eigen::Matrix<double, 4, 4>::Identity();
    f(0, 2) = dt;
    f(1, 3) = dt;

    const double dt2 = dt * dt;
    const double dt3 = dt2 * dt;
    Eigen::Matrix<double, 4, 4> pn = Eigen::Matrix<double, 4, 4>::Zero();
    pn(0, 0) = pn(1, 1) = q * dt3 / 3.0;
    pn(0, 2) = pn(2, 0) = pn(1, 3) = pn(3, 1) = q * dt2 / 2.0;
    pn(2, 2) = pn(3, 3) = q * dt;

    EkfStateT<S> out;
    out.mean = f.cast<S>() * state.mean;
    out.cov = f.cast<S>() * state.cov * f.cast<S>().transpose() + pn.cast<S>();
    out.cov = S(0.5) * (out.cov + out.cov.transpose()).eval();
    return out;
}

// Range-only measurement update, Joseph form, symmetrized.
template <class S>
EkfStateT<S> ekf_update(const EkfStateT<S>& state, const std::vector<RangeObsT<S>>& obs) {
    const int k = static_cast<int>(obs.size());
    if (k < 1) throw SingularMeasurement("ekf_update needs at least one observation");

    const Vec2T<S> pos = state.mean.template head<2>();
    Eigen::Matrix<S, Eigen::Dynamic, 4> h(k, 4);
    Eigen::Matrix<S, Eigen::Dynamic, 1> innov(k);
    for (int i = 0; i < k; ++i) {
        const Vec2T<S> delta = pos - obs[i].pos;
        const S range = delta.norm();
        if (value_of(range) < 1e-9)
            throw SingularMeasurement("predicted position coincides with an AP");
        h(i, 0) = delta[0] / range;
        h(i, 1) = delta[1] / range;
        h(i, 2) = S(0.0);
        h(i, 3) = S(0.0);
        innov[i] = obs[i].d_hat - range;
    }

    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> s_mat = h * state.cov * h.transpose();
    for (int i = 0; i < k; ++i) s_mat(i, i) += obs[i].s_hat * obs[i].s_hat;

    // K = P H^T S^-1; with P and S symmetric this is (S^-1 H P)^T.
    Eigen::Matrix<S, Eigen::Dynamic, 4> hp = h * state.cov;
    Eigen::Matrix<S, 4, Eigen::Dynamic> gain = s_mat.partialPivLu().solve(hp).transpose();

    EkfStateT<S> out;
    out.mean = state.mean + gain * innov;
    Eigen::Matrix<S, 4, 4> j = Eigen::Matrix<S, 4, 4>::Identity() - gain * h;
    Eigen::Matrix<S, 4, 4> krkt = Eigen::Matrix<S, 4, 4>::Zero();
    for (int i = 0; i < k; ++i)
        krkt.noalias() += (obs[i].s_hat * obs[i].s_hat) * (gain.col(i) * gain.col(i).transpose());
    out.cov = j * state.cov * j.transpose() + krkt;
    out.cov = S(0.5) * (out.cov + out.cov.transpose()).eval();
    return out;
}

namespace detail {

// Calibrates every pair of a snapshot and selects up to k_max APs by
// ascending calibrated distance, ties broken by ascending ap_id.
template <class S>
std::vector<SelectedApT<S>> select_calibrated(const RangingSnapshot& snap,
                                              const CalibrationPolyT<S>& poly, int k_max,
                                              double std_floor) {
    std::vector<SelectedApT<S>> sel;
    sel.reserve(snap.pairs.size());
    for (const RangingPair& pair : snap.pairs)
        sel.push_back({pair.ap_id, calibrate(poly, pair.d_ftm), estimate_std(pair, std_floor)});
    std::sort(sel.begin(), sel.end(), [](const SelectedApT<S>& a, const SelectedApT<S>& b) {
        const double da = value_of(a.d_hat);
        const double db = value_of(b.d_hat);
        return da != db ? da < db : a.ap_id < b.ap_id;
    });
    if (static_cast<int>(sel.size()) > k_max) sel.resize(static_cast<std::size_t>(k_max));
    return sel;
}

}  // namespace detail

// AP selection as an inspectable operation: ids of up to k_max APs with the
// smallest calibrated distances.
inline std::vector<std::string> select_aps(const RangingSnapshot& snap, const CalibrationPoly& poly,
                                           int k_max, double std_floor = 0.1) {
    std::vector<std::string> ids;
    for (const auto& s : detail::select_calibrated(snap, poly, k_max, std_floor))
        ids.push_back(s.ap_id);
    return ids;
}

// Runs the configured localizer over a whole track. LS/WLS solve each step
// independently and skip steps with fewer than 3 selected APs (or degenerate
// geometry); the EKF initializes from the first solvable LS fix and then
// produces an estimate at every subsequent step.
template <class S>
FixSeriesT<S> localize_track(const DeviceTrack& track, const Scene& scene,
                             const ParamSetT<S>& params, const LocalizeConfig& cfg) {
    const auto calib_it = params.calib.find(track.device_id);
    if (calib_it == params.calib.end())
        throw ValidationError("no calibration for device '" + track.device_id + "'");
    const CalibrationPolyT<S>& poly = calib_it->second;

    FixSeriesT<S> out;
    out.entries.reserve(track.snapshots.size());
    EkfStateT<S> ekf;
    bool ekf_ready = false;

    for (const RangingSnapshot& snap : track.snapshots) {
        std::vector<SelectedApT<S>> sel =
            detail::select_calibrated(snap, poly, cfg.k_max, cfg.std_floor);
        std::vector<RangeObsT<S>> obs;
        obs.reserve(sel.size());
        for (const auto& s : sel)
            obs.push_back({ap_position(scene, params, s.ap_id), s.d_hat, s.s_hat});

        FixEntryT<S> entry;
        entry.step = snap.step;
        entry.aps = std::move(sel);

        if (cfg.algo == Algo::LS || cfg.algo == Algo::WLS) {
            if (obs.size() < 3) continue;
            try {
                entry.estimate = cfg.algo == Algo::LS ? solve_ls(obs, cfg.cond_limit)
                                                      : solve_wls(obs, cfg.cond_limit);
            } catch (const DegenerateGeometry&) {
                continue;
            }
        } else {
            if (!ekf_ready) {
                if (obs.size() < 3) continue;
                Vec2T<S> fix;
                try {
                    fix = solve_ls(obs, cfg.cond_limit);
                } catch (const DegenerateGeometry&) {
                    continue;
                }
                ekf.mean.template head<2>() = fix;
                ekf.mean[2] = S(0.0);
                ekf.mean[3] = S(0.0);
                ekf.cov = cfg.ekf_init_cov.cast<S>().asDiagonal();
                ekf_ready = true;
                entry.estimate = fix;
            } else {
                ekf = ekf_predict(ekf, track.dt, cfg.ekf_q);
                if (!obs.empty()) ekf = ekf_update(ekf, obs);
                entry.estimate = ekf.mean.template head<2>();
            }
        }
        out.entries.push_back(std::move(entry));
    }

    if (out.entries.empty())
        throw NoFixAvailable("track '" + track.device_id + "' produced no usable fix");
    return out;
}

}  // namespace ftmloc
