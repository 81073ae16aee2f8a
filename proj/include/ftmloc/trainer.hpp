#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "ftmloc/costs.hpp"
#include "ftmloc/types.hpp"

namespace ftmloc {

enum class GradMode { FiniteDiff, Analytic };

struct TrainerConfig {
    double learning_rate = 2e-3;
    int iterations = 1000;
    int batch_len = 30;
    CostWeights weights;
    Algo algo = Algo::EKF;
    int k_max = 5;
    double std_floor = 0.1;
    std::uint64_t seed = 1;
    GradMode grad_mode = GradMode::FiniteDiff;
    double fd_step = 1e-4;
    int eval_every = 20;
    double ekf_q = 1.0;
    // Distance scale used to precondition coefficient updates; the step on
    // c_l is scaled by coef_scale^(-2l) so all degrees move at comparable
    // effective rates.
    double coef_scale = 100.0;
    // Cap on the L2 norm of one preconditioned update, in meters. The
    // center-initialized unknown APs make the first iterations extremely
    // steep; bounded steps ride out that transient, after which updates are
    // plain gradient descent.
    double max_step = 1.0;

    LocalizeConfig localize() const {
        LocalizeConfig c;
        c.algo = algo;
        c.k_max = k_max;
        c.std_floor = std_floor;
        c.ekf_q = ekf_q;
        return c;
    }
};

// Deterministic flat indexing over the trainable scalars: unknown-AP
// coordinates first (ap_id order, x then y), then calibration coefficients
// (device_id order, ascending degree).
struct ParamLayout {
    std::vector<std::string> ap_ids;
    std::vector<std::string> device_ids;
    std::vector<int> poly_len;      // per device
    std::vector<int> device_offset; // flat offset of each device's block

    static ParamLayout of(const ParamSet& params);

    int coord_count() const { return 2 * static_cast<int>(ap_ids.size()); }
    int size() const;
    bool is_coord(int idx) const { return idx < coord_count(); }
    // For coefficient indices: (device position, degree).
    std::pair<int, int> coeff_pos(int idx) const;

    Eigen::VectorXd flatten(const ParamSet& params) const;
    ParamSet unflatten(const Eigen::VectorXd& flat) const;

    // Central-difference probe step for scalar idx. Coefficient probes scale
    // with the expected magnitude of each degree (base * 100^(1-l)).
    double fd_step_for(int idx, double base) const;
    // Gradient-descent preconditioning factor for scalar idx.
    double update_scale(int idx, double coef_scale) const;
};

struct TrainReport {
    struct MinibatchRow {
        int iteration;
        std::string device_id;
        double cost;
    };
    struct EvalRow {
        int iteration;
        double full_cost;
        double best_cost;
    };
    struct CoeffRow {
        int iteration;
        std::string device_id;
        Eigen::VectorXd coeffs;
    };
    struct CoordRow {
        int iteration;
        std::string ap_id;
        Vec2 coords;
    };

    std::vector<MinibatchRow> minibatch_costs;
    std::vector<EvalRow> evaluations;
    std::vector<CoeffRow> coeff_trace;
    std::vector<CoordRow> coord_trace;

    double initial_cost = std::numeric_limits<double>::quiet_NaN();
    double best_cost = std::numeric_limits<double>::infinity();
    int best_iteration = 0;
    ParamSet best_params;
};

// Every unknown AP starts at the centroid of the anchors; every device gets
// the identity calibration (0, 1, 0).
ParamSet init_params(const Scene& scene, const std::vector<std::string>& device_ids);

// Uniformly random contiguous window of exactly batch_len snapshots.
DeviceTrack sample_minibatch(const DeviceTrack& track, int batch_len, std::mt19937_64& rng);

// Gradient of the combined cost over `tracks` with respect to every
// trainable scalar, in ParamLayout order. FiniteDiff uses central
// differences with per-scalar steps; Analytic propagates exact forward-mode
// derivatives through calibration, solver and costs.
Eigen::VectorXd compute_gradient(const std::vector<DeviceTrack>& tracks, const Scene& scene,
                                 const ParamSet& params, const TrainerConfig& cfg);

// One preconditioned gradient-descent update; anchors are untouched by
// construction since only unknown-AP scalars are in the layout.
ParamSet gd_step(const ParamSet& params, const Eigen::VectorXd& grad, double alpha,
                 double coef_scale = 100.0);

// Minibatch gradient descent over the unified multi-device cost, tracking
// the best parameters seen at the periodic full-data evaluations. The
// report is built in place so callers can flush a partial report if
// training aborts.
ParamSet train(const std::vector<DeviceTrack>& tracks, const Scene& scene,
               const TrainerConfig& cfg, TrainReport& report);

std::pair<ParamSet, TrainReport> train(const std::vector<DeviceTrack>& tracks, const Scene& scene,
                                       const TrainerConfig& cfg);

}  // namespace ftmloc
