#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "ftmloc/types.hpp"

namespace ftmloc {

struct ErrorStats {
    double mae = 0.0;
    double rmse = 0.0;
    double max = 0.0;
};

// Empirical CDF as (error, fraction <=) pairs, one per sample, sorted.
using CdfSeries = std::vector<std::pair<double, double>>;

ErrorStats summarize_errors(const std::vector<double>& errors);
CdfSeries empirical_cdf(std::vector<double> errors);

// Per-AP Euclidean coordinate errors. Key sets must match.
ErrorStats coord_errors(const std::map<std::string, Vec2>& est,
                        const std::map<std::string, Vec2>& truth);

struct RangingErrors {
    ErrorStats stats;
    CdfSeries cdf;
};

// Absolute distance-estimation errors over (calibrated, true) pairs.
RangingErrors ranging_errors(const std::vector<std::pair<double, double>>& pairs);

struct PositioningErrors {
    ErrorStats stats;
    CdfSeries cdf;
};

// Per-step Euclidean position errors; truth[i] corresponds to entries[i].
PositioningErrors positioning_errors(const FixSeries& fixes, const std::vector<Vec2>& truth);

}  // namespace ftmloc
