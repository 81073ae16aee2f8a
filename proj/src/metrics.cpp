#include "ftmloc/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace ftmloc {

ErrorStats summarize_errors(const std::vector<double>& errors) {
    if (errors.empty()) throw EmptyInput("no error samples");
    ErrorStats s;
    double sq = 0.0;
    for (double e : errors) {
        s.mae += e;
        sq += e * e;
        s.max = std::max(s.max, e);
    }
    const double n = static_cast<double>(errors.size());
    s.mae /= n;
    s.rmse = std::sqrt(sq / n);
    return s;
}

CdfSeries empirical_cdf(std::vector<double> errors) {
    if (errors.empty()) throw EmptyInput("no error samples");
    std::sort(errors.begin(), errors.end());
    CdfSeries cdf;
    cdf.reserve(errors.size());
    const double n = static_cast<double>(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i)
        cdf.emplace_back(errors[i], static_cast<double>(i + 1) / n);
    return cdf;
}

ErrorStats coord_errors(const std::map<std::string, Vec2>& est,
                        const std::map<std::string, Vec2>& truth) {
    if (est.size() != truth.size()) throw KeyMismatch("estimate and truth AP sets differ in size");
    std::vector<double> errors;
    errors.reserve(est.size());
    for (const auto& [id, p] : est) {
        const auto it = truth.find(id);
        if (it == truth.end()) throw KeyMismatch("AP '" + id + "' missing from truth");
        errors.push_back(distance<double>(p, it->second));
    }
    return summarize_errors(errors);
}

RangingErrors ranging_errors(const std::vector<std::pair<double, double>>& pairs) {
    if (pairs.empty()) throw EmptyInput("no ranging samples");
    std::vector<double> errors;
    errors.reserve(pairs.size());
    for (const auto& [d_hat, d_true] : pairs) errors.push_back(std::abs(d_hat - d_true));
    return {summarize_errors(errors), empirical_cdf(errors)};
}

PositioningErrors positioning_errors(const FixSeries& fixes, const std::vector<Vec2>& truth) {
    if (fixes.entries.size() != truth.size())
        throw LengthMismatch("fix series and truth have different lengths");
    std::vector<double> errors;
    errors.reserve(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i)
        errors.push_back(distance<double>(fixes.entries[i].estimate, truth[i]));
    return {summarize_errors(errors), empirical_cdf(errors)};
}

}  // namespace ftmloc
