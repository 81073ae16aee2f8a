#pragma once

#include "ftmloc/types.hpp"

namespace ftmloc {

// Raw polynomial value at x, before any clamping (Horner form).
template <class S>
inline S eval_poly(const CalibrationPolyT<S>& poly, double x) {
    S acc = S(0.0);
    for (Eigen::Index l = poly.coeffs.size(); l-- > 0;) acc = acc * x + poly.coeffs[l];
    return acc;
}

// Calibrated distance estimate: the inverse-distortion polynomial evaluated
// at the raw FTM distance, clamped at zero. The clamp contributes zero
// derivative when active.
template <class S>
inline S calibrate(const CalibrationPolyT<S>& poly, double d_ftm) {
    S d = eval_poly(poly, d_ftm);
    return d > S(0.0) ? d : S(0.0);
}

// Constant-offset calibration expressed as the degenerate quadratic (b, 1, 0).
inline CalibrationPoly offset_calibration(double b) { return make_poly({b, 1.0, 0.0}); }

// Std-dev estimate for one measurement. The floor guards the divisions in
// the geometric cost when a burst reports zero variance.
inline double estimate_std(const RangingPair& pair, double floor) {
    return pair.s_ftm > floor ? pair.s_ftm : floor;
}

}  // namespace ftmloc
