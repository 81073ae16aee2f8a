#pragma once

#include <Eigen/Core>
#include <cmath>

namespace ftmloc {

// Forward-mode scalar carrying one directional derivative. Instantiating the
// templated pipeline with Dual instead of double yields the exact derivative
// of every output along the seeded parameter direction. Comparisons act on
// the value part only, so discrete choices (AP selection, clamps, pivoting)
// resolve identically to a plain double run.
struct Dual {
    double v = 0.0;  // value
    double d = 0.0;  // directional derivative

    Dual() = default;
    Dual(double value) : v(value) {}  // NOLINT: implicit by design
    Dual(double value, double deriv) : v(value), d(deriv) {}

    Dual& operator+=(const Dual& o) {
        v += o.v;
        d += o.d;
        return *this;
    }
    Dual& operator-=(const Dual& o) {
        v -= o.v;
        d -= o.d;
        return *this;
    }
    Dual& operator*=(const Dual& o) {
        d = d * o.v + v * o.d;
        v *= o.v;
        return *this;
    }
    Dual& operator/=(const Dual& o) {
        d = (d * o.v - v * o.d) / (o.v * o.v);
        v /= o.v;
        return *this;
    }
};

inline Dual operator+(Dual a, const Dual& b) { return a += b; }
inline Dual operator-(Dual a, const Dual& b) { return a -= b; }
inline Dual operator*(Dual a, const Dual& b) { return a *= b; }
inline Dual operator/(Dual a, const Dual& b) { return a /= b; }
inline Dual operator-(const Dual& a) { return {-a.v, -a.d}; }
inline Dual operator+(const Dual& a) { return a; }

inline bool operator<(const Dual& a, const Dual& b) { return a.v < b.v; }
inline bool operator>(const Dual& a, const Dual& b) { return a.v > b.v; }
inline bool operator<=(const Dual& a, const Dual& b) { return a.v <= b.v; }
inline bool operator>=(const Dual& a, const Dual& b) { return a.v >= b.v; }
inline bool operator==(const Dual& a, const Dual& b) { return a.v == b.v; }
inline bool operator!=(const Dual& a, const Dual& b) { return a.v != b.v; }

inline Dual sqrt(const Dual& a) {
    const double r = std::sqrt(a.v);
    return {r, r > 0.0 ? a.d / (2.0 * r) : 0.0};
}
inline Dual abs(const Dual& a) { return a.v < 0.0 ? -a : a; }
inline Dual abs2(const Dual& a) { return a * a; }
inline const Dual& conj(const Dual& a) { return a; }
inline const Dual& real(const Dual& a) { return a; }
inline double imag(const Dual&) { return 0.0; }
inline bool isfinite(const Dual& a) { return std::isfinite(a.v) && std::isfinite(a.d); }

// Value extraction usable in code templated on the scalar type.
inline double value_of(double x) { return x; }
inline double value_of(const Dual& x) { return x.v; }

}  // namespace ftmloc

namespace Eigen {

template <>
struct NumTraits<ftmloc::Dual> : NumTraits<double> {
    typedef ftmloc::Dual Real;
    typedef ftmloc::Dual NonInteger;
    typedef ftmloc::Dual Nested;
    typedef double Literal;
    enum {
        IsComplex = 0,
        IsInteger = 0,
        IsSigned = 1,
        RequireInitialization = 1,
        ReadCost = 1,
        AddCost = 2,
        MulCost = 2,
    };
    static inline Real epsilon() { return Real(NumTraits<double>::epsilon()); }
    static inline Real dummy_precision() { return Real(NumTraits<double>::dummy_precision()); }
    static inline Real highest() { return Real(NumTraits<double>::highest()); }
    static inline Real lowest() { return Real(NumTraits<double>::lowest()); }
    static inline int digits10() { return NumTraits<double>::digits10(); }
};

template <typename BinOp>
struct ScalarBinaryOpTraits<ftmloc::Dual, double, BinOp> {
    typedef ftmloc::Dual ReturnType;
};
template <typename BinOp>
struct ScalarBinaryOpTraits<double, ftmloc::Dual, BinOp> {
    typedef ftmloc::Dual ReturnType;
};

}  // namespace Eigen
