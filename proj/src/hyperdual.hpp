#ifndef HFM_HYPERDUAL_HPP
#define HFM_HYPERDUAL_HPP

#include <cmath>

namespace hfm {

/// Second-order forward-mode number: value, two first-order sensitivities
/// and the mixed second-order sensitivity. Seeding the `a` and `b` slots
/// along input directions i and j makes arithmetic carry (f, df/dxi, df/dxj,
/// d2f/dxi dxj) exactly; i == j yields the pure second derivative in `dab`.
struct HyperDual {
    double v = 0.0;   ///< value
    double da = 0.0;  ///< sensitivity along seed direction a
    double db = 0.0;  ///< sensitivity along seed direction b
    double dab = 0.0; ///< mixed second-order sensitivity

    constexpr HyperDual() = default;
    constexpr HyperDual(double value) : v(value) {}
    constexpr HyperDual(double value, double a, double b, double ab)
        : v(value), da(a), db(b), dab(ab) {}

    /// An input variable seeded with direction weights a and b.
    static constexpr HyperDual seed(double value, double a, double b) {
        return HyperDual(value, a, b, 0.0);
    }
};

constexpr HyperDual operator+(const HyperDual& x, const HyperDual& y) {
    return {x.v + y.v, x.da + y.da, x.db + y.db, x.dab + y.dab};
}

constexpr HyperDual operator-(const HyperDual& x, const HyperDual& y) {
    return {x.v - y.v, x.da - y.da, x.db - y.db, x.dab - y.dab};
}

constexpr HyperDual operator-(const HyperDual& x) {
    return {-x.v, -x.da, -x.db, -x.dab};
}

/// Leibniz rule through second order: the dab component picks up the
/// cross terms x.da*y.db + x.db*y.da.
constexpr HyperDual operator*(const HyperDual& x, const HyperDual& y) {
    return {x.v * y.v,
            x.da * y.v + x.v * y.da,
            x.db * y.v + x.v * y.db,
            x.dab * y.v + x.da * y.db + x.db * y.da + x.v * y.dab};
}

constexpr HyperDual operator+(const HyperDual& x, double s) { return x + HyperDual(s); }
constexpr HyperDual operator+(double s, const HyperDual& x) { return HyperDual(s) + x; }
constexpr HyperDual operator-(const HyperDual& x, double s) { return x - HyperDual(s); }
constexpr HyperDual operator-(double s, const HyperDual& x) { return HyperDual(s) - x; }
constexpr HyperDual operator*(const HyperDual& x, double s) {
    return {x.v * s, x.da * s, x.db * s, x.dab * s};
}
constexpr HyperDual operator*(double s, const HyperDual& x) { return x * s; }

/// Chain rule for a smooth scalar map g with derivatives g1 = g', g2 = g''
/// evaluated at x.v. Shared by all the unary functions below.
constexpr HyperDual hd_unary(const HyperDual& x, double g0, double g1, double g2) {
    return {g0,
            g1 * x.da,
            g1 * x.db,
            g1 * x.dab + g2 * x.da * x.db};
}

inline HyperDual inv(const HyperDual& x) {
    const double r = 1.0 / x.v;
    return hd_unary(x, r, -r * r, 2.0 * r * r * r);
}

inline HyperDual operator/(const HyperDual& x, const HyperDual& y) { return x * inv(y); }
inline HyperDual operator/(const HyperDual& x, double s) { return x * (1.0 / s); }
inline HyperDual operator/(double s, const HyperDual& y) { return inv(y) * s; }

inline HyperDual sin(const HyperDual& x) {
    const double s = std::sin(x.v), c = std::cos(x.v);
    return hd_unary(x, s, c, -s);
}

inline HyperDual cos(const HyperDual& x) {
    const double s = std::sin(x.v), c = std::cos(x.v);
    return hd_unary(x, c, -s, -c);
}

inline HyperDual exp(const HyperDual& x) {
    const double e = std::exp(x.v);
    return hd_unary(x, e, e, e);
}

inline HyperDual tanh(const HyperDual& x) {
    const double t = std::tanh(x.v);
    const double s = 1.0 - t * t; // sech^2
    return hd_unary(x, t, s, -2.0 * t * s);
}

/// x raised to a constant real exponent.
inline HyperDual pow(const HyperDual& x, double p) {
    const double g0 = std::pow(x.v, p);
    const double g1 = p * std::pow(x.v, p - 1.0);
    const double g2 = p * (p - 1.0) * std::pow(x.v, p - 2.0);
    return hd_unary(x, g0, g1, g2);
}

} // namespace hfm

#endif
