#pragma once

#include <complex>

namespace mfsg {

using Complex = std::complex<double>;

// Point of the Riemann sphere. `value` is ignored when `at_infinity` is set.
struct SpherePoint {
    Complex value{};
    bool at_infinity = false;

    SpherePoint() = default;
    SpherePoint(Complex z) : value(z) {}  // NOLINT: implicit on purpose
    SpherePoint(double re, double im = 0.0) : value(re, im) {}

    static SpherePoint infinity() {
        SpherePoint p;
        p.at_infinity = true;
        return p;
    }

    bool is_finite() const { return !at_infinity; }

    friend bool operator==(const SpherePoint& a, const SpherePoint& b) {
        if (a.at_infinity || b.at_infinity) return a.at_infinity == b.at_infinity;
        return a.value == b.value;
    }
};

/// Chordal distance on the unit sphere: 2|z-w| / sqrt((1+|z|^2)(1+|w|^2)).
/// Symmetric, bounded by 2, equal to 2/sqrt(1+|z|^2) when w is infinity.
double chordal_distance(const SpherePoint& z, const SpherePoint& w);

/// Stereographic embedding onto the unit sphere in R^3 (infinity -> north pole).
/// Euclidean distance between embeddings equals chordal_distance.
struct Vec3 {
    double x, y, z;
};
Vec3 to_sphere(const SpherePoint& p);

}  // namespace mfsg
