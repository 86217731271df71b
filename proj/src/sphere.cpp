#include "mfsg/sphere.hpp"

#include <cmath>

namespace mfsg {

double chordal_distance(const SpherePoint& z, const SpherePoint& w) {
    if (z.at_infinity && w.at_infinity) return 0.0;
    if (z.at_infinity) return 2.0 / std::hypot(1.0, std::abs(w.value));
    if (w.at_infinity) return 2.0 / std::hypot(1.0, std::abs(z.value));
    const double d = 2.0 * std::abs(z.value - w.value) /
                     (std::hypot(1.0, std::abs(z.value)) * std::hypot(1.0, std::abs(w.value)));
    return d > 2.0 ? 2.0 : d;
}

Vec3 to_sphere(const SpherePoint& p) {
    if (p.at_infinity) return {0.0, 0.0, 1.0};
    const double r2 = std::norm(p.value);
    if (!std::isfinite(r2)) return {0.0, 0.0, 1.0};
    const double s = 1.0 / (1.0 + r2);
    return {2.0 * p.value.real() * s, 2.0 * p.value.imag() * s, (r2 - 1.0) * s};
}

}  // namespace mfsg
