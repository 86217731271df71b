#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "mfsg/rational_map.hpp"
#include "mfsg/rng.hpp"

namespace mfsg::test {

inline Polynomial P(std::initializer_list<Complex> c) { return Polynomial(std::vector<Complex>(c)); }
inline RationalMap pow_map(int d, Complex a = 1.0) { return RationalMap(Polynomial::monomial(a, d)); }

// (z^2 - 1)^2 - 1 and z^4 / 64.
inline RationalMap coliseum_f1() { return RationalMap(P({0.0, 0.0, -2.0, 0.0, 1.0})); }
inline RationalMap coliseum_f2() { return RationalMap(Polynomial::monomial(1.0 / 64.0, 4)); }
inline MultiMap coliseum_pair() { return MultiMap({coliseum_f1(), coliseum_f2()}); }

// Every expected point has a distinct match within tol.
inline bool same_multiset(std::vector<Complex> got, std::vector<Complex> want, double tol) {
    if (got.size() != want.size()) return false;
    for (const auto& w : want) {
        auto it = std::min_element(got.begin(), got.end(), [&](Complex a, Complex b) { return std::abs(a - w) < std::abs(b - w); });
        if (it == got.end() || std::abs(*it - w) > tol) return false;
        got.erase(it);
    }
    return true;
}

inline std::vector<Complex> finite_values(const std::vector<SpherePoint>& pts) {
    std::vector<Complex> v;
    for (const auto& p : pts)
        if (!p.at_infinity) v.push_back(p.value);
    return v;
}

inline long count_infinite(const std::vector<SpherePoint>& pts) {
    return std::count_if(pts.begin(), pts.end(), [](const SpherePoint& p) { return p.at_infinity; });
}

inline Complex random_complex(Rng& rng, double scale = 2.0) {
    return {scale * (2.0 * rng.uniform() - 1.0), scale * (2.0 * rng.uniform() - 1.0)};
}

// Golden ratio p1 = (sqrt 5 - 1)/2, so p1 + p1^2 = 1.
inline const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

// Scalar bisection for a decreasing function on [lo, hi].
template <class F>
double bisect(F&& f, double lo, double hi, double tol = 1e-13) {
    while (hi - lo > tol) {
        const double m = 0.5 * (lo + hi);
        (f(m) > 0.0 ? lo : hi) = m;
    }
    return 0.5 * (lo + hi);
}

// Oracle for power multi-maps: root t of sum_i p_i^beta d_i^(1-t) = 1.
inline double power_map_t(const std::vector<double>& p, const std::vector<int>& d, double beta) {
    auto g = [&](double t) {
        double s = 0.0;
        for (std::size_t i = 0; i < p.size(); ++i) s += std::pow(p[i], beta) * std::pow(d[i], 1.0 - t);
        return s - 1.0;
    };
    return bisect(g, -200.0, 200.0);
}

}  // namespace mfsg::test
