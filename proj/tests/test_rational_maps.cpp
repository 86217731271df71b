#include <cmath>
#include <numbers>

#include "doctest.h"
#include "helpers.hpp"
#include "mfsg/errors.hpp"
#include "mfsg/rational_map.hpp"

using namespace mfsg;
using namespace mfsg::test;
using std::numbers::pi;

namespace {
double root_scale(const Polynomial& p, Complex x) {
    double s = 0.0, r = std::max(1.0, std::abs(x)), rk = 1.0;
    for (const auto& a : p.coeffs()) {
        s += std::abs(a) * rk;
        rk *= r;
    }
    return s;
}
}  // namespace

TEST_CASE("poly_eval") {
    CHECK(P({-1.0, 0.0, 1.0})(2.0) == Complex(3.0));
    CHECK(Polynomial::constant(1.0)(Complex(5.0, 1.0)) == Complex(1.0));
    CHECK(std::abs(Polynomial::monomial(1.0 / 64.0, 4)(2.0) - 0.25) < 1e-15);
}

TEST_CASE("polynomial trims and reports degree") {
    CHECK(P({1.0, 2.0, 0.0, 0.0}).degree() == 1);
    CHECK(Polynomial().degree() == -1);
    CHECK((P({1.0, 1.0}) * P({-1.0, 1.0})).coeffs() == std::vector<Complex>{-1.0, 0.0, 1.0});
}

TEST_CASE("poly_roots examples") {
    CHECK(same_multiset(poly_roots(P({-4.0, 0.0, 1.0})), {2.0, -2.0}, 1e-12));
    const Complex w = std::polar(1.0, 2.0 * pi / 3.0);
    CHECK(same_multiset(poly_roots(P({-8.0, 0.0, 0.0, 1.0})), {2.0, 2.0 * w, 2.0 * w * w}, 1e-12));
    CHECK(same_multiset(poly_roots(P({1.0, 0.0, 1.0})), {Complex(0, 1), Complex(0, -1)}, 1e-12));
}

TEST_CASE("poly_roots handles multiplicity and random polynomials") {
    // (z-1)^3 (z+2)
    const auto p = P({1.0, -1.0}) * P({-1.0, 1.0}) * P({-1.0, 1.0}) * P({2.0, 1.0});
    const auto r = poly_roots(p);
    REQUIRE(r.size() == 4);
    for (const auto& x : r) CHECK(std::abs(p(x)) <= 1e-12 * root_scale(p, x));

    Rng rng(42);
    for (int trial = 0; trial < 200; ++trial) {
        const int d = 2 + static_cast<int>(rng.below(7));
        std::vector<Complex> c(static_cast<std::size_t>(d + 1));
        for (auto& a : c) a = random_complex(rng, 3.0);
        const Polynomial q(c);
        const auto roots = poly_roots(q);
        REQUIRE(static_cast<int>(roots.size()) == q.degree());
        for (const auto& x : roots) CHECK(std::abs(q(x)) <= 1e-12 * root_scale(q, x));
    }
}

TEST_CASE("rmap_eval examples") {
    CHECK(pow_map(2)(SpherePoint::infinity()).at_infinity);
    const RationalMap g(P({1.0, 0.0, -2.0, 0.0, 1.0}));  // (z^2-1)^2
    CHECK(g(0.0) == SpherePoint(1.0));
    const RationalMap inv(Polynomial::constant(1.0), P({0.0, 1.0}));
    CHECK(inv(0.0).at_infinity);
    CHECK(std::abs(inv(SpherePoint::infinity()).value) == 0.0);
    CHECK_FALSE(inv(SpherePoint::infinity()).at_infinity);
}

TEST_CASE("rmap_eval in the far chart") {
    const RationalMap f(P({1.0, 0.0, 1.0}), P({0.0, 0.0, 2.0}));  // (z^2+1)/(2z^2)
    const SpherePoint v = f(Complex(3e9, 1e9));
    CHECK_FALSE(v.at_infinity);
    CHECK(std::abs(v.value - 0.5) < 1e-12);
    CHECK(std::abs(f(SpherePoint::infinity()).value - 0.5) < 1e-15);
}

TEST_CASE("rational map construction rejects degenerate input") {
    CHECK_THROWS_AS(RationalMap(Polynomial::constant(2.0)), InvalidArgument);
    CHECK_THROWS_AS(RationalMap(P({-1.0, 0.0, 1.0}), P({-1.0, 1.0})), InvalidArgument);
    CHECK_THROWS_AS(MultiMap({RationalMap(P({0.0, 2.0}))}), InvalidArgument);
    CHECK_THROWS_AS(MultiMap(std::vector<RationalMap>{}), InvalidArgument);
    CHECK_NOTHROW(MultiMap({RationalMap(P({0.0, 2.0})), pow_map(2)}));
}

TEST_CASE("rmap_derivative_norm examples") {
    const auto f = pow_map(2);
    CHECK(std::abs(f.derivative_norm(1.0) - 2.0) < 1e-15);
    CHECK(f.derivative_norm(0.0) == 0.0);
    CHECK(std::abs(f.derivative_norm(Complex(0, 1)) - 2.0) < 1e-15);
    CHECK(f.derivative_norm(SpherePoint::infinity()) == 0.0);
    // z^-2 on the unit circle.
    const RationalMap g(Polynomial::constant(1.0), Polynomial::monomial(1.0, 2));
    CHECK(std::abs(g.derivative_norm(std::polar(1.0, 0.3)) - 2.0) < 1e-14);
}

TEST_CASE("rmap_preimages examples") {
    CHECK(same_multiset(finite_values(pow_map(2).preimages(4.0)), {2.0, -2.0}, 1e-12));
    CHECK(same_multiset(finite_values(RationalMap(P({-1.0, 0.0, 1.0})).preimages(0.0)), {1.0, -1.0}, 1e-12));
    const Complex w = std::polar(1.0, 2.0 * pi / 3.0);
    CHECK(same_multiset(finite_values(pow_map(3).preimages(8.0)), {2.0, 2.0 * w, 2.0 * w * w}, 1e-12));
    const auto at_inf = pow_map(3).preimages(SpherePoint::infinity());
    CHECK(count_infinite(at_inf) == 3);
}

TEST_CASE("preimages at infinity appear when the degree drops") {
    // f = (z^2 + 1) / (2 z^2): f(w) = 1/2 only for w = infinity (twice).
    const RationalMap f(P({1.0, 0.0, 1.0}), P({0.0, 0.0, 2.0}));
    const auto pre = f.preimages(0.5);
    CHECK(pre.size() == 2);
    CHECK(count_infinite(pre) == 2);
}

TEST_CASE("rmap_compose examples") {
    CHECK(compose(pow_map(2), pow_map(2)).num().coeffs() == Polynomial::monomial(1.0, 4).coeffs());
    const RationalMap q(Polynomial::monomial(0.25, 2));
    const auto q2 = compose(q, q);
    CHECK(q2.degree() == 4);
    CHECK(std::abs(q2.num()[4] / q2.den()[0] - 1.0 / 64.0) < 1e-15);
    const RationalMap g(P({-1.0, 0.0, 1.0}));
    const auto g2 = compose(g, g);
    CHECK(g2.num().coeffs() == coliseum_f1().num().coeffs());
    CHECK_THROWS_AS(compose(RationalMap(Polynomial::monomial(1e80, 2)), RationalMap(Polynomial::monomial(1e30, 2))),
                    CoefficientOverflow);
}

TEST_CASE("rmap_critical_points examples") {
    auto crit = pow_map(2).critical_points();
    CHECK(same_multiset(finite_values(crit), {0.0}, 1e-12));
    CHECK(count_infinite(crit) == 1);
    crit = pow_map(3).critical_points();
    CHECK(same_multiset(finite_values(crit), {0.0, 0.0}, 1e-6));
    CHECK(count_infinite(crit) == 2);
    crit = RationalMap(P({1.0, 0.0, -2.0, 0.0, 1.0})).critical_points();
    CHECK(same_multiset(finite_values(crit), {0.0, 1.0, -1.0}, 1e-12));
    CHECK(count_infinite(crit) == 3);
    CHECK(crit.size() == 6);
}

TEST_CASE("monomial detection") {
    CHECK(pow_map(4, 1.0 / 64.0).monomial_exponent() == 4);
    CHECK(RationalMap(Polynomial::constant(2.0), Polynomial::monomial(1.0, 3)).monomial_exponent() == -3);
    CHECK_FALSE(coliseum_f1().monomial_exponent().has_value());
}

TEST_CASE("chordal_distance examples") {
    CHECK(chordal_distance(0.0, 0.0) == 0.0);
    CHECK(chordal_distance(0.0, SpherePoint::infinity()) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(chordal_distance(1.0, -1.0) == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(chordal_distance(SpherePoint::infinity(), SpherePoint::infinity()) == 0.0);
}

namespace {
std::vector<RationalMap> property_maps() {
    return {pow_map(2), pow_map(3), RationalMap(P({-1.0, 0.0, 1.0})), coliseum_f1(), coliseum_f2(),
            RationalMap(P({0.5, Complex(0.0, 1.0), 1.0}), P({1.0, 0.0, 0.0, 2.0})),
            RationalMap(P({Complex(0.3, 0.1), 0.0, 1.0}), P({1.0, -0.7}))};
}
}  // namespace

TEST_CASE("property: preimages map back to the target and count to the degree") {
    Rng rng(7);
    for (const auto& f : property_maps()) {
        for (int k = 0; k < 100; ++k) {
            const Complex z = random_complex(rng, 3.0);
            const auto pre = f.preimages(z);
            REQUIRE(static_cast<int>(pre.size()) == f.degree());
            for (const auto& y : pre) CHECK(chordal_distance(f(y), z) < 1e-8);
        }
    }
}

TEST_CASE("property: chain rule for the spherical derivative") {
    Rng rng(11);
    const auto maps = property_maps();
    for (std::size_t a = 0; a < maps.size(); ++a)
        for (std::size_t b = 0; b < maps.size(); ++b) {
            if (maps[a].degree() * maps[b].degree() > 12) continue;
            const auto fg = compose(maps[a], maps[b]);
            for (int k = 0; k < 20; ++k) {
                const Complex z = random_complex(rng, 1.5);
                const double lhs = fg.derivative_norm(z);
                const double rhs = maps[a].derivative_norm(maps[b](z)) * maps[b].derivative_norm(z);
                CHECK(std::abs(lhs - rhs) <= 1e-9 * std::max(rhs, 1e-300) + 1e-300);
            }
        }
}

TEST_CASE("property: chordal triangle inequality") {
    Rng rng(3);
    for (int k = 0; k < 2000; ++k) {
        auto pick = [&]() -> SpherePoint {
            if (rng.below(20) == 0) return SpherePoint::infinity();
            return random_complex(rng, rng.below(2) ? 1.0 : 100.0);
        };
        const SpherePoint x = pick(), y = pick(), z = pick();
        CHECK(chordal_distance(x, z) <= chordal_distance(x, y) + chordal_distance(y, z) + 1e-12);
        CHECK(chordal_distance(x, y) <= 2.0);
        CHECK(chordal_distance(x, y) == chordal_distance(y, x));
    }
}
