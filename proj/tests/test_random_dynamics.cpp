#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mfsg/errors.hpp"
#include "mfsg/parallel.hpp"
#include "mfsg/random_dynamics.hpp"
#include "mfsg/sphere.hpp"

using namespace mfsg;
using namespace mfsg::test;

namespace {

// 3x3 window whose middle pixel centre is exactly z.
ColiseumSetup around(Complex z) {
    ColiseumSetup s;
    s.window = {z.real() - 0.3, z.real() + 0.3, z.imag() - 0.3, z.imag() + 0.3};
    s.width = s.height = 3;
    return s;
}

const Window kUnit{-1.0, 1.0, -1.0, 1.0};
const Radii kRadii{2.0 * 2.0 / 512.0, 1.4, 10};

// Planted exponent a at the centre of pixel (256, 256).
PixelField planted(double a) {
    const Complex z0(1.0 / 512.0, 1.0 / 512.0);
    return PixelField::synthetic(kUnit, 512, 512, [=](Complex y) { return std::min(1.0, std::pow(std::abs(y - z0), a)); });
}

}  // namespace

TEST_CASE("escape radius") {
    CHECK(min_escape_radius(MultiMap({pow_map(2)})) == doctest::Approx(2.0));
    CHECK(min_escape_radius(coliseum_pair()) == doctest::Approx(std::cbrt(128.0)).epsilon(1e-9));
    CHECK_NOTHROW(validate_escape_radius(coliseum_pair(), 5.04, {-4, 4, -4, 4}));
    CHECK_THROWS_AS(validate_escape_radius(coliseum_pair(), 3.0, {-4, 4, -4, 4}), InvalidEscapeRadius);
    CHECK_THROWS_AS(validate_escape_radius(MultiMap({pow_map(2)}), 1.5, kUnit), InvalidEscapeRadius);
    const MultiMap inv({RationalMap(Polynomial::constant(1.0), Polynomial::monomial(1.0, 2))});
    CHECK_THROWS_AS(min_escape_radius(inv), NotPolynomial);
}

TEST_CASE("trap suggestions come from attracting cycles") {
    const auto traps = suggest_traps(coliseum_pair());
    const bool has_zero = std::any_of(traps.begin(), traps.end(), [](const TrapRegion& t) { return std::abs(t.center.value) < 1e-9; });
    CHECK(has_zero);
    const auto basilica = suggest_traps(MultiMap({RationalMap(P({-1.0, 0.0, 1.0}))}));
    CHECK(basilica.size() == 2);  // the cycle 0 -> -1 -> 0
}

TEST_CASE("coliseum_monte_carlo examples") {
    const MultiMap sq({pow_map(2)});
    auto s = around(2.0);
    CHECK(coliseum_monte_carlo(sq, {1.0}, s, 64, 1).at(1, 1) == 1.0);
    s = around(0.5);
    s.traps = {{0.0, 0.1, "origin"}};
    CHECK(coliseum_monte_carlo(sq, {1.0}, s, 64, 1).at(1, 1) == 0.0);
    s = around(10.0);
    CHECK(coliseum_monte_carlo(coliseum_pair(), {0.5, 0.5}, s, 64, 1).at(1, 1) == 1.0);
}

TEST_CASE("coliseum_monte_carlo flags undecided trajectories") {
    auto s = around(0.0);
    const auto f = coliseum_monte_carlo(coliseum_pair(), {0.5, 0.5}, s, 10, 1);  // 0 is fixed and no trap is given
    CHECK(f.at(1, 1) == 0.5);
    CHECK(f.flagged >= 10);
}

TEST_CASE("coliseum_fixed_point for z^2") {
    const MultiMap sq({pow_map(2)});
    ColiseumSetup s;
    s.window = {-2, 2, -2, 2};
    s.width = s.height = 128;
    s.traps = {{0.0, 0.1, "origin"}};
    const auto f = coliseum_fixed_point(sq, {1.0}, s, 1e-6);
    CHECK(f.residual < 1e-6);
    CHECK(coliseum_reapply(sq, {1.0}, s, f) < 2e-6);
    for (int j = 0; j < f.height; ++j)
        for (int i = 0; i < f.width; ++i) {
            const double r = std::abs(f.center(i, j));
            const double v = f.at(i, j);
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
            if (r > 1.1) CHECK(v > 0.99);
            if (r < 0.9) CHECK(v < 0.01);
        }
}

TEST_CASE("fixed point and monte carlo agree on the coliseum pair") {
    const auto mm = coliseum_pair();
    ColiseumSetup s;
    s.window = {-4, 4, -4, 4};
    s.width = s.height = 64;
    s.traps = {{0.0, 0.25, "origin"}};
    const auto fp = coliseum_fixed_point(mm, {0.5, 0.5}, s, 1e-6);
    const auto mc = coliseum_monte_carlo(mm, {0.5, 0.5}, s, 400, 3);
    int bad = 0;
    for (int j = 1; j < 63; ++j)
        for (int i = 1; i < 63; ++i) bad += std::abs(fp.at(i, j) - mc.at(i, j)) > 4.0 / std::sqrt(400.0) + 0.05;
    CHECK(bad <= 62 * 62 / 100);
    for (int k : {0, 63}) {  // corners lie beyond the escape radius
        CHECK(fp.at(k, 0) == 1.0);
        CHECK(mc.at(k, 63) == 1.0);
    }
}

TEST_CASE("monte carlo is deterministic at any worker count") {
    const auto mm = coliseum_pair();
    ColiseumSetup s;
    s.window = {-2, 2, -2, 2};
    s.width = s.height = 24;
    s.traps = {{0.0, 0.25, "origin"}};
    const auto a = coliseum_monte_carlo(mm, {0.3, 0.7}, s, 50, 11);
    set_worker_count(4);
    const auto b = coliseum_monte_carlo(mm, {0.3, 0.7}, s, 50, 11);
    set_worker_count(1);
    CHECK(a.values == b.values);
    const auto c = coliseum_monte_carlo(mm, {0.3, 0.7}, s, 50, 12);
    CHECK_FALSE(a.values == c.values);
}

TEST_CASE("coliseum input validation") {
    const auto mm = coliseum_pair();
    auto s = around(0.0);
    CHECK_THROWS_AS(coliseum_fixed_point(mm, {0.5, 0.6}, s), InvalidArgument);
    s.escape_radius = 3.0;
    CHECK_THROWS_AS(coliseum_fixed_point(mm, {0.5, 0.5}, s), InvalidEscapeRadius);
    const MultiMap rat({RationalMap(Polynomial::constant(1.0), Polynomial::monomial(1.0, 2))});
    CHECK_THROWS_AS(coliseum_monte_carlo(rat, {1.0}, around(0.0), 5, 1), NotPolynomial);
}

TEST_CASE("holder_exponent examples") {
    const auto flat = PixelField::synthetic(kUnit, 512, 512, [](Complex) { return 0.3; });
    auto fit = holder_exponent(flat, 0.1, kRadii);
    CHECK(std::isinf(fit.exponent));
    CHECK(fit.r2 == 1.0);

    for (double a : {0.5, 0.7, 0.9}) {
        fit = holder_exponent(planted(a), Complex(1.0 / 512.0, 1.0 / 512.0), kRadii);
        CHECK(std::abs(fit.exponent - a) < 0.05);
        CHECK(fit.r2 > 0.95);
        CHECK(fit.radii_used == 10);
    }

    // Off the origin the balls are chordal, not planar discs.
    const Complex zq(-1.0 + 409.5 / 256.0, -1.0 + 358.5 / 256.0);
    const auto chordal = PixelField::synthetic(kUnit, 512, 512, [&](Complex y) { return std::pow(chordal_distance(y, zq), 0.7); });
    fit = holder_exponent(chordal, zq, kRadii);
    CHECK(std::abs(fit.exponent - 0.7) < 1e-3);
    CHECK(fit.r2 > 0.999);
}

TEST_CASE("holder_exponent degenerate fits and bad radii") {
    auto step = PixelField::synthetic(kUnit, 512, 512, [](Complex y) { return std::abs(y) < 0.05 ? 0.0 : 1.0; });
    step.mode = PixelField::Mode::fixed_point;
    step.tol = 0.01;
    CHECK_THROWS_AS(holder_exponent(step, Complex(1.0 / 512.0, 1.0 / 512.0), kRadii), DegenerateFit);
    CHECK_THROWS_AS(holder_exponent(planted(0.5), 0.0, Radii{0.001, 1.4, 10}), InvalidArgument);
    CHECK_THROWS_AS(holder_exponent(planted(0.5), 0.0, Radii{0.01, 1.4, 4}), InvalidArgument);
}

TEST_CASE("holder_survey on a two-region planted field") {
    const Complex a(-0.5 + 1.0 / 512.0, 1.0 / 512.0), b(0.5 + 1.0 / 512.0, 1.0 / 512.0);
    const auto field = PixelField::synthetic(kUnit, 512, 512, [&](Complex y) {
        return y.real() < 0.0 ? std::pow(std::min(std::abs(y - a), 0.4), 0.5) : std::pow(std::min(std::abs(y - b), 0.4), 0.9);
    });
    const JuliaCloud cloud({a, b, Complex(3.0, 0.0)});
    const auto rep = holder_survey(field, cloud, 40, kRadii, 5);
    CHECK(rep.outside_window == 1);
    CHECK(rep.rows.size() == 40);
    CHECK(rep.well_fitted == 40);
    CHECK(std::abs(rep.min_exponent - 0.5) < 0.05);
    CHECK(std::abs(rep.max_exponent - 0.9) < 0.05);
    std::size_t total = 0;
    for (const auto& [edge, count] : rep.histogram) total += count;
    CHECK(total == 40);

    SpectrumTable st;
    st.alpha_minus = 0.55;
    st.alpha_plus = 0.85;
    const auto cmp = holder_survey(field, cloud, 40, kRadii, 5, &st);
    CHECK(cmp.compared);
    CHECK(cmp.min_ok);
    CHECK(cmp.max_ok);
    CHECK(cmp.fraction_in_range == 1.0);

    std::ostringstream os;
    write_holder_csv(rep, os);
    CHECK(os.str().rfind("re,im,exponent,r2,n_radii\n", 0) == 0);
    const auto again = holder_survey(field, cloud, 40, kRadii, 5);
    std::ostringstream os2;
    write_holder_csv(again, os2);
    CHECK(os.str() == os2.str());
}

TEST_CASE("alpha_minus_bound examples") {
    CHECK(alpha_minus_bound(MultiMap({pow_map(2)}), {1.0}, 100, 20, 1) == 0.0);
    const double p1 = kGolden, p2 = p1 * p1;
    const double b = alpha_minus_bound(MultiMap({pow_map(2), pow_map(4)}), {p1, p2}, 500, 30, 1);
    const double want = -(p1 * std::log(p1) + p2 * std::log(p2)) / (p1 * std::log(2.0) + p2 * std::log(4.0));
    CHECK(std::abs(b - want) < 1e-12);
    CHECK(b == doctest::Approx(0.6942).epsilon(1e-3));
    const double c = alpha_minus_bound(coliseum_pair(), {0.5, 0.5}, 500, 40, 1);
    CHECK(c > 0.0);
    CHECK(c < 1.0);
    // A generator with an escaping critical point adds a positive Green term.
    const double e = alpha_minus_bound(MultiMap({pow_map(2), RationalMap(P({3.0, 0.0, 1.0}))}), {0.5, 0.5}, 500, 40, 1);
    CHECK(e < std::log(2.0) / std::log(2.0));
    CHECK_THROWS_AS(alpha_minus_bound(MultiMap({RationalMap(Polynomial::constant(1.0), Polynomial::monomial(1.0, 2)), pow_map(2)}),
                                      {0.5, 0.5}, 10, 10, 1),
                    NotPolynomial);
}
