#include <cmath>
#include <sstream>

#include "doctest.h"
#include "helpers.hpp"
#include "mfsg/errors.hpp"
#include "mfsg/spectrum.hpp"

using namespace mfsg;
using namespace mfsg::test;

namespace {

const SpherePoint kOne(1.0);

// -t'(beta) for power maps by implicit differentiation of sum p^beta d^(1-t) = 1.
double power_map_alpha(const std::vector<double>& p, const std::vector<int>& d, double beta) {
    const double t = power_map_t(p, d, beta);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double w = std::pow(p[i], beta) * std::pow(d[i], 1.0 - t);
        num += w * std::log(p[i]);
        den += w * std::log(static_cast<double>(d[i]));
    }
    return -num / den;
}

FreeEnergyTable power_pair_table() {
    static const auto ft = free_energy_table(MultiMap({pow_map(2), pow_map(3)}), HolderFamily::log_prob({0.5, 0.5}), kOne,
                                             uniform_grid(-4.0, 4.0, 33), 6);
    return ft;
}

FreeEnergyTable linear_table() {
    static const auto ft = free_energy_table(MultiMap({pow_map(2)}), HolderFamily::constant({-std::log(2.0)}), kOne,
                                             uniform_grid(-2.0, 2.0, 9), 5);
    return ft;
}

}  // namespace

TEST_CASE("alpha_of_beta examples") {
    for (double a : alpha_of_beta(linear_table())) CHECK(std::abs(a - 1.0) < 1e-8);

    const auto ft = power_pair_table();
    const auto a = alpha_of_beta(ft);
    CHECK(a[16] == doctest::Approx(0.8024).epsilon(1e-4));
    CHECK(std::abs(a[16] - power_map_alpha({0.5, 0.5}, {2, 3}, 0.0)) < 1e-4);
    for (std::size_t k = 1; k < a.size(); ++k) CHECK(a[k] <= a[k - 1] + 1e-12);
    for (std::size_t k = 0; k < a.size(); ++k) CHECK(std::abs(a[k] - power_map_alpha({0.5, 0.5}, {2, 3}, ft.betas[k])) < 2e-3);

    FreeEnergyTable small = ft;
    small.betas.resize(4);
    small.t.resize(4);
    CHECK_THROWS_AS(alpha_of_beta(small), GridTooCoarse);
}

TEST_CASE("spectrum_parametric examples") {
    const auto ft = power_pair_table();
    const auto st = spectrum_parametric(ft);
    CHECK(st.delta == doctest::Approx(1.7879).epsilon(1e-4));
    CHECK(st.s[16] == st.delta);
    CHECK(*std::max_element(st.s.begin(), st.s.end()) == doctest::Approx(st.delta).epsilon(1e-3));
    CHECK_FALSE(st.trivial);
    const auto props = spectrum_properties(ft, st);
    CHECK(props.convex());
    CHECK(props.concave());
    CHECK(props.range_ordered);
    CHECK(props.apex());
    CHECK(props.interior_positive);
    for (std::size_t k = 0; k < st.s.size(); ++k) CHECK(st.s[k] == st.betas[k] * st.alpha[k] + ft.t[k]);

    const auto lin = spectrum_parametric(linear_table());
    CHECK(lin.trivial);
    for (std::size_t k = 0; k < lin.s.size(); ++k) {
        CHECK(std::abs(lin.alpha[k] - 1.0) < 1e-8);
        CHECK(std::abs(lin.s[k] - 1.0) < 1e-8);
    }
}

TEST_CASE("legendre_direct examples") {
    const auto ft = power_pair_table();
    const auto st = spectrum_parametric(ft);
    CHECK(std::abs(legendre_direct(ft, st.alpha_zero) - st.delta) < 1e-3);
    for (std::size_t j = 2; j + 2 < ft.betas.size(); ++j)
        CHECK(std::abs(legendre_direct(ft, st.alpha[j]) - st.s[j]) < 1e-4);
    CHECK_THROWS_AS(legendre_direct(ft, st.alpha_plus + 0.1), OutOfRange);

    const auto lt = linear_table();
    CHECK(std::abs(legendre_direct(lt, 1.0) - 1.0) < 1e-8);
    // Any other alpha is attained only at an endpoint (or is outside the range).
    CHECK_THROWS_AS(legendre_direct(lt, 1.2), OutOfRange);
}

TEST_CASE("lyapunov_spectrum examples") {
    auto st = lyapunov_spectrum(MultiMap({pow_map(2)}), kOne, 6, uniform_grid(-2.0, 2.0, 9));
    CHECK(st.trivial);
    CHECK(std::abs(st.alpha_zero - 1.0 / std::log(2.0)) < 1e-6);
    CHECK(st.gamma.has_value());
    CHECK(std::abs(*st.gamma - std::log(2.0)) < 1e-8);

    st = lyapunov_spectrum(MultiMap({pow_map(2), pow_map(3)}), kOne, 6, uniform_grid(-4.0, 4.0, 33));
    CHECK_FALSE(st.trivial);
    for (double a : st.alpha) {
        CHECK(a >= 1.0 / std::log(3.0) - 0.02);
        CHECK(a <= 1.0 / std::log(2.0) + 0.02);
    }
    // Equal degrees give the linear t(beta) = 2 - beta / log 2.
    st = lyapunov_spectrum(MultiMap({pow_map(2), pow_map(2, Complex(0.0, 1.0))}), kOne, 6, uniform_grid(-2.0, 2.0, 9));
    CHECK(st.trivial);
}

TEST_CASE("rigidity_test examples") {
    const double p1 = kGolden;
    const MultiMap gold({pow_map(2), pow_map(4)});
    const std::vector<double> c{std::log(p1), 2.0 * std::log(p1)};
    const auto tables = build_leaf_tables(gold, HolderFamily::log_prob({p1, p1 * p1}), kOne, 6);
    const auto ft = free_energy_table(tables, uniform_grid(-4.0, 4.0, 33));
    const double g = gamma_root(tables), d = ft.t[16];
    auto r = rigidity_test(gold, c, ft, g, d);
    CHECK(r.verdict == RigidityReport::Verdict::trivial);
    CHECK(std::abs(r.lambda_hat - std::log(2.0) / std::log(p1)) < 1e-12);
    CHECK(r.lambda_hat == doctest::Approx(-1.4404).epsilon(1e-4));
    CHECK(r.consistent);
    CHECK(r.syntactic_power_map);

    const std::vector<double> half{std::log(0.5), std::log(0.5)};
    const auto th = build_leaf_tables(gold, HolderFamily::log_prob({0.5, 0.5}), kOne, 6);
    const auto fh = free_energy_table(th, uniform_grid(-4.0, 4.0, 33));
    r = rigidity_test(gold, half, fh, gamma_root(th), fh.t[16]);
    CHECK(r.lambda_spread == doctest::Approx(std::log(2.0) * std::abs(1.0 / std::log(0.5) - 2.0 / std::log(0.5))));
    CHECK(r.verdict == RigidityReport::Verdict::nontrivial);

    const auto mm = coliseum_pair();
    const auto tc = build_leaf_tables(mm, HolderFamily::log_prob({0.5, 0.5}), repelling_fixed_point(mm[0]).point, 5);
    const auto fc = free_energy_table(tc, uniform_grid(-2.0, 2.0, 17));
    r = rigidity_test(mm, half, fc, gamma_root(tc), fc.t[8]);
    CHECK_FALSE(r.syntactic_power_map);
    CHECK(r.verdict == RigidityReport::Verdict::nontrivial);

    CHECK_THROWS_AS(rigidity_test(gold, {0.1, -0.1}, ft, g, d), InvalidArgument);
    CHECK(std::string(verdict_name(RigidityReport::Verdict::inconclusive)) == "inconclusive");
}

TEST_CASE("spectrum csv") {
    std::ostringstream os;
    write_spectrum_csv(spectrum_parametric(linear_table()), os);
    CHECK(os.str().rfind("beta,alpha,s\n0", 0) == std::string::npos);
    CHECK(os.str().rfind("beta,alpha,s\n-2,", 0) == 0);
}
