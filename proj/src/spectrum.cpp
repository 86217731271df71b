#include "mfsg/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <ostream>

#include "mfsg/errors.hpp"

namespace mfsg {

std::vector<double> alpha_of_beta(const FreeEnergyTable& table) {
    const auto& t = table.t;
    const std::size_t n = t.size();
    if (n < 5 || table.betas.size() != n) throw GridTooCoarse("alpha_of_beta: need at least 5 grid points");
    const double h = table.step();
    if (!(h > 0.0)) throw GridTooCoarse("alpha_of_beta: grid must be ascending");
    std::vector<double> a(n);
    a[0] = (3.0 * t[0] - 4.0 * t[1] + t[2]) / (2.0 * h);
    a[n - 1] = -(3.0 * t[n - 1] - 4.0 * t[n - 2] + t[n - 3]) / (2.0 * h);
    a[1] = -(t[2] - t[0]) / (2.0 * h);
    a[n - 2] = -(t[n - 1] - t[n - 3]) / (2.0 * h);
    for (std::size_t k = 2; k + 2 < n; ++k)
        a[k] = -(-t[k + 2] + 8.0 * t[k + 1] - 8.0 * t[k - 1] + t[k - 2]) / (12.0 * h);
    return a;
}

SpectrumTable spectrum_parametric(const FreeEnergyTable& table, std::optional<double> gamma) {
    SpectrumTable st;
    st.betas = table.betas;
    st.alpha = alpha_of_beta(table);
    const auto k0 = table.zero_index();
    if (!k0) throw GridTooCoarse("spectrum: beta grid must contain 0");
    const std::size_t n = st.betas.size();
    st.s.resize(n);
    for (std::size_t k = 0; k < n; ++k) st.s[k] = st.betas[k] * st.alpha[k] + table.t[k];
    st.alpha_plus = st.alpha.front();
    st.alpha_minus = st.alpha.back();
    st.alpha_zero = st.alpha[*k0];
    st.delta = table.t[*k0];
    st.gamma = gamma;
    for (std::size_t k = 0; k < n; ++k)
        st.linearity_residual =
            std::max(st.linearity_residual, std::abs(table.t[k] - (st.delta - st.alpha_zero * st.betas[k])));
    st.trivial = st.alpha_plus - st.alpha_minus < kTrivialAlphaRange && st.linearity_residual < kTrivialLinearity;
    return st;
}

double legendre_direct(const FreeEnergyTable& table, double alpha) {
    const auto a = alpha_of_beta(table);
    const double lo = std::min(a.front(), a.back()), hi = std::max(a.front(), a.back());
    if (alpha < lo - 1e-12 || alpha > hi + 1e-12) throw OutOfRange("legendre_direct: alpha outside [alpha_minus, alpha_plus]");
    const std::size_t n = table.t.size();
    std::vector<double> v(n);
    for (std::size_t k = 0; k < n; ++k) v[k] = table.t[k] + table.betas[k] * alpha;
    const double best = *std::min_element(v.begin(), v.end());
    bool interior = false;
    for (std::size_t k = 1; k + 1 < n; ++k) interior = interior || v[k] <= best + 1e-7;
    if (!interior) throw OutOfRange("legendre_direct: infimum attained only at a grid endpoint");
    return best;
}

SpectrumTable lyapunov_spectrum(const MultiMap& mm, const SpherePoint& base, int depth, const std::vector<double>& betas) {
    const auto tables = build_leaf_tables(mm, HolderFamily::scalar(-1.0), base, depth);
    const auto ft = free_energy_table(tables, betas);
    return spectrum_parametric(ft, gamma_root(tables));
}

SpectrumProperties spectrum_properties(const FreeEnergyTable& ft, const SpectrumTable& st) {
    SpectrumProperties p;
    p.t_min_second_difference = ft.min_second_difference;

    // Concavity: slopes of s over alpha must not increase along ascending alpha.
    std::vector<std::size_t> order(st.alpha.size());
    std::iota(order.begin(), order.end(), 0U);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return st.alpha[i] < st.alpha[j]; });
    std::vector<double> slopes;
    std::size_t prev = order.front();
    for (std::size_t m = 1; m < order.size(); ++m) {
        const std::size_t k = order[m];
        const double da = st.alpha[k] - st.alpha[prev];
        if (da < 1e-6) continue;
        slopes.push_back((st.s[k] - st.s[prev]) / da);
        prev = k;
    }
    p.s_max_slope_increase = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 1; m < slopes.size(); ++m) p.s_max_slope_increase = std::max(p.s_max_slope_increase, slopes[m] - slopes[m - 1]);
    if (slopes.size() < 2) p.s_max_slope_increase = 0.0;

    // A trivial spectrum has all three equal up to rounding.
    const double slack = 1e-9 * std::max(1.0, std::abs(st.alpha_zero));
    p.range_ordered = st.alpha_minus <= st.alpha_zero + slack && st.alpha_zero <= st.alpha_plus + slack;
    const double smax = *std::max_element(st.s.begin(), st.s.end());
    p.apex_error = std::abs(smax - st.delta);
    const auto k0 = ft.zero_index();
    p.apex_offset = k0 ? std::abs(st.s[*k0] - st.delta) : std::numeric_limits<double>::infinity();
    p.interior_positive = true;
    for (std::size_t k = 1; k + 1 < st.s.size(); ++k) p.interior_positive = p.interior_positive && st.s[k] > 0.0;
    return p;
}

const char* verdict_name(RigidityReport::Verdict v) {
    switch (v) {
        case RigidityReport::Verdict::trivial: return "trivial";
        case RigidityReport::Verdict::nontrivial: return "nontrivial";
        case RigidityReport::Verdict::inconclusive: return "inconclusive";
    }
    return "unknown";
}

RigidityReport rigidity_test(const MultiMap& mm, const std::vector<double>& c, const FreeEnergyTable& table,
                             double gamma, double delta, double tol) {
    if (c.size() != mm.size()) throw InvalidArgument("rigidity_test: need one constant per map");
    for (double ci : c)
        if (!(ci < 0.0)) throw InvalidArgument("rigidity_test: constants must be negative");
    if (mm.max_degree() < 2) throw InvalidArgument("rigidity_test: some generator must have degree >= 2");

    RigidityReport r;
    for (std::size_t i = 0; i < mm.size(); ++i) r.lambda_values.push_back(std::log(static_cast<double>(mm[i].degree())) / c[i]);
    const auto [mn, mx] = std::minmax_element(r.lambda_values.begin(), r.lambda_values.end());
    r.lambda_spread = *mx - *mn;
    r.lambda_hat = std::accumulate(r.lambda_values.begin(), r.lambda_values.end(), 0.0) / static_cast<double>(mm.size());
    for (std::size_t k = 0; k < table.betas.size(); ++k)
        r.t_linearity_residual = std::max(r.t_linearity_residual, std::abs(table.t[k] - (delta - table.betas[k] * delta / gamma)));
    r.syntactic_power_map = std::all_of(mm.begin(), mm.end(), [](const RationalMap& f) { return f.monomial_exponent().has_value(); });

    if (r.t_linearity_residual > 10.0 * tol) r.verdict = RigidityReport::Verdict::nontrivial;
    else if (r.lambda_spread < tol && r.t_linearity_residual < tol && r.syntactic_power_map) r.verdict = RigidityReport::Verdict::trivial;
    else r.verdict = RigidityReport::Verdict::inconclusive;

    r.consistency = std::abs(r.lambda_hat + gamma / delta);
    r.consistent = r.consistency < 1e-2;
    return r;
}

void write_spectrum_csv(const SpectrumTable& st, std::ostream& os) {
    os << "beta,alpha,s\n";
    char buf[128];
    for (std::size_t k = 0; k < st.betas.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", st.betas[k], st.alpha[k], st.s[k]);
        os << buf;
    }
}

}  // namespace mfsg
