#include <algorithm>
#include <cmath>
#include <numbers>

#include "mfsg/errors.hpp"
#include "mfsg/polynomial.hpp"

namespace mfsg {
namespace {

// sum_k |c_k| max(1,|z|)^k
double coefficient_scale(std::span<const Complex> c, Complex z) {
    const double r = std::max(1.0, std::abs(z));
    double acc = 0.0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
}

Complex horner_with_derivative(std::span<const Complex> c, Complex z, Complex& dp) {
    Complex p = c.back();
    dp = Complex{};
    for (std::size_t k = c.size() - 1; k-- > 0;) {
        dp = dp * z + p;
        p = p * z + c[k];
    }
    return p;
}

}  // namespace

void poly_roots_into(std::span<const Complex> coeffs, std::span<Complex> roots,
                     std::vector<Complex>& scratch, const RootOptions& opts) {
    const std::size_t n = coeffs.size() - 1;
    if (coeffs.size() < 2 || coeffs.back() == Complex{})
        throw InvalidArgument("poly_roots: polynomial must have degree >= 1");
    if (roots.size() != n) throw InvalidArgument("poly_roots: root buffer size mismatch");

    if (n == 1) {
        roots[0] = -coeffs[0] / coeffs[1];
        return;
    }

    // Monic copy.
    scratch.resize(n + 1);
    const Complex lead = coeffs.back();
    for (std::size_t k = 0; k <= n; ++k) scratch[k] = coeffs[k] / lead;
    std::span<const Complex> c(scratch.data(), n + 1);

    // Fujiwara bound on root moduli.
    double bound = 0.0;
    for (std::size_t k = 1; k <= n; ++k) {
        double a = std::abs(c[n - k]);
        if (k == n) a *= 0.5;
        bound = std::max(bound, std::pow(a, 1.0 / static_cast<double>(k)));
    }
    bound *= 2.0;
    if (bound == 0.0) {
        std::fill(roots.begin(), roots.end(), Complex{});
        return;
    }

    // Perturbed circle: irrational angular offset plus a slight radial spread.
    const double radius = 0.5 * bound;
    for (std::size_t k = 0; k < n; ++k) {
        const double theta = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(n) + 0.4;
        const double rk = radius * (1.0 + 0.03 * static_cast<double>(k) / static_cast<double>(n));
        roots[k] = std::polar(rk, theta);
    }

    bool converged = false;
    for (int it = 0; it < opts.max_iterations && !converged; ++it) {
        for (std::size_t k = 0; k < n; ++k) {
            Complex denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != k) denom *= roots[k] - roots[j];
            if (denom == Complex{}) denom = Complex(1e-300, 0.0);
            roots[k] -= horner(c, roots[k]) / denom;
        }
        converged = true;
        for (std::size_t k = 0; k < n && converged; ++k)
            converged = std::abs(horner(c, roots[k])) <= opts.residual_tol * coefficient_scale(c, roots[k]);
    }
    if (!converged) throw NonConvergence("poly_roots: residual tolerance not met");

    for (std::size_t k = 0; k < n; ++k) {
        for (int s = 0; s < opts.newton_steps; ++s) {
            Complex dp;
            const Complex p = horner_with_derivative(c, roots[k], dp);
            if (p == Complex{} || dp == Complex{}) break;
            const Complex next = roots[k] - p / dp;
            if (!(std::abs(horner(c, next)) < std::abs(p))) break;
            roots[k] = next;
        }
    }
}

std::vector<Complex> poly_roots(const Polynomial& p, const RootOptions& opts) {
    if (p.degree() < 1) throw InvalidArgument("poly_roots: polynomial must have degree >= 1");
    std::vector<Complex> roots(static_cast<std::size_t>(p.degree()));
    std::vector<Complex> scratch;
    poly_roots_into(p.coeffs(), roots, scratch, opts);
    return roots;
}

}  // namespace mfsg
