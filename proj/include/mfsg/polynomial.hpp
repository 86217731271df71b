#pragma once

#include <span>
#include <vector>

#include "mfsg/sphere.hpp"

namespace mfsg {

// Dense polynomial with complex coefficients in ascending powers. Trailing
// (exact) zeros are trimmed so the leading coefficient is nonzero; the zero
// polynomial has no coefficients and degree -1.
class Polynomial {
public:
    Polynomial() = default;
    explicit Polynomial(std::vector<Complex> coeffs);
    Polynomial(std::initializer_list<Complex> coeffs) : Polynomial(std::vector<Complex>(coeffs)) {}

    static Polynomial constant(Complex c) { return Polynomial({c}); }
    static Polynomial monomial(Complex a, int degree);

    int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
    bool is_zero() const { return coeffs_.empty(); }
    const std::vector<Complex>& coeffs() const { return coeffs_; }
    Complex operator[](int k) const { return k <= degree() ? coeffs_[k] : Complex{}; }
    Complex leading() const { return coeffs_.empty() ? Complex{} : coeffs_.back(); }
    double max_abs_coeff() const;

    Complex operator()(Complex z) const;
    // Sum of |a_k| |z|^k, the magnitude scale of an evaluation at z.
    double abs_scale(Complex z) const;
    Polynomial derivative() const;
    // z^n p(1/z) for n >= degree.
    Polynomial reversed(int n) const;
    // Drops leading coefficients with |a| <= rel * max|a|.
    Polynomial trimmed(double rel) const;

    friend Polynomial operator+(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator-(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(const Polynomial& a, const Polynomial& b);
    friend Polynomial operator*(Complex s, const Polynomial& p);

private:
    std::vector<Complex> coeffs_;
};

/// Horner evaluation over raw ascending coefficients.
inline Complex horner(std::span<const Complex> c, Complex z) {
    Complex acc{};
    for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * z + *it;
    return acc;
}

struct RootOptions {
    double residual_tol = 1e-12;
    int max_iterations = 200;
    int newton_steps = 3;
};

/// All deg(p) roots with multiplicity by Weierstrass (Durand-Kerner)
/// simultaneous iteration from a perturbed circle, then Newton polish.
/// Each root satisfies |p(r)| < tol * sum_k |a_k| max(1,|r|)^k.
/// Throws NonConvergence when the tolerance is not met.
std::vector<Complex> poly_roots(const Polynomial& p, const RootOptions& opts = {});

/// Allocation-free variant: coefficients ascending with nonzero leading term,
/// `roots` sized to degree. `scratch` is resized as needed.
void poly_roots_into(std::span<const Complex> coeffs, std::span<Complex> roots,
                     std::vector<Complex>& scratch, const RootOptions& opts = {});

}  // namespace mfsg
