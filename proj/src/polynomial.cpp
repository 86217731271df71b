#include "mfsg/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include "mfsg/errors.hpp"

namespace mfsg {

Polynomial::Polynomial(std::vector<Complex> coeffs) : coeffs_(std::move(coeffs)) {
    while (!coeffs_.empty() && coeffs_.back() == Complex{}) coeffs_.pop_back();
}

Polynomial Polynomial::monomial(Complex a, int degree) {
    std::vector<Complex> c(static_cast<std::size_t>(degree) + 1);
    c.back() = a;
    return Polynomial(std::move(c));
}

double Polynomial::max_abs_coeff() const {
    double m = 0.0;
    for (const auto& c : coeffs_) m = std::max(m, std::abs(c));
    return m;
}

Complex Polynomial::operator()(Complex z) const { return horner(coeffs_, z); }

double Polynomial::abs_scale(Complex z) const {
    const double r = std::abs(z);
    double acc = 0.0;
    for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * r + std::abs(*it);
    return acc;
}

Polynomial Polynomial::derivative() const {
    if (coeffs_.size() <= 1) return {};
    std::vector<Complex> d(coeffs_.size() - 1);
    for (std::size_t k = 1; k < coeffs_.size(); ++k) d[k - 1] = coeffs_[k] * static_cast<double>(k);
    return Polynomial(std::move(d));
}

Polynomial Polynomial::reversed(int n) const {
    if (n < degree()) throw InvalidArgument("reversed: n below degree");
    std::vector<Complex> r(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= degree(); ++k) r[n - k] = coeffs_[k];
    return Polynomial(std::move(r));
}

Polynomial Polynomial::trimmed(double rel) const {
    const double cut = rel * max_abs_coeff();
    std::vector<Complex> c = coeffs_;
    while (!c.empty() && std::abs(c.back()) <= cut) c.pop_back();
    return Polynomial(std::move(c));
}

Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<Complex> c(std::max(a.coeffs_.size(), b.coeffs_.size()));
    for (std::size_t k = 0; k < a.coeffs_.size(); ++k) c[k] += a.coeffs_[k];
    for (std::size_t k = 0; k < b.coeffs_.size(); ++k) c[k] += b.coeffs_[k];
    return Polynomial(std::move(c));
}

Polynomial operator-(const Polynomial& a, const Polynomial& b) { return a + Complex(-1.0) * b; }

Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.is_zero() || b.is_zero()) return {};
    std::vector<Complex> c(a.coeffs_.size() + b.coeffs_.size() - 1);
    for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
        for (std::size_t j = 0; j < b.coeffs_.size(); ++j) c[i + j] += a.coeffs_[i] * b.coeffs_[j];
    return Polynomial(std::move(c));
}

Polynomial operator*(Complex s, const Polynomial& p) {
    std::vector<Complex> c = p.coeffs_;
    for (auto& x : c) x *= s;
    return Polynomial(std::move(c));
}

}  // namespace mfsg
