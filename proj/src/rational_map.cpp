#include "mfsg/rational_map.hpp"

#include <algorithm>
#include <cmath>

#include "mfsg/errors.hpp"

namespace mfsg {
namespace {

constexpr double kIndeterminateTol = 1e-13;

}  // namespace

RationalMap::Chart RationalMap::make_chart(Polynomial num, Polynomial den) {
    Chart c;
    c.dnum = num.derivative();
    c.dden = den.derivative();
    c.wronskian = c.dnum * den - num * c.dden;
    c.num = std::move(num);
    c.den = std::move(den);
    return c;
}

RationalMap::RationalMap(Polynomial num, Polynomial den) : num_(std::move(num)), den_(std::move(den)) {
    if (num_.is_zero()) throw InvalidArgument("rational map: zero numerator");
    if (den_.is_zero()) throw InvalidArgument("rational map: zero denominator");
    degree_ = std::max(num_.degree(), den_.degree());
    if (degree_ < 1) throw InvalidArgument("rational map: constant map");
    for (const auto& c : num_.coeffs())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw InvalidArgument("rational map: non-finite coefficient");
    for (const auto& c : den_.coeffs())
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw InvalidArgument("rational map: non-finite coefficient");

    if (num_.degree() >= 1 && den_.degree() >= 1) {
        const auto rn = poly_roots(num_);
        const auto rd = poly_roots(den_);
        for (const auto& a : rn)
            for (const auto& b : rd)
                if (std::abs(a - b) <= kCoprimalityTol)
                    throw InvalidArgument("rational map: numerator and denominator share a root");
    }

    finite_ = make_chart(num_, den_);
    infinite_ = make_chart(num_.reversed(degree_), den_.reversed(degree_));
}

SpherePoint RationalMap::eval_chart(const Chart& c, Complex x) {
    const Complex n = c.num(x);
    const Complex d = c.den(x);
    if (std::abs(n) <= kIndeterminateTol * c.num.abs_scale(x) &&
        std::abs(d) <= kIndeterminateTol * c.den.abs_scale(x))
        throw IndeterminateValue("rational map: numerator and denominator both vanish");
    if (d == Complex{}) return SpherePoint::infinity();
    const Complex w = n / d;
    if (!std::isfinite(w.real()) || !std::isfinite(w.imag())) return SpherePoint::infinity();
    return w;
}

double RationalMap::derivative_norm_chart(const Chart& c, Complex x) {
    const double n = std::abs(c.num(x));
    const double d = std::abs(c.den(x));
    const double w = std::abs(c.wronskian(x));
    const double s = std::max(n, d);
    if (s == 0.0) throw IndeterminateValue("rational map: numerator and denominator both vanish");
    const double ns = n / s, ds = d / s;
    return (w / s / s) * (1.0 + std::norm(x)) / (ns * ns + ds * ds);
}

SpherePoint RationalMap::operator()(const SpherePoint& z) const {
    if (z.at_infinity) return eval_chart(infinite_, Complex{});
    if (std::abs(z.value) > kChartThreshold) return eval_chart(infinite_, 1.0 / z.value);
    return eval_chart(finite_, z.value);
}

double RationalMap::derivative_norm(const SpherePoint& z) const {
    if (z.at_infinity) return derivative_norm_chart(infinite_, Complex{});
    if (std::abs(z.value) > kChartThreshold) return derivative_norm_chart(infinite_, 1.0 / z.value);
    return derivative_norm_chart(finite_, z.value);
}

void RationalMap::preimages_into(const SpherePoint& z, std::vector<SpherePoint>& out) const {
    thread_local std::vector<Complex> q, roots, scratch;
    const auto d = static_cast<std::size_t>(degree_);
    q.assign(d + 1, Complex{});
    const auto& nc = num_.coeffs();
    const auto& dc = den_.coeffs();
    if (z.at_infinity) {
        std::copy(dc.begin(), dc.end(), q.begin());
    } else if (std::abs(z.value) <= 1.0) {
        for (std::size_t k = 0; k < nc.size(); ++k) q[k] += nc[k];
        for (std::size_t k = 0; k < dc.size(); ++k) q[k] -= z.value * dc[k];
    } else {
        const Complex inv = 1.0 / z.value;
        for (std::size_t k = 0; k < dc.size(); ++k) q[k] += dc[k];
        for (std::size_t k = 0; k < nc.size(); ++k) q[k] -= inv * nc[k];
    }
    while (!q.empty() && q.back() == Complex{}) q.pop_back();
    if (q.empty()) throw IndeterminateValue("preimages: map is constant at target");

    out.clear();
    const std::size_t finite_count = q.size() - 1;
    if (finite_count > 0) {
        roots.resize(finite_count);
        poly_roots_into(q, roots, scratch);
        for (const auto& r : roots) out.emplace_back(r);
    }
    for (std::size_t k = finite_count; k < d; ++k) out.push_back(SpherePoint::infinity());
}

std::vector<SpherePoint> RationalMap::preimages(const SpherePoint& z) const {
    std::vector<SpherePoint> out;
    preimages_into(z, out);
    return out;
}

std::vector<SpherePoint> RationalMap::critical_points() const {
    if (degree_ < 2) throw InvalidArgument("critical_points: degree must be >= 2");
    const int expected = 2 * degree_ - 2;
    std::vector<Complex> wc = finite_.wronskian.trimmed(1e-14).coeffs();
    if (static_cast<int>(wc.size()) - 1 > expected) wc.resize(static_cast<std::size_t>(expected) + 1);
    const Polynomial w(std::move(wc));
    std::vector<SpherePoint> out;
    if (w.degree() >= 1)
        for (const auto& r : poly_roots(w)) out.emplace_back(r);
    for (int k = std::max(w.degree(), 0); k < expected; ++k) out.push_back(SpherePoint::infinity());
    return out;
}

std::optional<int> RationalMap::monomial_exponent(double rel_tol) const {
    auto single_term = [rel_tol](const Polynomial& p) -> std::optional<int> {
        const double cut = rel_tol * p.max_abs_coeff();
        int found = -1;
        for (int k = 0; k <= p.degree(); ++k) {
            if (std::abs(p[k]) > cut) {
                if (found >= 0) return std::nullopt;
                found = k;
            }
        }
        return found;
    };
    const auto kn = single_term(num_);
    const auto kd = single_term(den_);
    if (!kn || !kd) return std::nullopt;
    const int e = *kn - *kd;
    if (std::abs(e) != degree_) return std::nullopt;
    return e;
}

RationalMap compose(const RationalMap& f, const RationalMap& g, double bound) {
    const int d = f.degree();
    const Polynomial& p = g.num();
    const Polynomial& q = g.den();
    std::vector<Polynomial> ppow(static_cast<std::size_t>(d) + 1), qpow(static_cast<std::size_t>(d) + 1);
    ppow[0] = qpow[0] = Polynomial::constant(1.0);
    for (int j = 1; j <= d; ++j) {
        ppow[j] = ppow[j - 1] * p;
        qpow[j] = qpow[j - 1] * q;
    }
    Polynomial num, den;
    for (int j = 0; j <= d; ++j) {
        const Polynomial term = ppow[j] * qpow[d - j];
        if (f.num()[j] != Complex{}) num = num + f.num()[j] * term;
        if (f.den()[j] != Complex{}) den = den + f.den()[j] * term;
    }
    for (const auto* poly : {&num, &den})
        for (const auto& c : poly->coeffs())
            if (!(std::abs(c) <= bound)) throw CoefficientOverflow("compose: coefficient magnitude exceeds bound");
    return RationalMap(std::move(num), std::move(den));
}

MultiMap::MultiMap(std::vector<RationalMap> maps) : maps_(std::move(maps)) {
    if (maps_.empty()) throw InvalidArgument("multi-map: no generators");
    if (maps_.size() == 1 && maps_[0].degree() == 1)
        throw InvalidArgument("multi-map: a single Moebius generator is exceptional");
}

int MultiMap::total_degree() const {
    int s = 0;
    for (const auto& f : maps_) s += f.degree();
    return s;
}

int MultiMap::max_degree() const {
    int m = 0;
    for (const auto& f : maps_) m = std::max(m, f.degree());
    return m;
}

bool MultiMap::all_polynomial() const {
    return std::all_of(maps_.begin(), maps_.end(), [](const RationalMap& f) { return f.is_polynomial(); });
}

}  // namespace mfsg
