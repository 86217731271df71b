#pragma once

#include <optional>
#include <vector>

#include "mfsg/polynomial.hpp"

namespace mfsg {

inline constexpr double kChartThreshold = 1e8;
inline constexpr double kCoprimalityTol = 1e-9;
inline constexpr double kDefaultCoefficientBound = 1e100;

// Rational map num/den on the Riemann sphere with degree max(deg num, deg den).
// Construction rejects constant maps and numerators/denominators sharing a root.
class RationalMap {
public:
    RationalMap(Polynomial num, Polynomial den = Polynomial::constant(1.0));

    const Polynomial& num() const { return num_; }
    const Polynomial& den() const { return den_; }
    int degree() const { return degree_; }
    bool is_polynomial() const { return den_.degree() == 0; }

    /// f(z). Points with |z| > kChartThreshold and infinity itself are
    /// evaluated in the w = 1/z chart. Throws IndeterminateValue when num and
    /// den both vanish.
    SpherePoint operator()(const SpherePoint& z) const;

    /// Spherical derivative norm |f'(z)| (1+|z|^2)/(1+|f(z)|^2), chart-aware.
    double derivative_norm(const SpherePoint& z) const;

    /// All solutions of f(w) = z counted with multiplicity (deg f of them).
    std::vector<SpherePoint> preimages(const SpherePoint& z) const;
    void preimages_into(const SpherePoint& z, std::vector<SpherePoint>& out) const;

    /// Critical points with multiplicity (2 deg - 2 of them), infinity included.
    std::vector<SpherePoint> critical_points() const;

    /// If the map is a*z^d or a*z^-d (other coefficients below rel_tol times
    /// the largest), returns the signed exponent.
    std::optional<int> monomial_exponent(double rel_tol = 1e-12) const;

private:
    struct Chart {
        Polynomial num, den, wronskian;  // wronskian = num' den - num den'
        Polynomial dnum, dden;
    };
    static Chart make_chart(Polynomial num, Polynomial den);
    static SpherePoint eval_chart(const Chart& c, Complex x);
    static double derivative_norm_chart(const Chart& c, Complex x);

    Polynomial num_, den_;
    int degree_;
    Chart finite_;    // variable z
    Chart infinite_;  // variable xi = 1/z
};

/// f o g with coefficients computed by exact polynomial substitution.
/// Throws CoefficientOverflow when any coefficient exceeds `bound`.
RationalMap compose(const RationalMap& f, const RationalMap& g,
                    double bound = kDefaultCoefficientBound);

// A finite indexed family of generators.
class MultiMap {
public:
    explicit MultiMap(std::vector<RationalMap> maps);

    std::size_t size() const { return maps_.size(); }
    const RationalMap& operator[](std::size_t i) const { return maps_[i]; }
    const std::vector<RationalMap>& maps() const { return maps_; }
    auto begin() const { return maps_.begin(); }
    auto end() const { return maps_.end(); }

    int total_degree() const;
    int max_degree() const;
    bool all_polynomial() const;

private:
    std::vector<RationalMap> maps_;
};

}  // namespace mfsg
