#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfsg/julia.hpp"

namespace mfsg {

// A Holder family psi = (psi_i) evaluated at preimage points y of map i.
class HolderFamily {
public:
    enum class Kind { constant, log_prob, log_deriv, scalar, custom };
    using Evaluator = std::function<double(std::size_t, const SpherePoint&)>;

    static HolderFamily constant(std::vector<double> c);
    /// psi_i = log p_i; p_i in (0,1) summing to 1 within 1e-9.
    static HolderFamily log_prob(std::vector<double> p);
    /// psi_i(y) = -log ||f_i'(y)|| (the family zeta itself).
    static HolderFamily log_deriv();
    /// psi_i = c for every i; c = -1 gives the Lyapunov spectrum.
    static HolderFamily scalar(double c = -1.0);
    static HolderFamily custom(Evaluator fn, std::string name = "custom");

    Kind kind() const { return kind_; }
    const std::vector<double>& values() const { return values_; }
    std::string name() const;
    /// Constant on each map (no dependence on y).
    bool is_locally_constant() const { return kind_ == Kind::constant || kind_ == Kind::log_prob || kind_ == Kind::scalar; }
    /// Per-map constants; only for locally constant families.
    std::vector<double> constants(std::size_t maps) const;

    void validate(const MultiMap& mm) const;
    double operator()(const MultiMap& mm, std::size_t i, const SpherePoint& y) const;

private:
    Kind kind_ = Kind::constant;
    std::vector<double> values_;
    Evaluator custom_;
    std::string custom_name_;
};

/// zeta_i(y) = -log ||f_i'(y)||.
double zeta(const RationalMap& f, const SpherePoint& y);

// Leaves of the depth-n preimage tree over a base point, structure of arrays.
// Leaf k carries its word (letters w_1..w_n, w_1 in the lowest base-K digit),
// y with f_{w_n} o ... o f_{w_1}(y) = base, and the Birkhoff sums
// A = S_n psi, B = S_n zeta along the orbit of y.
struct LeafTable {
    int depth = 0;
    std::size_t alphabet = 1;
    std::vector<double> re, im;
    std::vector<std::uint8_t> at_infinity;
    std::vector<double> A, B;
    std::vector<std::uint64_t> word;

    std::size_t size() const { return A.size(); }
    SpherePoint point(std::size_t k) const {
        return at_infinity[k] ? SpherePoint::infinity() : SpherePoint(re[k], im[k]);
    }
    std::vector<int> letters(std::size_t k) const;
};

// Tables at depth n and n+1 plus the Birkhoff sums of depth n-1 (for the
// truncation-gap diagnostic).
struct LeafTables {
    SpherePoint base;
    LeafTable lower, upper;
    std::vector<double> prev_A, prev_B;
    int depth() const { return lower.depth; }
};

inline constexpr std::size_t kDefaultNodeBudget = 20'000'000;

/// Largest n >= 1 with (sum deg f_i)^(n+1) <= budget.
int auto_depth(const MultiMap& mm, std::size_t budget = kDefaultNodeBudget);

LeafTables build_leaf_tables(const MultiMap& mm, const HolderFamily& psi, const SpherePoint& base, int depth,
                             std::size_t budget = kDefaultNodeBudget);

/// log sum_k exp(beta A_k + u B_k), reduced blockwise in a fixed tree order.
double log_partition(std::span<const double> A, std::span<const double> B, double beta, double u);

/// log Lambda_{n+1} - log Lambda_n.
double pressure_estimate(const LeafTables& tables, double beta, double u);
/// Same ratio one level down, log Lambda_n - log Lambda_{n-1}.
double pressure_estimate_lower(const LeafTables& tables, double beta, double u);

inline constexpr double kBracketLimit = 100.0;

/// Root u of pressure_estimate(beta, u) = 0 by bracketed bisection.
/// `guess` seeds a narrow initial bracket that doubles until it changes sign.
double free_energy(const LeafTables& tables, double beta, double tol = 1e-8, std::optional<double> guess = {});

struct FreeEnergyTable {
    std::vector<double> betas, t, residual, gap;
    int depth = 0;
    double gap_at_zero = 0.0;   // |P_{n+1,n} - P_{n,n-1}| at beta = 0, u = t(0)
    double min_second_difference = 0.0;
    bool monotone_in_u = true;  // 5-point check at beta nearest 0

    double step() const { return betas.size() > 1 ? betas[1] - betas[0] : 0.0; }
    /// Index of beta = 0 (within half a step), if present.
    std::optional<std::size_t> zero_index() const;
};

/// Ascending uniform grid min, min + h, ..., max with `steps` points.
std::vector<double> uniform_grid(double min, double max, int steps);

FreeEnergyTable free_energy_table(const LeafTables& tables, const std::vector<double>& betas, double tol = 1e-8);
FreeEnergyTable free_energy_table(const MultiMap& mm, const HolderFamily& psi, const SpherePoint& base,
                                  const std::vector<double>& betas, int depth);

/// gamma with pressure_estimate(gamma, 0) = 0. Requires all A of one strict sign.
double gamma_root(const LeafTables& tables, double tol = 1e-10);

void write_free_energy_csv(const FreeEnergyTable& table, std::ostream& os);

}  // namespace mfsg
