#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfsg/thermo.hpp"

namespace mfsg {

struct SpectrumTable {
    std::vector<double> betas, alpha, s;
    double alpha_minus = 0.0;  // alpha at beta_max
    double alpha_zero = 0.0;   // alpha at beta = 0
    double alpha_plus = 0.0;   // alpha at beta_min
    double delta = 0.0;        // t(0)
    std::optional<double> gamma;
    double linearity_residual = 0.0;  // max |t - (delta - alpha_zero beta)|
    bool trivial = false;
};

inline constexpr double kTrivialAlphaRange = 1e-3;
inline constexpr double kTrivialLinearity = 1e-4;

/// alpha = -t'(beta): fourth-order central differences in the interior,
/// second-order central next to the ends and second-order one-sided at the
/// ends. Needs a uniform grid with at least 5 points (GridTooCoarse).
std::vector<double> alpha_of_beta(const FreeEnergyTable& table);

/// Parametric Legendre transform s = beta alpha + t. The grid must contain 0.
SpectrumTable spectrum_parametric(const FreeEnergyTable& table, std::optional<double> gamma = {});

/// inf over the grid of t(beta) + beta alpha. Throws OutOfRange when alpha is
/// outside [alpha_minus, alpha_plus] or the infimum sits only at grid ends.
double legendre_direct(const FreeEnergyTable& table, double alpha);

/// Full pipeline with psi = -1.
SpectrumTable lyapunov_spectrum(const MultiMap& mm, const SpherePoint& base, int depth, const std::vector<double>& betas);

struct SpectrumProperties {
    double t_min_second_difference = 0.0;  // >= -1e-4 for convex t
    double s_max_slope_increase = 0.0;     // <= 1e-4 for concave s(alpha)
    bool range_ordered = false;            // alpha_minus <= alpha_zero <= alpha_plus
    double apex_error = 0.0;               // |max s - delta|
    double apex_offset = 0.0;              // |s(alpha_zero) - delta|
    bool interior_positive = false;

    bool convex() const { return t_min_second_difference >= -1e-4; }
    bool concave() const { return s_max_slope_increase <= 1e-4; }
    bool apex() const { return apex_error <= 1e-3 && apex_offset <= 1e-3; }
    bool all() const { return convex() && concave() && range_ordered && apex() && interior_positive; }
};

SpectrumProperties spectrum_properties(const FreeEnergyTable& ft, const SpectrumTable& st);

struct RigidityReport {
    enum class Verdict { trivial, nontrivial, inconclusive };
    std::vector<double> lambda_values;
    double lambda_spread = 0.0;
    double lambda_hat = 0.0;  // mean of lambda_values
    double t_linearity_residual = 0.0;
    bool syntactic_power_map = false;
    Verdict verdict = Verdict::inconclusive;
    double consistency = 0.0;  // |lambda_hat + gamma/delta|
    bool consistent = false;   // consistency < 1e-2
};

const char* verdict_name(RigidityReport::Verdict v);

/// lambda_i = log deg f_i / c_i against the free-energy table. Requires c_i < 0.
RigidityReport rigidity_test(const MultiMap& mm, const std::vector<double>& c, const FreeEnergyTable& table,
                             double gamma, double delta, double tol = 1e-4);

void write_spectrum_csv(const SpectrumTable& st, std::ostream& os);

}  // namespace mfsg
