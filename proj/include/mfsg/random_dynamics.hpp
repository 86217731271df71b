#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mfsg/spectrum.hpp"

namespace mfsg {

struct Window {
    double x0 = -2.0, x1 = 2.0, y0 = -2.0, y1 = 2.0;
    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool contains(Complex z) const { return z.real() >= x0 && z.real() <= x1 && z.imag() >= y0 && z.imag() <= y1; }
};

// Values at pixel centres; row j (0 at the bottom, y0) column i, index j*W + i.
struct PixelField {
    enum class Mode { monte_carlo, fixed_point, synthetic };

    Window window;
    int width = 0, height = 0;
    std::vector<double> values;
    Mode mode = Mode::synthetic;
    std::uint32_t samples = 0;   // monte carlo samples per pixel
    std::uint64_t flagged = 0;   // indeterminate samples scored 0.5
    double tol = 0.0;            // fixed-point stopping tolerance
    double residual = 0.0;       // final sup-norm change
    int iterations = 0;

    double dx() const { return window.width() / width; }
    double dy() const { return window.height() / height; }
    Complex center(int i, int j) const { return {window.x0 + (i + 0.5) * dx(), window.y0 + (j + 0.5) * dy()}; }
    double at(int i, int j) const { return values[static_cast<std::size_t>(j) * width + i]; }
    /// Differences below this are treated as noise by the Holder fits.
    double noise_floor() const;

    static PixelField synthetic(const Window& w, int width, int height, const std::function<double(Complex)>& fn);
};

const char* mode_name(PixelField::Mode m);

// Finite basin that trajectories are absorbed into (Euclidean disc). A centre
// at infinity denotes the escape set itself and is ignored as a trap.
struct TrapRegion {
    SpherePoint center;
    double radius = 0.0;
    std::string label;
};

/// Smallest R >= 2 with |f_i(z)| >= 2|z| whenever |z| >= R, for every
/// (polynomial) generator, from the coefficient bound
/// |a_d| r^d - sum_{k<d} |a_k| r^k >= 2r. Throws NotPolynomial.
double min_escape_radius(const MultiMap& mm);

/// Throws InvalidEscapeRadius unless R >= 2 and |f_i(z)| >= 2|z| holds
/// numerically on circles |z| = R, 1.25R, ... and on window boundary points
/// beyond R.
void validate_escape_radius(const MultiMap& mm, double escape_radius, const Window& window);

/// Attracting cycles of individual generators reached by critical orbits.
std::vector<TrapRegion> suggest_traps(const MultiMap& mm, double radius = 0.1);

struct ColiseumSetup {
    Window window;
    int width = 256, height = 256;
    double escape_radius = 0.0;  // 0 = min_escape_radius
    std::vector<TrapRegion> traps;
};

PixelField coliseum_monte_carlo(const MultiMap& mm, const std::vector<double>& probs, const ColiseumSetup& setup,
                                std::uint32_t samples, std::uint64_t rng_seed);

PixelField coliseum_fixed_point(const MultiMap& mm, const std::vector<double>& probs, const ColiseumSetup& setup,
                                double tol = 1e-6, int max_iters = 100000);

/// One more application of the transition operator; returns the sup change.
double coliseum_reapply(const MultiMap& mm, const std::vector<double>& probs, const ColiseumSetup& setup,
                        const PixelField& field);

struct Radii {
    double r0 = 0.0, ratio = 0.0;
    int count = 0;
    std::vector<double> values() const;
};

struct HolderFit {
    double exponent = 0.0;  // +inf when Q stays below the noise floor
    double r2 = 0.0;
    int radii_used = 0;
};

/// Least-squares slope of log Q(rho, z, r) against log r over chordal balls.
/// Radii are planar; each is mapped to the chordal radius 2r/(1+|z|^2) of
/// the same infinitesimal ball. Throws DegenerateFit.
HolderFit holder_exponent(const PixelField& field, Complex z, const Radii& radii);

struct HolderRow {
    Complex z;
    HolderFit fit;
};

struct HolderReport {
    std::vector<HolderRow> rows;
    std::size_t outside_window = 0;  // cloud points not usable
    std::size_t degenerate = 0;      // DegenerateFit rows skipped
    std::size_t well_fitted = 0;     // finite exponent with r2 > 0.9
    double min_exponent = 0.0, max_exponent = 0.0;  // over well-fitted rows
    std::vector<std::pair<double, std::size_t>> histogram;  // bin lower edge, count (width 0.1)
    bool single_map = false;  // U_tau analysis inapplicable
    // Comparison with a spectrum, when supplied.
    bool compared = false;
    double slack = 0.1;
    bool min_ok = false, max_ok = false;
    double fraction_in_range = 0.0;
};

HolderReport holder_survey(const PixelField& field, const JuliaCloud& cloud, std::size_t n_points, const Radii& radii,
                           std::uint64_t rng_seed, const SpectrumTable* spectrum = nullptr, bool single_map = false);

void write_holder_csv(const HolderReport& report, std::ostream& os);

/// Potential-theoretic upper bound for alpha_minus with psi = log p.
double alpha_minus_bound(const MultiMap& mm, const std::vector<double>& probs, std::size_t n_sequences, int seq_len,
                         std::uint64_t rng_seed);

}  // namespace mfsg
