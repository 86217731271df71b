#pragma once

// Data-parallel inner loops. Each kernel has a scalar reference in
// kernels::scalar and an AVX2 variant in kernels::avx2 with the same
// signature; the unqualified entry points dispatch on the active ISA.
//
// stencil_sweep and escape_samples perform the same IEEE operations lane by
// lane in both variants (the project builds with -ffp-contract=off), so their
// results are bit-identical. affine_exp_sum uses a polynomial exp in the AVX2
// path and agrees with the std::exp reference to ~1e-15 relative.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfsg/sphere.hpp"

namespace mfsg::kernels {

enum class Isa { scalar, avx2 };

/// Best ISA supported by this CPU and build.
Isa detected_isa();
/// ISA used by the dispatching entry points. Initialised from detected_isa(),
/// overridable with MF_SEMIGROUP_ISA=scalar|avx2 or set_active_isa.
Isa active_isa();
void set_active_isa(Isa isa);
const char* isa_name(Isa isa);

// sum_k exp(x_k - max) together with max, where x_k = beta*a_k + u*b_k.
struct ExpSum {
    double max;
    double sum;
};

// Coliseum value-iteration plan. Node n is either fixed (fixed_mask[n] = -1,
// value fixed_value[n]) or the probability-weighted sum over maps m of
//   contrib = bilinear(in, base, wx, wy) * keep + cval * (1 - keep),
// with keep in {0, 1}. Per-(map, node) arrays are map-major, index m*nodes+n.
struct StencilPlan {
    std::size_t nodes = 0;
    std::size_t width = 0;
    std::vector<double> probs;
    std::vector<std::int64_t> fixed_mask;
    std::vector<double> fixed_value;
    std::vector<std::int32_t> base;
    std::vector<double> wx, wy, keep, cval;
};

// Random-trajectory escape problem for polynomial generators.
struct EscapeProblem {
    std::size_t maps = 0;
    std::size_t stride = 0;  // max degree + 1; coefficients zero-padded
    std::vector<double> coeff_re, coeff_im;  // maps x stride, ascending powers
    // Map m is chosen when draw r satisfies thresholds[m-1] <= r < thresholds[m];
    // thresholds has maps-1 entries (cumulative probabilities * 2^32).
    std::vector<std::uint32_t> thresholds;
    double escape_radius2 = 4.0;
    std::vector<double> trap_re, trap_im, trap_r2;
    int max_steps = 200;
    int resamples = 3;
};

struct EscapeResult {
    double score_sum = 0.0;       // sum of per-sample scores in {0, 0.5, 1}
    std::uint32_t flagged = 0;    // samples scored 0.5 after exhausting resamples
};

/// 32-bit draw for (trajectory key, step); shared by both variants.
std::uint32_t trajectory_draw(std::uint64_t trajectory_key, std::uint32_t step);
/// Trajectory key for (pixel key, sample, attempt).
std::uint64_t trajectory_key(std::uint64_t pixel_key, std::uint32_t sample, std::uint32_t attempt);

namespace scalar {
ExpSum affine_exp_sum(std::span<const double> a, std::span<const double> b, double beta, double u);
void horner_batch(std::span<const Complex> coeffs, std::span<const double> re, std::span<const double> im,
                  std::span<double> out_re, std::span<double> out_im);
double stencil_sweep(const StencilPlan& plan, std::span<const double> in, std::span<double> out);
EscapeResult escape_samples(const EscapeProblem& prob, Complex z0, std::uint64_t pixel_key,
                            std::uint32_t samples);
}  // namespace scalar

namespace avx2 {
ExpSum affine_exp_sum(std::span<const double> a, std::span<const double> b, double beta, double u);
void horner_batch(std::span<const Complex> coeffs, std::span<const double> re, std::span<const double> im,
                  std::span<double> out_re, std::span<double> out_im);
double stencil_sweep(const StencilPlan& plan, std::span<const double> in, std::span<double> out);
EscapeResult escape_samples(const EscapeProblem& prob, Complex z0, std::uint64_t pixel_key,
                            std::uint32_t samples);
}  // namespace avx2

ExpSum affine_exp_sum(std::span<const double> a, std::span<const double> b, double beta, double u);
void horner_batch(std::span<const Complex> coeffs, std::span<const double> re, std::span<const double> im,
                  std::span<double> out_re, std::span<double> out_im);
/// One Jacobi sweep out = M(in); returns sup |out - in|.
double stencil_sweep(const StencilPlan& plan, std::span<const double> in, std::span<double> out);
EscapeResult escape_samples(const EscapeProblem& prob, Complex z0, std::uint64_t pixel_key,
                            std::uint32_t samples);

/// Combines two partial sums exactly as the reduction tree does.
ExpSum combine(const ExpSum& x, const ExpSum& y);

}  // namespace mfsg::kernels
