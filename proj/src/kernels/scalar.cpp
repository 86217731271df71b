#include <algorithm>
#include <cmath>
#include <limits>

#include "mfsg/kernels/kernels.hpp"
#include "mfsg/rng.hpp"

namespace mfsg::kernels {

std::uint32_t trajectory_draw(std::uint64_t trajectory_key, std::uint32_t step) {
    const auto lo = static_cast<std::uint32_t>(trajectory_key);
    const auto hi = static_cast<std::uint32_t>(trajectory_key >> 32);
    return fmix32(lo ^ fmix32(hi + step * 0x9E3779B9U));
}

std::uint64_t trajectory_key(std::uint64_t pixel_key, std::uint32_t sample, std::uint32_t attempt) {
    const std::uint64_t id = (static_cast<std::uint64_t>(sample) << 2) | attempt;
    return mix64(pixel_key + (id + 1) * kGolden64);
}

ExpSum combine(const ExpSum& x, const ExpSum& y) {
    if (x.sum == 0.0) return y;
    if (y.sum == 0.0) return x;
    const double m = std::max(x.max, y.max);
    return {m, x.sum * std::exp(x.max - m) + y.sum * std::exp(y.max - m)};
}

namespace scalar {

ExpSum affine_exp_sum(std::span<const double> a, std::span<const double> b, double beta, double u) {
    const std::size_t n = a.size();
    if (n == 0) return {-std::numeric_limits<double>::infinity(), 0.0};
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) m = std::max(m, beta * a[k] + u * b[k]);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) s += std::exp(beta * a[k] + u * b[k] - m);
    return {m, s};
}

void horner_batch(std::span<const Complex> coeffs, std::span<const double> re, std::span<const double> im,
                  std::span<double> out_re, std::span<double> out_im) {
    const std::size_t deg = coeffs.size() - 1;
    for (std::size_t k = 0; k < re.size(); ++k) {
        const double zr = re[k], zi = im[k];
        double ar = coeffs[deg].real(), ai = coeffs[deg].imag();
        for (std::size_t j = deg; j-- > 0;) {
            const double nr = ar * zr - ai * zi + coeffs[j].real();
            const double ni = ar * zi + ai * zr + coeffs[j].imag();
            ar = nr;
            ai = ni;
        }
        out_re[k] = ar;
        out_im[k] = ai;
    }
}

double stencil_sweep(const StencilPlan& plan, std::span<const double> in, std::span<double> out) {
    const std::size_t nodes = plan.nodes, w = plan.width, maps = plan.probs.size();
    double change = 0.0;
    for (std::size_t n = 0; n < nodes; ++n) {
        double acc = 0.0;
        for (std::size_t m = 0; m < maps; ++m) {
            const std::size_t k = m * nodes + n;
            const std::size_t b = static_cast<std::size_t>(plan.base[k]);
            const double wx = plan.wx[k], wy = plan.wy[k];
            const double lower = (1.0 - wx) * in[b] + wx * in[b + 1];
            const double upper = (1.0 - wx) * in[b + w] + wx * in[b + w + 1];
            const double bil = (1.0 - wy) * lower + wy * upper;
            const double contrib = bil * plan.keep[k] + plan.cval[k] * (1.0 - plan.keep[k]);
            acc += plan.probs[m] * contrib;
        }
        if (plan.fixed_mask[n]) acc = plan.fixed_value[n];
        out[n] = acc;
        change = std::max(change, std::abs(acc - in[n]));
    }
    return change;
}

namespace {

// 1 escaped, 0 trapped, -1 undecided within max_steps.
int run_trajectory(const EscapeProblem& p, Complex z0, std::uint64_t key) {
    double zr = z0.real(), zi = z0.imag();
    const std::size_t top = p.stride - 1;
    for (int step = 0;; ++step) {
        if (zr * zr + zi * zi > p.escape_radius2) return 1;
        for (std::size_t t = 0; t < p.trap_r2.size(); ++t) {
            const double dr = zr - p.trap_re[t], di = zi - p.trap_im[t];
            if (dr * dr + di * di < p.trap_r2[t]) return 0;
        }
        if (step == p.max_steps) return -1;
        const std::uint32_t draw = trajectory_draw(key, static_cast<std::uint32_t>(step));
        std::size_t m = 0;
        for (const auto thr : p.thresholds) m += draw >= thr ? 1 : 0;
        const double* cr = p.coeff_re.data() + m * p.stride;
        const double* ci = p.coeff_im.data() + m * p.stride;
        double ar = cr[top], ai = ci[top];
        for (std::size_t j = top; j-- > 0;) {
            const double nr = ar * zr - ai * zi + cr[j];
            const double ni = ar * zi + ai * zr + ci[j];
            ar = nr;
            ai = ni;
        }
        zr = ar;
        zi = ai;
    }
}

}  // namespace

EscapeResult escape_samples(const EscapeProblem& prob, Complex z0, std::uint64_t pixel_key,
                            std::uint32_t samples) {
    EscapeResult res;
    for (std::uint32_t s = 0; s < samples; ++s) {
        int outcome = -1;
        for (int a = 0; a <= prob.resamples && outcome < 0; ++a)
            outcome = run_trajectory(prob, z0, trajectory_key(pixel_key, s, static_cast<std::uint32_t>(a)));
        if (outcome < 0) {
            res.score_sum += 0.5;
            ++res.flagged;
        } else {
            res.score_sum += outcome;
        }
    }
    return res;
}

}  // namespace scalar
}  // namespace mfsg::kernels
