// Stand-ins for builds without an AVX2-capable compiler target. Never
// dispatched to, since detected_isa() reports scalar in such builds.

#include "mfsg/kernels/kernels.hpp"

namespace mfsg::kernels::avx2 {

ExpSum affine_exp_sum(std::span<const double> a, std::span<const double> b, double beta, double u) {
    return scalar::affine_exp_sum(a, b, beta, u);
}
void horner_batch(std::span<const Complex> coeffs, std::span<const double> re, std::span<const double> im,
                  std::span<double> out_re, std::span<double> out_im) {
    scalar::horner_batch(coeffs, re, im, out_re, out_im);
}
double stencil_sweep(const StencilPlan& plan, std::span<const double> in, std::span<double> out) {
    return scalar::stencil_sweep(plan, in, out);
}
EscapeResult escape_samples(const EscapeProblem& prob, Complex z0, std::uint64_t pixel_key,
                            std::uint32_t samples) {
    return scalar::escape_samples(prob, z0, pixel_key, samples);
}

}  // namespace mfsg::kernels::avx2
