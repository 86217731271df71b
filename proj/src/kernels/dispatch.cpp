#include <atomic>
#include <cstdlib>
#include <string_view>

#include "mfsg/errors.hpp"
#include "mfsg/kernels/kernels.hpp"

namespace mfsg::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(MFSG_HAVE_AVX2) && (defined(__x86_64__) || defined(__i386__))
    return __builtin_cpu_supports("avx2");
#else
    return false;
#endif
}

Isa initial_isa() {
    Isa isa = detected_isa();
    if (const char* env = std::getenv("MF_SEMIGROUP_ISA")) {
        const std::string_view v(env);
        if (v == "scalar") isa = Isa::scalar;
        else if (v == "avx2" && cpu_has_avx2()) isa = Isa::avx2;
    }
    return isa;
}

std::atomic<Isa>& active() {
    static std::atomic<Isa> isa{initial_isa()};
    return isa;
}

}  // namespace

Isa detected_isa() { return cpu_has_avx2() ? Isa::avx2 : Isa::scalar; }
Isa active_isa() { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
    if (isa == Isa::avx2 && !cpu_has_avx2()) throw InvalidArgument("AVX2 kernels unavailable on this CPU/build");
    active() = isa;
}

const char* isa_name(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

#if defined(MFSG_HAVE_AVX2)
#define MFSG_DISPATCH(call) return active_isa() == Isa::avx2 ? avx2::call : scalar::call
#else
#define MFSG_DISPATCH(call) return scalar::call
#endif

ExpSum affine_exp_sum(std::span<const double> a, std::span<const double> b, double beta, double u) {
    MFSG_DISPATCH(affine_exp_sum(a, b, beta, u));
}

void horner_batch(std::span<const Complex> coeffs, std::span<const double> re, std::span<const double> im,
                  std::span<double> out_re, std::span<double> out_im) {
    MFSG_DISPATCH(horner_batch(coeffs, re, im, out_re, out_im));
}

double stencil_sweep(const StencilPlan& plan, std::span<const double> in, std::span<double> out) {
    MFSG_DISPATCH(stencil_sweep(plan, in, out));
}

EscapeResult escape_samples(const EscapeProblem& prob, Complex z0, std::uint64_t pixel_key,
                            std::uint32_t samples) {
    MFSG_DISPATCH(escape_samples(prob, z0, pixel_key, samples));
}

#undef MFSG_DISPATCH

}  // namespace mfsg::kernels
