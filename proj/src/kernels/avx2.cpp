// Compiled with -mavx2. Only reached through dispatch when the CPU reports AVX2.

#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfsg/kernels/kernels.hpp"

namespace mfsg::kernels::avx2 {
namespace {

inline double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_max_pd(lo, hi);
    return std::max(_mm_cvtsd_f64(lo), _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo)));
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(lo) + _mm_cvtsd_f64(_mm_unpackhi_pd(lo, lo));
}

// exp for x <= 0 (inputs below -708 flush to 0). Cephes range reduction and a
// degree-12 Taylor polynomial on |r| <= ln2/2; relative error ~2e-16.
inline __m256d exp_nonpositive(__m256d x) {
    const __m256d lo_cut = _mm256_set1_pd(-708.0);
    const __m256d underflow = _mm256_cmp_pd(x, lo_cut, _CMP_LT_OQ);
    x = _mm256_max_pd(x, lo_cut);
    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634)),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_sub_pd(x, _mm256_mul_pd(n, _mm256_set1_pd(6.93145751953125e-1)));
    r = _mm256_sub_pd(r, _mm256_mul_pd(n, _mm256_set1_pd(1.42860682030941723212e-6)));
    static constexpr double c[] = {1.0 / 479001600.0, 1.0 / 39916800.0, 1.0 / 3628800.0, 1.0 / 362880.0,
                                   1.0 / 40320.0,     1.0 / 5040.0,     1.0 / 720.0,     1.0 / 120.0,
                                   1.0 / 24.0,        1.0 / 6.0,        0.5,             1.0,
                                   1.0};
    __m256d p = _mm256_set1_pd(c[0]);
    for (int k = 1; k < 13; ++k) p = _mm256_add_pd(_mm256_mul_pd(p, r), _mm256_set1_pd(c[k]));
    const __m128i ni = _mm256_cvtpd_epi32(n);
    __m256i e = _mm256_add_epi64(_mm256_cvtepi32_epi64(ni), _mm256_set1_epi64x(1023));
    e = _mm256_slli_epi64(e, 52);
    const __m256d result = _mm256_mul_pd(p, _mm256_castsi256_pd(e));
    return _mm256_andnot_pd(underflow, result);
}

}  // namespace

ExpSum affine_exp_sum(std::span<const double> a, std::span<const double> b, double beta, double u) {
    const std::size_t n = a.size();
    if (n == 0) return {-std::numeric_limits<double>::infinity(), 0.0};
    const __m256d vb = _mm256_set1_pd(beta), vu = _mm256_set1_pd(u);
    const std::size_t n4 = n & ~std::size_t{3};

    double m = -std::numeric_limits<double>::infinity();
    __m256d vm = _mm256_set1_pd(m);
    for (std::size_t k = 0; k < n4; k += 4) {
        const __m256d x = _mm256_add_pd(_mm256_mul_pd(vb, _mm256_loadu_pd(a.data() + k)),
                                        _mm256_mul_pd(vu, _mm256_loadu_pd(b.data() + k)));
        vm = _mm256_max_pd(vm, x);
    }
    m = hmax(vm);
    for (std::size_t k = n4; k < n; ++k) m = std::max(m, beta * a[k] + u * b[k]);

    const __m256d mm = _mm256_set1_pd(m);
    __m256d vs = _mm256_setzero_pd();
    for (std::size_t k = 0; k < n4; k += 4) {
        const __m256d x = _mm256_add_pd(_mm256_mul_pd(vb, _mm256_loadu_pd(a.data() + k)),
                                        _mm256_mul_pd(vu, _mm256_loadu_pd(b.data() + k)));
        vs = _mm256_add_pd(vs, exp_nonpositive(_mm256_sub_pd(x, mm)));
    }
    double s = hsum(vs);
    for (std::size_t k = n4; k < n; ++k) s += std::exp(beta * a[k] + u * b[k] - m);
    return {m, s};
}

void horner_batch(std::span<const Complex> coeffs, std::span<const double> re, std::span<const double> im,
                  std::span<double> out_re, std::span<double> out_im) {
    const std::size_t deg = coeffs.size() - 1;
    const std::size_t n = re.size(), n4 = n & ~std::size_t{3};
    for (std::size_t k = 0; k < n4; k += 4) {
        const __m256d zr = _mm256_loadu_pd(re.data() + k), zi = _mm256_loadu_pd(im.data() + k);
        __m256d ar = _mm256_set1_pd(coeffs[deg].real()), ai = _mm256_set1_pd(coeffs[deg].imag());
        for (std::size_t j = deg; j-- > 0;) {
            const __m256d nr = _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(ar, zr), _mm256_mul_pd(ai, zi)),
                                             _mm256_set1_pd(coeffs[j].real()));
            const __m256d ni = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(ar, zi), _mm256_mul_pd(ai, zr)),
                                             _mm256_set1_pd(coeffs[j].imag()));
            ar = nr;
            ai = ni;
        }
        _mm256_storeu_pd(out_re.data() + k, ar);
        _mm256_storeu_pd(out_im.data() + k, ai);
    }
    if (n4 < n)
        scalar::horner_batch(coeffs, re.subspan(n4), im.subspan(n4), out_re.subspan(n4), out_im.subspan(n4));
}

double stencil_sweep(const StencilPlan& plan, std::span<const double> in, std::span<double> out) {
    const std::size_t nodes = plan.nodes, maps = plan.probs.size();
    const std::size_t n4 = nodes & ~std::size_t{3};
    const __m128i w = _mm_set1_epi32(static_cast<int>(plan.width));
    const __m128i one = _mm_set1_epi32(1);
    const __m256d vone = _mm256_set1_pd(1.0);
    const __m256d abs_mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7FFFFFFFFFFFFFFFLL));
    __m256d vchange = _mm256_setzero_pd();
    for (std::size_t n = 0; n < n4; n += 4) {
        __m256d acc = _mm256_setzero_pd();
        for (std::size_t m = 0; m < maps; ++m) {
            const std::size_t k = m * nodes + n;
            const __m128i b00 = _mm_loadu_si128(reinterpret_cast<const __m128i*>(plan.base.data() + k));
            const __m128i b10 = _mm_add_epi32(b00, one);
            const __m128i b01 = _mm_add_epi32(b00, w);
            const __m128i b11 = _mm_add_epi32(b01, one);
            const __m256d t00 = _mm256_i32gather_pd(in.data(), b00, 8);
            const __m256d t10 = _mm256_i32gather_pd(in.data(), b10, 8);
            const __m256d t01 = _mm256_i32gather_pd(in.data(), b01, 8);
            const __m256d t11 = _mm256_i32gather_pd(in.data(), b11, 8);
            const __m256d wx = _mm256_loadu_pd(plan.wx.data() + k);
            const __m256d wy = _mm256_loadu_pd(plan.wy.data() + k);
            const __m256d cx = _mm256_sub_pd(vone, wx);
            const __m256d lower = _mm256_add_pd(_mm256_mul_pd(cx, t00), _mm256_mul_pd(wx, t10));
            const __m256d upper = _mm256_add_pd(_mm256_mul_pd(cx, t01), _mm256_mul_pd(wx, t11));
            const __m256d bil =
                _mm256_add_pd(_mm256_mul_pd(_mm256_sub_pd(vone, wy), lower), _mm256_mul_pd(wy, upper));
            const __m256d keep = _mm256_loadu_pd(plan.keep.data() + k);
            const __m256d contrib = _mm256_add_pd(_mm256_mul_pd(bil, keep),
                                                  _mm256_mul_pd(_mm256_loadu_pd(plan.cval.data() + k),
                                                                _mm256_sub_pd(vone, keep)));
            acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_set1_pd(plan.probs[m]), contrib));
        }
        const __m256d fixed =
            _mm256_castsi256_pd(_mm256_loadu_si256(reinterpret_cast<const __m256i*>(plan.fixed_mask.data() + n)));
        acc = _mm256_blendv_pd(acc, _mm256_loadu_pd(plan.fixed_value.data() + n), fixed);
        _mm256_storeu_pd(out.data() + n, acc);
        vchange = _mm256_max_pd(vchange, _mm256_and_pd(abs_mask, _mm256_sub_pd(acc, _mm256_loadu_pd(in.data() + n))));
    }
    double change = hmax(vchange);
    if (n4 < nodes) {
        // Tail through the reference on a shifted view keeps operation order identical.
        for (std::size_t n = n4; n < nodes; ++n) {
            double acc = 0.0;
            for (std::size_t m = 0; m < maps; ++m) {
                const std::size_t k = m * nodes + n;
                const std::size_t b = static_cast<std::size_t>(plan.base[k]);
                const double wx = plan.wx[k], wy = plan.wy[k];
                const double lower = (1.0 - wx) * in[b] + wx * in[b + 1];
                const double upper = (1.0 - wx) * in[b + plan.width] + wx * in[b + plan.width + 1];
                const double bil = (1.0 - wy) * lower + wy * upper;
                const double contrib = bil * plan.keep[k] + plan.cval[k] * (1.0 - plan.keep[k]);
                acc += plan.probs[m] * contrib;
            }
            if (plan.fixed_mask[n]) acc = plan.fixed_value[n];
            out[n] = acc;
            change = std::max(change, std::abs(acc - in[n]));
        }
    }
    return change;
}

namespace {

// Four 32-bit lanes of fmix32.
inline __m128i fmix32x4(__m128i h) {
    h = _mm_xor_si128(h, _mm_srli_epi32(h, 16));
    h = _mm_mullo_epi32(h, _mm_set1_epi32(static_cast<int>(0x85EBCA6BU)));
    h = _mm_xor_si128(h, _mm_srli_epi32(h, 13));
    h = _mm_mullo_epi32(h, _mm_set1_epi32(static_cast<int>(0xC2B2AE35U)));
    return _mm_xor_si128(h, _mm_srli_epi32(h, 16));
}

}  // namespace

EscapeResult escape_samples(const EscapeProblem& prob, Complex z0, std::uint64_t pixel_key,
                            std::uint32_t samples) {
    EscapeResult res;
    alignas(32) double zr[4], zi[4];
    alignas(16) std::uint32_t lo[4], hi[4], step[4];
    std::uint32_t sample[4], attempt[4];
    bool active[4] = {false, false, false, false};
    bool advance[4];
    std::uint32_t next_sample = 0;

    auto start = [&](int lane, std::uint32_t s, std::uint32_t a) {
        const std::uint64_t key = trajectory_key(pixel_key, s, a);
        lo[lane] = static_cast<std::uint32_t>(key);
        hi[lane] = static_cast<std::uint32_t>(key >> 32);
        zr[lane] = z0.real();
        zi[lane] = z0.imag();
        step[lane] = 0;
        sample[lane] = s;
        attempt[lane] = a;
        active[lane] = true;
    };
    for (int l = 0; l < 4 && next_sample < samples; ++l) start(l, next_sample++, 0);

    const __m256d r2max = _mm256_set1_pd(prob.escape_radius2);
    const __m128i sign = _mm_set1_epi32(static_cast<int>(0x80000000U));
    const std::size_t top = prob.stride - 1;
    const auto max_steps = static_cast<std::uint32_t>(prob.max_steps);

    while (active[0] || active[1] || active[2] || active[3]) {
        __m256d vzr = _mm256_load_pd(zr), vzi = _mm256_load_pd(zi);
        const __m256d r2 = _mm256_add_pd(_mm256_mul_pd(vzr, vzr), _mm256_mul_pd(vzi, vzi));
        const int esc = _mm256_movemask_pd(_mm256_cmp_pd(r2, r2max, _CMP_GT_OQ));
        __m256d trapped = _mm256_setzero_pd();
        for (std::size_t t = 0; t < prob.trap_r2.size(); ++t) {
            const __m256d dr = _mm256_sub_pd(vzr, _mm256_set1_pd(prob.trap_re[t]));
            const __m256d di = _mm256_sub_pd(vzi, _mm256_set1_pd(prob.trap_im[t]));
            const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(dr, dr), _mm256_mul_pd(di, di));
            trapped = _mm256_or_pd(trapped, _mm256_cmp_pd(d2, _mm256_set1_pd(prob.trap_r2[t]), _CMP_LT_OQ));
        }
        const int trp = _mm256_movemask_pd(trapped);

        for (int l = 0; l < 4; ++l) {
            advance[l] = false;
            if (!active[l]) continue;
            int outcome = 2;
            if (esc & (1 << l)) outcome = 1;
            else if (trp & (1 << l)) outcome = 0;
            else if (step[l] == max_steps) outcome = -1;
            if (outcome == 2) {
                advance[l] = true;
                continue;
            }
            if (outcome < 0 && attempt[l] < static_cast<std::uint32_t>(prob.resamples)) {
                start(l, sample[l], attempt[l] + 1);
                continue;
            }
            if (outcome < 0) {
                res.score_sum += 0.5;
                ++res.flagged;
            } else {
                res.score_sum += outcome;
            }
            active[l] = false;
            if (next_sample < samples) start(l, next_sample++, 0);
        }
        if (!(advance[0] || advance[1] || advance[2] || advance[3])) continue;

        // Draws and map choice.
        const __m128i vlo = _mm_load_si128(reinterpret_cast<const __m128i*>(lo));
        const __m128i vhi = _mm_load_si128(reinterpret_cast<const __m128i*>(hi));
        const __m128i vst = _mm_load_si128(reinterpret_cast<const __m128i*>(step));
        const __m128i inner =
            fmix32x4(_mm_add_epi32(vhi, _mm_mullo_epi32(vst, _mm_set1_epi32(static_cast<int>(0x9E3779B9U)))));
        const __m128i draw = fmix32x4(_mm_xor_si128(vlo, inner));
        const __m128i draw_s = _mm_xor_si128(draw, sign);
        __m128i m = _mm_setzero_si128();
        for (const auto thr : prob.thresholds) {
            const __m128i ts = _mm_xor_si128(_mm_set1_epi32(static_cast<int>(thr)), sign);
            // draw >= thr  <=>  !(thr > draw)
            const __m128i lt = _mm_cmpgt_epi32(ts, draw_s);
            m = _mm_add_epi32(m, _mm_andnot_si128(lt, _mm_set1_epi32(1)));
        }
        const __m128i row = _mm_mullo_epi32(m, _mm_set1_epi32(static_cast<int>(prob.stride)));

        __m256d ar = _mm256_i32gather_pd(prob.coeff_re.data() + top, row, 8);
        __m256d ai = _mm256_i32gather_pd(prob.coeff_im.data() + top, row, 8);
        for (std::size_t j = top; j-- > 0;) {
            const __m256d cr = _mm256_i32gather_pd(prob.coeff_re.data() + j, row, 8);
            const __m256d ci = _mm256_i32gather_pd(prob.coeff_im.data() + j, row, 8);
            const __m256d nr = _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(ar, vzr), _mm256_mul_pd(ai, vzi)), cr);
            const __m256d ni = _mm256_add_pd(_mm256_add_pd(_mm256_mul_pd(ar, vzi), _mm256_mul_pd(ai, vzr)), ci);
            ar = nr;
            ai = ni;
        }
        // Lanes restarted this round keep their fresh start point.
        vzr = _mm256_load_pd(zr);
        vzi = _mm256_load_pd(zi);
        const __m256d adv = _mm256_castsi256_pd(_mm256_set_epi64x(advance[3] ? -1 : 0, advance[2] ? -1 : 0,
                                                                  advance[1] ? -1 : 0, advance[0] ? -1 : 0));
        _mm256_store_pd(zr, _mm256_blendv_pd(vzr, ar, adv));
        _mm256_store_pd(zi, _mm256_blendv_pd(vzi, ai, adv));
        for (int l = 0; l < 4; ++l)
            if (advance[l]) ++step[l];
    }
    return res;
}

}  // namespace mfsg::kernels::avx2
