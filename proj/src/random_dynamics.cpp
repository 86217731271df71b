#include "mfsg/random_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "mfsg/errors.hpp"
#include "mfsg/kernels/kernels.hpp"
#include "mfsg/parallel.hpp"
#include "mfsg/rng.hpp"

namespace mfsg {

const char* mode_name(PixelField::Mode m) {
    switch (m) {
        case PixelField::Mode::monte_carlo: return "monte_carlo";
        case PixelField::Mode::fixed_point: return "fixed_point";
        case PixelField::Mode::synthetic: return "synthetic";
    }
    return "unknown";
}

double PixelField::noise_floor() const {
    switch (mode) {
        case Mode::monte_carlo: return 2.0 * 0.5 / std::sqrt(static_cast<double>(std::max<std::uint32_t>(samples, 1)));
        case Mode::fixed_point: return 2.0 * tol;
        case Mode::synthetic: return 1e-12;
    }
    return 0.0;
}

PixelField PixelField::synthetic(const Window& w, int width, int height, const std::function<double(Complex)>& fn) {
    PixelField f;
    f.window = w;
    f.width = width;
    f.height = height;
    f.values.resize(static_cast<std::size_t>(width) * height);
    for (int j = 0; j < height; ++j)
        for (int i = 0; i < width; ++i) f.values[static_cast<std::size_t>(j) * width + i] = fn(f.center(i, j));
    return f;
}

// ---- escape radius -----------------------------------------------------------

namespace {

void require_polynomial(const MultiMap& mm, const char* what) {
    if (!mm.all_polynomial()) throw NotPolynomial(std::string(what) + ": all generators must be polynomials");
}

// Leading-normalised coefficient view of a polynomial map num / den[0].
std::vector<Complex> poly_coeffs(const RationalMap& f) {
    std::vector<Complex> c = f.num().coeffs();
    const Complex d = f.den()[0];
    for (auto& a : c) a /= d;
    return c;
}

bool in_trap(const std::vector<TrapRegion>& traps, Complex z) {
    for (const auto& t : traps)
        if (t.center.is_finite() && std::norm(z - t.center.value) < t.radius * t.radius) return true;
    return false;
}

void validate_setup(const MultiMap& mm, const std::vector<double>& probs, const ColiseumSetup& s) {
    require_polynomial(mm, "coliseum");
    if (probs.size() != mm.size()) throw InvalidArgument("coliseum: need one probability per map");
    double sum = 0.0;
    for (double p : probs) {
        if (!(p > 0.0 && p <= 1.0)) throw InvalidArgument("coliseum: probabilities must lie in (0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("coliseum: probabilities must sum to 1");
    if (s.width < 2 || s.height < 2 || s.width > 8192 || s.height > 8192)
        throw InvalidArgument("coliseum: resolution must be within [2, 8192]");
    if (!(s.window.x1 > s.window.x0 && s.window.y1 > s.window.y0)) throw InvalidArgument("coliseum: empty window");
    for (const auto& t : s.traps)
        if (!(t.radius > 0.0)) throw InvalidArgument("coliseum: trap radius must be positive");
}

double resolve_escape_radius(const MultiMap& mm, const ColiseumSetup& s) {
    const double R = s.escape_radius > 0.0 ? s.escape_radius : min_escape_radius(mm);
    validate_escape_radius(mm, R, s.window);
    return R;
}

}  // namespace

double min_escape_radius(const MultiMap& mm) {
    require_polynomial(mm, "escape radius");
    double R = 2.0;
    for (const auto& f : mm) {
        const auto c = poly_coeffs(f);
        const std::size_t d = c.size() - 1;
        // g(r) = |a_d| r^d - sum_{k<d} |a_k| r^k - 2r has one positive root.
        auto g = [&](double r) {
            double v = std::abs(c[d]) * std::pow(r, static_cast<double>(d)) - 2.0 * r;
            for (std::size_t k = 0; k < d; ++k) v -= std::abs(c[k]) * std::pow(r, static_cast<double>(k));
            return v;
        };
        double hi = 1.0;
        while (g(hi) <= 0.0) {
            hi *= 2.0;
            if (hi > 1e12) throw InvalidEscapeRadius("no finite escape radius (doubling never holds)");
        }
        double lo = 0.0;
        for (int it = 0; it < 200 && hi - lo > 1e-12 * hi; ++it) {
            const double m = 0.5 * (lo + hi);
            (g(m) > 0.0 ? hi : lo) = m;
        }
        R = std::max(R, hi);
    }
    return R;
}

void validate_escape_radius(const MultiMap& mm, double R, const Window& window) {
    require_polynomial(mm, "escape radius");
    if (!(R >= 2.0) || !std::isfinite(R)) throw InvalidEscapeRadius("escape radius must be finite and >= 2");
    auto check = [&](Complex z) {
        for (std::size_t i = 0; i < mm.size(); ++i) {
            const auto w = mm[i](z);
            if (!w.at_infinity && std::abs(w.value) < 2.0 * std::abs(z) * (1.0 - 1e-12)) {
                char buf[200];
                std::snprintf(buf, sizeof buf, "escape radius %.6g: |f_%zu(z)| < 2|z| at z = %.6g%+.6gi", R, i, z.real(),
                              z.imag());
                throw InvalidEscapeRadius(buf);
            }
        }
    };
    for (double scale : {1.0, 1.25, 1.5, 2.0, 4.0, 8.0, 16.0})
        for (int k = 0; k < 1024; ++k) check(std::polar(R * scale, 2.0 * std::numbers::pi * k / 1024.0));
    for (int k = 0; k <= 256; ++k) {
        const double t = k / 256.0;
        for (Complex z : {Complex(window.x0 + t * window.width(), window.y0), Complex(window.x0 + t * window.width(), window.y1),
                          Complex(window.x0, window.y0 + t * window.height()), Complex(window.x1, window.y0 + t * window.height())})
            if (std::abs(z) >= R) check(z);
    }
}

std::vector<TrapRegion> suggest_traps(const MultiMap& mm, double radius) {
    std::vector<TrapRegion> out;
    for (std::size_t i = 0; i < mm.size(); ++i) {
        const auto& f = mm[i];
        if (f.degree() < 2) continue;
        for (const auto& c : f.critical_points()) {
            if (c.at_infinity) continue;
            SpherePoint z = c;
            for (int n = 0; n < 2000 && z.is_finite() && std::abs(z.value) < 1e8; ++n) z = f(z);
            if (!z.is_finite() || std::abs(z.value) >= 1e8) continue;
            for (int period = 1; period <= 16; ++period) {
                SpherePoint w = z;
                double mult = 1.0;  // spherical norms telescope to |(f^p)'| on a cycle
                for (int k = 0; k < period; ++k) {
                    mult *= f.derivative_norm(w);
                    w = f(w);
                }
                if (!w.is_finite() || std::abs(w.value - z.value) > 1e-9 * std::max(1.0, std::abs(z.value))) continue;
                if (mult >= 1.0) break;
                SpherePoint p = z;
                for (int k = 0; k < period; ++k, p = f(p)) {
                    const bool dup = std::any_of(out.begin(), out.end(), [&](const TrapRegion& t) {
                        return std::abs(t.center.value - p.value) < 1e-6;
                    });
                    if (dup) continue;
                    char buf[96];
                    std::snprintf(buf, sizeof buf, "attracting cycle of map %zu (period %d)", i, period);
                    out.push_back({p, radius, buf});
                }
                break;
            }
        }
    }
    return out;
}

// ---- monte carlo ---------------------------------------------------------------

PixelField coliseum_monte_carlo(const MultiMap& mm, const std::vector<double>& probs, const ColiseumSetup& setup,
                                std::uint32_t samples, std::uint64_t rng_seed) {
    validate_setup(mm, probs, setup);
    if (samples < 1) throw InvalidArgument("coliseum: samples must be positive");
    const double R = resolve_escape_radius(mm, setup);

    kernels::EscapeProblem prob;
    prob.maps = mm.size();
    prob.stride = static_cast<std::size_t>(mm.max_degree()) + 1;
    prob.coeff_re.assign(prob.maps * prob.stride, 0.0);
    prob.coeff_im.assign(prob.maps * prob.stride, 0.0);
    for (std::size_t m = 0; m < prob.maps; ++m) {
        const auto c = poly_coeffs(mm[m]);
        for (std::size_t k = 0; k < c.size(); ++k) {
            prob.coeff_re[m * prob.stride + k] = c[k].real();
            prob.coeff_im[m * prob.stride + k] = c[k].imag();
        }
    }
    double cum = 0.0;
    for (std::size_t m = 0; m + 1 < prob.maps; ++m) {
        cum += probs[m];
        prob.thresholds.push_back(static_cast<std::uint32_t>(std::min(std::round(cum * 4294967296.0), 4294967295.0)));
    }
    prob.escape_radius2 = R * R;
    for (const auto& t : setup.traps) {
        if (!t.center.is_finite()) continue;
        prob.trap_re.push_back(t.center.value.real());
        prob.trap_im.push_back(t.center.value.imag());
        prob.trap_r2.push_back(t.radius * t.radius);
    }
    prob.max_steps = 10 * static_cast<int>(std::ceil(std::log2(static_cast<double>(samples)))) + 200;
    prob.resamples = 3;

    PixelField f;
    f.window = setup.window;
    f.width = setup.width;
    f.height = setup.height;
    f.mode = PixelField::Mode::monte_carlo;
    f.samples = samples;
    f.values.resize(static_cast<std::size_t>(f.width) * f.height);
    std::vector<std::uint64_t> row_flags(static_cast<std::size_t>(f.height), 0);
    parallel_for(static_cast<std::size_t>(f.height), [&](std::size_t j) {
        for (int i = 0; i < f.width; ++i) {
            const std::size_t pixel = j * static_cast<std::size_t>(f.width) + static_cast<std::size_t>(i);
            const auto r = kernels::escape_samples(prob, f.center(i, static_cast<int>(j)), substream_key(rng_seed, pixel), samples);
            f.values[pixel] = r.score_sum / samples;
            row_flags[j] += r.flagged;
        }
    });
    for (auto c : row_flags) f.flagged += c;
    return f;
}

// ---- value iteration -------------------------------------------------------------

namespace {

kernels::StencilPlan build_plan(const MultiMap& mm, const std::vector<double>& probs, const ColiseumSetup& s, double R) {
    PixelField geo;
    geo.window = s.window;
    geo.width = s.width;
    geo.height = s.height;
    const std::size_t W = static_cast<std::size_t>(s.width), H = static_cast<std::size_t>(s.height), nodes = W * H;
    kernels::StencilPlan plan;
    plan.nodes = nodes;
    plan.width = W;
    plan.probs = probs;
    plan.fixed_mask.assign(nodes, 0);
    plan.fixed_value.assign(nodes, 0.0);
    const std::size_t K = mm.size() * nodes;
    plan.base.assign(K, 0);
    plan.wx.assign(K, 0.0);
    plan.wy.assign(K, 0.0);
    plan.keep.assign(K, 0.0);
    plan.cval.assign(K, 0.0);
    const double dx = geo.dx(), dy = geo.dy();
    parallel_for(H, [&](std::size_t j) {
        for (std::size_t i = 0; i < W; ++i) {
            const std::size_t n = j * W + i;
            const Complex z = geo.center(static_cast<int>(i), static_cast<int>(j));
            if (std::abs(z) > R) {
                plan.fixed_mask[n] = -1;
                plan.fixed_value[n] = 1.0;
                continue;
            }
            if (in_trap(s.traps, z)) {
                plan.fixed_mask[n] = -1;
                continue;
            }
            for (std::size_t m = 0; m < mm.size(); ++m) {
                const std::size_t k = m * nodes + n;
                const SpherePoint w = mm[m](z);
                if (w.at_infinity || std::abs(w.value) > R) {
                    plan.cval[k] = 1.0;
                    continue;
                }
                if (in_trap(s.traps, w.value)) continue;
                const double gx = std::clamp((w.value.real() - s.window.x0) / dx - 0.5, 0.0, static_cast<double>(W - 1));
                const double gy = std::clamp((w.value.imag() - s.window.y0) / dy - 0.5, 0.0, static_cast<double>(H - 1));
                const std::size_t ix = std::min(static_cast<std::size_t>(gx), W - 2);
                const std::size_t iy = std::min(static_cast<std::size_t>(gy), H - 2);
                plan.base[k] = static_cast<std::int32_t>(iy * W + ix);
                plan.wx[k] = gx - static_cast<double>(ix);
                plan.wy[k] = gy - static_cast<double>(iy);
                plan.keep[k] = 1.0;
            }
        }
    });
    return plan;
}

std::vector<double> initial_values(const kernels::StencilPlan& plan) {
    std::vector<double> v(plan.nodes, 0.0);
    for (std::size_t n = 0; n < plan.nodes; ++n)
        if (plan.fixed_mask[n]) v[n] = plan.fixed_value[n];
    return v;
}

}  // namespace

PixelField coliseum_fixed_point(const MultiMap& mm, const std::vector<double>& probs, const ColiseumSetup& setup, double tol,
                                int max_iters) {
    validate_setup(mm, probs, setup);
    if (!(tol > 0.0)) throw InvalidArgument("coliseum: tol must be positive");
    const double R = resolve_escape_radius(mm, setup);
    const auto plan = build_plan(mm, probs, setup, R);
    std::vector<double> cur = initial_values(plan), next(plan.nodes);
    PixelField f;
    f.window = setup.window;
    f.width = setup.width;
    f.height = setup.height;
    f.mode = PixelField::Mode::fixed_point;
    f.tol = tol;
    double change = std::numeric_limits<double>::infinity();
    int it = 0;
    while (it < max_iters) {
        change = kernels::stencil_sweep(plan, cur, next);
        cur.swap(next);
        ++it;
        if (change < tol) break;
    }
    f.residual = change;
    f.iterations = it;
    if (!(change < tol)) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "value iteration: residual %.3g after %d iterations (tol %.3g)", change, it, tol);
        throw NonConvergence(buf);
    }
    f.values = std::move(cur);
    return f;
}

double coliseum_reapply(const MultiMap& mm, const std::vector<double>& probs, const ColiseumSetup& setup,
                        const PixelField& field) {
    validate_setup(mm, probs, setup);
    const auto plan = build_plan(mm, probs, setup, resolve_escape_radius(mm, setup));
    std::vector<double> next(plan.nodes);
    return kernels::stencil_sweep(plan, field.values, next);
}

// ---- holder exponents ----------------------------------------------------------------

std::vector<double> Radii::values() const {
    std::vector<double> r(static_cast<std::size_t>(std::max(count, 0)));
    double x = r0;
    for (auto& v : r) {
        v = x;
        x *= ratio;
    }
    return r;
}

HolderFit holder_exponent(const PixelField& field, Complex z, const Radii& radii) {
    if (radii.count < 5) throw InvalidArgument("holder: need at least 5 radii");
    if (!(radii.r0 > 0.0) || !(radii.ratio > 0.0) || radii.ratio == 1.0) throw InvalidArgument("holder: invalid radii");
    if (!field.window.contains(z)) throw InvalidArgument("holder: point outside window");
    const double pitch = std::max(field.dx(), field.dy());
    const double cap = std::min(field.window.width(), field.window.height()) / 4.0;
    const auto rs = radii.values();
    for (double r : rs)
        if (r < 2.0 * pitch * (1.0 - 1e-9) || r > cap * (1.0 + 1e-9))
            throw InvalidArgument("holder: radii must lie within [2 pixel pitch, window/4]");

    // Snap z to its pixel.
    const int ci = std::clamp(static_cast<int>(std::floor((z.real() - field.window.x0) / field.dx())), 0, field.width - 1);
    const int cj = std::clamp(static_cast<int>(std::floor((z.imag() - field.window.y0) / field.dy())), 0, field.height - 1);
    const Complex zc = field.center(ci, cj);
    const double vz = field.at(ci, cj);
    const double conf = 2.0 / (1.0 + std::norm(zc));

    // Balls are chordal, rounded to the lattice by half a pixel. The abscissa is
    // the chordal reach of the included centres in planar units at z.
    std::vector<double> q(rs.size()), reff(rs.size());
    for (std::size_t k = 0; k < rs.size(); ++k) {
        const double rr = rs[k] + 0.5 * pitch;
        const double rho = rr * conf;
        // Planar extent D of the chordal ball: |y - z| <= r sqrt((1+|y|^2)/(1+|z|^2)).
        double D = rr;
        for (int it = 0; it < 30; ++it)
            D = rr * std::sqrt((1.0 + std::pow(std::abs(zc) + D, 2)) / (1.0 + std::norm(zc)));
        const int di = static_cast<int>(std::ceil(D / field.dx())) + 1, dj = static_cast<int>(std::ceil(D / field.dy())) + 1;
        double best = 0.0, far = 0.0;
        for (int j = std::max(0, cj - dj); j <= std::min(field.height - 1, cj + dj); ++j)
            for (int i = std::max(0, ci - di); i <= std::min(field.width - 1, ci + di); ++i) {
                const double d = chordal_distance(field.center(i, j), zc);
                if (d > rho) continue;
                far = std::max(far, d);
                best = std::max(best, std::abs(field.at(i, j) - vz));
            }
        q[k] = best;
        reff[k] = far / conf;
    }

    const double floor = field.noise_floor();
    std::vector<double> lx, ly;
    for (std::size_t k = 0; k < rs.size(); ++k)
        if (q[k] >= floor && q[k] > 0.0) {
            lx.push_back(std::log(reff[k]));
            ly.push_back(std::log(q[k]));
        }
    if (lx.empty()) return {std::numeric_limits<double>::infinity(), 1.0, 0};
    if (2 * (rs.size() - lx.size()) >= rs.size()) throw DegenerateFit("holder: at least half the radii are below the noise floor");

    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        mx += lx[k];
        my += ly[k];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0, syy = 0;
    for (std::size_t k = 0; k < lx.size(); ++k) {
        sxx += (lx[k] - mx) * (lx[k] - mx);
        sxy += (lx[k] - mx) * (ly[k] - my);
        syy += (ly[k] - my) * (ly[k] - my);
    }
    HolderFit fit;
    fit.exponent = sxy / sxx;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    fit.radii_used = static_cast<int>(lx.size());
    return fit;
}

HolderReport holder_survey(const PixelField& field, const JuliaCloud& cloud, std::size_t n_points, const Radii& radii,
                           std::uint64_t rng_seed, const SpectrumTable* spectrum, bool single_map) {
    HolderReport rep;
    rep.single_map = single_map;
    std::vector<Complex> usable;
    for (const auto& p : cloud.points()) {
        if (p.is_finite() && field.window.contains(p.value)) usable.push_back(p.value);
        else ++rep.outside_window;
    }
    if (usable.empty()) return rep;

    Rng rng = Rng::substream(rng_seed, 0x686f6c646572ULL);
    std::vector<Complex> picks(n_points);
    for (auto& z : picks) z = usable[rng.below(usable.size())];
    std::vector<std::optional<HolderFit>> fits(n_points);
    parallel_for(n_points, [&](std::size_t k) {
        try {
            fits[k] = holder_exponent(field, picks[k], radii);
        } catch (const DegenerateFit&) {
        }
    });

    rep.min_exponent = std::numeric_limits<double>::infinity();
    rep.max_exponent = -std::numeric_limits<double>::infinity();
    std::vector<double> good;
    for (std::size_t k = 0; k < n_points; ++k) {
        if (!fits[k]) {
            ++rep.degenerate;
            continue;
        }
        rep.rows.push_back({picks[k], *fits[k]});
        if (std::isfinite(fits[k]->exponent) && fits[k]->r2 > 0.9) good.push_back(fits[k]->exponent);
    }
    rep.well_fitted = good.size();
    for (double e : good) {
        rep.min_exponent = std::min(rep.min_exponent, e);
        rep.max_exponent = std::max(rep.max_exponent, e);
    }
    if (!good.empty()) {
        const double lo = std::floor(rep.min_exponent * 10.0) / 10.0;
        const auto bins = static_cast<std::size_t>(std::floor((rep.max_exponent - lo) * 10.0 + 1e-9)) + 1;
        rep.histogram.resize(bins);
        for (std::size_t b = 0; b < bins; ++b) rep.histogram[b] = {lo + 0.1 * static_cast<double>(b), 0};
        for (double e : good) ++rep.histogram[std::min(bins - 1, static_cast<std::size_t>((e - lo) * 10.0))].second;
    }
    if (spectrum && !good.empty()) {
        rep.compared = true;
        rep.min_ok = rep.min_exponent >= spectrum->alpha_minus - rep.slack;
        rep.max_ok = rep.max_exponent <= spectrum->alpha_plus + rep.slack;
        const auto inside = std::count_if(good.begin(), good.end(), [&](double e) {
            return e >= spectrum->alpha_minus - rep.slack && e <= spectrum->alpha_plus + rep.slack;
        });
        rep.fraction_in_range = static_cast<double>(inside) / static_cast<double>(good.size());
    }
    return rep;
}

void write_holder_csv(const HolderReport& report, std::ostream& os) {
    os << "re,im,exponent,r2,n_radii\n";
    char buf[160];
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%d\n", r.z.real(), r.z.imag(), r.fit.exponent, r.fit.r2,
                      r.fit.radii_used);
        os << buf;
    }
}

// ---- alpha_minus bound -----------------------------------------------------------------

double alpha_minus_bound(const MultiMap& mm, const std::vector<double>& probs, std::size_t n_sequences, int seq_len,
                         std::uint64_t rng_seed) {
    require_polynomial(mm, "alpha_minus_bound");
    for (const auto& f : mm)
        if (f.degree() < 2) throw NotPolynomial("alpha_minus_bound: every generator needs degree >= 2");
    if (probs.size() != mm.size()) throw InvalidArgument("alpha_minus_bound: need one probability per map");
    if (n_sequences < 1 || seq_len < 1) throw InvalidArgument("alpha_minus_bound: need sequences of positive length");

    double entropy = 0.0, log_deg = 0.0;
    for (std::size_t i = 0; i < mm.size(); ++i) {
        if (probs[i] < 1.0) entropy -= probs[i] * std::log(probs[i]);
        log_deg += probs[i] * std::log(static_cast<double>(mm[i].degree()));
    }
    if (entropy == 0.0) return 0.0;

    const double R = min_escape_radius(mm);
    std::vector<std::vector<Complex>> crit(mm.size());
    for (std::size_t i = 0; i < mm.size(); ++i)
        for (const auto& c : mm[i].critical_points())
            if (c.is_finite()) crit[i].push_back(c.value);

    std::vector<double> green(n_sequences, 0.0);
    parallel_for(n_sequences, [&](std::size_t s) {
        Rng rng = Rng::substream(rng_seed, s);
        std::vector<std::size_t> word(static_cast<std::size_t>(seq_len));
        for (auto& w : word) {
            const double u = rng.uniform();
            double cum = 0.0;
            w = mm.size() - 1;
            for (std::size_t i = 0; i + 1 < mm.size(); ++i) {
                cum += probs[i];
                if (u < cum) {
                    w = i;
                    break;
                }
            }
        }
        double sum = 0.0;
        for (const Complex& c : crit[word[0]]) {
            Complex z = c;
            double degprod = 1.0;
            for (std::size_t m = 0; m < word.size(); ++m) {
                z = mm[word[m]](z).value;
                degprod *= mm[word[m]].degree();
                if (std::abs(z) > R) {
                    sum += std::log(std::abs(z)) / degprod;
                    break;
                }
            }
        }
        green[s] = sum;
    });
    double mean = 0.0;
    for (double g : green) mean += g;
    mean /= static_cast<double>(n_sequences);
    return entropy / (log_deg + mean);
}

}  // namespace mfsg
