#include "mfsg/thermo.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "mfsg/errors.hpp"
#include "mfsg/kernels/kernels.hpp"
#include "mfsg/parallel.hpp"

namespace mfsg {

// ---- HolderFamily ----------------------------------------------------------

HolderFamily HolderFamily::constant(std::vector<double> c) {
    HolderFamily h;
    h.kind_ = Kind::constant;
    h.values_ = std::move(c);
    return h;
}

HolderFamily HolderFamily::log_prob(std::vector<double> p) {
    HolderFamily h;
    h.kind_ = Kind::log_prob;
    h.values_ = std::move(p);
    return h;
}

HolderFamily HolderFamily::log_deriv() {
    HolderFamily h;
    h.kind_ = Kind::log_deriv;
    return h;
}

HolderFamily HolderFamily::scalar(double c) {
    HolderFamily h;
    h.kind_ = Kind::scalar;
    h.values_ = {c};
    return h;
}

HolderFamily HolderFamily::custom(Evaluator fn, std::string name) {
    HolderFamily h;
    h.kind_ = Kind::custom;
    h.custom_ = std::move(fn);
    h.custom_name_ = std::move(name);
    return h;
}

std::string HolderFamily::name() const {
    switch (kind_) {
        case Kind::constant: return "constant";
        case Kind::log_prob: return "log_prob";
        case Kind::log_deriv: return "log_deriv";
        case Kind::scalar: return "scalar";
        case Kind::custom: return custom_name_;
    }
    return "unknown";
}

std::vector<double> HolderFamily::constants(std::size_t maps) const {
    switch (kind_) {
        case Kind::constant: return values_;
        case Kind::scalar: return std::vector<double>(maps, values_[0]);
        case Kind::log_prob: {
            std::vector<double> c(values_.size());
            std::transform(values_.begin(), values_.end(), c.begin(), [](double p) { return std::log(p); });
            return c;
        }
        default: throw InvalidArgument("holder family '" + name() + "' is not locally constant");
    }
}

void HolderFamily::validate(const MultiMap& mm) const {
    const std::size_t k = mm.size();
    switch (kind_) {
        case Kind::constant:
            if (values_.size() != k) throw InvalidArgument("constant potential: need one value per map");
            for (double c : values_)
                if (!std::isfinite(c)) throw InvalidArgument("constant potential: non-finite value");
            break;
        case Kind::log_prob: {
            if (values_.size() != k) throw InvalidArgument("log_prob potential: need one probability per map");
            double sum = 0.0;
            for (double p : values_) {
                if (!(p > 0.0 && p < 1.0)) throw InvalidArgument("log_prob potential: probabilities must lie in (0,1)");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9) throw InvalidArgument("log_prob potential: probabilities must sum to 1");
            break;
        }
        case Kind::scalar:
            if (!std::isfinite(values_[0])) throw InvalidArgument("scalar potential: non-finite value");
            break;
        case Kind::custom:
            if (!custom_) throw InvalidArgument("custom potential: no evaluator");
            break;
        case Kind::log_deriv: break;
    }
}

double zeta(const RationalMap& f, const SpherePoint& y) { return -std::log(f.derivative_norm(y)); }

double HolderFamily::operator()(const MultiMap& mm, std::size_t i, const SpherePoint& y) const {
    switch (kind_) {
        case Kind::constant: return values_[i];
        case Kind::log_prob: return std::log(values_[i]);
        case Kind::scalar: return values_[0];
        case Kind::log_deriv: return zeta(mm[i], y);
        case Kind::custom: return custom_(i, y);
    }
    return 0.0;
}

// ---- leaf tables -------------------------------------------------------------

std::vector<int> LeafTable::letters(std::size_t k) const {
    std::vector<int> w(static_cast<std::size_t>(depth));
    std::uint64_t code = word[k];
    for (auto& c : w) {
        c = static_cast<int>(code % alphabet);
        code /= alphabet;
    }
    return w;
}

namespace {

// (sum deg)^(n) saturating at max.
std::size_t leaf_count(std::size_t branching, int n) {
    std::size_t c = 1;
    for (int k = 0; k < n; ++k) {
        if (c > std::numeric_limits<std::size_t>::max() / branching) return std::numeric_limits<std::size_t>::max();
        c *= branching;
    }
    return c;
}

LeafTable expand(const MultiMap& mm, const HolderFamily& psi, const std::vector<double>& psi_const,
                 const LeafTable& parent) {
    const std::size_t k = mm.size();
    const auto branching = static_cast<std::size_t>(mm.total_degree());
    std::vector<std::size_t> offset(k + 1, 0);
    for (std::size_t i = 0; i < k; ++i) offset[i + 1] = offset[i] + static_cast<std::size_t>(mm[i].degree());

    LeafTable child;
    child.depth = parent.depth + 1;
    child.alphabet = k;
    const std::size_t n = parent.size() * branching;
    child.re.resize(n);
    child.im.resize(n);
    child.at_infinity.resize(n);
    child.A.resize(n);
    child.B.resize(n);
    child.word.resize(n);

    constexpr std::size_t chunk = 1024;
    const std::size_t chunks = (parent.size() + chunk - 1) / chunk;
    parallel_for(chunks, [&](std::size_t c) {
        std::vector<SpherePoint> pre;
        const std::size_t end = std::min(parent.size(), (c + 1) * chunk);
        for (std::size_t p = c * chunk; p < end; ++p) {
            const SpherePoint x = parent.point(p);
            for (std::size_t i = 0; i < k; ++i) {
                mm[i].preimages_into(x, pre);
                for (std::size_t b = 0; b < pre.size(); ++b) {
                    const std::size_t q = p * branching + offset[i] + b;
                    const SpherePoint& y = pre[b];
                    child.re[q] = y.at_infinity ? 0.0 : y.value.real();
                    child.im[q] = y.at_infinity ? 0.0 : y.value.imag();
                    child.at_infinity[q] = y.at_infinity ? 1 : 0;
                    const double a = psi_const.empty() ? psi(mm, i, y) : psi_const[i];
                    child.A[q] = a + parent.A[p];
                    child.B[q] = zeta(mm[i], y) + parent.B[p];
                    child.word[q] = parent.word[p] * k + i;
                }
            }
        }
    });
    return child;
}

}  // namespace

int auto_depth(const MultiMap& mm, std::size_t budget) {
    const auto branching = static_cast<std::size_t>(mm.total_degree());
    if (branching < 2) throw InvalidArgument("auto depth: total degree must be at least 2");
    int n = 0;
    while (leaf_count(branching, n + 2) <= budget) ++n;
    if (n < 1) throw NodeBudgetExceeded("node budget too small for depth 1");
    return n;
}

LeafTables build_leaf_tables(const MultiMap& mm, const HolderFamily& psi, const SpherePoint& base, int depth,
                             std::size_t budget) {
    if (depth < 1) throw InvalidArgument("build_leaf_tables: depth must be >= 1");
    psi.validate(mm);
    const auto branching = static_cast<std::size_t>(mm.total_degree());
    const std::size_t needed = leaf_count(branching, depth + 1);
    if (needed > budget) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "depth %d needs %zu leaves, budget is %zu", depth, needed, budget);
        throw NodeBudgetExceeded(buf);
    }
    const std::vector<double> psi_const = psi.is_locally_constant() ? psi.constants(mm.size()) : std::vector<double>{};

    LeafTable level;
    level.alphabet = mm.size();
    level.re = {base.at_infinity ? 0.0 : base.value.real()};
    level.im = {base.at_infinity ? 0.0 : base.value.imag()};
    level.at_infinity = {static_cast<std::uint8_t>(base.at_infinity ? 1 : 0)};
    level.A = {0.0};
    level.B = {0.0};
    level.word = {0};

    LeafTables out;
    out.base = base;
    for (int d = 0; d < depth - 1; ++d) level = expand(mm, psi, psi_const, level);
    out.prev_A = level.A;
    out.prev_B = level.B;
    out.lower = expand(mm, psi, psi_const, level);
    level = {};
    out.upper = expand(mm, psi, psi_const, out.lower);
    return out;
}

// ---- pressure ----------------------------------------------------------------

double log_partition(std::span<const double> A, std::span<const double> B, double beta, double u) {
    constexpr std::size_t block = 4096;
    const std::size_t n = A.size();
    if (n == 0) return -std::numeric_limits<double>::infinity();
    const std::size_t blocks = (n + block - 1) / block;
    std::vector<kernels::ExpSum> part(blocks);
    parallel_for(blocks, [&](std::size_t b) {
        const std::size_t lo = b * block, len = std::min(block, n - lo);
        part[b] = kernels::affine_exp_sum(A.subspan(lo, len), B.subspan(lo, len), beta, u);
    });
    for (std::size_t stride = 1; stride < blocks; stride *= 2)
        for (std::size_t i = 0; i + stride < blocks; i += 2 * stride) part[i] = kernels::combine(part[i], part[i + stride]);
    return part[0].max + std::log(part[0].sum);
}

double pressure_estimate(const LeafTables& t, double beta, double u) {
    return log_partition(t.upper.A, t.upper.B, beta, u) - log_partition(t.lower.A, t.lower.B, beta, u);
}

double pressure_estimate_lower(const LeafTables& t, double beta, double u) {
    return log_partition(t.lower.A, t.lower.B, beta, u) - log_partition(t.prev_A, t.prev_B, beta, u);
}

namespace {

// Root of a decreasing function g. [lo, hi] is grown geometrically until
// g(lo) >= 0 >= g(hi), never beyond +-limit, then bisected to width tol.
template <class G>
double bisect_decreasing(G&& g, double lo, double hi, double tol, double limit, const char* what) {
    lo = std::max(lo, -limit);
    hi = std::min(hi, limit);
    double glo = g(lo), ghi = g(hi);
    auto fail = [&] {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%s: no sign change within [%g, %g]", what, -limit, limit);
        throw BracketFailure(buf);
    };
    while (!(glo >= 0.0)) {
        if (std::isnan(glo) || lo <= -limit) fail();
        const double w = hi - lo;
        hi = lo;
        ghi = glo;
        lo = std::max(lo - 2.0 * w, -limit);
        glo = g(lo);
    }
    while (!(ghi <= 0.0)) {
        if (std::isnan(ghi) || hi >= limit) fail();
        const double w = hi - lo;
        lo = hi;
        glo = ghi;
        hi = std::min(hi + 2.0 * w, limit);
        ghi = g(hi);
    }
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        const double gm = g(mid);
        if (std::isnan(gm)) throw BracketFailure(std::string(what) + ": NaN during bisection");
        if (gm > 0.0) {
            lo = mid;
            glo = gm;
        } else {
            hi = mid;
            ghi = gm;
        }
    }
    // Final secant step inside the bracket.
    if (glo > ghi) return lo + (hi - lo) * glo / (glo - ghi);
    return 0.5 * (lo + hi);
}

}  // namespace

double free_energy(const LeafTables& tables, double beta, double tol, std::optional<double> guess) {
    const double c = guess.value_or(1.0);
    const double h = guess ? 1e-3 : 1.0;
    return bisect_decreasing([&](double u) { return pressure_estimate(tables, beta, u); }, c - h, c + h, tol,
                             kBracketLimit, "free_energy");
}

std::optional<std::size_t> FreeEnergyTable::zero_index() const {
    const double h = std::abs(step());
    for (std::size_t k = 0; k < betas.size(); ++k)
        if (std::abs(betas[k]) <= 0.5 * h) return k;
    return std::nullopt;
}

std::vector<double> uniform_grid(double min, double max, int steps) {
    if (steps < 2) throw InvalidArgument("uniform_grid: need at least 2 points");
    if (!(max > min)) throw InvalidArgument("uniform_grid: max must exceed min");
    std::vector<double> g(static_cast<std::size_t>(steps));
    for (int k = 0; k < steps; ++k) g[static_cast<std::size_t>(k)] = min + (max - min) * k / (steps - 1);
    return g;
}

FreeEnergyTable free_energy_table(const LeafTables& tables, const std::vector<double>& betas, double tol) {
    if (betas.size() < 2) throw InvalidArgument("free_energy_table: need at least 2 betas");
    const double h = betas[1] - betas[0];
    if (!(h > 0.0)) throw InvalidArgument("free_energy_table: betas must be ascending");
    for (std::size_t k = 1; k < betas.size(); ++k)
        if (std::abs((betas[k] - betas[k - 1]) - h) > 1e-9 * std::max(1.0, std::abs(h)))
            throw InvalidArgument("free_energy_table: betas must be uniformly spaced");

    FreeEnergyTable ft;
    ft.betas = betas;
    ft.depth = tables.depth();
    const std::size_t n = betas.size();
    ft.t.resize(n);
    ft.residual.resize(n);
    ft.gap.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::optional<double> guess;
        if (k >= 2) guess = ft.t[k - 1] + (ft.t[k - 1] - ft.t[k - 2]) * (betas[k] - betas[k - 1]) / (betas[k - 1] - betas[k - 2]);
        else if (k == 1) guess = ft.t[0];
        ft.t[k] = free_energy(tables, betas[k], tol, guess);
        const double p = pressure_estimate(tables, betas[k], ft.t[k]);
        ft.residual[k] = std::abs(p);
        ft.gap[k] = std::abs(p - pressure_estimate_lower(tables, betas[k], ft.t[k]));
    }

    std::size_t k0 = 0;
    for (std::size_t k = 1; k < n; ++k)
        if (std::abs(betas[k]) < std::abs(betas[k0])) k0 = k;
    ft.gap_at_zero = ft.gap[k0];

    double prev = std::numeric_limits<double>::infinity();
    for (int j = -2; j <= 2; ++j) {
        const double p = pressure_estimate(tables, betas[k0], ft.t[k0] + 0.25 * j);
        if (!(p < prev)) ft.monotone_in_u = false;
        prev = p;
    }

    ft.min_second_difference = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k + 1 < n; ++k)
        ft.min_second_difference = std::min(ft.min_second_difference, ft.t[k - 1] - 2.0 * ft.t[k] + ft.t[k + 1]);
    if (n < 3) ft.min_second_difference = 0.0;
    return ft;
}

FreeEnergyTable free_energy_table(const MultiMap& mm, const HolderFamily& psi, const SpherePoint& base,
                                  const std::vector<double>& betas, int depth) {
    return free_energy_table(build_leaf_tables(mm, psi, base, depth), betas);
}

double gamma_root(const LeafTables& tables, double tol) {
    auto sign_of = [](const std::vector<double>& a) {
        bool neg = true, pos = true;
        for (double x : a) {
            neg = neg && x < 0.0;
            pos = pos && x > 0.0;
        }
        return neg ? -1 : (pos ? 1 : 0);
    };
    const int s = sign_of(tables.upper.A);
    if (s == 0 || sign_of(tables.lower.A) != s)
        throw NotMonotone("gamma_root: leaf Birkhoff sums of psi have mixed signs");
    // Pressure decreases in -s * beta.
    auto g = [&](double b) { return pressure_estimate(tables, -s * b, 0.0); };
    return -s * bisect_decreasing(g, 0.0, 2.0, tol, kBracketLimit, "gamma_root");
}

void write_free_energy_csv(const FreeEnergyTable& table, std::ostream& os) {
    os << "beta,t,residual,gap\n";
    char buf[160];
    for (std::size_t k = 0; k < table.betas.size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g\n", table.betas[k], table.t[k], table.residual[k], table.gap[k]);
        os << buf;
    }
}

}  // namespace mfsg
