#include "mfsg/julia.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <numeric>
#include <ostream>
#include <sstream>

#include "mfsg/errors.hpp"
#include "mfsg/rng.hpp"

namespace mfsg {

std::vector<SpherePoint> fixed_points(const RationalMap& f) {
    const Polynomial q = f.num() - Polynomial({Complex(0.0), Complex(1.0)}) * f.den();
    std::vector<SpherePoint> out;
    if (q.degree() >= 1)
        for (const auto& r : poly_roots(q)) out.emplace_back(r);
    for (int k = std::max(q.degree(), 0); k < f.degree() + 1; ++k) out.push_back(SpherePoint::infinity());
    return out;
}

SeedPoint repelling_fixed_point(const RationalMap& f, int map_index) {
    if (f.degree() < 2) throw InvalidArgument("repelling_fixed_point: degree must be >= 2");
    auto arg0 = [](const SpherePoint& p) {
        const double a = std::arg(p.value);
        return a < 0.0 ? a + 2.0 * std::numbers::pi : a;
    };
    auto modulus = [](const SpherePoint& p) {
        return p.at_infinity ? std::numeric_limits<double>::infinity() : std::abs(p.value);
    };
    bool found = false;
    SeedPoint best;
    for (const auto& p : fixed_points(f)) {
        const double m = f.derivative_norm(p);
        if (!(m > 1.0 + 1e-9)) continue;
        bool better = !found;
        if (found) {
            const double tol = 1e-9 * std::max(1.0, best.multiplier);
            if (m > best.multiplier + tol) better = true;
            else if (m >= best.multiplier - tol) {
                const double rm = modulus(p), rb = modulus(best.point);
                if (rm < rb - 1e-9) better = true;
                else if (rm <= rb + 1e-9 && !p.at_infinity && arg0(p) < arg0(best.point) - 1e-12) better = true;
            }
        }
        if (better) {
            best = {p, SeedPoint::Origin::repelling_fixed_point, map_index, m};
            found = true;
        }
    }
    if (!found) throw NoRepellingFixedPoint("no fixed point with multiplier norm > 1");
    return best;
}

// ---- SphereIndex -----------------------------------------------------------

int SphereIndex::cell_coord(double c) const {
    const int i = static_cast<int>(std::floor((c + 1.0) / cell_));
    return std::clamp(i, 0, grid_ - 1);
}

SphereIndex::SphereIndex(std::span<const SpherePoint> points, double cell_size) {
    const std::size_t n = points.size();
    cell_ = cell_size > 0.0 ? cell_size : 2.0 / std::ceil(std::sqrt(static_cast<double>(std::max<std::size_t>(n, 1))));
    cell_ = std::clamp(cell_, 1e-4, 2.0);
    grid_ = static_cast<int>(std::ceil(2.0 / cell_)) + 1;

    std::vector<Vec3> raw(n);
    std::vector<std::int64_t> keys(n);
    for (std::size_t k = 0; k < n; ++k) {
        raw[k] = to_sphere(points[k]);
        keys[k] = key(cell_coord(raw[k].x), cell_coord(raw[k].y), cell_coord(raw[k].z));
    }
    original_.resize(n);
    std::iota(original_.begin(), original_.end(), 0U);
    std::stable_sort(original_.begin(), original_.end(), [&](std::uint32_t a, std::uint32_t b) { return keys[a] < keys[b]; });
    embedded_.resize(n);
    for (std::size_t k = 0; k < n; ++k) embedded_[k] = raw[original_[k]];

    for (std::uint32_t k = 0; k < n;) {
        std::uint32_t e = k;
        while (e < n && keys[original_[e]] == keys[original_[k]]) ++e;
        const Vec3& v = embedded_[k];
        lookup_.emplace(keys[original_[k]], static_cast<std::uint32_t>(cells_.size()));
        cells_.push_back({k, e, cell_coord(v.x), cell_coord(v.y), cell_coord(v.z)});
        k = e;
    }

    tree_ = embedded_;
    tree_index_ = original_;
    tree_axis_.assign(n, 0);
    build_tree(0, n);
}

void SphereIndex::scan(const Vec3& q, const Range& r, std::size_t exclude, Hit& best) const {
    for (std::uint32_t k = r.begin; k < r.end; ++k) {
        if (original_[k] == exclude) continue;
        const double dx = embedded_[k].x - q.x, dy = embedded_[k].y - q.y, dz = embedded_[k].z - q.z;
        const double d = std::sqrt(dx * dx + dy * dy + dz * dz);
        if (d < best.distance) best = {original_[k], d};
    }
}

SphereIndex::Hit SphereIndex::nearest(const SpherePoint& z, std::size_t exclude) const {
    Hit best;
    if (embedded_.empty()) return best;
    const Vec3 q = to_sphere(z);
    const int cx = cell_coord(q.x), cy = cell_coord(q.y), cz = cell_coord(q.z);
    for (int dz = -1; dz <= 1; ++dz)
        for (int dy = -1; dy <= 1; ++dy)
            for (int dx = -1; dx <= 1; ++dx) {
                const int ix = cx + dx, iy = cy + dy, iz = cz + dz;
                if (ix < 0 || iy < 0 || iz < 0 || ix >= grid_ || iy >= grid_ || iz >= grid_) continue;
                const auto it = lookup_.find(key(ix, iy, iz));
                if (it != lookup_.end()) scan(q, cells_[it->second], exclude, best);
            }
    if (best.distance <= cell_) return best;
    double best2 = best.distance * best.distance;
    search_tree(q, 0, tree_.size(), exclude, best, best2);
    return best;
}

SphereIndex::Hit SphereIndex::nearest_within(const SpherePoint& z, double bound) const {
    Hit best;
    if (embedded_.empty()) return best;
    best.distance = bound;
    double best2 = bound * bound;
    search_tree(to_sphere(z), 0, tree_.size(), embedded_.size(), best, best2);
    return best;
}

namespace {
double coord(const Vec3& v, int axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }
constexpr std::size_t kLeafSize = 8;
}  // namespace

void SphereIndex::build_tree(std::size_t lo, std::size_t hi) {
    if (hi - lo <= kLeafSize) return;
    double mn[3] = {3, 3, 3}, mx[3] = {-3, -3, -3};
    for (std::size_t k = lo; k < hi; ++k)
        for (int a = 0; a < 3; ++a) {
            mn[a] = std::min(mn[a], coord(tree_[k], a));
            mx[a] = std::max(mx[a], coord(tree_[k], a));
        }
    int axis = 0;
    for (int a = 1; a < 3; ++a)
        if (mx[a] - mn[a] > mx[axis] - mn[axis]) axis = a;
    const std::size_t mid = lo + (hi - lo) / 2;
    std::vector<std::size_t> order(hi - lo);
    std::iota(order.begin(), order.end(), lo);
    std::nth_element(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(mid - lo), order.end(),
                     [&](std::size_t i, std::size_t j) {
                         const double ci = coord(tree_[i], axis), cj = coord(tree_[j], axis);
                         return ci < cj || (ci == cj && tree_index_[i] < tree_index_[j]);
                     });
    std::vector<Vec3> pts(order.size());
    std::vector<std::uint32_t> idx(order.size());
    for (std::size_t k = 0; k < order.size(); ++k) {
        pts[k] = tree_[order[k]];
        idx[k] = tree_index_[order[k]];
    }
    std::copy(pts.begin(), pts.end(), tree_.begin() + static_cast<std::ptrdiff_t>(lo));
    std::copy(idx.begin(), idx.end(), tree_index_.begin() + static_cast<std::ptrdiff_t>(lo));
    tree_axis_[mid] = static_cast<std::uint8_t>(axis);
    build_tree(lo, mid);
    build_tree(mid + 1, hi);
}

void SphereIndex::search_tree(const Vec3& q, std::size_t lo, std::size_t hi, std::size_t exclude, Hit& best,
                              double& best2) const {
    auto visit = [&](std::size_t k) {
        if (tree_index_[k] == exclude) return;
        const double dx = tree_[k].x - q.x, dy = tree_[k].y - q.y, dz = tree_[k].z - q.z;
        const double d2 = dx * dx + dy * dy + dz * dz;
        if (d2 < best2) {
            best2 = d2;
            best = {tree_index_[k], std::sqrt(d2)};
        }
    };
    if (hi - lo <= kLeafSize) {
        for (std::size_t k = lo; k < hi; ++k) visit(k);
        return;
    }
    const std::size_t mid = lo + (hi - lo) / 2;
    const int axis = tree_axis_[mid];
    const double diff = coord(q, axis) - coord(tree_[mid], axis);
    visit(mid);
    if (diff < 0) {
        search_tree(q, lo, mid, exclude, best, best2);
        if (diff * diff < best2) search_tree(q, mid + 1, hi, exclude, best, best2);
    } else {
        search_tree(q, mid + 1, hi, exclude, best, best2);
        if (diff * diff < best2) search_tree(q, lo, mid, exclude, best, best2);
    }
}

// ---- JuliaCloud ------------------------------------------------------------

JuliaCloud::JuliaCloud(std::vector<SpherePoint> points) : points_(std::move(points)) {
    if (points_.empty()) throw InvalidArgument("julia cloud: no points");
    index_ = SphereIndex(points_);
    if (points_.size() < 2) return;
    std::vector<double> nn(points_.size());
    for (std::size_t k = 0; k < points_.size(); ++k) nn[k] = index_.nearest(points_[k], k).distance;
    const auto q = static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(nn.size()))) - 1;
    std::nth_element(nn.begin(), nn.begin() + static_cast<std::ptrdiff_t>(q), nn.end());
    resolution_ = nn[q];
}

JuliaCloud build_julia_cloud(const MultiMap& mm, const SeedPoint& seed, std::size_t target_count,
                             std::uint64_t rng_seed) {
    if (target_count < 1) throw InvalidArgument("build_julia_cloud: target_count must be positive");
    Rng rng = Rng::substream(rng_seed, 0x636c6f7564ULL);
    std::vector<SpherePoint> pts;
    pts.reserve(target_count);
    std::vector<SpherePoint> pre;
    SpherePoint z = seed.point;
    for (std::size_t step = 0; pts.size() < target_count; ++step) {
        for (int attempt = 0;; ++attempt) {
            const auto i = rng.below(mm.size());
            try {
                mm[i].preimages_into(z, pre);
                break;
            } catch (const NonConvergence&) {
                if (attempt >= 9) throw;
            }
        }
        z = pre[rng.below(pre.size())];
        if (step >= kCloudBurnIn) pts.push_back(z);
    }
    return JuliaCloud(std::move(pts));
}

double cloud_distance(const JuliaCloud& cloud, const SpherePoint& z) { return cloud.index().nearest(z).distance; }

// ---- condition checks ------------------------------------------------------

const char* kind_name(ConditionReport::Kind k) {
    switch (k) {
        case ConditionReport::Kind::separation: return "separation";
        case ConditionReport::Kind::expansion: return "expansion";
        case ConditionReport::Kind::hyperbolicity: return "hyperbolicity";
    }
    return "unknown";
}

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

}  // namespace

ConditionReport check_separation(const MultiMap& mm, const JuliaCloud& cloud) {
    ConditionReport rep{ConditionReport::Kind::separation, true, std::numeric_limits<double>::infinity(), {}};
    const double eps = cloud.resolution();
    if (mm.size() < 2) {
        rep.details = "single generator: no pairs to separate";
        return rep;
    }
    std::vector<std::vector<SpherePoint>> pre(mm.size());
    std::vector<SpherePoint> buf;
    for (std::size_t i = 0; i < mm.size(); ++i) {
        for (const auto& p : cloud.points()) {
            mm[i].preimages_into(p, buf);
            pre[i].insert(pre[i].end(), buf.begin(), buf.end());
        }
    }
    double margin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < mm.size(); ++j) {
        const SphereIndex idx(pre[j]);
        for (std::size_t i = 0; i < j; ++i)
            for (const auto& y : pre[i]) margin = std::min(margin, idx.nearest_within(y, margin).distance);
    }
    rep.margin = margin;
    rep.passed = margin > 4.0 * eps;
    rep.details = fmt("min chordal gap between preimage clouds %.6g vs 4*eps = %.6g", margin, 4.0 * eps);
    return rep;
}

ConditionReport check_expansion(const MultiMap& mm, const JuliaCloud& cloud, int depth, int samples,
                                std::uint64_t rng_seed) {
    if (depth < 4) throw InvalidArgument("check_expansion: depth must be >= 4");
    if (samples < 1) throw InvalidArgument("check_expansion: samples must be positive");
    const double eps = cloud.resolution();
    Rng rng = Rng::substream(rng_seed, 0x657870616e64ULL);

    // (a) derivative growth along random backward branches.
    double min_growth = std::numeric_limits<double>::infinity();
    std::vector<SpherePoint> pre;
    for (int s = 0; s < samples; ++s) {
        SpherePoint z = cloud.points()[rng.below(cloud.size())];
        double log_sum = 0.0;
        for (int d = 0; d < depth; ++d) {
            const auto i = rng.below(mm.size());
            mm[i].preimages_into(z, pre);
            const SpherePoint y = pre[rng.below(pre.size())];
            log_sum += std::log(mm[i].derivative_norm(y));
            z = y;
        }
        min_growth = std::min(min_growth, std::exp(log_sum / depth));
    }
    const double margin_a = min_growth - 1.0;

    // (b) forward orbits of finite critical values.
    std::vector<SpherePoint> values;
    for (const auto& f : mm) {
        if (f.degree() < 2) continue;
        for (const auto& c : f.critical_points()) {
            const SpherePoint v = f(c);
            if (v.is_finite()) values.push_back(v);
        }
    }
    const double inf_gap = cloud_distance(cloud, SpherePoint::infinity());
    double min_dist = std::numeric_limits<double>::infinity();
    for (const auto& v : values) {
        for (int s = 0; s < samples; ++s) {
            SpherePoint z = v;
            for (int step = 1; step <= depth; ++step) {
                z = mm[rng.below(mm.size())](z);
                const bool diverged = z.at_infinity || std::abs(z.value) > kChartThreshold;
                if (step > 3) min_dist = std::min(min_dist, diverged ? inf_gap : cloud_distance(cloud, z));
                if (diverged && inf_gap > 4.0 * eps) break;
            }
        }
    }
    const double margin_b = min_dist - 4.0 * eps;

    ConditionReport rep{ConditionReport::Kind::expansion, margin_a > 0.0 && margin_b > 0.0, 0.0, {}};
    rep.margin = std::min(margin_a, margin_b);
    rep.details = fmt("min backward growth rate %.6g; min postcritical distance %.6g vs 4*eps = %.6g",
                      min_growth, min_dist, 4.0 * eps);
    return rep;
}

void write_cloud_csv(const JuliaCloud& cloud, std::ostream& os) {
    os << "re,im,at_infinity\n";
    char buf[128];
    for (const auto& p : cloud.points()) {
        if (p.at_infinity) std::snprintf(buf, sizeof buf, "0,0,1\n");
        else std::snprintf(buf, sizeof buf, "%.17g,%.17g,0\n", p.value.real(), p.value.imag());
        os << buf;
    }
}

JuliaCloud read_cloud_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("re,im,at_infinity", 0) != 0)
        throw ConfigError("cloud csv: missing header re,im,at_infinity");
    std::vector<SpherePoint> pts;
    for (int lineno = 2; std::getline(is, line); ++lineno) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        double re = 0, im = 0;
        int inf = 0;
        char c1 = 0, c2 = 0;
        if (!(ls >> re >> c1 >> im >> c2 >> inf) || c1 != ',' || c2 != ',')
            throw ConfigError("cloud csv: malformed line " + std::to_string(lineno));
        pts.push_back(inf ? SpherePoint::infinity() : SpherePoint(re, im));
    }
    return JuliaCloud(std::move(pts));
}

}  // namespace mfsg
