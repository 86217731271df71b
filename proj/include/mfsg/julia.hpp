#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "mfsg/rational_map.hpp"

namespace mfsg {

struct SeedPoint {
    enum class Origin { repelling_fixed_point, user_supplied };

    SpherePoint point;
    Origin origin = Origin::user_supplied;
    int map_index = -1;
    double multiplier = 0.0;  // spherical derivative norm at the fixed point

    static SeedPoint user(const SpherePoint& p) { return {p, Origin::user_supplied, -1, 0.0}; }
};

/// Fixed points of f with multiplicity (deg f + 1 of them, infinity included).
std::vector<SpherePoint> fixed_points(const RationalMap& f);

/// Fixed point of largest multiplier norm (> 1 + 1e-9); ties broken by
/// smaller |z|, then smaller argument in [0, 2pi). Throws NoRepellingFixedPoint.
SeedPoint repelling_fixed_point(const RationalMap& f, int map_index = 0);

// Exact nearest-neighbour queries in the chordal metric. Points are embedded
// on the unit sphere in R^3 and bucketed in a uniform hash of cubic cells
// (infinity lands in the north-pole cell). Queries certify the result from the
// 27 cells around the query and otherwise fall back to a k-d tree over the
// same embedded points (queries far from the set).
class SphereIndex {
public:
    SphereIndex() = default;
    explicit SphereIndex(std::span<const SpherePoint> points, double cell_size = 0.0);

    struct Hit {
        std::size_t index = std::numeric_limits<std::size_t>::max();
        double distance = std::numeric_limits<double>::infinity();
    };

    /// Nearest point; `exclude` is skipped (pass size() to exclude nothing).
    Hit nearest(const SpherePoint& z, std::size_t exclude) const;
    /// Nearest point strictly closer than `bound`; an empty Hit otherwise.
    Hit nearest_within(const SpherePoint& z, double bound) const;
    Hit nearest(const SpherePoint& z) const { return nearest(z, embedded_.size()); }
    std::size_t size() const { return embedded_.size(); }
    double cell_size() const { return cell_; }

private:
    struct Range {
        std::uint32_t begin, end;
        int ix, iy, iz;
    };
    std::int64_t key(int ix, int iy, int iz) const { return (static_cast<std::int64_t>(iz) * grid_ + iy) * grid_ + ix; }
    int cell_coord(double c) const;
    void scan(const Vec3& q, const Range& r, std::size_t exclude, Hit& best) const;
    void build_tree(std::size_t lo, std::size_t hi);
    void search_tree(const Vec3& q, std::size_t lo, std::size_t hi, std::size_t exclude, Hit& best, double& best2) const;

    std::vector<Vec3> embedded_;          // sorted by cell
    std::vector<std::uint32_t> original_;  // embedded_[k] came from points[original_[k]]
    std::vector<Range> cells_;
    std::unordered_map<std::int64_t, std::uint32_t> lookup_;  // cell key -> cells_ index
    // Implicit balanced k-d tree: range [lo, hi) splits at mid on tree_axis_[mid].
    std::vector<Vec3> tree_;
    std::vector<std::uint32_t> tree_index_;
    std::vector<std::uint8_t> tree_axis_;
    double cell_ = 1.0;
    int grid_ = 1;
};

class JuliaCloud {
public:
    explicit JuliaCloud(std::vector<SpherePoint> points);

    const std::vector<SpherePoint>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    /// Cloud resolution: 99th percentile of nearest-neighbour distances.
    double resolution() const { return resolution_; }
    const SphereIndex& index() const { return index_; }

private:
    std::vector<SpherePoint> points_;
    SphereIndex index_;
    double resolution_ = 0.0;
};

inline constexpr int kCloudBurnIn = 20;

/// Random backward orbit of `seed`: each step picks a uniform generator and a
/// uniform preimage branch; points after the burn-in are recorded.
JuliaCloud build_julia_cloud(const MultiMap& mm, const SeedPoint& seed, std::size_t target_count,
                             std::uint64_t rng_seed);

double cloud_distance(const JuliaCloud& cloud, const SpherePoint& z);

struct ConditionReport {
    enum class Kind { separation, expansion, hyperbolicity };
    Kind kind;
    bool passed = false;
    double margin = 0.0;
    std::string details;
};

const char* kind_name(ConditionReport::Kind k);

/// Pairwise chordal gap between the preimage clouds f_i^{-1}(cloud); passes
/// when the gap exceeds 4 times the cloud resolution.
ConditionReport check_separation(const MultiMap& mm, const JuliaCloud& cloud);

/// (a) backward-branch derivative growth and (b) forward critical-value
/// orbits staying away from the cloud. Both must pass.
ConditionReport check_expansion(const MultiMap& mm, const JuliaCloud& cloud, int depth, int samples,
                                std::uint64_t rng_seed = 1);

void write_cloud_csv(const JuliaCloud& cloud, std::ostream& os);
JuliaCloud read_cloud_csv(std::istream& is);

}  // namespace mfsg
