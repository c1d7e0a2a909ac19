#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <sstream>
#include <string>
#include <vector>

#include "latentclean/errors.hpp"
#include "latentclean/parallel.hpp"
#include "latentclean/util.hpp"

namespace latentclean {

struct DbscanParams {
    double epsilon = 0.0;
    int min_points = 5;

    void validate() const {
        if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be > 0");
        if (min_points < 1) throw ArgumentError("min_points must be >= 1");
    }
};

enum class PointRole : uint8_t { Core, Border, Noise };

inline constexpr int kNoiseCluster = -1;

/// Per-point cluster id (>= 0) or kNoiseCluster, plus the structural role.
/// A point's neighborhood count includes the point itself.
struct ClusterAssignment {
    std::vector<int> cluster;
    std::vector<PointRole> role;
    size_t num_clusters = 0;
};

namespace detail {

inline double dist_sq(const double* a, const double* b, size_t dim) {
    double acc = 0.0;
    for (size_t j = 0; j < dim; ++j) {
        double d = a[j] - b[j];
        acc += d * d;
    }
    return acc;
}

} // namespace detail

/// Distance from every point to its k-th nearest other point, sorted
/// ascending. Exact all-pairs computation.
inline std::vector<double> kdist_curve(const std::vector<double>& points, size_t dim, size_t k) {
    if (dim == 0) throw ArgumentError("kdist_curve: dimension must be positive");
    const size_t n = points.size() / dim;
    if (n * dim != points.size()) throw ArgumentError("kdist_curve: flat size not a multiple of dim");
    if (k < 1 || n <= k) throw ArgumentError("kdist_curve needs more points than k");
    std::vector<double> curve(n);
    parallel_for(0, n, [&](size_t i0, size_t i1) {
        std::vector<double> d2;
        for (size_t i = i0; i < i1; ++i) {
            d2.clear();
            d2.reserve(n - 1);
            const double* pi = points.data() + i * dim;
            for (size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                d2.push_back(detail::dist_sq(pi, points.data() + j * dim, dim));
            }
            std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
            curve[i] = std::sqrt(d2[k - 1]);
        }
    }, 8);
    std::sort(curve.begin(), curve.end());
    return curve;
}

struct EpsilonEstimate {
    double epsilon = 0.0;
    size_t elbow_index = 0;
    bool degenerate_flat = false; // all curve values equal; epsilon is that value
};

/// Elbow pick on a sorted k-distance curve: smooth with a centered moving
/// average of width `window`, take discrete second differences, and return
/// the curve value at their argmax. The search is restricted to the upper
/// half of the curve, where the inlier plateau turns into the outlier tail;
/// ties resolve to the smallest index.
inline EpsilonEstimate estimate_epsilon(const std::vector<double>& curve, size_t window = 11) {
    const size_t n = curve.size();
    if (window < 1) throw ArgumentError("estimate_epsilon: window must be >= 1");
    if (n <= window) throw ArgumentError("estimate_epsilon: curve must be longer than the window");
    for (size_t i = 1; i < n; ++i) {
        if (curve[i] < curve[i - 1]) throw ArgumentError("estimate_epsilon: curve must be sorted ascending");
    }
    if (curve.front() == curve.back()) {
        return {curve.front(), 0, true};
    }

    const size_t half = window / 2;
    std::vector<double> smooth(n);
    for (size_t i = 0; i < n; ++i) {
        const size_t lo = i >= half ? i - half : 0;
        const size_t hi = std::min(n - 1, i + half);
        double acc = 0.0;
        for (size_t j = lo; j <= hi; ++j) acc += curve[j];
        smooth[i] = acc / static_cast<double>(hi - lo + 1);
    }

    size_t best = 0;
    double best_d2 = -std::numeric_limits<double>::infinity();
    for (size_t i = std::max<size_t>(1, n / 2); i + 1 < n; ++i) {
        const double d2 = smooth[i + 1] - 2.0 * smooth[i] + smooth[i - 1];
        if (d2 > best_d2) {
            best_d2 = d2;
            best = i;
        }
    }
    return {curve[best], best, false};
}

/// Density clustering. Core points (>= min_points neighbors within epsilon,
/// counting themselves) seed clusters in ascending index order; density
/// reachable cores merge; a non-core point within epsilon of a core becomes
/// a border point of the first cluster that claims it; the rest is noise.
inline ClusterAssignment dbscan(const std::vector<double>& points, size_t dim, const DbscanParams& params) {
    params.validate();
    if (dim == 0) throw ArgumentError("dbscan: dimension must be positive");
    const size_t n = points.size() / dim;
    if (n * dim != points.size()) throw ArgumentError("dbscan: flat size not a multiple of dim");
    if (n == 0) throw ArgumentError("dbscan: empty input");

    const double eps_sq = params.epsilon * params.epsilon;
    std::vector<std::vector<uint32_t>> neighbors(n);
    parallel_for(0, n, [&](size_t i0, size_t i1) {
        for (size_t i = i0; i < i1; ++i) {
            const double* pi = points.data() + i * dim;
            auto& list = neighbors[i];
            for (size_t j = 0; j < n; ++j) {
                if (j != i && detail::dist_sq(pi, points.data() + j * dim, dim) <= eps_sq) {
                    list.push_back(static_cast<uint32_t>(j));
                }
            }
        }
    }, 16);

    ClusterAssignment out;
    out.cluster.assign(n, kNoiseCluster);
    out.role.assign(n, PointRole::Noise);
    std::vector<char> is_core(n, 0);
    for (size_t i = 0; i < n; ++i) {
        if (neighbors[i].size() + 1 >= static_cast<size_t>(params.min_points)) {
            is_core[i] = 1;
            out.role[i] = PointRole::Core;
        }
    }

    int next_cluster = 0;
    std::deque<uint32_t> frontier;
    for (size_t seed = 0; seed < n; ++seed) {
        if (!is_core[seed] || out.cluster[seed] != kNoiseCluster) continue;
        const int cid = next_cluster++;
        out.cluster[seed] = cid;
        frontier.clear();
        frontier.push_back(static_cast<uint32_t>(seed));
        while (!frontier.empty()) {
            const uint32_t p = frontier.front();
            frontier.pop_front();
            for (uint32_t q : neighbors[p]) {
                if (out.cluster[q] != kNoiseCluster) continue;
                out.cluster[q] = cid;
                if (is_core[q]) {
                    frontier.push_back(q);
                } else {
                    out.role[q] = PointRole::Border;
                }
            }
        }
    }
    out.num_clusters = static_cast<size_t>(next_cluster);
    return out;
}

inline const char* role_name(PointRole r) {
    switch (r) {
        case PointRole::Core: return "core";
        case PointRole::Border: return "border";
        default: return "noise";
    }
}

inline void write_kdist_csv(const std::string& path, const std::vector<double>& curve) {
    std::ostringstream ss;
    ss << "rank,distance\n";
    for (size_t i = 0; i < curve.size(); ++i) ss << i << "," << fmt_double(curve[i]) << "\n";
    write_text_file(path, ss.str());
}

} // namespace latentclean
