#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "latentclean/dbscan.hpp"
#include "latentclean/rng.hpp"
#include "support/oracles.hpp"

using namespace latentclean;

namespace {

std::vector<double> random_points(size_t n, size_t dim, uint64_t seed, double lo = -10.0, double hi = 10.0) {
    Rng rng(seed);
    std::vector<double> pts(n * dim);
    for (auto& v : pts) v = rng.uniform(lo, hi);
    return pts;
}

bool same_partition(const ClusterAssignment& a, const oracles::RefDbscan& b) {
    if (a.cluster != b.cluster) return false;
    if (a.num_clusters != b.num_clusters) return false;
    for (size_t i = 0; i < a.role.size(); ++i) {
        if (a.role[i] != b.role[i]) return false;
    }
    return true;
}

} // namespace

TEST_CASE("kdist of three collinear points", "[kdist]") {
    std::vector<double> pts = {0.0, 1.0, 2.0};
    auto curve = kdist_curve(pts, 1, 1);
    REQUIRE(curve == std::vector<double>{1.0, 1.0, 1.0});
}

TEST_CASE("kdist on a unit grid is all ones", "[kdist]") {
    std::vector<double> pts;
    for (int y = 0; y < 4; ++y) {
        for (int x = 0; x < 4; ++x) {
            pts.push_back(static_cast<double>(x));
            pts.push_back(static_cast<double>(y));
        }
    }
    auto curve = kdist_curve(pts, 2, 1);
    for (double v : curve) REQUIRE(v == 1.0);
}

TEST_CASE("kdist matches an all-pairs brute force exactly", "[kdist][oracle]") {
    const size_t n = 200, dim = 3, k = 5;
    auto pts = random_points(n, dim, 41);
    auto curve = kdist_curve(pts, dim, k);

    std::vector<double> expect;
    for (size_t i = 0; i < n; ++i) {
        std::vector<double> ds;
        for (size_t j = 0; j < n; ++j) {
            if (j == i) continue;
            double acc = 0.0;
            for (size_t c = 0; c < dim; ++c) {
                double d = pts[i * dim + c] - pts[j * dim + c];
                acc += d * d;
            }
            ds.push_back(std::sqrt(acc));
        }
        std::sort(ds.begin(), ds.end());
        expect.push_back(ds[k - 1]);
    }
    std::sort(expect.begin(), expect.end());
    REQUIRE(curve == expect);
}

TEST_CASE("kdist argument validation", "[kdist]") {
    auto pts = random_points(5, 2, 1);
    REQUIRE_THROWS_AS(kdist_curve(pts, 2, 5), ArgumentError);
    REQUIRE_THROWS_AS(kdist_curve(pts, 0, 1), ArgumentError);
}

TEST_CASE("epsilon lands near a synthetic elbow", "[epsilon][oracle]") {
    std::vector<double> curve(100, 1.0);
    for (int j = 0; j < 20; ++j) {
        curve.push_back(1.0 + (j + 1) * (49.0 / 20.0));
    }
    EpsilonEstimate est = estimate_epsilon(curve, 11);
    REQUIRE_FALSE(est.degenerate_flat);
    INFO("elbow index " << est.elbow_index << " epsilon " << est.epsilon);
    REQUIRE(est.epsilon >= 1.0);
    REQUIRE(est.epsilon <= 5.0);
    REQUIRE(est.elbow_index >= 93);
    REQUIRE(est.elbow_index <= 107);
}

TEST_CASE("flat curve returns its value with the degenerate flag", "[epsilon]") {
    std::vector<double> curve(50, 2.0);
    EpsilonEstimate est = estimate_epsilon(curve, 11);
    REQUIRE(est.degenerate_flat);
    REQUIRE(est.epsilon == 2.0);
}

TEST_CASE("estimate_epsilon argument validation", "[epsilon]") {
    std::vector<double> tiny(5, 1.0);
    REQUIRE_THROWS_AS(estimate_epsilon(tiny, 11), ArgumentError);
    std::vector<double> unsorted = {1.0, 3.0, 2.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0};
    REQUIRE_THROWS_AS(estimate_epsilon(unsorted, 3), ArgumentError);
}

TEST_CASE("two tight blobs and one stray point", "[dbscan]") {
    Rng rng(31);
    std::vector<double> pts;
    for (int i = 0; i < 20; ++i) {
        pts.push_back(rng.uniform(-1.0, 1.0));
        pts.push_back(rng.uniform(-1.0, 1.0));
    }
    for (int i = 0; i < 20; ++i) {
        pts.push_back(100.0 + rng.uniform(-1.0, 1.0));
        pts.push_back(rng.uniform(-1.0, 1.0));
    }
    pts.push_back(50.0);
    pts.push_back(500.0);

    ClusterAssignment out = dbscan(pts, 2, {5.0, 5});
    REQUIRE(out.num_clusters == 2);
    for (int i = 0; i < 20; ++i) REQUIRE(out.cluster[i] == 0);
    for (int i = 20; i < 40; ++i) REQUIRE(out.cluster[i] == 1);
    REQUIRE(out.cluster[40] == kNoiseCluster);
    REQUIRE(out.role[40] == PointRole::Noise);
}

TEST_CASE("coincident points form one all-core cluster", "[dbscan]") {
    std::vector<double> pts(12 * 2, 3.5);
    ClusterAssignment out = dbscan(pts, 2, {0.5, 5});
    REQUIRE(out.num_clusters == 1);
    for (size_t i = 0; i < 12; ++i) {
        REQUIRE(out.cluster[i] == 0);
        REQUIRE(out.role[i] == PointRole::Core);
    }
}

TEST_CASE("dbscan matches the quadratic reference on random instances", "[dbscan][oracle]") {
    Rng meta(92);
    for (int trial = 0; trial < 25; ++trial) {
        const size_t n = 30 + meta.below(121);
        const size_t dim = 2 + meta.below(3);
        auto pts = random_points(n, dim, 1000 + trial, -5.0, 5.0);
        const double eps = meta.uniform(0.5, 4.0);
        const int min_points = static_cast<int>(2 + meta.below(7));
        ClusterAssignment mine = dbscan(pts, dim, {eps, min_points});
        auto ref = oracles::reference_dbscan(pts, dim, eps, min_points);
        INFO("trial " << trial << " n " << n << " dim " << dim << " eps " << eps << " M " << min_points);
        REQUIRE(same_partition(mine, ref));
    }
}

TEST_CASE("noise predicate is exact", "[dbscan]") {
    auto pts = random_points(120, 2, 55, -3.0, 3.0);
    const double eps = 0.8;
    const int m = 4;
    ClusterAssignment out = dbscan(pts, 2, {eps, m});
    auto d2 = [&](size_t a, size_t b) {
        double dx = pts[a * 2] - pts[b * 2], dy = pts[a * 2 + 1] - pts[b * 2 + 1];
        return dx * dx + dy * dy;
    };
    for (size_t i = 0; i < 120; ++i) {
        int within = 1;
        bool near_core = false;
        for (size_t j = 0; j < 120; ++j) {
            if (j == i || d2(i, j) > eps * eps) continue;
            ++within;
            if (out.role[j] == PointRole::Core) near_core = true;
        }
        const bool is_core = within >= m;
        const bool is_noise = !is_core && !near_core;
        REQUIRE((out.cluster[i] == kNoiseCluster) == is_noise);
        REQUIRE((out.role[i] == PointRole::Core) == is_core);
    }
}

TEST_CASE("assignments are invariant under translation and rotation", "[dbscan]") {
    auto pts = random_points(80, 3, 66, -4.0, 4.0);
    ClusterAssignment base = dbscan(pts, 3, {1.5, 4});

    // Rotate through two Givens planes, then translate.
    const double a = 0.7, b = 1.1;
    std::vector<double> moved(pts.size());
    for (size_t i = 0; i < 80; ++i) {
        double x = pts[i * 3], y = pts[i * 3 + 1], z = pts[i * 3 + 2];
        double x1 = std::cos(a) * x - std::sin(a) * y;
        double y1 = std::sin(a) * x + std::cos(a) * y;
        double y2 = std::cos(b) * y1 - std::sin(b) * z;
        double z2 = std::sin(b) * y1 + std::cos(b) * z;
        moved[i * 3] = x1 + 42.0;
        moved[i * 3 + 1] = y2 - 17.0;
        moved[i * 3 + 2] = z2 + 3.0;
    }
    ClusterAssignment after = dbscan(moved, 3, {1.5, 4});
    REQUIRE(after.cluster == base.cluster);
    for (size_t i = 0; i < 80; ++i) REQUIRE(after.role[i] == base.role[i]);
}

TEST_CASE("dbscan is deterministic and monotone in epsilon", "[dbscan]") {
    auto pts = random_points(150, 2, 77, -6.0, 6.0);
    ClusterAssignment a = dbscan(pts, 2, {1.0, 5});
    ClusterAssignment b = dbscan(pts, 2, {1.0, 5});
    REQUIRE(a.cluster == b.cluster);

    size_t prev_noise = SIZE_MAX;
    for (double eps : {0.3, 0.6, 1.0, 1.8, 3.0, 6.0}) {
        ClusterAssignment out = dbscan(pts, 2, {eps, 5});
        size_t noise = 0;
        for (int c : out.cluster) noise += c == kNoiseCluster;
        REQUIRE(noise <= prev_noise);
        prev_noise = noise;
    }
}

TEST_CASE("dbscan argument validation", "[dbscan]") {
    std::vector<double> pts = {0.0, 0.0};
    REQUIRE_THROWS_AS(dbscan(pts, 2, {0.0, 5}), ArgumentError);
    REQUIRE_THROWS_AS(dbscan(pts, 2, {1.0, 0}), ArgumentError);
    REQUIRE_THROWS_AS(dbscan({}, 2, {1.0, 5}), ArgumentError);
}
