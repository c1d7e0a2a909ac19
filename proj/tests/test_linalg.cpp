#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "latentclean/linalg.hpp"
#include "latentclean/rng.hpp"

using namespace latentclean;

namespace {

MatrixD random_matrix(size_t r, size_t c, uint64_t seed, double lo = -1.0, double hi = 1.0) {
    Rng rng(seed);
    MatrixD m(r, c);
    for (auto& v : m.a) v = rng.uniform(lo, hi);
    return m;
}

/// Independent two-loop covariance for the oracle comparison.
MatrixD reference_covariance(const MatrixD& s) {
    const size_t k = s.rows, x = s.cols;
    std::vector<double> mean(x, 0.0);
    for (size_t r = 0; r < k; ++r) {
        for (size_t c = 0; c < x; ++c) mean[c] += s.at(r, c) / static_cast<double>(k);
    }
    MatrixD cov(x, x);
    for (size_t i = 0; i < x; ++i) {
        for (size_t j = 0; j < x; ++j) {
            double acc = 0.0;
            for (size_t r = 0; r < k; ++r) acc += (s.at(r, i) - mean[i]) * (s.at(r, j) - mean[j]);
            cov.at(i, j) = acc / static_cast<double>(k);
        }
    }
    return cov;
}

} // namespace

TEST_CASE("covariance analytic cases", "[linalg]") {
    MatrixD same(3, 2);
    for (size_t r = 0; r < 3; ++r) {
        same.at(r, 0) = 4.0;
        same.at(r, 1) = -1.0;
    }
    MatrixD cov = covariance(same);
    for (double v : cov.a) REQUIRE(v == 0.0); // identical rows

    MatrixD two(2, 2);
    two.at(0, 0) = 0.0;
    two.at(1, 0) = 2.0;
    MatrixD cov2 = covariance(two);
    REQUIRE(cov2.at(0, 0) == Catch::Approx(1.0));
    REQUIRE(cov2.at(0, 1) == 0.0);
    REQUIRE(cov2.at(1, 1) == 0.0);

    MatrixD one(1, 2);
    REQUIRE_THROWS_AS(covariance(one), ArgumentError);
}

TEST_CASE("covariance matches the two-loop reference", "[linalg][oracle]") {
    MatrixD s = random_matrix(20, 5, 71);
    MatrixD cov = covariance(s);
    MatrixD expect = reference_covariance(s);
    REQUIRE(cov.rows == 5);
    for (size_t i = 0; i < cov.a.size(); ++i) {
        REQUIRE(cov.a[i] == Catch::Approx(expect.a[i]).margin(1e-8));
    }
}

TEST_CASE("variance along one axis gives that axis as first eigenvector", "[linalg]") {
    MatrixD two(2, 3);
    two.at(0, 0) = -1.0;
    two.at(1, 0) = 1.0;
    EigenBasis basis = eigen_top_n(two, 1);
    REQUIRE(std::abs(basis.eigenvectors[0][0]) == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(basis.eigenvectors[0][0] > 0.0); // sign convention
    REQUIRE(std::abs(basis.eigenvectors[0][1]) < 1e-12);
    REQUIRE(basis.eigenvalues[0] == Catch::Approx(1.0));
}

TEST_CASE("full eigendecomposition reconstructs the covariance", "[linalg][oracle]") {
    MatrixD s = random_matrix(10, 6, 72);
    EigenBasis basis = eigen_top_n(s, 6);
    MatrixD cov = covariance(s);
    for (size_t i = 0; i < 6; ++i) {
        for (size_t j = 0; j < 6; ++j) {
            double acc = 0.0;
            for (size_t e = 0; e < 6; ++e) {
                acc += basis.eigenvalues[e] * basis.eigenvectors[e][i] * basis.eigenvectors[e][j];
            }
            REQUIRE(acc == Catch::Approx(cov.at(i, j)).margin(1e-6));
        }
    }
}

TEST_CASE("eigen properties: residual, orthonormality, descending order", "[linalg]") {
    for (uint64_t seed : {73u, 74u, 75u}) {
        MatrixD s = random_matrix(12, 7, seed);
        EigenBasis basis = eigen_top_n(s, 5);
        MatrixD cov = covariance(s);
        for (size_t e = 0; e < basis.eigenvectors.size(); ++e) {
            const auto& v = basis.eigenvectors[e];
            REQUIRE(basis.eigenvalues[e] >= 0.0);
            if (e > 0) REQUIRE(basis.eigenvalues[e] <= basis.eigenvalues[e - 1]);
            double norm = 0.0;
            for (double c : v) norm += c * c;
            REQUIRE(std::abs(std::sqrt(norm) - 1.0) <= 1e-6);
            double resid = 0.0;
            for (size_t i = 0; i < 7; ++i) {
                double sv = 0.0;
                for (size_t j = 0; j < 7; ++j) sv += cov.at(i, j) * v[j];
                double d = sv - basis.eigenvalues[e] * v[i];
                resid += d * d;
            }
            REQUIRE(std::sqrt(resid) <= 1e-5);
            for (size_t f = 0; f < e; ++f) {
                double dot = 0.0;
                for (size_t i = 0; i < 7; ++i) dot += v[i] * basis.eigenvectors[f][i];
                REQUIRE(std::abs(dot) <= 1e-6);
            }
        }
    }
}

TEST_CASE("small-system route agrees with direct decomposition when k < x", "[linalg][oracle]") {
    MatrixD s = random_matrix(5, 100, 76);
    EigenBasis small = eigen_top_n(s, 4); // k < x: Gram route

    // Direct route: eigendecompose the full covariance.
    std::vector<double> w;
    MatrixD V;
    detail::jacobi_eigen(covariance(s), w, V);
    std::sort(w.begin(), w.end(), std::greater<>());

    for (size_t e = 0; e < 4; ++e) {
        REQUIRE(small.eigenvalues[e] == Catch::Approx(w[e]).margin(1e-6));
    }

    // Residual against the full covariance for the lifted vectors.
    MatrixD cov = covariance(s);
    for (size_t e = 0; e < 4; ++e) {
        const auto& v = small.eigenvectors[e];
        double resid = 0.0;
        for (size_t i = 0; i < 100; ++i) {
            double sv = 0.0;
            for (size_t j = 0; j < 100; ++j) sv += cov.at(i, j) * v[j];
            double d = sv - small.eigenvalues[e] * v[i];
            resid += d * d;
        }
        REQUIRE(std::sqrt(resid) <= 1e-5);
    }
}

TEST_CASE("eigen_top_n argument validation", "[linalg]") {
    MatrixD s = random_matrix(5, 10, 77);
    REQUIRE_THROWS_AS(eigen_top_n(s, 6), ArgumentError);  // n > min(k, x)
    REQUIRE_THROWS_AS(eigen_top_n(s, 0), ArgumentError);
    MatrixD one = random_matrix(1, 10, 78);
    REQUIRE_THROWS_AS(eigen_top_n(one, 1), ArgumentError);
}

TEST_CASE("pca_project analytic cases", "[linalg]") {
    EigenBasis basis;
    basis.mean = {1.0, 2.0, 3.0};
    basis.eigenvectors = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    basis.eigenvalues = {3, 2, 1};

    MatrixD pts(2, 3);
    pts.at(0, 0) = 1.0;
    pts.at(0, 1) = 2.0;
    pts.at(0, 2) = 3.0; // equals the mean
    pts.at(1, 0) = 2.5;
    pts.at(1, 1) = 2.0;
    pts.at(1, 2) = 4.0;
    MatrixD proj = pca_project(pts, basis, 2);
    REQUIRE(proj.at(0, 0) == 0.0);
    REQUIRE(proj.at(0, 1) == 0.0);
    REQUIRE(proj.at(1, 0) == Catch::Approx(1.5)); // truncation to first coords
    REQUIRE(proj.at(1, 1) == Catch::Approx(0.0));

    MatrixD wrong(1, 2);
    REQUIRE_THROWS_AS(pca_project(wrong, basis, 2), ShapeError);
    REQUIRE_THROWS_AS(pca_project(pts, basis, 4), ArgumentError);
}

TEST_CASE("full-rank orthonormal projection preserves pairwise distances", "[linalg][oracle]") {
    MatrixD s = random_matrix(15, 6, 79);
    EigenBasis basis = eigen_top_n(s, 6);
    MatrixD proj = pca_project(s, basis, 6);
    for (size_t a = 0; a < s.rows; ++a) {
        for (size_t b = a + 1; b < s.rows; ++b) {
            double orig = 0.0, after = 0.0;
            for (size_t c = 0; c < 6; ++c) {
                double d = s.at(a, c) - s.at(b, c);
                orig += d * d;
                double e = proj.at(a, c) - proj.at(b, c);
                after += e * e;
            }
            REQUIRE(std::sqrt(after) == Catch::Approx(std::sqrt(orig)).margin(1e-6));
        }
    }
}

TEST_CASE("latent scatter csv has the documented columns", "[linalg]") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "latentclean_linalg_tests";
    fs::create_directories(dir);

    std::vector<LatentPoint> latents(12);
    Rng rng(5);
    for (size_t i = 0; i < latents.size(); ++i) {
        latents[i].sample_index = i;
        latents[i].label = static_cast<int>(i % 3);
        latents[i].mu.resize(6);
        latents[i].sigma.assign(6, 1.0f);
        for (auto& v : latents[i].mu) v = static_cast<float>(rng.uniform(-2.0, 2.0));
    }
    NoiseLedger ledger;
    ledger.flipped_indices.insert(4);
    ledger.original_label[4] = 0;
    ledger.assigned_label[4] = 1;

    const std::string path = (dir / "scatter.csv").string();
    write_latent_scatter_csv(path, latents, &ledger);
    std::string text = read_text_file(path);
    REQUIRE(text.rfind("sample_index,label,is_flipped,pc1,pc2\n", 0) == 0);
    REQUIRE(std::count(text.begin(), text.end(), '\n') == 13);
    REQUIRE(text.find("4,1,1,") != std::string::npos);
}
