#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "latentclean/cae.hpp"
#include "latentclean/dataset.hpp"
#include "latentclean/errors.hpp"
#include "latentclean/util.hpp"

namespace latentclean {

/// Row-major double matrix; rows are samples throughout this module.
struct MatrixD {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> a;

    MatrixD() = default;
    MatrixD(size_t r, size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return a[r * cols + c]; }
    double at(size_t r, size_t c) const { return a[r * cols + c]; }
    const double* row(size_t r) const { return a.data() + r * cols; }
    double* row(size_t r) { return a.data() + r * cols; }
};

/// Top-n eigenpairs of a sample covariance, plus the mean they were computed
/// around. Eigenvalues descend; eigenvectors are unit length and mutually
/// orthogonal.
struct EigenBasis {
    std::vector<double> mean;                    // length x
    std::vector<std::vector<double>> eigenvectors; // n vectors, each length x
    std::vector<double> eigenvalues;             // n values, descending
};

inline std::vector<double> mean_vector(const MatrixD& samples) {
    std::vector<double> m(samples.cols, 0.0);
    for (size_t r = 0; r < samples.rows; ++r) {
        const double* row = samples.row(r);
        for (size_t c = 0; c < samples.cols; ++c) m[c] += row[c];
    }
    for (double& v : m) v /= static_cast<double>(samples.rows);
    return m;
}

/// Population covariance (divisor N = number of samples).
inline MatrixD covariance(const MatrixD& samples) {
    if (samples.rows < 2) throw ArgumentError("covariance needs at least 2 samples");
    const size_t k = samples.rows, x = samples.cols;
    std::vector<double> mean = mean_vector(samples);
    MatrixD cov(x, x);
    std::vector<double> centered(x);
    for (size_t r = 0; r < k; ++r) {
        const double* row = samples.row(r);
        for (size_t c = 0; c < x; ++c) centered[c] = row[c] - mean[c];
        for (size_t i = 0; i < x; ++i) {
            const double ci = centered[i];
            double* out = cov.row(i);
            for (size_t j = i; j < x; ++j) out[j] += ci * centered[j];
        }
    }
    const double inv = 1.0 / static_cast<double>(k);
    for (size_t i = 0; i < x; ++i) {
        for (size_t j = i; j < x; ++j) {
            double v = cov.at(i, j) * inv;
            cov.at(i, j) = v;
            cov.at(j, i) = v;
        }
    }
    return cov;
}

namespace detail {

/// Cyclic Jacobi rotations for a symmetric matrix. Returns eigenvalues and
/// the column eigenvector matrix V (A = V diag(w) V^T). Stops when the
/// off-diagonal Frobenius norm falls under tol; throws NumericError if 100
/// sweeps are not enough.
inline void jacobi_eigen(MatrixD A, std::vector<double>& w, MatrixD& V,
                         double tol = 1e-10, int max_sweeps = 100) {
    const size_t n = A.rows;
    if (n != A.cols) throw ShapeError("jacobi_eigen: matrix must be square");
    V = MatrixD(n, n);
    for (size_t i = 0; i < n; ++i) V.at(i, i) = 1.0;

    double scale = 0.0;
    for (size_t i = 0; i < n; ++i) scale = std::max(scale, std::abs(A.at(i, i)));
    scale = std::max(scale, 1.0);

    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double off = 0.0;
        for (size_t i = 0; i < n; ++i) {
            for (size_t j = i + 1; j < n; ++j) off += A.at(i, j) * A.at(i, j);
        }
        if (std::sqrt(2.0 * off) <= tol * scale) {
            w.resize(n);
            for (size_t i = 0; i < n; ++i) w[i] = A.at(i, i);
            return;
        }
        for (size_t p = 0; p < n; ++p) {
            for (size_t q = p + 1; q < n; ++q) {
                const double apq = A.at(p, q);
                if (apq == 0.0) continue;
                const double app = A.at(p, p), aqq = A.at(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (size_t i = 0; i < n; ++i) {
                    const double aip = A.at(i, p), aiq = A.at(i, q);
                    A.at(i, p) = c * aip - s * aiq;
                    A.at(i, q) = s * aip + c * aiq;
                }
                for (size_t i = 0; i < n; ++i) {
                    const double api = A.at(p, i), aqi = A.at(q, i);
                    A.at(p, i) = c * api - s * aqi;
                    A.at(q, i) = s * api + c * aqi;
                }
                for (size_t i = 0; i < n; ++i) {
                    const double vip = V.at(i, p), viq = V.at(i, q);
                    V.at(i, p) = c * vip - s * viq;
                    V.at(i, q) = s * vip + c * viq;
                }
            }
        }
    }
    throw NumericError("jacobi_eigen: no convergence within 100 sweeps");
}

/// Largest-magnitude component made nonnegative, for reproducible outputs.
inline void fix_sign(std::vector<double>& v) {
    size_t arg = 0;
    double best = 0.0;
    for (size_t i = 0; i < v.size(); ++i) {
        if (std::abs(v[i]) > best) {
            best = std::abs(v[i]);
            arg = i;
        }
    }
    if (v[arg] < 0.0) {
        for (double& x : v) x = -x;
    }
}

} // namespace detail

/// Top-n eigenpairs of the sample covariance. When there are fewer samples
/// than dimensions the k x k Gram system is solved instead and each small
/// eigenvector u is lifted to the full space as centered^T u (then
/// normalized); Gram eigenvalues divide by k to match the covariance scale.
inline EigenBasis eigen_top_n(const MatrixD& samples, size_t n) {
    const size_t k = samples.rows, x = samples.cols;
    if (k < 2) throw ArgumentError("eigen_top_n needs at least 2 samples");
    if (n < 1 || n > std::min(k, x)) {
        throw ArgumentError("eigen_top_n: n must be in [1, min(samples, dims)]");
    }
    EigenBasis basis;
    basis.mean = mean_vector(samples);

    MatrixD centered(k, x);
    for (size_t r = 0; r < k; ++r) {
        for (size_t c = 0; c < x; ++c) centered.at(r, c) = samples.at(r, c) - basis.mean[c];
    }

    std::vector<double> w;
    MatrixD V;
    std::vector<std::pair<double, size_t>> ranked;

    if (k < x) {
        MatrixD gram(k, k);
        for (size_t i = 0; i < k; ++i) {
            for (size_t j = i; j < k; ++j) {
                double dot = 0.0;
                const double* ri = centered.row(i);
                const double* rj = centered.row(j);
                for (size_t c = 0; c < x; ++c) dot += ri[c] * rj[c];
                gram.at(i, j) = dot;
                gram.at(j, i) = dot;
            }
        }
        detail::jacobi_eigen(std::move(gram), w, V);
        for (size_t i = 0; i < k; ++i) ranked.push_back({w[i] / static_cast<double>(k), i});
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (size_t r = 0; r < n; ++r) {
            auto [lambda, col] = ranked[r];
            if (lambda < -1e-8) throw NumericError("eigen_top_n: negative eigenvalue beyond tolerance");
            lambda = std::max(lambda, 0.0);
            std::vector<double> v(x, 0.0);
            for (size_t i = 0; i < k; ++i) {
                const double ui = V.at(i, col);
                if (ui == 0.0) continue;
                const double* row = centered.row(i);
                for (size_t c = 0; c < x; ++c) v[c] += ui * row[c];
            }
            double norm = std::sqrt(std::inner_product(v.begin(), v.end(), v.begin(), 0.0));
            if (!(norm > 0.0)) {
                throw NumericError("eigen_top_n: requested component has (numerically) zero variance");
            }
            for (double& e : v) e /= norm;
            detail::fix_sign(v);
            basis.eigenvectors.push_back(std::move(v));
            basis.eigenvalues.push_back(lambda);
        }
    } else {
        detail::jacobi_eigen(covariance(samples), w, V);
        for (size_t i = 0; i < x; ++i) ranked.push_back({w[i], i});
        std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
            return a.first != b.first ? a.first > b.first : a.second < b.second;
        });
        for (size_t r = 0; r < n; ++r) {
            auto [lambda, col] = ranked[r];
            if (lambda < -1e-8) throw NumericError("eigen_top_n: negative eigenvalue beyond tolerance");
            lambda = std::max(lambda, 0.0);
            std::vector<double> v(x);
            for (size_t i = 0; i < x; ++i) v[i] = V.at(i, col);
            detail::fix_sign(v);
            basis.eigenvectors.push_back(std::move(v));
            basis.eigenvalues.push_back(lambda);
        }
    }
    return basis;
}

/// Projects points onto the first n basis vectors: out[i][j] = (p_i - M) . v_j
inline MatrixD pca_project(const MatrixD& points, const EigenBasis& basis, size_t n) {
    if (n > basis.eigenvectors.size()) throw ArgumentError("pca_project: n exceeds basis size");
    if (points.cols != basis.mean.size()) {
        throw ShapeError("pca_project: point dimension does not match basis");
    }
    MatrixD out(points.rows, n);
    std::vector<double> centered(points.cols);
    for (size_t r = 0; r < points.rows; ++r) {
        const double* row = points.row(r);
        for (size_t c = 0; c < points.cols; ++c) centered[c] = row[c] - basis.mean[c];
        for (size_t j = 0; j < n; ++j) {
            const auto& v = basis.eigenvectors[j];
            double dot = 0.0;
            for (size_t c = 0; c < points.cols; ++c) dot += centered[c] * v[c];
            out.at(r, j) = dot;
        }
    }
    return out;
}

/// Latent mu vectors as a double matrix, one row per sample.
inline MatrixD latents_to_matrix(const std::vector<LatentPoint>& latents) {
    if (latents.empty()) return {};
    MatrixD m(latents.size(), latents.front().mu.size());
    for (size_t i = 0; i < latents.size(); ++i) {
        if (latents[i].mu.size() != m.cols) throw ShapeError("latent points disagree in dimension");
        for (size_t j = 0; j < m.cols; ++j) m.at(i, j) = static_cast<double>(latents[i].mu[j]);
    }
    return m;
}

/// 2-D latent scatter for plotting: sample_index,label,is_flipped,pc1,pc2.
/// is_flipped is 0/1 when a ledger is supplied, "na" otherwise.
inline void write_latent_scatter_csv(const std::string& path, const std::vector<LatentPoint>& latents,
                                     const NoiseLedger* ledger) {
    MatrixD m = latents_to_matrix(latents);
    const size_t n_comp = std::min<size_t>(2, m.cols);
    EigenBasis basis = eigen_top_n(m, n_comp);
    MatrixD proj = pca_project(m, basis, n_comp);
    std::ostringstream ss;
    ss << "sample_index,label,is_flipped,pc1,pc2\n";
    for (size_t i = 0; i < latents.size(); ++i) {
        ss << latents[i].sample_index << "," << latents[i].label << ",";
        if (ledger) {
            ss << (ledger->flipped_indices.count(latents[i].sample_index) ? 1 : 0);
        } else {
            ss << "na";
        }
        ss << "," << fmt_double(proj.at(i, 0)) << ","
           << fmt_double(n_comp > 1 ? proj.at(i, 1) : 0.0) << "\n";
    }
    write_text_file(path, ss.str());
}

} // namespace latentclean
