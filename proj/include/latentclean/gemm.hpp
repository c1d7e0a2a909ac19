#pragma once

#include <cstddef>

#include "latentclean/parallel.hpp"

namespace latentclean {

// Minimal deterministic matrix kernels. Every output element is produced by
// one fixed sequential reduction (ascending k / ascending r), so results do
// not depend on the worker count. Parallelism is over output rows only.

/// C[M,N] (+)= A[M,K] * B[K,N]
template <typename T>
void gemm_nn(size_t M, size_t K, size_t N, const T* A, const T* B, T* C, bool accumulate) {
    parallel_for(0, M, [&](size_t m0, size_t m1) {
        for (size_t m = m0; m < m1; ++m) {
            T* __restrict c = C + m * N;
            if (!accumulate) {
                for (size_t n = 0; n < N; ++n) c[n] = T(0);
            }
            const T* a = A + m * K;
            for (size_t k = 0; k < K; ++k) {
                const T ak = a[k];
                const T* __restrict b = B + k * N;
                for (size_t n = 0; n < N; ++n) c[n] += ak * b[n];
            }
        }
    }, 16384 / (N ? N : 1) + 1);
}

/// C[M,N] (+)= A[M,K] * B[N,K]^T   (each element is a contiguous dot product)
template <typename T>
void gemm_nt(size_t M, size_t K, size_t N, const T* A, const T* B, T* C, bool accumulate) {
    parallel_for(0, M, [&](size_t m0, size_t m1) {
        for (size_t m = m0; m < m1; ++m) {
            const T* a = A + m * K;
            T* c = C + m * N;
            for (size_t n = 0; n < N; ++n) {
                const T* b = B + n * K;
                T acc = T(0);
                for (size_t k = 0; k < K; ++k) acc += a[k] * b[k];
                c[n] = accumulate ? c[n] + acc : acc;
            }
        }
    }, 16384 / (N ? N : 1) + 1);
}

/// C[M,N] (+)= A[R,M]^T * B[R,N]
///
/// Ascending-r accumulation per element. Single-worker path streams both
/// inputs row by row (outer-product accumulation into C, which stays hot);
/// multi-worker path splits C rows, keeping the same per-element order.
template <typename T>
void gemm_tn(size_t R, size_t M, size_t N, const T* A, const T* B, T* C, bool accumulate) {
    if (!accumulate) {
        for (size_t i = 0; i < M * N; ++i) C[i] = T(0);
    }
    if (max_threads() <= 1 || M < 2) {
        for (size_t r = 0; r < R; ++r) {
            const T* a = A + r * M;
            const T* __restrict b = B + r * N;
            for (size_t m = 0; m < M; ++m) {
                const T am = a[m];
                if (am == T(0)) continue;
                T* __restrict c = C + m * N;
                for (size_t n = 0; n < N; ++n) c[n] += am * b[n];
            }
        }
        return;
    }
    parallel_for(0, M, [&](size_t m0, size_t m1) {
        for (size_t r = 0; r < R; ++r) {
            const T* a = A + r * M;
            const T* __restrict b = B + r * N;
            for (size_t m = m0; m < m1; ++m) {
                const T am = a[m];
                if (am == T(0)) continue;
                T* __restrict c = C + m * N;
                for (size_t n = 0; n < N; ++n) c[n] += am * b[n];
            }
        }
    }, 8);
}

} // namespace latentclean
