#pragma once

#include <cstddef>
#include <vector>

// Row-major GEMM kernels that accumulate into C. Every output element is
// summed in a fixed order, so results are reproducible bit for bit.
namespace rlab::ad::kernels {

// C[m,n] += A[m,k] * B[k,n]
inline void gemm_nn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c) {
  std::size_t i = 0;
  for (; i + 1 < m; i += 2) {
    double* c0 = c + i * n;
    double* c1 = c0 + n;
    const double* a0 = a + i * k;
    const double* a1 = a0 + k;
    for (std::size_t p = 0; p < k; ++p) {
      const double x0 = a0[p];
      const double x1 = a1[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        c0[j] += x0 * brow[j];
        c1[j] += x1 * brow[j];
      }
    }
  }
  for (; i < m; ++i) {
    double* crow = c + i * n;
    const double* arow = a + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double x = arow[p];
      const double* brow = b + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += x * brow[j];
    }
  }
}

// C[m,n] += A[m,k] * B[n,k]^T
inline void gemm_nt(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c, std::vector<double>& scratch) {
  scratch.resize(k * n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t p = 0; p < k; ++p) scratch[p * n + j] = b[j * k + p];
  }
  gemm_nn(m, n, k, a, scratch.data(), c);
}

// C[m,n] += A[k,m]^T * B[k,n]
inline void gemm_tn(std::size_t m, std::size_t n, std::size_t k, const double* a, const double* b,
                    double* c) {
  for (std::size_t p = 0; p < k; ++p) {
    const double* arow = a + p * m;
    const double* brow = b + p * n;
    for (std::size_t i = 0; i < m; ++i) {
      const double x = arow[i];
      double* crow = c + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += x * brow[j];
    }
  }
}

}  // namespace rlab::ad::kernels
