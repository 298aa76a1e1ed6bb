// AVX2/FMA variants. This translation unit is compiled with -mavx2 -mfma and
// must only be entered after a runtime CPU check (see dispatch.cpp).

#include "gamevo/kernels.hpp"

#include <immintrin.h>

namespace gamevo::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double *a, const double *b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    s += a[i] * b[i];
  }
  return s;
}

void axpy_avx2(double alpha, const double *x, double *y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) {
    y[i] += alpha * x[i];
  }
}

double squared_distance_avx2(const double *a, const double *b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    const __m256d d1 = _mm256_sub_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
    acc1 = _mm256_fmadd_pd(d1, d1, acc1);
  }
  for (; i + 4 <= n; i += 4) {
    const __m256d d0 = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
    acc0 = _mm256_fmadd_pd(d0, d0, acc0);
  }
  double s = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

void hadamard_avx2(const double *a, const double *b, double *out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  }
  for (; i < n; ++i) {
    out[i] = a[i] * b[i];
  }
}

// Four dot products sharing the left operand; one pass over `a`.
void dot4_avx2(const double *a, const double *b0, const double *b1, const double *b2,
               const double *b3, std::size_t n, double *out) {
  __m256d s0 = _mm256_setzero_pd();
  __m256d s1 = _mm256_setzero_pd();
  __m256d s2 = _mm256_setzero_pd();
  __m256d s3 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d va = _mm256_loadu_pd(a + i);
    s0 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b0 + i), s0);
    s1 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b1 + i), s1);
    s2 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b2 + i), s2);
    s3 = _mm256_fmadd_pd(va, _mm256_loadu_pd(b3 + i), s3);
  }
  double r0 = hsum(s0), r1 = hsum(s1), r2 = hsum(s2), r3 = hsum(s3);
  for (; i < n; ++i) {
    r0 += a[i] * b0[i];
    r1 += a[i] * b1[i];
    r2 += a[i] * b2[i];
    r3 += a[i] * b3[i];
  }
  out[0] = r0;
  out[1] = r1;
  out[2] = r2;
  out[3] = r3;
}

void gram_avx2(const double *x, std::size_t n, std::size_t p, double *out) {
  for (std::size_t j = 0; j < p; ++j) {
    const double *xj = x + j * n;
    std::size_t k = 0;
    double r[4];
    for (; k + 4 <= j + 1; k += 4) {
      dot4_avx2(xj, x + k * n, x + (k + 1) * n, x + (k + 2) * n, x + (k + 3) * n, n, r);
      for (std::size_t t = 0; t < 4; ++t) {
        out[j * p + k + t] = r[t];
        out[(k + t) * p + j] = r[t];
      }
    }
    for (; k <= j; ++k) {
      const double v = dot_avx2(xj, x + k * n, n);
      out[j * p + k] = v;
      out[k * p + j] = v;
    }
  }
}

void gemv_avx2(const double *x, std::size_t n, std::size_t p, const double *beta, double *out) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_setzero_pd();
    for (std::size_t j = 0; j < p; ++j) {
      acc = _mm256_fmadd_pd(_mm256_set1_pd(beta[j]), _mm256_loadu_pd(x + j * n + i), acc);
    }
    _mm256_storeu_pd(out + i, acc);
  }
  for (; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < p; ++j) {
      s += beta[j] * x[j * n + i];
    }
    out[i] = s;
  }
}

void gemv_t_avx2(const double *x, std::size_t n, std::size_t p, const double *v, double *out) {
  std::size_t j = 0;
  for (; j + 4 <= p; j += 4) {
    dot4_avx2(v, x + j * n, x + (j + 1) * n, x + (j + 2) * n, x + (j + 3) * n, n, out + j);
  }
  for (; j < p; ++j) {
    out[j] = dot_avx2(x + j * n, v, n);
  }
}

} // namespace

const KernelTable &avx2_kernels() {
  static const KernelTable table{
      "avx2",         dot_avx2,  axpy_avx2, squared_distance_avx2,
      hadamard_avx2,  gram_avx2, gemv_avx2, gemv_t_avx2,
  };
  return table;
}

} // namespace gamevo::kernels
