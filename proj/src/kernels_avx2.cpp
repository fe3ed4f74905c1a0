// AVX2 variants. Compiled unconditionally on x86-64 via per-function target
// attributes; selected at runtime only when the CPU reports AVX2.
//
// Elementwise ops mirror the scalar reference operation-for-operation
// (separate mul + add, no FMA) so results are bit-identical to scalar.
// Reductions (dot, sum_sq, matvec) use FMA and lane-parallel accumulators,
// so they may differ from scalar by summation order.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>

#include "ued/kernels.hpp"

#define UED_AVX2 __attribute__((target("avx2,fma")))

namespace ued::kernels {
namespace {

UED_AVX2 inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  __m128d sh = _mm_unpackhi_pd(lo, lo);
  return _mm_cvtsd_f64(_mm_add_sd(lo, sh));
}

UED_AVX2 double a_dot(const double* x, const double* y, int n) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

UED_AVX2 double a_sum_sq(const double* x, int n) {
  __m256d acc = _mm256_setzero_pd();
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d v = _mm256_loadu_pd(x + i);
    acc = _mm256_fmadd_pd(v, v, acc);
  }
  double s = hsum(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

UED_AVX2 void a_matvec(const double* A, const double* x, const double* b,
                       double* y, int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* row = A + static_cast<long>(r) * cols;
    double acc = a_dot(row, x, cols);
    y[r] = b ? acc + b[r] : acc;
  }
}

UED_AVX2 void a_matvec_t_acc(const double* A, const double* dy, double* xg,
                             int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* row = A + static_cast<long>(r) * cols;
    const __m256d d = _mm256_set1_pd(dy[r]);
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(xg + c);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(row + c), d));
      _mm256_storeu_pd(xg + c, acc);
    }
    for (; c < cols; ++c) xg[c] += row[c] * dy[r];
  }
}

UED_AVX2 void a_outer_acc(const double* dy, const double* x, double* dA,
                          int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* row = dA + static_cast<long>(r) * cols;
    const __m256d d = _mm256_set1_pd(dy[r]);
    int c = 0;
    for (; c + 4 <= cols; c += 4) {
      __m256d acc = _mm256_loadu_pd(row + c);
      acc = _mm256_add_pd(acc, _mm256_mul_pd(d, _mm256_loadu_pd(x + c)));
      _mm256_storeu_pd(row + c, acc);
    }
    for (; c < cols; ++c) row[c] += dy[r] * x[c];
  }
}

UED_AVX2 void a_axpy(double a, const double* x, double* y, int n) {
  const __m256d av = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d acc = _mm256_loadu_pd(y + i);
    acc = _mm256_add_pd(acc, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
    _mm256_storeu_pd(y + i, acc);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

UED_AVX2 void a_scale(double a, double* x, int n) {
  const __m256d av = _mm256_set1_pd(a);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(x + i, _mm256_mul_pd(av, _mm256_loadu_pd(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

// std::tanh in both backends; the transcendental is not worth a bespoke
// polynomial here and keeping it shared makes tanh_fwd bit-identical too.
void a_tanh_fwd(const double* z, double* a, int n) {
  for (int i = 0; i < n; ++i) a[i] = std::tanh(z[i]);
}

UED_AVX2 void a_tanh_bwd(const double* a, const double* dy, double* dz, int n) {
  const __m256d one = _mm256_set1_pd(1.0);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d av = _mm256_loadu_pd(a + i);
    __m256d g = _mm256_sub_pd(one, _mm256_mul_pd(av, av));
    _mm256_storeu_pd(dz + i, _mm256_mul_pd(_mm256_loadu_pd(dy + i), g));
  }
  for (; i < n; ++i) dz[i] = dy[i] * (1.0 - a[i] * a[i]);
}

UED_AVX2 void a_adam_step(double* p, const double* g, double* m, double* v,
                          int n, double lr, double beta1, double beta2,
                          double eps, double bc1, double bc2) {
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d ob1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d ob2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d bc1v = _mm256_set1_pd(bc1);
  const __m256d bc2v = _mm256_set1_pd(bc2);
  const __m256d epsv = _mm256_set1_pd(eps);
  const __m256d lrv = _mm256_set1_pd(lr);
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                               _mm256_mul_pd(ob1, gv));
    __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    __m256d mhat = _mm256_mul_pd(mv, bc1v);
    __m256d vhat = _mm256_mul_pd(vv, bc2v);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), epsv);
    __m256d step = _mm256_mul_pd(lrv, _mm256_div_pd(mhat, denom));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    const double mhat = m[i] * bc1;
    const double vhat = v[i] * bc2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace

const Backend* avx2_backend_if_supported() {
  if (!__builtin_cpu_supports("avx2") || !__builtin_cpu_supports("fma")) {
    return nullptr;
  }
  static const Backend b{
      "avx2",   a_matvec, a_matvec_t_acc, a_outer_acc, a_dot, a_sum_sq,
      a_axpy,   a_scale,  a_tanh_fwd,     a_tanh_bwd,  a_adam_step,
  };
  return &b;
}

}  // namespace ued::kernels

#else

#include "ued/kernels.hpp"

namespace ued::kernels {
const Backend* avx2_backend_if_supported() { return nullptr; }
}  // namespace ued::kernels

#endif
