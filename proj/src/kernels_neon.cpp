// NEON (aarch64) variants; same contract as the AVX2 file: elementwise ops
// mirror scalar exactly, reductions use 2-lane accumulators.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cmath>

#include "ued/kernels.hpp"

namespace ued::kernels {
namespace {

double n_dot(const double* x, const double* y, int n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    acc = vfmaq_f64(acc, vld1q_f64(x + i), vld1q_f64(y + i));
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * y[i];
  return s;
}

double n_sum_sq(const double* x, int n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t v = vld1q_f64(x + i);
    acc = vfmaq_f64(acc, v, v);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += x[i] * x[i];
  return s;
}

void n_matvec(const double* A, const double* x, const double* b, double* y,
              int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* row = A + static_cast<long>(r) * cols;
    double acc = n_dot(row, x, cols);
    y[r] = b ? acc + b[r] : acc;
  }
}

void n_matvec_t_acc(const double* A, const double* dy, double* xg,
                    int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* row = A + static_cast<long>(r) * cols;
    const float64x2_t d = vdupq_n_f64(dy[r]);
    int c = 0;
    for (; c + 2 <= cols; c += 2) {
      float64x2_t acc = vld1q_f64(xg + c);
      acc = vaddq_f64(acc, vmulq_f64(vld1q_f64(row + c), d));
      vst1q_f64(xg + c, acc);
    }
    for (; c < cols; ++c) xg[c] += row[c] * dy[r];
  }
}

void n_outer_acc(const double* dy, const double* x, double* dA,
                 int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* row = dA + static_cast<long>(r) * cols;
    const float64x2_t d = vdupq_n_f64(dy[r]);
    int c = 0;
    for (; c + 2 <= cols; c += 2) {
      float64x2_t acc = vld1q_f64(row + c);
      acc = vaddq_f64(acc, vmulq_f64(d, vld1q_f64(x + c)));
      vst1q_f64(row + c, acc);
    }
    for (; c < cols; ++c) row[c] += dy[r] * x[c];
  }
}

void n_axpy(double a, const double* x, double* y, int n) {
  const float64x2_t av = vdupq_n_f64(a);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t acc = vld1q_f64(y + i);
    acc = vaddq_f64(acc, vmulq_f64(av, vld1q_f64(x + i)));
    vst1q_f64(y + i, acc);
  }
  for (; i < n; ++i) y[i] += a * x[i];
}

void n_scale(double a, double* x, int n) {
  const float64x2_t av = vdupq_n_f64(a);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1q_f64(x + i, vmulq_f64(av, vld1q_f64(x + i)));
  }
  for (; i < n; ++i) x[i] *= a;
}

void n_tanh_fwd(const double* z, double* a, int n) {
  for (int i = 0; i < n; ++i) a[i] = std::tanh(z[i]);
}

void n_tanh_bwd(const double* a, const double* dy, double* dz, int n) {
  const float64x2_t one = vdupq_n_f64(1.0);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t av = vld1q_f64(a + i);
    float64x2_t g = vsubq_f64(one, vmulq_f64(av, av));
    vst1q_f64(dz + i, vmulq_f64(vld1q_f64(dy + i), g));
  }
  for (; i < n; ++i) dz[i] = dy[i] * (1.0 - a[i] * a[i]);
}

void n_adam_step(double* p, const double* g, double* m, double* v, int n,
                 double lr, double beta1, double beta2, double eps,
                 double bc1, double bc2) {
  const float64x2_t b1 = vdupq_n_f64(beta1);
  const float64x2_t b2 = vdupq_n_f64(beta2);
  const float64x2_t ob1 = vdupq_n_f64(1.0 - beta1);
  const float64x2_t ob2 = vdupq_n_f64(1.0 - beta2);
  const float64x2_t bc1v = vdupq_n_f64(bc1);
  const float64x2_t bc2v = vdupq_n_f64(bc2);
  const float64x2_t epsv = vdupq_n_f64(eps);
  const float64x2_t lrv = vdupq_n_f64(lr);
  int i = 0;
  for (; i + 2 <= n; i += 2) {
    float64x2_t gv = vld1q_f64(g + i);
    float64x2_t mv = vaddq_f64(vmulq_f64(b1, vld1q_f64(m + i)),
                               vmulq_f64(ob1, gv));
    float64x2_t vv = vaddq_f64(vmulq_f64(b2, vld1q_f64(v + i)),
                               vmulq_f64(ob2, vmulq_f64(gv, gv)));
    vst1q_f64(m + i, mv);
    vst1q_f64(v + i, vv);
    float64x2_t mhat = vmulq_f64(mv, bc1v);
    float64x2_t vhat = vmulq_f64(vv, bc2v);
    float64x2_t denom = vaddq_f64(vsqrtq_f64(vhat), epsv);
    float64x2_t step = vmulq_f64(lrv, vdivq_f64(mhat, denom));
    vst1q_f64(p + i, vsubq_f64(vld1q_f64(p + i), step));
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

const Backend* neon_backend_if_supported() {
  static const Backend b{
      "neon",   n_matvec, n_matvec_t_acc, n_outer_acc, n_dot, n_sum_sq,
      n_axpy,   n_scale,  n_tanh_fwd,     n_tanh_bwd,  n_adam_step,
  };
  return &b;
}

}  // namespace ued::kernels

#else

#include "ued/kernels.hpp"

namespace ued::kernels {
const Backend* neon_backend_if_supported() { return nullptr; }
}  // namespace ued::kernels

#endif
