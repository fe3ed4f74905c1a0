#include "ued/kernels.hpp"

#include <cmath>

namespace ued::kernels {
namespace {

void s_matvec(const double* A, const double* x, const double* b, double* y,
              int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* row = A + static_cast<long>(r) * cols;
    double acc = 0.0;
    for (int c = 0; c < cols; ++c) acc += row[c] * x[c];
    y[r] = b ? acc + b[r] : acc;
  }
}

void s_matvec_t_acc(const double* A, const double* dy, double* xg,
                    int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    const double* row = A + static_cast<long>(r) * cols;
    const double d = dy[r];
    for (int c = 0; c < cols; ++c) xg[c] += row[c] * d;
  }
}

void s_outer_acc(const double* dy, const double* x, double* dA,
                 int rows, int cols) {
  for (int r = 0; r < rows; ++r) {
    double* row = dA + static_cast<long>(r) * cols;
    const double d = dy[r];
    for (int c = 0; c < cols; ++c) row[c] += d * x[c];
  }
}

double s_dot(const double* x, const double* y, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

double s_sum_sq(const double* x, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += x[i] * x[i];
  return acc;
}

void s_axpy(double a, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += a * x[i];
}

void s_scale(double a, double* x, int n) {
  for (int i = 0; i < n; ++i) x[i] *= a;
}

void s_tanh_fwd(const double* z, double* a, int n) {
  for (int i = 0; i < n; ++i) a[i] = std::tanh(z[i]);
}

void s_tanh_bwd(const double* a, const double* dy, double* dz, int n) {
  for (int i = 0; i < n; ++i) dz[i] = dy[i] * (1.0 - a[i] * a[i]);
}

void s_adam_step(double* p, const double* g, double* m, double* v, int n,
                 double lr, double beta1, double beta2, double eps,
                 double bc1, double bc2) {
  for (int i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    const double mhat = m[i] * bc1;
    const double vhat = v[i] * bc2;
    p[i] -= lr * (mhat / (std::sqrt(vhat) + eps));
  }
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend b{
      "scalar",    s_matvec, s_matvec_t_acc, s_outer_acc, s_dot, s_sum_sq,
      s_axpy,      s_scale,  s_tanh_fwd,     s_tanh_bwd,  s_adam_step,
  };
  return b;
}

}  // namespace ued::kernels
