#pragma once

#include <string_view>
#include <vector>

namespace ued::kernels {

// Dense double-precision primitives behind the policy network and optimizer.
// Every operation has a scalar reference implementation plus SIMD variants
// (AVX2 on x86-64, NEON on aarch64) selected at runtime. Elementwise ops are
// bit-identical across backends (no FMA contraction); reductions may differ
// by summation order and are equivalence-tested under a tight tolerance.
struct Backend {
  const char* name;

  // y = A x + b, A row-major (rows x cols). b may be null.
  void (*matvec)(const double* A, const double* x, const double* b, double* y,
                 int rows, int cols);
  // xg += A^T dy
  void (*matvec_t_acc)(const double* A, const double* dy, double* xg,
                       int rows, int cols);
  // dA += dy (outer) x
  void (*outer_acc)(const double* dy, const double* x, double* dA,
                    int rows, int cols);
  double (*dot)(const double* x, const double* y, int n);
  double (*sum_sq)(const double* x, int n);
  void (*axpy)(double a, const double* x, double* y, int n);  // y += a x
  void (*scale)(double a, double* x, int n);                  // x *= a
  void (*tanh_fwd)(const double* z, double* a, int n);
  void (*tanh_bwd)(const double* a, const double* dy, double* dz, int n);
  // Adam with precomputed bias corrections bc1 = 1/(1-beta1^t), bc2 = 1/(1-beta2^t).
  void (*adam_step)(double* p, const double* g, double* m, double* v, int n,
                    double lr, double beta1, double beta2, double eps,
                    double bc1, double bc2);
};

const Backend& scalar_backend();

// Backends usable on this machine, scalar first.
std::vector<const Backend*> available_backends();

// Null when the name is unknown or unsupported on this CPU.
const Backend* find_backend(std::string_view name);

// Active backend: best available unless overridden by set_active() or the
// UED_KERNEL_BACKEND environment variable (checked once, at first use).
const Backend& active();
void set_active(const Backend& b);

}  // namespace ued::kernels
