#include "ued/policy.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "ued/kernels.hpp"

namespace ued {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

struct Layout {
  int w1, b1, w2, b2, wh, bh, wv, bv, log_std, total;
};

Layout layout(const ArchSpec& a) {
  Layout l{};
  int off = 0;
  l.w1 = off; off += a.hidden1 * a.input_dim;
  l.b1 = off; off += a.hidden1;
  l.w2 = off; off += a.hidden2 * a.hidden1;
  l.b2 = off; off += a.hidden2;
  l.wh = off; off += a.action_dim * a.hidden2;
  l.bh = off; off += a.action_dim;
  l.wv = off; off += a.hidden2;
  l.bv = off; off += 1;
  l.log_std = off;
  if (a.head == HeadKind::Gaussian) off += a.action_dim;
  l.total = off;
  return l;
}

void check_obs(const ArchSpec& a, std::span<const double> obs) {
  if (static_cast<int>(obs.size()) != a.input_dim) {
    throw std::invalid_argument(
        "observation size " + std::to_string(obs.size()) +
        " does not match architecture input " + std::to_string(a.input_dim));
  }
}

}  // namespace

int ArchSpec::param_count() const { return layout(*this).total; }

PolicyParams zero_params(const ArchSpec& arch) {
  return PolicyParams{arch, std::vector<double>(arch.param_count(), 0.0)};
}

PolicyParams init_params(const ArchSpec& arch, RngState& rng) {
  PolicyParams p = zero_params(arch);
  const Layout l = layout(arch);
  auto fill = [&](int off, int rows, int cols, double gain) {
    const double scale = gain * std::sqrt(2.0 / (rows + cols));
    for (int i = 0; i < rows * cols; ++i) {
      p.flat[off + i] = scale * rng.normal();
    }
  };
  fill(l.w1, arch.hidden1, arch.input_dim, 1.0);
  fill(l.w2, arch.hidden2, arch.hidden1, 1.0);
  fill(l.wh, arch.action_dim, arch.hidden2, 0.01);  // near-uniform policy
  fill(l.wv, 1, arch.hidden2, 1.0);
  return p;
}

void policy_forward_cached(const PolicyParams& params,
                           std::span<const double> obs, ForwardCache& cache) {
  const ArchSpec& a = params.arch;
  check_obs(a, obs);
  const Layout l = layout(a);
  const auto& k = kernels::active();
  const double* f = params.flat.data();

  cache.input.assign(obs.begin(), obs.end());
  cache.a1.resize(a.hidden1);
  cache.a2.resize(a.hidden2);
  cache.head.resize(a.action_dim);

  std::vector<double> z(std::max(a.hidden1, a.hidden2));
  k.matvec(f + l.w1, cache.input.data(), f + l.b1, z.data(), a.hidden1,
           a.input_dim);
  k.tanh_fwd(z.data(), cache.a1.data(), a.hidden1);
  k.matvec(f + l.w2, cache.a1.data(), f + l.b2, z.data(), a.hidden2,
           a.hidden1);
  k.tanh_fwd(z.data(), cache.a2.data(), a.hidden2);
  k.matvec(f + l.wh, cache.a2.data(), f + l.bh, cache.head.data(),
           a.action_dim, a.hidden2);
  cache.value = k.dot(f + l.wv, cache.a2.data(), a.hidden2) + f[l.bv];
}

PolicyOutput policy_forward(const PolicyParams& params,
                            std::span<const double> obs) {
  ForwardCache cache;
  policy_forward_cached(params, obs, cache);
  PolicyOutput out;
  out.head = cache.head;
  out.value = cache.value;
  if (params.arch.head == HeadKind::Gaussian) {
    const Layout l = layout(params.arch);
    out.log_std.assign(params.flat.begin() + l.log_std,
                       params.flat.begin() + l.log_std +
                           params.arch.action_dim);
  }
  return out;
}

void policy_backward(const PolicyParams& params, const ForwardCache& cache,
                     std::span<const double> d_head,
                     std::span<const double> d_log_std, double d_value,
                     std::vector<double>& grad) {
  const ArchSpec& a = params.arch;
  const Layout l = layout(a);
  const auto& k = kernels::active();
  const double* f = params.flat.data();
  double* g = grad.data();

  // Head and value layers.
  std::vector<double> da2(a.hidden2, 0.0);
  k.outer_acc(d_head.data(), cache.a2.data(), g + l.wh, a.action_dim,
              a.hidden2);
  k.axpy(1.0, d_head.data(), g + l.bh, a.action_dim);
  k.matvec_t_acc(f + l.wh, d_head.data(), da2.data(), a.action_dim, a.hidden2);
  k.axpy(d_value, cache.a2.data(), g + l.wv, a.hidden2);
  g[l.bv] += d_value;
  k.axpy(d_value, f + l.wv, da2.data(), a.hidden2);
  if (a.head == HeadKind::Gaussian) {
    k.axpy(1.0, d_log_std.data(), g + l.log_std, a.action_dim);
  }

  // Hidden layers.
  std::vector<double> dz2(a.hidden2);
  k.tanh_bwd(cache.a2.data(), da2.data(), dz2.data(), a.hidden2);
  k.outer_acc(dz2.data(), cache.a1.data(), g + l.w2, a.hidden2, a.hidden1);
  k.axpy(1.0, dz2.data(), g + l.b2, a.hidden2);

  std::vector<double> da1(a.hidden1, 0.0);
  k.matvec_t_acc(f + l.w2, dz2.data(), da1.data(), a.hidden2, a.hidden1);
  std::vector<double> dz1(a.hidden1);
  k.tanh_bwd(cache.a1.data(), da1.data(), dz1.data(), a.hidden1);
  k.outer_acc(dz1.data(), cache.input.data(), g + l.w1, a.hidden1,
              a.input_dim);
  k.axpy(1.0, dz1.data(), g + l.b1, a.hidden1);
}

namespace dist {

namespace {
double log_sum_exp(std::span<const double> logits, double* max_out = nullptr) {
  double m = logits[0];
  for (double v : logits) m = std::max(m, v);
  double z = 0.0;
  for (double v : logits) z += std::exp(v - m);
  if (max_out) *max_out = m;
  return m + std::log(z);
}
}  // namespace

double categorical_log_prob(std::span<const double> logits, int action) {
  return logits[action] - log_sum_exp(logits);
}

std::vector<double> categorical_probs(std::span<const double> logits) {
  double m = 0.0;
  log_sum_exp(logits, &m);
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    p[i] = std::exp(logits[i] - m);
    z += p[i];
  }
  for (double& v : p) v /= z;
  return p;
}

double categorical_entropy(std::span<const double> logits) {
  // H = logZ - sum_i p_i * logit_i; exact log(n) for all-equal logits.
  const double lz = log_sum_exp(logits);
  const auto p = categorical_probs(logits);
  double dot = 0.0;
  for (size_t i = 0; i < p.size(); ++i) dot += p[i] * logits[i];
  return lz - dot;
}

void categorical_entropy_grad(std::span<const double> logits,
                              std::span<double> out) {
  const auto p = categorical_probs(logits);
  const double h = categorical_entropy(logits);
  for (size_t i = 0; i < p.size(); ++i) {
    out[i] = -p[i] * (std::log(std::max(p[i], 1e-300)) + h);
  }
}

int categorical_sample(std::span<const double> logits, RngState& rng) {
  const auto p = categorical_probs(logits);
  const double u = rng.uniform();
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

int categorical_argmax(std::span<const double> logits) {
  int best = 0;
  for (size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[best]) best = static_cast<int>(i);
  }
  return best;
}

double gaussian_log_prob(std::span<const double> mean,
                         std::span<const double> log_std,
                         std::span<const double> action) {
  double lp = 0.0;
  for (size_t d = 0; d < mean.size(); ++d) {
    const double sigma = std::exp(log_std[d]);
    const double z = (action[d] - mean[d]) / sigma;
    lp += -0.5 * z * z - log_std[d] - 0.5 * kLog2Pi;
  }
  return lp;
}

double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (double ls : log_std) h += ls + 0.5 * (kLog2Pi + 1.0);
  return h;
}

}  // namespace dist

ActionSample sample_action(const PolicyParams& params,
                           std::span<const double> obs, RngState& rng) {
  const PolicyOutput out = policy_forward(params, obs);
  ActionSample s;
  s.value = out.value;
  if (params.arch.head == HeadKind::Categorical) {
    s.action.discrete = dist::categorical_sample(out.head, rng);
    s.log_prob = dist::categorical_log_prob(out.head, s.action.discrete);
  } else {
    std::vector<double> act(out.head.size());
    for (size_t d = 0; d < act.size(); ++d) {
      act[d] = out.head[d] + std::exp(out.log_std[d]) * rng.normal();
      s.action.continuous[d] = act[d];
    }
    s.log_prob = dist::gaussian_log_prob(out.head, out.log_std, act);
  }
  return s;
}

Action greedy_action(const PolicyParams& params, std::span<const double> obs) {
  const PolicyOutput out = policy_forward(params, obs);
  Action a;
  if (params.arch.head == HeadKind::Categorical) {
    a.discrete = dist::categorical_argmax(out.head);
  } else {
    for (size_t d = 0; d < out.head.size(); ++d) a.continuous[d] = out.head[d];
  }
  return a;
}

double state_value(const PolicyParams& params, std::span<const double> obs) {
  return policy_forward(params, obs).value;
}

void save_checkpoint(const std::string& path, const PolicyParams& params) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  const ArchSpec& a = params.arch;
  out << "uedkit-checkpoint v1\n";
  out << "head " << (a.head == HeadKind::Categorical ? "categorical" : "gaussian")
      << "\n";
  out << "input " << a.input_dim << "\n";
  out << "hidden " << a.hidden1 << " " << a.hidden2 << "\n";
  out << "actions " << a.action_dim << "\n";
  out << "params " << params.flat.size() << "\n";
  char buf[40];
  for (double v : params.flat) {
    std::snprintf(buf, sizeof(buf), "%a\n", v);  // hexfloat: exact round-trip
    out << buf;
  }
}

PolicyParams load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  std::string magic, version;
  in >> magic >> version;
  if (magic != "uedkit-checkpoint" || version != "v1") {
    throw std::runtime_error("unrecognized checkpoint header in " + path);
  }
  ArchSpec a;
  std::string key, head;
  size_t count = 0;
  in >> key >> head;
  if (key != "head") throw std::runtime_error("checkpoint: expected 'head'");
  a.head = head == "gaussian" ? HeadKind::Gaussian : HeadKind::Categorical;
  in >> key >> a.input_dim;
  in >> key >> a.hidden1 >> a.hidden2;
  in >> key >> a.action_dim;
  in >> key >> count;
  if (static_cast<int>(count) != a.param_count()) {
    throw std::runtime_error("checkpoint parameter count mismatch");
  }
  PolicyParams p = zero_params(a);
  for (size_t i = 0; i < count; ++i) {
    std::string tok;
    if (!(in >> tok)) throw std::runtime_error("checkpoint truncated");
    p.flat[i] = std::strtod(tok.c_str(), nullptr);
  }
  return p;
}

}  // namespace ued
