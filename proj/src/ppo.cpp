#include "ued/ppo.hpp"

#include <algorithm>
#include <cmath>

#include "ued/gae.hpp"
#include "ued/kernels.hpp"

namespace ued {

namespace {

double clamp(double v, double lo, double hi) {
  return std::min(hi, std::max(lo, v));
}

}  // namespace

PpoBatch prepare_batch(const std::vector<Trajectory>& trajectories,
                       const PPOConfig& config) {
  PpoBatch batch;
  for (const Trajectory& traj : trajectories) {
    const GaeResult gae = compute_gae(traj, config.gamma, config.gae_lambda);
    for (int t = 0; t < traj.length(); ++t) {
      batch.observations.push_back(traj.observations[t]);
      batch.actions.push_back(traj.actions[t]);
      batch.logp_old.push_back(traj.log_probs[t]);
      batch.value_old.push_back(traj.values[t]);
      batch.advantage.push_back(gae.advantages[t]);
      batch.value_target.push_back(gae.returns[t]);
    }
  }
  // Per-batch advantage normalization (mean 0, std 1).
  const int n = batch.size();
  if (n > 0) {
    double mean = 0.0;
    for (double a : batch.advantage) mean += a;
    mean /= n;
    double var = 0.0;
    for (double a : batch.advantage) var += (a - mean) * (a - mean);
    const double std_dev = std::sqrt(var / n);
    for (double& a : batch.advantage) a = (a - mean) / (std_dev + 1e-8);
  }
  return batch;
}

double ppo_loss_and_grad(const PolicyParams& params, const PpoBatch& batch,
                         const std::vector<int>& indices,
                         const PPOConfig& config, std::vector<double>* grad,
                         PPOStats* stats) {
  const ArchSpec& arch = params.arch;
  const double eps = config.clip_range;
  const int n = static_cast<int>(indices.size());
  const double inv_n = 1.0 / n;

  double total_loss = 0.0;
  double pg_sum = 0.0, vl_sum = 0.0, ent_sum = 0.0;
  int clipped = 0;

  ForwardCache cache;
  std::vector<double> d_head(arch.action_dim);
  std::vector<double> d_logstd(arch.action_dim);
  std::vector<double> ent_grad(arch.action_dim);

  for (int idx : indices) {
    policy_forward_cached(params, batch.observations[idx], cache);

    double logp = 0.0, entropy = 0.0;
    std::span<const double> log_std;
    if (arch.head == HeadKind::Gaussian) {
      const auto l_off = params.flat.size() - arch.action_dim;
      log_std = std::span<const double>(params.flat).subspan(l_off);
      logp = dist::gaussian_log_prob(
          cache.head, log_std,
          std::span<const double>(batch.actions[idx].continuous.data(),
                                  arch.action_dim));
      entropy = dist::gaussian_entropy(log_std);
    } else {
      logp = dist::categorical_log_prob(cache.head,
                                        batch.actions[idx].discrete);
      entropy = dist::categorical_entropy(cache.head);
    }

    const double adv = batch.advantage[idx];
    const double ratio = std::exp(logp - batch.logp_old[idx]);
    const double s1 = ratio * adv;
    const double s2 = clamp(ratio, 1.0 - eps, 1.0 + eps) * adv;
    const double pg_loss = -std::min(s1, s2);
    if (std::abs(ratio - 1.0) > eps) ++clipped;

    const double v = cache.value;
    const double target = batch.value_target[idx];
    double value_loss = 0.0;
    bool clipped_value_branch = false;
    if (config.value_clip) {
      const double v_old = batch.value_old[idx];
      const double v_cl = v_old + clamp(v - v_old, -eps, eps);
      const double e_raw = (v - target) * (v - target);
      const double e_cl = (v_cl - target) * (v_cl - target);
      clipped_value_branch = e_cl > e_raw;
      value_loss = 0.5 * std::max(e_raw, e_cl);
    } else {
      value_loss = 0.5 * (v - target) * (v - target);
    }

    const double sample_loss = pg_loss + config.value_coef * value_loss -
                               config.entropy_coef * entropy;
    total_loss += sample_loss * inv_n;
    pg_sum += pg_loss;
    vl_sum += value_loss;
    ent_sum += entropy;

    if (grad) {
      // d(pg_loss)/d(logp); the clipped branch is constant in the params.
      const double d_logp = s1 <= s2 ? -ratio * adv * inv_n : 0.0;

      // Same for the clipped value branch: it is only selected when v sits
      // outside the clip band, where v_cl is constant.
      double d_value = clipped_value_branch ? 0.0 : v - target;
      d_value *= config.value_coef * inv_n;

      std::fill(d_head.begin(), d_head.end(), 0.0);
      std::fill(d_logstd.begin(), d_logstd.end(), 0.0);
      if (arch.head == HeadKind::Gaussian) {
        for (int d = 0; d < arch.action_dim; ++d) {
          const double sigma = std::exp(log_std[d]);
          const double z = (batch.actions[idx].continuous[d] - cache.head[d]) / sigma;
          // d logp / d mean = z/sigma; d logp / d log_std = z^2 - 1.
          d_head[d] = d_logp * (z / sigma);
          d_logstd[d] = d_logp * (z * z - 1.0);
          // entropy term: dH/dlog_std = 1
          d_logstd[d] += -config.entropy_coef * inv_n;
        }
      } else {
        const auto probs = dist::categorical_probs(cache.head);
        for (int i = 0; i < arch.action_dim; ++i) {
          const double indicator = i == batch.actions[idx].discrete ? 1.0 : 0.0;
          d_head[i] = d_logp * (indicator - probs[i]);
        }
        if (config.entropy_coef != 0.0) {
          dist::categorical_entropy_grad(cache.head, ent_grad);
          for (int i = 0; i < arch.action_dim; ++i) {
            d_head[i] += -config.entropy_coef * inv_n * ent_grad[i];
          }
        }
      }
      policy_backward(params, cache, d_head, d_logstd, d_value, *grad);
    }
  }

  if (!std::isfinite(total_loss)) {
    throw TrainingError("non-finite PPO loss (policy " +
                        std::to_string(pg_sum * inv_n) + ", value " +
                        std::to_string(vl_sum * inv_n) + ")");
  }
  if (stats) {
    stats->policy_loss += pg_sum * inv_n;
    stats->value_loss += vl_sum * inv_n;
    stats->entropy += ent_sum * inv_n;
    stats->clip_fraction += static_cast<double>(clipped) * inv_n;
  }
  return total_loss;
}

PPOStats ppo_update(PolicyParams& params, AdamState& adam,
                    const std::vector<Trajectory>& trajectories,
                    const PPOConfig& config, RngState& rng) {
  const PpoBatch batch = prepare_batch(trajectories, config);
  const int n = batch.size();
  if (n == 0) throw TrainingError("ppo_update: empty batch");

  const int param_count = params.arch.param_count();
  if (adam.m.empty()) {
    adam.m.assign(param_count, 0.0);
    adam.v.assign(param_count, 0.0);
    adam.step = 0;
  }

  const auto& k = kernels::active();
  std::vector<double> grad(param_count);
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;

  PPOStats stats;
  int update_steps = 0;
  double grad_norm_sum = 0.0;

  const int minibatches = std::max(1, std::min(config.minibatches, n));
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    // Fisher-Yates shuffle driven by the run rng.
    for (int i = n - 1; i > 0; --i) {
      const int j = static_cast<int>(rng.uniform_u64(i + 1));
      std::swap(perm[i], perm[j]);
    }
    for (int mb = 0; mb < minibatches; ++mb) {
      const int lo = static_cast<int>(static_cast<long>(mb) * n / minibatches);
      const int hi =
          static_cast<int>(static_cast<long>(mb + 1) * n / minibatches);
      if (hi <= lo) continue;
      const std::vector<int> indices(perm.begin() + lo, perm.begin() + hi);

      std::fill(grad.begin(), grad.end(), 0.0);
      ppo_loss_and_grad(params, batch, indices, config, &grad, &stats);

      double norm = std::sqrt(k.sum_sq(grad.data(), param_count));
      grad_norm_sum += norm;
      if (config.max_grad_norm > 0.0 && norm > config.max_grad_norm) {
        k.scale(config.max_grad_norm / norm, grad.data(), param_count);
      }

      ++adam.step;
      const double beta1 = 0.9, beta2 = 0.999;
      const double bc1 = 1.0 / (1.0 - std::pow(beta1, adam.step));
      const double bc2 = 1.0 / (1.0 - std::pow(beta2, adam.step));
      k.adam_step(params.flat.data(), grad.data(), adam.m.data(),
                  adam.v.data(), param_count, config.learning_rate, beta1,
                  beta2, config.adam_eps, bc1, bc2);
      ++update_steps;
    }
  }

  const double inv_steps = update_steps > 0 ? 1.0 / update_steps : 0.0;
  stats.policy_loss *= inv_steps;
  stats.value_loss *= inv_steps;
  stats.entropy *= inv_steps;
  stats.clip_fraction *= inv_steps;
  stats.grad_norm = grad_norm_sum * inv_steps;
  stats.transitions = n;
  return stats;
}

}  // namespace ued
