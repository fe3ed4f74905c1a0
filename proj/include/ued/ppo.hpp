#pragma once

#include <stdexcept>
#include <vector>

#include "ued/policy.hpp"
#include "ued/trajectory.hpp"

namespace ued {

struct PPOConfig {
  double gamma = 0.995;
  double gae_lambda = 0.95;
  int rollout_length = 256;
  int epochs = 5;
  int minibatches = 1;
  int workers = 32;
  double clip_range = 0.2;
  double learning_rate = 1e-4;
  double adam_eps = 1e-5;
  double max_grad_norm = 0.5;
  bool value_clip = true;
  double value_coef = 0.5;
  double entropy_coef = 0.0;
  bool return_normalization = false;
  int hidden = 64;

  bool operator==(const PPOConfig&) const = default;
};

struct PPOStats {
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;
  int transitions = 0;
};

struct AdamState {
  std::vector<double> m, v;
  long step = 0;
};

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Flattened transitions with GAE advantages normalized over the batch.
struct PpoBatch {
  std::vector<std::vector<double>> observations;
  std::vector<Action> actions;
  std::vector<double> logp_old, value_old, advantage, value_target;
  int size() const { return static_cast<int>(actions.size()); }
};

PpoBatch prepare_batch(const std::vector<Trajectory>& trajectories,
                       const PPOConfig& config);

// Clipped-surrogate loss plus value and entropy terms, averaged over the
// selected indices. When grad is non-null the parameter gradient is
// accumulated into it (caller zeroes). Throws TrainingError on a non-finite
// loss.
double ppo_loss_and_grad(const PolicyParams& params, const PpoBatch& batch,
                         const std::vector<int>& indices,
                         const PPOConfig& config, std::vector<double>* grad,
                         PPOStats* stats);

// Runs epochs x minibatches Adam steps over the batch; returns averaged stats.
PPOStats ppo_update(PolicyParams& params, AdamState& adam,
                    const std::vector<Trajectory>& trajectories,
                    const PPOConfig& config, RngState& rng);

}  // namespace ued
