#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ued/level_buffer.hpp"
#include "ued/policy.hpp"
#include "ued/ppo.hpp"
#include "ued/run_config.hpp"
#include "ued/trajectory.hpp"

namespace ued {

struct RunArtifacts {
  PolicyParams params;
  std::string output_dir;
  std::string log_path;
  std::string events_path;
  std::string checkpoint_dir;
  long total_env_steps = 0;
  long total_updates = 0;
  long iterations = 0;
};

// Test instrumentation; all hooks run in the orchestrator thread.
struct TrainerHooks {
  std::function<void(const Trajectory&)> on_trajectory;
  std::function<void(const std::vector<Trajectory>&)> on_ppo_batch;
  std::function<void(long iter, long updates, const PolicyParams&)>
      on_iteration;
};

// Architecture implied by the environment (two tanh hidden layers of
// config.ppo.hidden units).
ArchSpec arch_for_env(const EnvSpec& env, int hidden);

// Runs the full training loop into config.output_dir: train_log.csv,
// events.jsonl, config_resolved.ini, checkpoints/. Deterministic for a fixed
// (config, seed) at any worker count.
RunArtifacts run_training(const RunConfig& config, TrainerHooks hooks = {});

}  // namespace ued
