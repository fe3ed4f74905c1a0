#pragma once

#include <array>
#include <cstdint>
#include <vector>

namespace ued {

// Discrete envs use `discrete`; the terrain runner uses `continuous`.
struct Action {
  int discrete = 0;
  std::array<double, 2> continuous{0.0, 0.0};
};

// Where a trajectory came from; the training loop only feeds Replay
// trajectories to the policy update.
enum class TrajectorySource { Generator, Replay, EditEval };

struct Trajectory {
  std::vector<std::vector<double>> observations;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<double> values;     // V(s_t) predictions
  std::vector<double> log_probs;  // behavior log-probabilities
  std::vector<uint8_t> dones;     // 1 where the episode terminated at step t
  double bootstrap_value = 0.0;   // V(s_T); 0 when the final step terminated
  TrajectorySource source = TrajectorySource::Generator;
  uint64_t level_id = 0;

  int length() const { return static_cast<int>(rewards.size()); }

  bool well_formed() const {
    const size_t t = rewards.size();
    return t > 0 && observations.size() == t && actions.size() == t &&
           values.size() == t && log_probs.size() == t && dones.size() == t &&
           (!dones.back() || bootstrap_value == 0.0);
  }
};

}  // namespace ued
