#pragma once

#include <span>

#include "ued/trajectory.hpp"

namespace ued {

struct RegretScore {
  double value = 0.0;  // >= 0 by construction
};

// Positive value loss over one episode's TD-errors:
//   (1/T) * sum_t max(sum_{k>=t} (gamma*lambda)^{k-t} delta_k, 0)
// computed by an O(T) backward recursion.
RegretScore positive_value_loss(std::span<const double> td_errors,
                                double gamma, double lambda);

// "Easy" replay criterion: undiscounted episode return minus regret. Higher
// means the level was solved with little left to learn. Multi-episode
// trajectories use the mean per-episode return.
double easy_score(const Trajectory& trajectory, RegretScore regret);

}  // namespace ued
