#pragma once

#include <vector>

#include "ued/trajectory.hpp"

namespace ued {

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;    // advantages + values
  std::vector<double> td_errors;  // delta_t
};

// Generalized advantage estimation with episode-boundary masking: done flags
// cut both the bootstrap term and the advantage carry.
GaeResult compute_gae(const Trajectory& trajectory, double gamma,
                      double lambda);

}  // namespace ued
