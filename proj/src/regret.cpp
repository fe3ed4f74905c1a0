#include "ued/regret.hpp"

#include <algorithm>
#include <stdexcept>

namespace ued {

RegretScore positive_value_loss(std::span<const double> td_errors,
                                double gamma, double lambda) {
  if (td_errors.empty()) {
    throw std::invalid_argument("positive_value_loss: empty trajectory");
  }
  const double decay = gamma * lambda;
  double carry = 0.0;
  double total = 0.0;
  for (int t = static_cast<int>(td_errors.size()) - 1; t >= 0; --t) {
    carry = td_errors[t] + decay * carry;
    total += std::max(carry, 0.0);
  }
  return RegretScore{total / static_cast<double>(td_errors.size())};
}

double easy_score(const Trajectory& trajectory, RegretScore regret) {
  double total = 0.0;
  int episodes = 0;
  double acc = 0.0;
  bool open = false;
  for (int t = 0; t < trajectory.length(); ++t) {
    acc += trajectory.rewards[t];
    open = true;
    if (trajectory.dones[t]) {
      total += acc;
      acc = 0.0;
      open = false;
      ++episodes;
    }
  }
  if (open) {  // trailing partial episode counts as one segment
    total += acc;
    ++episodes;
  }
  const double mean_return = episodes > 0 ? total / episodes : 0.0;
  return mean_return - regret.value;
}

}  // namespace ued
