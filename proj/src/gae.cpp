#include "ued/gae.hpp"

#include <stdexcept>

namespace ued {

GaeResult compute_gae(const Trajectory& trajectory, double gamma,
                      double lambda) {
  if (!trajectory.well_formed()) {
    throw std::invalid_argument("compute_gae: malformed trajectory");
  }
  const int t_len = trajectory.length();
  GaeResult out;
  out.advantages.resize(t_len);
  out.returns.resize(t_len);
  out.td_errors.resize(t_len);

  double carry = 0.0;
  for (int t = t_len - 1; t >= 0; --t) {
    const double nonterminal = trajectory.dones[t] ? 0.0 : 1.0;
    const double next_value =
        t + 1 < t_len ? trajectory.values[t + 1] : trajectory.bootstrap_value;
    const double delta = trajectory.rewards[t] +
                         gamma * next_value * nonterminal -
                         trajectory.values[t];
    carry = delta + gamma * lambda * nonterminal * carry;
    out.td_errors[t] = delta;
    out.advantages[t] = carry;
    out.returns[t] = carry + trajectory.values[t];
  }
  return out;
}

}  // namespace ued
