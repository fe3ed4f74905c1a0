#pragma once

#include <span>
#include <string>
#include <vector>

#include "ued/rng.hpp"
#include "ued/trajectory.hpp"

namespace ued {

enum class HeadKind { Categorical, Gaussian };

// Two tanh hidden layers; a policy head (categorical logits or diagonal
// Gaussian means with free log-std parameters) and a scalar value head.
struct ArchSpec {
  int input_dim = 0;
  int hidden1 = 64;
  int hidden2 = 64;
  HeadKind head = HeadKind::Categorical;
  int action_dim = 0;

  int param_count() const;
  bool operator==(const ArchSpec&) const = default;
};

struct PolicyParams {
  ArchSpec arch;
  std::vector<double> flat;  // layout: W1,b1,W2,b2,Wh,bh,Wv,bv[,log_std]
};

PolicyParams zero_params(const ArchSpec& arch);
PolicyParams init_params(const ArchSpec& arch, RngState& rng);

struct PolicyOutput {
  std::vector<double> head;     // logits, or Gaussian means
  std::vector<double> log_std;  // empty for categorical heads
  double value = 0.0;
};

PolicyOutput policy_forward(const PolicyParams& params,
                            std::span<const double> obs);

// Intermediate activations kept for backprop.
struct ForwardCache {
  std::vector<double> input, a1, a2, head;
  double value = 0.0;
};

void policy_forward_cached(const PolicyParams& params,
                           std::span<const double> obs, ForwardCache& cache);

// Accumulates dL/dparams into grad given head/value/log_std gradients.
void policy_backward(const PolicyParams& params, const ForwardCache& cache,
                     std::span<const double> d_head,
                     std::span<const double> d_log_std, double d_value,
                     std::vector<double>& grad);

namespace dist {

double categorical_log_prob(std::span<const double> logits, int action);
double categorical_entropy(std::span<const double> logits);
// d(entropy)/d(logits), written into out.
void categorical_entropy_grad(std::span<const double> logits,
                              std::span<double> out);
std::vector<double> categorical_probs(std::span<const double> logits);
int categorical_sample(std::span<const double> logits, RngState& rng);
int categorical_argmax(std::span<const double> logits);  // ties: lowest id

double gaussian_log_prob(std::span<const double> mean,
                         std::span<const double> log_std,
                         std::span<const double> action);
double gaussian_entropy(std::span<const double> log_std);

}  // namespace dist

struct ActionSample {
  Action action;
  double log_prob = 0.0;
  double value = 0.0;
};

ActionSample sample_action(const PolicyParams& params,
                           std::span<const double> obs, RngState& rng);
Action greedy_action(const PolicyParams& params, std::span<const double> obs);
double state_value(const PolicyParams& params, std::span<const double> obs);

void save_checkpoint(const std::string& path, const PolicyParams& params);
PolicyParams load_checkpoint(const std::string& path);

}  // namespace ued
