#include <cmath>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "ued/gae.hpp"
#include "ued/policy.hpp"
#include "ued/ppo.hpp"
#include "ued/rng.hpp"

using namespace ued;

namespace {

Trajectory make_traj(std::vector<double> rewards, std::vector<double> values,
                     std::vector<uint8_t> dones, double bootstrap) {
  Trajectory t;
  const size_t n = rewards.size();
  t.rewards = std::move(rewards);
  t.values = std::move(values);
  t.dones = std::move(dones);
  t.bootstrap_value = bootstrap;
  t.observations.assign(n, std::vector<double>{0.0});
  t.actions.assign(n, Action{});
  t.log_probs.assign(n, 0.0);
  return t;
}

// O(T^2) GAE reference: the literal discounted sum with done masking.
std::vector<double> brute_force_gae(const Trajectory& traj, double gamma,
                                    double lambda) {
  const int n = traj.length();
  std::vector<double> delta(n);
  for (int t = 0; t < n; ++t) {
    const double next_v =
        t + 1 < n ? traj.values[t + 1] : traj.bootstrap_value;
    const double mask = traj.dones[t] ? 0.0 : 1.0;
    delta[t] = traj.rewards[t] + gamma * next_v * mask - traj.values[t];
  }
  std::vector<double> adv(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double coef = 1.0;
    for (int k = t; k < n; ++k) {
      adv[t] += coef * delta[k];
      if (traj.dones[k]) break;
      coef *= gamma * lambda;
    }
  }
  return adv;
}

}  // namespace

TEST_CASE("zero weights give a uniform categorical head and zero value") {
  ArchSpec arch{5, 8, 8, HeadKind::Categorical, 3};
  const PolicyParams p = zero_params(arch);
  const std::vector<double> obs(5, 0.7);
  const PolicyOutput out = policy_forward(p, obs);
  CHECK(out.value == 0.0);
  const auto probs = dist::categorical_probs(out.head);
  double sum = 0.0;
  for (double v : probs) {
    CHECK(v == doctest::Approx(1.0 / 3));
    sum += v;
  }
  CHECK(std::abs(sum - 1.0) <= 1e-9);
}

TEST_CASE("categorical probabilities sum to one on random params") {
  RngState rng(3);
  ArchSpec arch{7, 16, 16, HeadKind::Categorical, 8};
  const PolicyParams p = init_params(arch, rng);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> obs(7);
    for (double& v : obs) v = rng.uniform(-2.0, 2.0);
    const auto probs = dist::categorical_probs(policy_forward(p, obs).head);
    const double sum = std::accumulate(probs.begin(), probs.end(), 0.0);
    CHECK(std::abs(sum - 1.0) <= 1e-9);
  }
}

TEST_CASE("forward is deterministic and validates shapes") {
  RngState rng(5);
  ArchSpec arch{4, 8, 8, HeadKind::Gaussian, 2};
  const PolicyParams p = init_params(arch, rng);
  const std::vector<double> obs{0.1, -0.2, 0.3, 0.4};
  const PolicyOutput a = policy_forward(p, obs);
  const PolicyOutput b = policy_forward(p, obs);
  CHECK(a.head == b.head);
  CHECK(a.value == b.value);
  CHECK(a.log_std.size() == 2);
  const std::vector<double> bad(5, 0.0);
  CHECK_THROWS_AS(policy_forward(p, bad), std::invalid_argument);
}

TEST_CASE("entropy of zero logits equals log of the action count exactly") {
  const std::vector<double> logits3(3, 0.0), logits8(8, 0.0);
  CHECK(dist::categorical_entropy(logits3) == std::log(3.0));
  CHECK(dist::categorical_entropy(logits8) == std::log(8.0));
}

TEST_CASE("argmax breaks ties toward the lowest action id") {
  CHECK(dist::categorical_argmax(std::vector<double>{0, 0, 0}) == 0);
  CHECK(dist::categorical_argmax(std::vector<double>{1, 2, 2}) == 1);
}

TEST_CASE("GAE: terminal example from first principles") {
  // gamma=1, lambda=1, values [.5,.5,.5], terminal, rewards [0,0,1]:
  // deltas [0,0,.5], advantages [.5,.5,.5].
  const Trajectory t = make_traj({0, 0, 1}, {0.5, 0.5, 0.5}, {0, 0, 1}, 0.0);
  const GaeResult g = compute_gae(t, 1.0, 1.0);
  CHECK(g.td_errors == std::vector<double>{0.0, 0.0, 0.5});
  for (double a : g.advantages) CHECK(a == doctest::Approx(0.5));
  CHECK(g.returns[0] == doctest::Approx(1.0));
}

TEST_CASE("GAE: zero signal and lambda=0 degenerate cases") {
  const Trajectory zero = make_traj({0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 1}, 0.0);
  const GaeResult g = compute_gae(zero, 0.99, 0.95);
  for (double a : g.advantages) CHECK(a == 0.0);

  RngState rng(7);
  Trajectory t = make_traj({}, {}, {}, 0.3);
  for (int i = 0; i < 32; ++i) {
    t.rewards.push_back(rng.uniform(-1, 1));
    t.values.push_back(rng.uniform(-1, 1));
    t.dones.push_back(0);
    t.observations.push_back({0.0});
    t.actions.push_back({});
    t.log_probs.push_back(0.0);
  }
  const GaeResult g0 = compute_gae(t, 0.9, 0.0);
  for (int i = 0; i < t.length(); ++i) {
    CHECK(g0.advantages[i] == doctest::Approx(g0.td_errors[i]).epsilon(1e-12));
  }
}

TEST_CASE("GAE equals the O(T^2) brute force on random trajectories") {
  RngState rng(11);
  for (int trial = 0; trial < 1000; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_u64(64));
    Trajectory t = make_traj({}, {}, {}, 0.0);
    for (int i = 0; i < n; ++i) {
      t.rewards.push_back(rng.uniform(-1, 1));
      t.values.push_back(rng.uniform(-1, 1));
      t.dones.push_back(rng.uniform() < 0.15 ? 1 : 0);
      t.observations.push_back({0.0});
      t.actions.push_back({});
      t.log_probs.push_back(0.0);
    }
    t.bootstrap_value = t.dones.back() ? 0.0 : rng.uniform(-1, 1);
    const double gamma = rng.uniform();
    const double lambda = rng.uniform();
    const GaeResult fast = compute_gae(t, gamma, lambda);
    const auto slow = brute_force_gae(t, gamma, lambda);
    for (int i = 0; i < n; ++i) {
      CHECK(std::abs(fast.advantages[i] - slow[i]) <= 1e-10);
    }
  }
}

TEST_CASE("ppo: learning_rate=0 leaves parameters bitwise unchanged") {
  RngState rng(13);
  ArchSpec arch{3, 8, 8, HeadKind::Categorical, 2};
  PolicyParams p = init_params(arch, rng);
  const std::vector<double> before = p.flat;

  Trajectory t = make_traj({}, {}, {}, 0.0);
  for (int i = 0; i < 16; ++i) {
    std::vector<double> obs{rng.uniform(), rng.uniform(), rng.uniform()};
    const ActionSample a = sample_action(p, obs, rng);
    t.observations.push_back(obs);
    t.actions.push_back(a.action);
    t.values.push_back(a.value);
    t.log_probs.push_back(a.log_prob);
    t.rewards.push_back(rng.uniform());
    t.dones.push_back(1);
  }
  PPOConfig cfg;
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  cfg.minibatches = 2;
  AdamState adam;
  RngState ppo_rng(1);
  ppo_update(p, adam, {t}, cfg, ppo_rng);
  CHECK(p.flat == before);
}

TEST_CASE("ppo with infinite clip and one epoch matches the plain surrogate") {
  // Two-step toy batch evaluated at the behavior policy: every ratio is 1,
  // so the loss is -mean(adv) + value_coef*mean(0.5 (v - R)^2) - ent_coef*H.
  RngState rng(17);
  ArchSpec arch{2, 6, 6, HeadKind::Categorical, 2};
  PolicyParams p = init_params(arch, rng);

  Trajectory t = make_traj({}, {}, {}, 0.0);
  for (int i = 0; i < 2; ++i) {
    std::vector<double> obs{rng.uniform(), rng.uniform()};
    const ActionSample a = sample_action(p, obs, rng);
    t.observations.push_back(obs);
    t.actions.push_back(a.action);
    t.values.push_back(a.value);
    t.log_probs.push_back(a.log_prob);
    t.rewards.push_back(i == 1 ? 1.0 : 0.0);
    t.dones.push_back(i == 1 ? 1 : 0);
  }
  PPOConfig cfg;
  cfg.gamma = 1.0;
  cfg.gae_lambda = 1.0;
  cfg.clip_range = std::numeric_limits<double>::infinity();
  cfg.value_clip = false;
  cfg.entropy_coef = 0.01;
  cfg.epochs = 1;
  cfg.minibatches = 1;

  const PpoBatch batch = prepare_batch({t}, cfg);
  std::vector<int> idx{0, 1};
  const double loss = ppo_loss_and_grad(p, batch, idx, cfg, nullptr, nullptr);

  double expected = 0.0;
  for (int i = 0; i < 2; ++i) {
    const PolicyOutput out = policy_forward(p, t.observations[i]);
    const double logp =
        dist::categorical_log_prob(out.head, t.actions[i].discrete);
    const double ratio = std::exp(logp - t.log_probs[i]);
    CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
    const double vdiff = out.value - batch.value_target[i];
    expected += -ratio * batch.advantage[i] + cfg.value_coef * 0.5 * vdiff * vdiff -
                cfg.entropy_coef * dist::categorical_entropy(out.head);
  }
  expected /= 2.0;
  CHECK(loss == doctest::Approx(expected).epsilon(1e-6));
}

TEST_CASE("analytic gradient matches central finite differences") {
  RngState rng(19);
  ArchSpec arch{4, 6, 6, HeadKind::Categorical, 3};
  PolicyParams p = init_params(arch, rng);
  const int n_params = arch.param_count();
  REQUIRE(n_params <= 200);

  // Batch collected from a slightly different policy so ratios are not 1.
  PolicyParams behavior = p;
  for (double& w : behavior.flat) w += 0.02 * rng.normal();
  Trajectory t = make_traj({}, {}, {}, 0.0);
  for (int i = 0; i < 12; ++i) {
    std::vector<double> obs(4);
    for (double& v : obs) v = rng.uniform(-1, 1);
    const ActionSample a = sample_action(behavior, obs, rng);
    t.observations.push_back(obs);
    t.actions.push_back(a.action);
    t.values.push_back(a.value);
    t.log_probs.push_back(a.log_prob);
    t.rewards.push_back(rng.uniform(-1, 1));
    t.dones.push_back(i % 4 == 3 ? 1 : 0);
  }
  PPOConfig cfg;
  cfg.value_clip = true;
  cfg.entropy_coef = 0.01;
  const PpoBatch batch = prepare_batch({t}, cfg);
  std::vector<int> idx(batch.size());
  std::iota(idx.begin(), idx.end(), 0);

  // Keep every sample away from the clip kinks so the loss is smooth in the
  // finite-difference neighborhood.
  for (int i : idx) {
    const PolicyOutput out = policy_forward(p, batch.observations[i]);
    const double logp =
        dist::categorical_log_prob(out.head, batch.actions[i].discrete);
    const double ratio = std::exp(logp - batch.logp_old[i]);
    REQUIRE(std::abs(std::abs(ratio - 1.0) - cfg.clip_range) > 1e-3);
    REQUIRE(std::abs(std::abs(out.value - batch.value_old[i]) - cfg.clip_range) >
            1e-3);
  }

  std::vector<double> grad(n_params, 0.0);
  ppo_loss_and_grad(p, batch, idx, cfg, &grad, nullptr);

  double err_num = 0.0, err_den = 0.0;
  const double h = 1e-6;
  for (int k = 0; k < n_params; ++k) {
    PolicyParams plus = p, minus = p;
    plus.flat[k] += h;
    minus.flat[k] -= h;
    const double fd = (ppo_loss_and_grad(plus, batch, idx, cfg, nullptr, nullptr) -
                       ppo_loss_and_grad(minus, batch, idx, cfg, nullptr, nullptr)) /
                      (2 * h);
    err_num += (grad[k] - fd) * (grad[k] - fd);
    err_den += std::max(grad[k] * grad[k], fd * fd);
  }
  CHECK(std::sqrt(err_num) / std::max(std::sqrt(err_den), 1e-12) < 1e-4);
}

TEST_CASE("two-armed bandit: PPO finds the better arm") {
  RngState rng(23);
  ArchSpec arch{1, 8, 8, HeadKind::Categorical, 2};
  PolicyParams p = init_params(arch, rng);
  PPOConfig cfg;
  cfg.gamma = 1.0;
  cfg.gae_lambda = 1.0;
  cfg.learning_rate = 0.01;
  cfg.epochs = 2;
  cfg.minibatches = 1;
  cfg.entropy_coef = 0.0;
  cfg.value_clip = false;
  AdamState adam;
  const std::vector<double> obs{1.0};
  for (int update = 0; update < 200; ++update) {
    Trajectory t = make_traj({}, {}, {}, 0.0);
    for (int i = 0; i < 32; ++i) {
      const ActionSample a = sample_action(p, obs, rng);
      t.observations.push_back(obs);
      t.actions.push_back(a.action);
      t.values.push_back(a.value);
      t.log_probs.push_back(a.log_prob);
      t.rewards.push_back(a.action.discrete == 0 ? 1.0 : 0.0);
      t.dones.push_back(1);
    }
    RngState ppo_rng = rng.split(update);
    ppo_update(p, adam, {t}, cfg, ppo_rng);
  }
  const auto probs = dist::categorical_probs(policy_forward(p, obs).head);
  CHECK(probs[0] > 0.95);
}

TEST_CASE("gaussian policy: log-prob and entropy identities") {
  const std::vector<double> mean{0.5, -0.25};
  const std::vector<double> log_std{0.0, 0.0};
  // At the mean with unit sigma: logp = -0.5*log(2*pi) per dimension.
  const double lp = dist::gaussian_log_prob(mean, log_std, mean);
  CHECK(lp == doctest::Approx(-std::log(2 * 3.141592653589793)).epsilon(1e-12));
  const double h = dist::gaussian_entropy(log_std);
  CHECK(h == doctest::Approx(std::log(2 * 3.141592653589793 * std::exp(1.0))));
}

TEST_CASE("checkpoints round-trip bitwise") {
  RngState rng(29);
  ArchSpec arch{9, 64, 64, HeadKind::Gaussian, 2};
  const PolicyParams p = init_params(arch, rng);
  const std::string path = "/tmp/uedkit_test_checkpoint.ckpt";
  save_checkpoint(path, p);
  const PolicyParams q = load_checkpoint(path);
  CHECK(q.arch == p.arch);
  CHECK(q.flat == p.flat);
  CHECK_THROWS_AS(load_checkpoint("/tmp/uedkit_missing.ckpt"),
                  std::runtime_error);
}

TEST_CASE("non-finite losses abort the update with a diagnostic") {
  RngState rng(31);
  ArchSpec arch{2, 4, 4, HeadKind::Categorical, 2};
  PolicyParams p = init_params(arch, rng);
  Trajectory t = make_traj({1e308}, {1e308}, {1}, 0.0);
  t.observations = {{1.0, 1.0}};
  t.actions = {Action{}};
  t.log_probs = {-1.0};
  PPOConfig cfg;
  AdamState adam;
  RngState ppo_rng(1);
  CHECK_THROWS_AS(ppo_update(p, adam, {t}, cfg, ppo_rng), TrainingError);
}
