#include "ued/ued_loop.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <thread>

#include <nlohmann/json.hpp>

#include "ued/gae.hpp"
#include "ued/grid_env.hpp"
#include "ued/regret.hpp"
#include "ued/terrain_env.hpp"

namespace ued {

namespace {

// Rng stream tags; each iteration derives independent substreams from these.
enum Stream : uint64_t {
  kInitStream = 1,
  kDecision = 2,
  kGenerate = 3,
  kSampleBuffer = 4,
  kPpo = 5,
  kEditDecision = 6,
  kEdit = 7,
  kEvalRollout = 8,
  kWorkerBase = 100,
};

// Running std of discounted returns; rewards are divided by it when return
// normalization is enabled. Updated only from training rollouts.
class ReturnNormalizer {
 public:
  explicit ReturnNormalizer(double gamma) : gamma_(gamma) {}

  void observe_and_scale(Trajectory& traj) {
    for (int t = 0; t < traj.length(); ++t) {
      running_ = traj.dones[t] ? 0.0 : running_ * gamma_ + traj.rewards[t];
      push(running_);
      traj.rewards[t] /= denom();
    }
  }

  void scale_only(Trajectory& traj) const {
    for (double& r : traj.rewards) r /= denom();
  }

 private:
  void push(double x) {
    ++count_;
    const double d = x - mean_;
    mean_ += d / count_;
    m2_ += d * (x - mean_);
  }
  double denom() const {
    if (count_ < 2) return 1.0;
    return std::max(std::sqrt(m2_ / count_), 1e-6);
  }

  double gamma_;
  double running_ = 0.0;
  double mean_ = 0.0;
  double m2_ = 0.0;
  long count_ = 0;
};

struct SegmentScore {
  double pvl = 0.0;       // mean positive value loss across episode segments
  double mean_return = 0.0;
  int complete_episodes = 0;
};

// Scores a batch of trajectories from one level: PVL per episode segment
// (with the trailing partial segment included), averaged.
SegmentScore score_trajectories(const std::vector<Trajectory>& trajs,
                                double gamma, double lambda) {
  SegmentScore out;
  double pvl_total = 0.0;
  int segments = 0;
  double return_total = 0.0;
  for (const Trajectory& traj : trajs) {
    const GaeResult gae = compute_gae(traj, gamma, lambda);
    int start = 0;
    double ep_return = 0.0;
    for (int t = 0; t < traj.length(); ++t) {
      ep_return += traj.rewards[t];
      const bool boundary = traj.dones[t] || t == traj.length() - 1;
      if (!boundary) continue;
      const std::span<const double> td(gae.td_errors.data() + start,
                                       static_cast<size_t>(t - start + 1));
      pvl_total += positive_value_loss(td, gamma, lambda).value;
      ++segments;
      if (traj.dones[t]) {
        return_total += ep_return;
        ++out.complete_episodes;
      }
      ep_return = 0.0;
      start = t + 1;
    }
  }
  out.pvl = segments > 0 ? pvl_total / segments : 0.0;
  out.mean_return =
      out.complete_episodes > 0 ? return_total / out.complete_episodes : 0.0;
  return out;
}

class Trainer {
 public:
  Trainer(const RunConfig& config, TrainerHooks hooks)
      : cfg_(config),
        hooks_(std::move(hooks)),
        run_rng_(config.ued.seed),
        buffer_(config.buffer),
        normalizer_(config.ppo.gamma) {}

  RunArtifacts run();

 private:
  bool is_terrain() const { return cfg_.env.kind == LevelKind::Terrain; }

  Level generate_level(RngState& rng) {
    const uint64_t id = next_level_id_++;
    if (is_terrain()) {
      return cfg_.ued.generator == GeneratorKind::Simple
                 ? terrain::easy_init(cfg_.env.terrain_mode, rng, id)
                 : terrain::sample_dr(rng, cfg_.env.terrain_mode, id);
    }
    grid::DrConfig dr{0, 0};
    if (cfg_.ued.generator == GeneratorKind::DrRange) {
      dr = {cfg_.env.dr_min_obstacles, cfg_.env.dr_max_obstacles};
    }
    return grid::sample_dr(rng, cfg_.env.kind, cfg_.env.width, cfg_.env.height,
                           dr, id);
  }

  Level edit_level(const Level& parent, RngState& rng) {
    const uint64_t id = next_level_id_++;
    return is_terrain() ? terrain::edit(parent, rng, id)
                        : grid::edit(parent, rng, cfg_.ued.n_edits, id);
  }

  LevelStats stats_for(const Level& level) {
    LevelStats s;
    if (level.is_grid()) {
      const grid::Complexity c = grid::complexity(level);
      s.obstacle_count = c.obstacle_count;
      s.shortest_path = c.shortest_path ? *c.shortest_path : -1.0;
      s.solvable = c.solvable;
    } else {
      s.solvable = true;
      s.category = static_cast<int>(terrain::categorize(level));
    }
    return s;
  }

  // One worker's fixed-length rollout segment; episodes reset on the same
  // level, the trailing partial episode bootstraps with V(s_T).
  Trajectory collect_segment(const Level& level, RngState rng, int n_steps,
                             TrajectorySource source) {
    Trajectory traj;
    traj.source = source;
    traj.level_id = level.id;
    if (is_terrain()) {
      const terrain::Course course = terrain::render_course(level.terrain());
      terrain::TerrainState state = terrain::reset(level);
      std::vector<double> obs = terrain::observe(course, state);
      for (int t = 0; t < n_steps; ++t) {
        const ActionSample a = sample_action(params_, obs, rng);
        terrain::StepResult r = terrain::step(course, state, a.action.continuous);
        traj.observations.push_back(std::move(obs));
        traj.actions.push_back(a.action);
        traj.rewards.push_back(r.reward);
        traj.values.push_back(a.value);
        traj.log_probs.push_back(a.log_prob);
        traj.dones.push_back(r.done ? 1 : 0);
        if (r.done) {
          state = terrain::reset(level);
          obs = terrain::observe(course, state);
        } else {
          state = r.state;
          obs = std::move(r.observation);
        }
      }
      traj.bootstrap_value =
          traj.dones.back() ? 0.0 : state_value(params_, obs);
    } else {
      grid::GridState state = grid::reset(level);
      std::vector<double> obs = grid::observe(level, state);
      for (int t = 0; t < n_steps; ++t) {
        const ActionSample a = sample_action(params_, obs, rng);
        grid::StepResult r =
            grid::step(level, state, a.action.discrete, cfg_.env.t_max);
        traj.observations.push_back(std::move(obs));
        traj.actions.push_back(a.action);
        traj.rewards.push_back(r.reward);
        traj.values.push_back(a.value);
        traj.log_probs.push_back(a.log_prob);
        traj.dones.push_back(r.done ? 1 : 0);
        if (r.done) {
          state = grid::reset(level);
          obs = grid::observe(level, state);
        } else {
          state = r.state;
          obs = std::move(r.observation);
        }
      }
      traj.bootstrap_value =
          traj.dones.back() ? 0.0 : state_value(params_, obs);
    }
    return traj;
  }

  // A single complete stop-gradient episode used for scoring levels.
  Trajectory collect_episode(const Level& level, RngState rng,
                             TrajectorySource source) {
    Trajectory traj;
    traj.source = source;
    traj.level_id = level.id;
    const int cap = is_terrain() ? terrain::kMaxSteps : cfg_.env.t_max;
    if (is_terrain()) {
      const terrain::Course course = terrain::render_course(level.terrain());
      terrain::TerrainState state = terrain::reset(level);
      std::vector<double> obs = terrain::observe(course, state);
      for (int t = 0; t < cap && !state.done; ++t) {
        const ActionSample a = sample_action(params_, obs, rng);
        terrain::StepResult r = terrain::step(course, state, a.action.continuous);
        traj.observations.push_back(std::move(obs));
        traj.actions.push_back(a.action);
        traj.rewards.push_back(r.reward);
        traj.values.push_back(a.value);
        traj.log_probs.push_back(a.log_prob);
        traj.dones.push_back(r.done ? 1 : 0);
        state = r.state;
        obs = std::move(r.observation);
      }
    } else {
      grid::GridState state = grid::reset(level);
      std::vector<double> obs = grid::observe(level, state);
      for (int t = 0; t < cap && !state.done; ++t) {
        const ActionSample a = sample_action(params_, obs, rng);
        grid::StepResult r =
            grid::step(level, state, a.action.discrete, cfg_.env.t_max);
        traj.observations.push_back(std::move(obs));
        traj.actions.push_back(a.action);
        traj.rewards.push_back(r.reward);
        traj.values.push_back(a.value);
        traj.log_probs.push_back(a.log_prob);
        traj.dones.push_back(r.done ? 1 : 0);
        state = r.state;
        obs = std::move(r.observation);
      }
    }
    traj.bootstrap_value = 0.0;
    return traj;
  }

  // Fan the per-worker segments out to threads; slot order keeps results
  // deterministic at any worker count.
  std::vector<Trajectory> collect_training_rollouts(const Level& level,
                                                    const RngState& iter_rng) {
    const int w = cfg_.ppo.workers;
    std::vector<Trajectory> out(w);
    auto work = [&](int slot) {
      out[slot] = collect_segment(level, iter_rng.split(kWorkerBase + slot),
                                  cfg_.ppo.rollout_length,
                                  TrajectorySource::Replay);
    };
    if (w == 1) {
      work(0);
    } else {
      std::vector<std::thread> threads;
      threads.reserve(w);
      for (int i = 0; i < w; ++i) threads.emplace_back(work, i);
      for (auto& t : threads) t.join();
    }
    if (cfg_.ppo.return_normalization) {
      for (Trajectory& t : out) normalizer_.observe_and_scale(t);
    }
    return out;
  }

  Trajectory scoring_episode(const Level& level, const RngState& iter_rng,
                             TrajectorySource source) {
    Trajectory traj =
        collect_episode(level, iter_rng.split(kEvalRollout), source);
    if (cfg_.ppo.return_normalization) normalizer_.scale_only(traj);
    return traj;
  }

  void note_trajectories(const std::vector<Trajectory>& trajs) {
    for (const Trajectory& t : trajs) {
      env_steps_ += t.length();
      if (hooks_.on_trajectory) hooks_.on_trajectory(t);
    }
  }

  void log_event(const nlohmann::json& j) { events_ << j.dump() << "\n"; }

  void try_insert(const Level& level, double score, long iter) {
    const LevelStats stats = stats_for(level);
    const std::optional<double> evict_floor = buffer_.min_score();
    const bool full = buffer_.size() >= buffer_.capacity();
    if (buffer_.insert(level, score, stats)) {
      if (full) {
        log_event({{"t", iter},
                   {"event", "evict"},
                   {"min_score", evict_floor ? *evict_floor : 0.0}});
      }
      nlohmann::json j{{"t", iter},
                       {"event", "insert"},
                       {"id", level.id},
                       {"score", score},
                       {"generation", level.generation},
                       {"level", encode_level(level)}};
      if (level.parent_id) j["parent"] = *level.parent_id;
      log_event(j);
    }
  }

  void write_checkpoint(long updates) {
    char name[64];
    std::snprintf(name, sizeof(name), "update_%06ld.ckpt", updates);
    save_checkpoint(checkpoint_dir_ + "/" + name, params_);
    std::snprintf(name, sizeof(name), "buffer_%06ld.txt", updates);
    std::ofstream snap(checkpoint_dir_ + "/" + name);
    snap << buffer_.snapshot();
  }

  // CSV helpers: empty cells for fields that do not apply to a row.
  static std::string cell(double v) { return format_double(v); }

  void write_csv_row(long iter, long updates, const char* branch,
                     const SegmentScore* train_score, const PPOStats* stats);

  RunConfig cfg_;
  TrainerHooks hooks_;
  RngState run_rng_;
  PolicyParams params_;
  AdamState adam_;
  LevelBuffer buffer_;
  ReturnNormalizer normalizer_;
  uint64_t next_level_id_ = 1;
  long env_steps_ = 0;
  std::ofstream log_;
  std::ofstream events_;
  std::string checkpoint_dir_;

  struct WindowEntry {
    Level level;
    double easy = 0.0;
  };
  std::vector<WindowEntry> replay_window_;
};

void Trainer::write_csv_row(long iter, long updates, const char* branch,
                            const SegmentScore* train_score,
                            const PPOStats* stats) {
  std::vector<std::string> cells;
  cells.reserve(21);
  cells.push_back(std::to_string(iter));
  cells.push_back(std::to_string(updates));
  cells.push_back(std::to_string(env_steps_));
  cells.push_back(branch);
  cells.push_back(train_score && train_score->complete_episodes > 0
                      ? cell(train_score->mean_return)
                      : "");
  if (stats) {
    cells.push_back(cell(stats->policy_loss));
    cells.push_back(cell(stats->value_loss));
    cells.push_back(cell(stats->entropy));
    cells.push_back(cell(stats->clip_fraction));
    cells.push_back(cell(stats->grad_norm));
  } else {
    cells.insert(cells.end(), 5, "");
  }
  // Buffer columns stay empty in DR mode (and before the first insertion).
  if (cfg_.ued.mode == UedMode::Dr || buffer_.empty()) {
    cells.insert(cells.end(), 11, "");
  } else {
    const auto& entries = buffer_.entries();
    double score_sum = 0.0, obstacles = 0.0, path_sum = 0.0, gen_sum = 0.0;
    int solvable = 0, with_path = 0;
    int cat_counts[4] = {0, 0, 0, 0};
    for (const BufferEntry& e : entries) {
      score_sum += e.score;
      obstacles += e.stats.obstacle_count;
      gen_sum += e.level.generation;
      if (e.stats.shortest_path >= 0) {
        path_sum += e.stats.shortest_path;
        ++with_path;
      }
      if (e.stats.solvable) ++solvable;
      if (e.stats.category >= 0) ++cat_counts[e.stats.category];
    }
    const double n = static_cast<double>(entries.size());
    cells.push_back(std::to_string(entries.size()));
    cells.push_back(cell(*buffer_.min_score()));
    cells.push_back(cell(score_sum / n));
    cells.push_back(cell(obstacles / n));
    cells.push_back(with_path > 0 ? cell(path_sum / with_path) : "");
    cells.push_back(cell(solvable / n));
    cells.push_back(cell(gen_sum / n));
    if (is_terrain()) {
      for (int c = 0; c < 4; ++c) cells.push_back(cell(cat_counts[c] / n));
    } else {
      cells.insert(cells.end(), 4, "");
    }
  }
  for (size_t i = 0; i < cells.size(); ++i) {
    if (i) log_ << ',';
    log_ << cells[i];
  }
  log_ << '\n';
}

RunArtifacts Trainer::run() {
  namespace fs = std::filesystem;
  validate_run_config(cfg_);
  fs::create_directories(cfg_.output_dir);
  checkpoint_dir_ = cfg_.output_dir + "/checkpoints";
  fs::create_directories(checkpoint_dir_);

  {
    std::ofstream resolved(cfg_.output_dir + "/config_resolved.ini");
    resolved << serialize_run_config(cfg_);
  }
  log_.open(cfg_.output_dir + "/train_log.csv");
  events_.open(cfg_.output_dir + "/events.jsonl");
  log_ << "iter,updates,env_steps,branch,train_return,policy_loss,value_loss,"
          "entropy,clip_fraction,grad_norm,buffer_size,buffer_min_score,"
          "buffer_mean_score,buffer_mean_obstacles,buffer_mean_shortest_path,"
          "buffer_solvable_frac,buffer_mean_generation,frac_easy,"
          "frac_challenging,frac_very_challenging,frac_extremely_challenging\n";

  const ArchSpec arch = arch_for_env(cfg_.env, cfg_.ppo.hidden);
  RngState init_rng = run_rng_.split(kInitStream);
  params_ = init_params(arch, init_rng);

  // Optional initial fill: DR-sampled, evaluated, threshold-inserted.
  const long fill =
      std::lround(cfg_.buffer.fill_ratio * static_cast<double>(cfg_.buffer.capacity));
  if (cfg_.ued.mode != UedMode::Dr) {
    for (long i = 0; i < fill; ++i) {
      RngState rng = run_rng_.split(kGenerate).split(1000000 + i);
      Level level = generate_level(rng);
      Trajectory traj = scoring_episode(level, rng, TrajectorySource::Generator);
      note_trajectories({traj});
      const SegmentScore s =
          score_trajectories({traj}, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
      try_insert(level, s.pvl, 0);
    }
  }

  long iter = 0;
  long updates = 0;
  // A replay rate of 0 outside DR mode would explore forever.
  const long iteration_cap = cfg_.ued.total_updates * 1000 + 1000;
  try {
    while (updates < cfg_.ued.total_updates) {
      ++iter;
      if (iter > iteration_cap) {
        throw TrainingError("replay starvation: no student updates after " +
                            std::to_string(iter - 1) + " iterations");
      }
      buffer_.tick();
      RngState iter_rng = run_rng_.split(iter);

      if (cfg_.ued.mode == UedMode::Dr) {
        RngState gen_rng = iter_rng.split(kGenerate);
        const Level level = generate_level(gen_rng);
        std::vector<Trajectory> trajs = collect_training_rollouts(level, iter_rng);
        // DR trains on fresh generator levels directly.
        for (Trajectory& t : trajs) t.source = TrajectorySource::Generator;
        note_trajectories(trajs);
        if (hooks_.on_ppo_batch) hooks_.on_ppo_batch(trajs);
        RngState ppo_rng = iter_rng.split(kPpo);
        const PPOStats stats =
            ppo_update(params_, adam_, trajs, cfg_.ppo, ppo_rng);
        ++updates;
        const SegmentScore s =
            score_trajectories(trajs, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
        write_csv_row(iter, updates, "dr", &s, &stats);
        if (updates % cfg_.ued.eval_every == 0) write_checkpoint(updates);
        if (hooks_.on_iteration) hooks_.on_iteration(iter, updates, params_);
        continue;
      }

      RngState decision_rng = iter_rng.split(kDecision);
      const bool replay =
          decision_rng.bernoulli(cfg_.ued.replay_rate) && !buffer_.empty();

      if (!replay) {
        // Explore branch: evaluate a fresh generator level, never train.
        RngState gen_rng = iter_rng.split(kGenerate);
        const Level level = generate_level(gen_rng);
        Trajectory traj =
            scoring_episode(level, iter_rng, TrajectorySource::Generator);
        note_trajectories({traj});
        const SegmentScore s =
            score_trajectories({traj}, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
        try_insert(level, s.pvl, iter);
        write_csv_row(iter, updates, "explore", nullptr, nullptr);
        if (hooks_.on_iteration) hooks_.on_iteration(iter, updates, params_);
        continue;
      }

      // Replay branch: train on a curated level.
      RngState sample_rng = iter_rng.split(kSampleBuffer);
      const Level level = buffer_.sample(sample_rng);
      std::vector<Trajectory> trajs = collect_training_rollouts(level, iter_rng);
      note_trajectories(trajs);
      for (const Trajectory& t : trajs) {
        if (t.source != TrajectorySource::Replay) {
          throw TrainingError("training on a non-replay trajectory");
        }
      }
      if (hooks_.on_ppo_batch) hooks_.on_ppo_batch(trajs);
      RngState ppo_rng = iter_rng.split(kPpo);
      const PPOStats stats = ppo_update(params_, adam_, trajs, cfg_.ppo, ppo_rng);
      ++updates;

      const SegmentScore s =
          score_trajectories(trajs, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
      buffer_.update_score(level.id, s.pvl);

      if (cfg_.ued.mode == UedMode::Accel) {
        // The replay window holds levels replayed since the last edit phase;
        // the "easy" criterion picks the highest (return - regret) among them.
        double easy_sum = 0.0;
        for (const Trajectory& t : trajs) {
          easy_sum += easy_score(t, RegretScore{s.pvl});
        }
        replay_window_.push_back(
            {level, easy_sum / static_cast<double>(trajs.size())});
        RngState edit_decision = iter_rng.split(kEditDecision);
        if (edit_decision.bernoulli(cfg_.ued.edit_rate)) {
          std::vector<const WindowEntry*> selected;
          if (cfg_.ued.edit_criterion == EditCriterion::Batch) {
            for (const auto& w : replay_window_) selected.push_back(&w);
          } else {
            std::vector<const WindowEntry*> sorted;
            for (const auto& w : replay_window_) sorted.push_back(&w);
            std::stable_sort(sorted.begin(), sorted.end(),
                             [](const WindowEntry* a, const WindowEntry* b) {
                               return a->easy > b->easy;
                             });
            const size_t k = std::min<size_t>(cfg_.ued.edit_count, sorted.size());
            selected.assign(sorted.begin(), sorted.begin() + k);
          }
          RngState edit_rng = iter_rng.split(kEdit);
          int child_no = 0;
          for (const WindowEntry* w : selected) {
            RngState child_rng = edit_rng.split(child_no++);
            const Level child = edit_level(w->level, child_rng);
            log_event({{"t", iter},
                       {"event", "edit"},
                       {"parent", w->level.id},
                       {"child", child.id},
                       {"generation", child.generation}});
            Trajectory traj =
                scoring_episode(child, child_rng, TrajectorySource::EditEval);
            note_trajectories({traj});
            const SegmentScore cs =
                score_trajectories({traj}, cfg_.ppo.gamma, cfg_.ppo.gae_lambda);
            try_insert(child, cs.pvl, iter);
          }
          replay_window_.clear();
        }
      }

      write_csv_row(iter, updates, "replay", &s, &stats);
      if (updates % cfg_.ued.eval_every == 0) write_checkpoint(updates);
      if (hooks_.on_iteration) hooks_.on_iteration(iter, updates, params_);
    }
  } catch (const TrainingError&) {
    save_checkpoint(checkpoint_dir_ + "/diagnostic.ckpt", params_);
    throw;
  }

  write_checkpoint(updates);
  log_.flush();
  events_.flush();

  RunArtifacts artifacts;
  artifacts.params = params_;
  artifacts.output_dir = cfg_.output_dir;
  artifacts.log_path = cfg_.output_dir + "/train_log.csv";
  artifacts.events_path = cfg_.output_dir + "/events.jsonl";
  artifacts.checkpoint_dir = checkpoint_dir_;
  artifacts.total_env_steps = env_steps_;
  artifacts.total_updates = updates;
  artifacts.iterations = iter;
  return artifacts;
}

}  // namespace

ArchSpec arch_for_env(const EnvSpec& env, int hidden) {
  ArchSpec arch;
  arch.hidden1 = arch.hidden2 = hidden;
  if (env.kind == LevelKind::Terrain) {
    arch.input_dim = terrain::kObsDim;
    arch.head = HeadKind::Gaussian;
    arch.action_dim = terrain::kActionDim;
  } else {
    arch.head = HeadKind::Categorical;
    arch.action_dim = grid::action_count(env.kind);
    arch.input_dim = env.kind == LevelKind::MazeGrid
                         ? grid::kMazeObsDim
                         : 3 * env.width * env.height;
  }
  return arch;
}

RunArtifacts run_training(const RunConfig& config, TrainerHooks hooks) {
  Trainer trainer(config, std::move(hooks));
  return trainer.run();
}

}  // namespace ued
