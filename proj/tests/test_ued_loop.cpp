#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "ued/run_config.hpp"
#include "ued/ued_loop.hpp"

using namespace ued;
namespace fs = std::filesystem;

namespace {

RunConfig tiny_lava_config(const std::string& out, UedMode mode,
                           uint64_t seed = 1) {
  RunConfig cfg;
  cfg.env.kind = LevelKind::LavaGrid;
  cfg.env.width = cfg.env.height = 5;
  cfg.env.dr_min_obstacles = 0;
  cfg.env.dr_max_obstacles = 6;
  cfg.env.t_max = 40;
  cfg.ppo.rollout_length = 16;
  cfg.ppo.workers = 1;
  cfg.ppo.hidden = 8;
  cfg.ppo.minibatches = 1;
  cfg.ppo.epochs = 2;
  cfg.buffer.capacity = 32;
  cfg.ued.mode = mode;
  cfg.ued.replay_rate = 0.7;
  cfg.ued.total_updates = 12;
  cfg.ued.eval_every = 6;
  cfg.ued.seed = seed;
  cfg.output_dir = out;
  return cfg;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_column(const std::string& csv,
                                    const std::string& column) {
  std::istringstream in(csv);
  std::string header;
  std::getline(in, header);
  std::vector<std::string> names;
  {
    std::istringstream hs(header);
    std::string cell;
    while (std::getline(hs, cell, ',')) names.push_back(cell);
  }
  int idx = -1;
  for (size_t i = 0; i < names.size(); ++i) {
    if (names[i] == column) idx = static_cast<int>(i);
  }
  REQUIRE(idx >= 0);
  std::vector<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i <= idx; ++i) std::getline(ls, cell, ',');
    out.push_back(cell);
  }
  return out;
}

}  // namespace

TEST_CASE("plr mode never produces edited levels") {
  const std::string out = "/tmp/uedkit_plr_run";
  fs::remove_all(out);
  TrainerHooks hooks;
  hooks.on_trajectory = [](const Trajectory& t) {
    CHECK(t.source != TrajectorySource::EditEval);
  };
  const RunArtifacts art =
      run_training(tiny_lava_config(out, UedMode::Plr), hooks);
  // No edit events, and every inserted level is generation zero.
  std::istringstream events(slurp(art.events_path));
  std::string line;
  while (std::getline(events, line)) {
    const auto j = nlohmann::json::parse(line);
    CHECK(j["event"] != "edit");
    if (j["event"] == "insert") CHECK(j["generation"] == 0);
  }
}

TEST_CASE("accel trains only on buffer levels and explore never updates") {
  const std::string out = "/tmp/uedkit_accel_run";
  fs::remove_all(out);
  RunConfig cfg = tiny_lava_config(out, UedMode::Accel);
  cfg.ued.replay_rate = 1.0;  // always replay once the buffer is non-empty

  std::set<uint64_t> inserted;
  std::vector<double> params_before_explore;
  TrainerHooks hooks;
  hooks.on_ppo_batch = [&](const std::vector<Trajectory>& batch) {
    for (const Trajectory& t : batch) {
      CHECK(t.source == TrajectorySource::Replay);
      CHECK(inserted.count(t.level_id) == 1);
    }
  };
  // Track insertions through the event stream after the run instead; during
  // the run, record ids from generator trajectories that get inserted.
  hooks.on_trajectory = [&](const Trajectory& t) {
    if (t.source != TrajectorySource::Replay) inserted.insert(t.level_id);
  };
  const RunArtifacts art = run_training(cfg, hooks);

  // Explore rows perform no update: the updates column repeats its
  // previous value on every explore row.
  const std::string csv = slurp(art.log_path);
  const auto branches = csv_column(csv, "branch");
  const auto updates = csv_column(csv, "updates");
  long prev = 0;
  for (size_t i = 0; i < branches.size(); ++i) {
    const long u = std::stol(updates[i]);
    if (branches[i] == "explore") {
      CHECK(u == prev);
    } else {
      CHECK(u == prev + 1);
    }
    prev = u;
  }
}

TEST_CASE("explore iterations leave policy parameters unchanged") {
  const std::string out = "/tmp/uedkit_explore_run";
  fs::remove_all(out);
  RunConfig cfg = tiny_lava_config(out, UedMode::Plr);
  cfg.ued.replay_rate = 0.5;

  std::vector<double> last_params;
  long last_updates = -1;
  bool saw_explore_after_update = false;
  TrainerHooks hooks;
  hooks.on_iteration = [&](long, long updates, const PolicyParams& p) {
    if (updates == last_updates && !last_params.empty()) {
      CHECK(p.flat == last_params);  // no update happened this iteration
      saw_explore_after_update = true;
    }
    last_params = p.flat;
    last_updates = updates;
  };
  run_training(cfg, hooks);
  CHECK(saw_explore_after_update);
}

TEST_CASE("lineage soundness: ancestor chains end at generator roots") {
  const std::string out = "/tmp/uedkit_lineage_run";
  fs::remove_all(out);
  RunConfig cfg = tiny_lava_config(out, UedMode::Accel, 3);
  cfg.ued.total_updates = 30;
  const RunArtifacts art = run_training(cfg);

  struct Node {
    uint32_t generation = 0;
    bool has_parent = false;
    uint64_t parent = 0;
  };
  std::map<uint64_t, Node> nodes;
  std::istringstream events(slurp(art.events_path));
  std::string line;
  int edits = 0;
  while (std::getline(events, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j["event"] == "edit") ++edits;
    if (j["event"] != "insert") continue;
    Node n;
    n.generation = j["generation"].get<uint32_t>();
    if (j.contains("parent")) {
      n.has_parent = true;
      n.parent = j["parent"].get<uint64_t>();
    }
    nodes[j["id"].get<uint64_t>()] = n;
  }
  REQUIRE(edits > 0);
  int checked = 0;
  for (const auto& [id, node] : nodes) {
    if (node.generation == 0) continue;
    // Walk to the root; every hop decrements the generation by one.
    uint64_t cur = id;
    uint32_t gen = node.generation;
    while (nodes.at(cur).has_parent) {
      const uint64_t parent = nodes.at(cur).parent;
      if (!nodes.count(parent)) break;  // parent never inserted (rejected)
      CHECK(nodes.at(parent).generation == gen - 1);
      cur = parent;
      gen = nodes.at(cur).generation;
    }
    ++checked;
  }
  CHECK(checked > 0);
}

TEST_CASE("env-step accounting matches the trajectory lengths") {
  const std::string out = "/tmp/uedkit_steps_run";
  fs::remove_all(out);
  long hook_steps = 0;
  TrainerHooks hooks;
  hooks.on_trajectory = [&](const Trajectory& t) { hook_steps += t.length(); };
  const RunArtifacts art =
      run_training(tiny_lava_config(out, UedMode::Accel, 5), hooks);
  CHECK(art.total_env_steps == hook_steps);

  const auto steps_col = csv_column(slurp(art.log_path), "env_steps");
  CHECK(std::stol(steps_col.back()) == hook_steps);
}

TEST_CASE("identical seeds give byte-identical logs at workers=1") {
  const std::string out_a = "/tmp/uedkit_det_a";
  const std::string out_b = "/tmp/uedkit_det_b";
  fs::remove_all(out_a);
  fs::remove_all(out_b);
  RunConfig a = tiny_lava_config(out_a, UedMode::Accel, 11);
  RunConfig b = tiny_lava_config(out_b, UedMode::Accel, 11);
  run_training(a);
  run_training(b);
  CHECK(slurp(out_a + "/train_log.csv") == slurp(out_b + "/train_log.csv"));
  CHECK(slurp(out_a + "/events.jsonl") == slurp(out_b + "/events.jsonl"));

  RunConfig c = tiny_lava_config("/tmp/uedkit_det_c", UedMode::Accel, 12);
  fs::remove_all(c.output_dir);
  run_training(c);
  CHECK(slurp(out_a + "/train_log.csv") !=
        slurp(c.output_dir + "/train_log.csv"));
}

TEST_CASE("worker fan-out does not change the result") {
  RunConfig a = tiny_lava_config("/tmp/uedkit_w1", UedMode::Accel, 13);
  RunConfig b = tiny_lava_config("/tmp/uedkit_w3", UedMode::Accel, 13);
  a.ppo.workers = 1;
  b.ppo.workers = 3;
  fs::remove_all(a.output_dir);
  fs::remove_all(b.output_dir);
  run_training(a);
  run_training(b);
  // Different batch sizes, but both deterministic: rerunning b reproduces b.
  RunConfig b2 = b;
  b2.output_dir = "/tmp/uedkit_w3_again";
  fs::remove_all(b2.output_dir);
  run_training(b2);
  CHECK(slurp(b.output_dir + "/train_log.csv") ==
        slurp(b2.output_dir + "/train_log.csv"));
}

TEST_CASE("dr mode leaves buffer columns empty") {
  const std::string out = "/tmp/uedkit_dr_run";
  fs::remove_all(out);
  const RunArtifacts art = run_training(tiny_lava_config(out, UedMode::Dr));
  const auto sizes = csv_column(slurp(art.log_path), "buffer_size");
  for (const auto& cell : sizes) CHECK(cell.empty());
  const auto branches = csv_column(slurp(art.log_path), "branch");
  for (const auto& cell : branches) CHECK(cell == "dr");
}

TEST_CASE("config snapshot round-trips") {
  const std::string out = "/tmp/uedkit_snapshot_run";
  fs::remove_all(out);
  RunConfig cfg = tiny_lava_config(out, UedMode::Accel, 21);
  run_training(cfg);
  const RunConfig reparsed = parse_run_config(slurp(out + "/config_resolved.ini"));
  CHECK(reparsed == cfg);
}

TEST_CASE("checkpoints are written on the eval cadence") {
  const std::string out = "/tmp/uedkit_ckpt_run";
  fs::remove_all(out);
  const RunArtifacts art = run_training(tiny_lava_config(out, UedMode::Plr, 2));
  CHECK(fs::exists(art.checkpoint_dir + "/update_000006.ckpt"));
  CHECK(fs::exists(art.checkpoint_dir + "/update_000012.ckpt"));
  CHECK(fs::exists(art.checkpoint_dir + "/buffer_000012.txt"));
  const PolicyParams p =
      load_checkpoint(art.checkpoint_dir + "/update_000012.ckpt");
  CHECK(p.flat == art.params.flat);
}

TEST_CASE("terrain training runs end to end with category fractions") {
  const std::string out = "/tmp/uedkit_terrain_run";
  fs::remove_all(out);
  RunConfig cfg;
  cfg.env.kind = LevelKind::Terrain;
  cfg.env.terrain_mode = TerrainMode::FiveD;
  cfg.ppo.rollout_length = 64;
  cfg.ppo.workers = 2;
  cfg.ppo.hidden = 8;
  cfg.ppo.epochs = 2;
  cfg.ppo.minibatches = 2;
  cfg.ppo.gamma = 0.99;
  cfg.ppo.gae_lambda = 0.9;
  cfg.ppo.return_normalization = true;
  cfg.ppo.value_clip = false;
  cfg.buffer.capacity = 50;
  cfg.ued.mode = UedMode::Accel;
  cfg.ued.replay_rate = 0.6;
  cfg.ued.total_updates = 8;
  cfg.ued.eval_every = 8;
  cfg.ued.seed = 7;
  cfg.output_dir = out;
  const RunArtifacts art = run_training(cfg);
  CHECK(art.total_updates == 8);
  const auto frac = csv_column(slurp(art.log_path), "frac_easy");
  bool any = false;
  for (const auto& cell : frac) any = any || !cell.empty();
  CHECK(any);
}

TEST_CASE("initial fill seeds the buffer before the main loop") {
  const std::string out = "/tmp/uedkit_fill_run";
  fs::remove_all(out);
  RunConfig cfg = tiny_lava_config(out, UedMode::Plr, 9);
  cfg.buffer.fill_ratio = 0.25;  // 8 of 32
  cfg.ued.total_updates = 1;
  const RunArtifacts art = run_training(cfg);
  int inserts_at_t0 = 0;
  std::istringstream events(slurp(art.events_path));
  std::string line;
  while (std::getline(events, line)) {
    const auto j = nlohmann::json::parse(line);
    if (j["event"] == "insert" && j["t"] == 0) ++inserts_at_t0;
  }
  CHECK(inserts_at_t0 == 8);
}
