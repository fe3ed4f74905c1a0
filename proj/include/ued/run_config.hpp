#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "ued/level.hpp"
#include "ued/level_buffer.hpp"
#include "ued/ppo.hpp"

namespace ued {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class UedMode { Dr, Plr, Accel };
enum class EditCriterion { Easy, Batch };
enum class GeneratorKind { Simple, DrRange };  // simple: empty room / easy init

const char* to_string(UedMode m);
const char* to_string(EditCriterion c);
const char* to_string(GeneratorKind g);

struct UedConfig {
  UedMode mode = UedMode::Accel;
  double replay_rate = 0.8;  // p
  double edit_rate = 1.0;    // q
  int n_edits = 5;           // grid edits per child
  EditCriterion edit_criterion = EditCriterion::Easy;
  int edit_count = 4;  // "easy": top-k easiest of the replay window
  GeneratorKind generator = GeneratorKind::Simple;
  long total_updates = 300;
  long eval_every = 100;  // checkpoint cadence, in student updates
  uint64_t seed = 1;

  bool operator==(const UedConfig&) const = default;
};

struct EnvSpec {
  LevelKind kind = LevelKind::MazeGrid;
  int width = 15;
  int height = 15;
  int dr_min_obstacles = 0;
  int dr_max_obstacles = 60;
  int t_max = 250;
  TerrainMode terrain_mode = TerrainMode::EightD;

  bool operator==(const EnvSpec&) const = default;
};

struct RunConfig {
  EnvSpec env;
  PPOConfig ppo;
  BufferConfig buffer;
  UedConfig ued;
  std::string output_dir = "out";

  bool operator==(const RunConfig&) const = default;
};

// Flat INI-style config: [section] headers, key = value lines, '#' comments.
// Unknown sections or keys are errors; omitted keys keep their defaults.
RunConfig parse_run_config(const std::string& text);

// Canonical serialization; parse_run_config(serialize_run_config(c)) == c.
std::string serialize_run_config(const RunConfig& config);

// "section.key=value", applied on top of a parsed config.
void apply_override(RunConfig& config, const std::string& assignment);

// Cross-field validation; throws ConfigError naming the offending fields.
void validate_run_config(const RunConfig& config);

}  // namespace ued
