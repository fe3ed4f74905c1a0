#include "ued/run_config.hpp"

#include <cerrno>
#include <cstdlib>
#include <functional>
#include <sstream>
#include <vector>

namespace ued {

const char* to_string(UedMode m) {
  switch (m) {
    case UedMode::Dr: return "dr";
    case UedMode::Plr: return "plr";
    case UedMode::Accel: return "accel";
  }
  return "?";
}

const char* to_string(EditCriterion c) {
  return c == EditCriterion::Easy ? "easy" : "batch";
}

const char* to_string(GeneratorKind g) {
  return g == GeneratorKind::Simple ? "simple" : "dr-range";
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

using Field = std::function<void(RunConfig&, const std::string&)>;
using Printer = std::function<std::string(const RunConfig&)>;

struct FieldSpec {
  const char* section;
  const char* key;
  Field set;
  Printer print;
};

[[noreturn]] void fail(const std::string& where, const std::string& why) {
  throw ConfigError("config error at " + where + ": " + why);
}

double to_double(const std::string& v, const std::string& where) {
  char* end = nullptr;
  errno = 0;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || errno != 0 || end != v.c_str() + v.size()) {
    fail(where, "expected a number, got '" + v + "'");
  }
  return x;
}

long to_long(const std::string& v, const std::string& where) {
  char* end = nullptr;
  errno = 0;
  const long x = std::strtol(v.c_str(), &end, 10);
  if (v.empty() || errno != 0 || end != v.c_str() + v.size()) {
    fail(where, "expected an integer, got '" + v + "'");
  }
  return x;
}

bool to_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  fail(where, "expected a boolean, got '" + v + "'");
}

const std::vector<FieldSpec>& field_table() {
  static const std::vector<FieldSpec> table = [] {
    std::vector<FieldSpec> t;
    auto add = [&t](const char* sec, const char* key, Field f, Printer p) {
      t.push_back({sec, key, std::move(f), std::move(p)});
    };

    add("env", "kind",
        [](RunConfig& c, const std::string& v) {
          if (v == "lava-grid") c.env.kind = LevelKind::LavaGrid;
          else if (v == "maze-grid") c.env.kind = LevelKind::MazeGrid;
          else if (v == "terrain") c.env.kind = LevelKind::Terrain;
          else fail("env.kind", "unknown kind '" + v + "'");
        },
        [](const RunConfig& c) { return std::string(to_string(c.env.kind)); });
    add("env", "width",
        [](RunConfig& c, const std::string& v) { c.env.width = static_cast<int>(to_long(v, "env.width")); },
        [](const RunConfig& c) { return std::to_string(c.env.width); });
    add("env", "height",
        [](RunConfig& c, const std::string& v) { c.env.height = static_cast<int>(to_long(v, "env.height")); },
        [](const RunConfig& c) { return std::to_string(c.env.height); });
    add("env", "dr_min_obstacles",
        [](RunConfig& c, const std::string& v) { c.env.dr_min_obstacles = static_cast<int>(to_long(v, "env.dr_min_obstacles")); },
        [](const RunConfig& c) { return std::to_string(c.env.dr_min_obstacles); });
    add("env", "dr_max_obstacles",
        [](RunConfig& c, const std::string& v) { c.env.dr_max_obstacles = static_cast<int>(to_long(v, "env.dr_max_obstacles")); },
        [](const RunConfig& c) { return std::to_string(c.env.dr_max_obstacles); });
    add("env", "t_max",
        [](RunConfig& c, const std::string& v) { c.env.t_max = static_cast<int>(to_long(v, "env.t_max")); },
        [](const RunConfig& c) { return std::to_string(c.env.t_max); });
    add("env", "terrain_mode",
        [](RunConfig& c, const std::string& v) {
          if (v == "5d") c.env.terrain_mode = TerrainMode::FiveD;
          else if (v == "8d") c.env.terrain_mode = TerrainMode::EightD;
          else fail("env.terrain_mode", "expected 5d or 8d, got '" + v + "'");
        },
        [](const RunConfig& c) {
          return std::string(c.env.terrain_mode == TerrainMode::FiveD ? "5d" : "8d");
        });

    add("ppo", "gamma",
        [](RunConfig& c, const std::string& v) { c.ppo.gamma = to_double(v, "ppo.gamma"); },
        [](const RunConfig& c) { return format_double(c.ppo.gamma); });
    add("ppo", "gae_lambda",
        [](RunConfig& c, const std::string& v) { c.ppo.gae_lambda = to_double(v, "ppo.gae_lambda"); },
        [](const RunConfig& c) { return format_double(c.ppo.gae_lambda); });
    add("ppo", "rollout_length",
        [](RunConfig& c, const std::string& v) { c.ppo.rollout_length = static_cast<int>(to_long(v, "ppo.rollout_length")); },
        [](const RunConfig& c) { return std::to_string(c.ppo.rollout_length); });
    add("ppo", "epochs",
        [](RunConfig& c, const std::string& v) { c.ppo.epochs = static_cast<int>(to_long(v, "ppo.epochs")); },
        [](const RunConfig& c) { return std::to_string(c.ppo.epochs); });
    add("ppo", "minibatches",
        [](RunConfig& c, const std::string& v) { c.ppo.minibatches = static_cast<int>(to_long(v, "ppo.minibatches")); },
        [](const RunConfig& c) { return std::to_string(c.ppo.minibatches); });
    add("ppo", "clip_range",
        [](RunConfig& c, const std::string& v) { c.ppo.clip_range = to_double(v, "ppo.clip_range"); },
        [](const RunConfig& c) { return format_double(c.ppo.clip_range); });
    add("ppo", "workers",
        [](RunConfig& c, const std::string& v) { c.ppo.workers = static_cast<int>(to_long(v, "ppo.workers")); },
        [](const RunConfig& c) { return std::to_string(c.ppo.workers); });
    add("ppo", "learning_rate",
        [](RunConfig& c, const std::string& v) { c.ppo.learning_rate = to_double(v, "ppo.learning_rate"); },
        [](const RunConfig& c) { return format_double(c.ppo.learning_rate); });
    add("ppo", "adam_eps",
        [](RunConfig& c, const std::string& v) { c.ppo.adam_eps = to_double(v, "ppo.adam_eps"); },
        [](const RunConfig& c) { return format_double(c.ppo.adam_eps); });
    add("ppo", "max_grad_norm",
        [](RunConfig& c, const std::string& v) { c.ppo.max_grad_norm = to_double(v, "ppo.max_grad_norm"); },
        [](const RunConfig& c) { return format_double(c.ppo.max_grad_norm); });
    add("ppo", "value_clip",
        [](RunConfig& c, const std::string& v) { c.ppo.value_clip = to_bool(v, "ppo.value_clip"); },
        [](const RunConfig& c) { return std::string(c.ppo.value_clip ? "true" : "false"); });
    add("ppo", "value_coef",
        [](RunConfig& c, const std::string& v) { c.ppo.value_coef = to_double(v, "ppo.value_coef"); },
        [](const RunConfig& c) { return format_double(c.ppo.value_coef); });
    add("ppo", "entropy_coef",
        [](RunConfig& c, const std::string& v) { c.ppo.entropy_coef = to_double(v, "ppo.entropy_coef"); },
        [](const RunConfig& c) { return format_double(c.ppo.entropy_coef); });
    add("ppo", "return_normalization",
        [](RunConfig& c, const std::string& v) { c.ppo.return_normalization = to_bool(v, "ppo.return_normalization"); },
        [](const RunConfig& c) { return std::string(c.ppo.return_normalization ? "true" : "false"); });
    add("ppo", "hidden",
        [](RunConfig& c, const std::string& v) { c.ppo.hidden = static_cast<int>(to_long(v, "ppo.hidden")); },
        [](const RunConfig& c) { return std::to_string(c.ppo.hidden); });

    add("buffer", "capacity",
        [](RunConfig& c, const std::string& v) { c.buffer.capacity = static_cast<size_t>(to_long(v, "buffer.capacity")); },
        [](const RunConfig& c) { return std::to_string(c.buffer.capacity); });
    add("buffer", "temperature",
        [](RunConfig& c, const std::string& v) { c.buffer.temperature = to_double(v, "buffer.temperature"); },
        [](const RunConfig& c) { return format_double(c.buffer.temperature); });
    add("buffer", "staleness_coef",
        [](RunConfig& c, const std::string& v) { c.buffer.staleness_coef = to_double(v, "buffer.staleness_coef"); },
        [](const RunConfig& c) { return format_double(c.buffer.staleness_coef); });
    add("buffer", "fill_ratio",
        [](RunConfig& c, const std::string& v) { c.buffer.fill_ratio = to_double(v, "buffer.fill_ratio"); },
        [](const RunConfig& c) { return format_double(c.buffer.fill_ratio); });

    add("ued", "mode",
        [](RunConfig& c, const std::string& v) {
          if (v == "dr") c.ued.mode = UedMode::Dr;
          else if (v == "plr") c.ued.mode = UedMode::Plr;
          else if (v == "accel") c.ued.mode = UedMode::Accel;
          else fail("ued.mode", "expected dr|plr|accel, got '" + v + "'");
        },
        [](const RunConfig& c) { return std::string(to_string(c.ued.mode)); });
    add("ued", "replay_rate",
        [](RunConfig& c, const std::string& v) { c.ued.replay_rate = to_double(v, "ued.replay_rate"); },
        [](const RunConfig& c) { return format_double(c.ued.replay_rate); });
    add("ued", "edit_rate",
        [](RunConfig& c, const std::string& v) { c.ued.edit_rate = to_double(v, "ued.edit_rate"); },
        [](const RunConfig& c) { return format_double(c.ued.edit_rate); });
    add("ued", "n_edits",
        [](RunConfig& c, const std::string& v) { c.ued.n_edits = static_cast<int>(to_long(v, "ued.n_edits")); },
        [](const RunConfig& c) { return std::to_string(c.ued.n_edits); });
    add("ued", "edit_criterion",
        [](RunConfig& c, const std::string& v) {
          if (v == "easy") c.ued.edit_criterion = EditCriterion::Easy;
          else if (v == "batch") c.ued.edit_criterion = EditCriterion::Batch;
          else fail("ued.edit_criterion", "expected easy|batch, got '" + v + "'");
        },
        [](const RunConfig& c) { return std::string(to_string(c.ued.edit_criterion)); });
    add("ued", "edit_count",
        [](RunConfig& c, const std::string& v) { c.ued.edit_count = static_cast<int>(to_long(v, "ued.edit_count")); },
        [](const RunConfig& c) { return std::to_string(c.ued.edit_count); });
    add("ued", "generator",
        [](RunConfig& c, const std::string& v) {
          if (v == "simple") c.ued.generator = GeneratorKind::Simple;
          else if (v == "dr-range") c.ued.generator = GeneratorKind::DrRange;
          else fail("ued.generator", "expected simple|dr-range, got '" + v + "'");
        },
        [](const RunConfig& c) { return std::string(to_string(c.ued.generator)); });
    add("ued", "total_updates",
        [](RunConfig& c, const std::string& v) { c.ued.total_updates = to_long(v, "ued.total_updates"); },
        [](const RunConfig& c) { return std::to_string(c.ued.total_updates); });
    add("ued", "eval_every",
        [](RunConfig& c, const std::string& v) { c.ued.eval_every = to_long(v, "ued.eval_every"); },
        [](const RunConfig& c) { return std::to_string(c.ued.eval_every); });
    add("ued", "seed",
        [](RunConfig& c, const std::string& v) { c.ued.seed = static_cast<uint64_t>(to_long(v, "ued.seed")); },
        [](const RunConfig& c) { return std::to_string(c.ued.seed); });

    add("run", "output_dir",
        [](RunConfig& c, const std::string& v) { c.output_dir = v; },
        [](const RunConfig& c) { return c.output_dir; });
    return t;
  }();
  return table;
}

const FieldSpec* find_field(const std::string& section, const std::string& key) {
  for (const FieldSpec& f : field_table()) {
    if (section == f.section && key == f.key) return &f;
  }
  return nullptr;
}

}  // namespace

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (line.front() == '[') {
      if (line.back() != ']') fail(where, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(where, "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) fail(where, "key outside any [section]");
    const FieldSpec* f = find_field(section, key);
    if (!f) fail(where, "unknown key '" + section + "." + key + "'");
    try {
      f->set(cfg, value);
    } catch (const ConfigError& e) {
      fail(where, e.what());
    }
  }
  return cfg;
}

std::string serialize_run_config(const RunConfig& config) {
  std::string out;
  std::string section;
  for (const FieldSpec& f : field_table()) {
    if (section != f.section) {
      if (!out.empty()) out += '\n';
      section = f.section;
      out += '[';
      out += section;
      out += "]\n";
    }
    out += f.key;
    out += " = ";
    out += f.print(config);
    out += '\n';
  }
  return out;
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be section.key=value: '" + assignment + "'");
  }
  const std::string path = trim(assignment.substr(0, eq));
  const std::string value = trim(assignment.substr(eq + 1));
  const auto dot = path.find('.');
  if (dot == std::string::npos) {
    throw ConfigError("override key must be section.key: '" + path + "'");
  }
  const FieldSpec* f = find_field(path.substr(0, dot), path.substr(dot + 1));
  if (!f) throw ConfigError("unknown override key '" + path + "'");
  f->set(config, value);
}

void validate_run_config(const RunConfig& config) {
  std::vector<std::string> problems;
  auto check = [&](bool ok, const std::string& msg) {
    if (!ok) problems.push_back(msg);
  };
  const auto& c = config;
  check(c.env.width >= 2 && c.env.height >= 2, "env.width/height must be >= 2");
  check(c.env.t_max >= 1, "env.t_max must be >= 1");
  if (c.env.kind != LevelKind::Terrain) {
    const int cells = c.env.width * c.env.height;
    check(c.env.dr_min_obstacles >= 0 &&
              c.env.dr_max_obstacles >= c.env.dr_min_obstacles &&
              c.env.dr_max_obstacles <= cells - 2,
          "env.dr_*_obstacles must satisfy 0 <= min <= max <= cells-2");
  }
  check(c.ppo.gamma >= 0.0 && c.ppo.gamma <= 1.0, "ppo.gamma must be in [0,1]");
  check(c.ppo.gae_lambda >= 0.0 && c.ppo.gae_lambda <= 1.0,
        "ppo.gae_lambda must be in [0,1]");
  check(c.ppo.clip_range > 0.0, "ppo.clip_range must be > 0");
  check(c.ppo.rollout_length >= 1, "ppo.rollout_length must be >= 1");
  check(c.ppo.epochs >= 1, "ppo.epochs must be >= 1");
  check(c.ppo.minibatches >= 1, "ppo.minibatches must be >= 1");
  check(c.ppo.workers >= 1, "ppo.workers must be >= 1");
  check(c.ppo.hidden >= 1, "ppo.hidden must be >= 1");
  check(c.buffer.temperature > 0.0, "buffer.temperature must be > 0");
  check(c.buffer.staleness_coef >= 0.0 && c.buffer.staleness_coef <= 1.0,
        "buffer.staleness_coef must be in [0,1]");
  check(c.buffer.fill_ratio >= 0.0 && c.buffer.fill_ratio <= 1.0,
        "buffer.fill_ratio must be in [0,1]");
  check(c.buffer.capacity >= 1, "buffer.capacity must be >= 1");
  check(c.ued.replay_rate >= 0.0 && c.ued.replay_rate <= 1.0,
        "ued.replay_rate must be in [0,1]");
  check(c.ued.edit_rate >= 0.0 && c.ued.edit_rate <= 1.0,
        "ued.edit_rate must be in [0,1]");
  check(c.ued.n_edits >= 1, "ued.n_edits must be >= 1");
  check(c.ued.edit_count >= 1, "ued.edit_count must be >= 1");
  check(c.ued.total_updates >= 1, "ued.total_updates must be >= 1");
  check(c.ued.eval_every >= 1, "ued.eval_every must be >= 1");
  check(!c.output_dir.empty(), "run.output_dir must not be empty");
  if (!problems.empty()) {
    std::string msg = "invalid configuration:";
    for (const std::string& p : problems) msg += "\n  - " + p;
    throw ConfigError(msg);
  }
}

}  // namespace ued
