#include "ued/level.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>

namespace ued {

const char* to_string(LevelKind k) {
  switch (k) {
    case LevelKind::LavaGrid: return "lava-grid";
    case LevelKind::MazeGrid: return "maze-grid";
    case LevelKind::Terrain: return "terrain";
  }
  return "?";
}

namespace {

std::optional<LevelKind> kind_from_string(const std::string& s) {
  if (s == "lava-grid") return LevelKind::LavaGrid;
  if (s == "maze-grid") return LevelKind::MazeGrid;
  if (s == "terrain") return LevelKind::Terrain;
  return std::nullopt;
}

char dir_char(Dir d) {
  switch (d) {
    case Dir::N: return 'N';
    case Dir::E: return 'E';
    case Dir::S: return 'S';
    case Dir::W: return 'W';
  }
  return '?';
}

std::optional<Dir> dir_from_char(char c) {
  switch (c) {
    case 'N': return Dir::N;
    case 'E': return Dir::E;
    case 'S': return Dir::S;
    case 'W': return Dir::W;
  }
  return std::nullopt;
}

const std::vector<TerrainParamInfo> kInfo8{
    {"stump_low", 5.0, 0.2, false, 0, false},
    {"stump_high", 5.0, 0.2, false, 0, true},
    {"stair_low", 5.0, 0.2, false, 1, false},
    {"stair_high", 5.0, 0.2, false, 1, true},
    {"stair_steps", 9.0, 1.0, true, -1, false},
    {"roughness", 10.0, 0.6, false, -1, false},
    {"pit_low", 10.0, 0.4, false, 2, false},
    {"pit_high", 10.0, 0.4, false, 2, true},
};

const std::vector<TerrainParamInfo> kInfo5{
    {"stump_high", 5.0, 0.2, false, -1, false},
    {"pit_high", 10.0, 0.4, false, -1, false},
    {"roughness", 10.0, 0.6, false, -1, false},
    {"stair_high", 5.0, 0.2, false, -1, false},
    {"stair_steps", 9.0, 1.0, true, -1, false},
};

[[noreturn]] void parse_fail(const std::string& field, const std::string& why) {
  throw ParseError("level parse error in field '" + field + "': " + why);
}

uint64_t parse_u64(const std::string& s, const std::string& field) {
  if (s.empty()) parse_fail(field, "empty");
  char* end = nullptr;
  errno = 0;
  unsigned long long v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || end != s.c_str() + s.size() || s[0] == '-') {
    parse_fail(field, "not a non-negative integer: '" + s + "'");
  }
  return static_cast<uint64_t>(v);
}

double parse_double(const std::string& s, const std::string& field) {
  if (s.empty()) parse_fail(field, "empty");
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (errno != 0 || end != s.c_str() + s.size() || !std::isfinite(v)) {
    parse_fail(field, "not a finite decimal: '" + s + "'");
  }
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

}  // namespace

const std::vector<TerrainParamInfo>& terrain_param_info(TerrainMode mode) {
  return mode == TerrainMode::FiveD ? kInfo5 : kInfo8;
}

double TerrainPayload::stump_high() const {
  return mode == TerrainMode::FiveD ? params[0] : params[1];
}
double TerrainPayload::pit_high() const {
  return mode == TerrainMode::FiveD ? params[1] : params[7];
}
double TerrainPayload::roughness() const {
  return mode == TerrainMode::FiveD ? params[2] : params[5];
}
double TerrainPayload::stair_high() const {
  return mode == TerrainMode::FiveD ? params[3] : params[3];
}
double TerrainPayload::stump_low() const {
  return mode == TerrainMode::FiveD ? 0.0 : params[0];
}
double TerrainPayload::pit_low() const {
  return mode == TerrainMode::FiveD ? 0.0 : params[6];
}
double TerrainPayload::stair_low() const {
  return mode == TerrainMode::FiveD ? 0.0 : params[2];
}
int TerrainPayload::stair_steps() const {
  return static_cast<int>(
      std::lround(mode == TerrainMode::FiveD ? params[4] : params[4]));
}

void Level::validate() const {
  if ((generation == 0) != !parent_id.has_value()) {
    throw ValidationError("lineage: generation must be 0 iff parent_id absent");
  }
  if (is_grid()) {
    if (!std::holds_alternative<GridPayload>(payload)) {
      throw ValidationError("grid level without grid payload");
    }
    const GridPayload& g = grid();
    if (g.width < 2 || g.height < 2) {
      throw ValidationError("grid dimensions must be at least 2x2");
    }
    if (g.cells.size() != static_cast<size_t>(g.width) * g.height) {
      throw ValidationError("cell array size does not match dimensions");
    }
    const int n = g.width * g.height;
    if (g.agent_start < 0 || g.agent_start >= n || g.goal < 0 || g.goal >= n) {
      throw ValidationError("agent/goal index out of range");
    }
    if (g.agent_start == g.goal) {
      throw ValidationError("agent_start equals goal");
    }
    if (g.cells[g.agent_start] != Tile::Empty) {
      throw ValidationError("agent_start must be on an empty cell");
    }
    if (g.cells[g.goal] != Tile::Empty) {
      throw ValidationError("goal must be on an empty cell");
    }
    for (Tile t : g.cells) {
      if (kind == LevelKind::LavaGrid && t == Tile::Wall) {
        throw ValidationError("lava-grid contains a wall tile");
      }
      if (kind == LevelKind::MazeGrid && t == Tile::Lava) {
        throw ValidationError("maze-grid contains a lava tile");
      }
    }
  } else {
    if (!std::holds_alternative<TerrainPayload>(payload)) {
      throw ValidationError("terrain level without terrain payload");
    }
    const TerrainPayload& t = terrain();
    const auto& info = terrain_param_info(t.mode);
    if (t.params.size() != info.size()) {
      throw ValidationError("terrain parameter count does not match mode");
    }
    for (size_t i = 0; i < info.size(); ++i) {
      const double v = t.params[i];
      if (!(v >= 0.0 && v <= info[i].max_value)) {
        throw ValidationError(std::string("terrain parameter '") +
                              info[i].name + "' out of [0, max]");
      }
      if (info[i].integer && v != std::floor(v)) {
        throw ValidationError(std::string("terrain parameter '") +
                              info[i].name + "' must be an integer");
      }
    }
    for (size_t i = 0; i < info.size(); ++i) {
      if (info[i].range_group >= 0 && info[i].is_high &&
          t.params[i - 1] > t.params[i]) {
        throw ValidationError("terrain range with low > high");
      }
    }
  }
}

std::string format_double(double v) {
  char buf[40];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::string encode_level(const Level& level) {
  std::string out = to_string(level.kind);
  out += ';';
  out += std::to_string(level.id);
  out += ';';
  out += level.parent_id ? std::to_string(*level.parent_id) : "-";
  out += ';';
  out += std::to_string(level.generation);
  out += ';';
  if (level.is_grid()) {
    const GridPayload& g = level.grid();
    out += std::to_string(g.width);
    out += 'x';
    out += std::to_string(g.height);
    out += 'x';
    out += dir_char(g.agent_facing);
    out += ':';
    for (size_t i = 0; i < g.cells.size(); ++i) {
      if (static_cast<int>(i) == g.agent_start) {
        out += 'A';
      } else if (static_cast<int>(i) == g.goal) {
        out += 'G';
      } else {
        switch (g.cells[i]) {
          case Tile::Empty: out += '.'; break;
          case Tile::Wall: out += '#'; break;
          case Tile::Lava: out += 'L'; break;
        }
      }
    }
  } else {
    const TerrainPayload& t = level.terrain();
    for (size_t i = 0; i < t.params.size(); ++i) {
      if (i) out += ',';
      out += format_double(t.params[i]);
    }
    if (t.seed) {
      out += ",seed=";
      out += std::to_string(*t.seed);
    }
  }
  return out;
}

Level decode_level(const std::string& text) {
  const auto fields = split(text, ';');
  if (fields.size() != 5) {
    parse_fail("record", "expected 5 ';'-separated fields, got " +
                             std::to_string(fields.size()));
  }
  Level level;
  const auto kind = kind_from_string(fields[0]);
  if (!kind) parse_fail("kind", "unknown kind '" + fields[0] + "'");
  level.kind = *kind;
  level.id = parse_u64(fields[1], "id");
  if (fields[2] != "-") level.parent_id = parse_u64(fields[2], "parent_id");
  const uint64_t gen = parse_u64(fields[3], "generation");
  if (gen > 0xFFFFFFFFull) parse_fail("generation", "out of range");
  level.generation = static_cast<uint32_t>(gen);

  const std::string& payload = fields[4];
  if (level.is_grid()) {
    const size_t colon = payload.find(':');
    if (colon == std::string::npos) {
      parse_fail("payload", "grid payload missing ':' header");
    }
    const auto dims = split(payload.substr(0, colon), 'x');
    if (dims.size() != 3 || dims[2].size() != 1) {
      parse_fail("payload", "grid header must be <W>x<H>x<F>");
    }
    GridPayload g;
    g.width = static_cast<int>(parse_u64(dims[0], "width"));
    g.height = static_cast<int>(parse_u64(dims[1], "height"));
    const auto dir = dir_from_char(dims[2][0]);
    if (!dir) parse_fail("facing", "expected one of N,E,S,W");
    g.agent_facing = *dir;
    const std::string cells = payload.substr(colon + 1);
    if (g.width <= 0 || g.height <= 0 ||
        cells.size() != static_cast<size_t>(g.width) * g.height) {
      parse_fail("cells", "cell string length does not match dimensions");
    }
    g.cells.resize(cells.size(), Tile::Empty);
    int agent = -1, goal = -1;
    for (size_t i = 0; i < cells.size(); ++i) {
      switch (cells[i]) {
        case '.': g.cells[i] = Tile::Empty; break;
        case '#': g.cells[i] = Tile::Wall; break;
        case 'L': g.cells[i] = Tile::Lava; break;
        case 'A':
          if (agent >= 0) parse_fail("cells", "duplicate agent glyph");
          agent = static_cast<int>(i);
          break;
        case 'G':
          if (goal >= 0) parse_fail("cells", "duplicate goal glyph");
          goal = static_cast<int>(i);
          break;
        default:
          parse_fail("cells", std::string("unknown glyph '") + cells[i] + "'");
      }
    }
    if (agent < 0) parse_fail("cells", "missing agent glyph");
    if (goal < 0) parse_fail("cells", "missing goal glyph");
    g.agent_start = agent;
    g.goal = goal;
    level.payload = std::move(g);
  } else {
    TerrainPayload t;
    auto tokens = split(payload, ',');
    if (!tokens.empty() && tokens.back().rfind("seed=", 0) == 0) {
      const std::string s = tokens.back().substr(5);
      char* end = nullptr;
      errno = 0;
      long long v = std::strtoll(s.c_str(), &end, 10);
      if (errno != 0 || s.empty() || end != s.c_str() + s.size()) {
        parse_fail("seed", "not an integer: '" + s + "'");
      }
      t.seed = v;
      tokens.pop_back();
    }
    if (tokens.size() == 5) {
      t.mode = TerrainMode::FiveD;
    } else if (tokens.size() == 8) {
      t.mode = TerrainMode::EightD;
    } else {
      parse_fail("payload", "terrain payload must have 5 or 8 parameters");
    }
    for (size_t i = 0; i < tokens.size(); ++i) {
      t.params.push_back(
          parse_double(tokens[i], terrain_param_info(t.mode)[i].name));
    }
    level.payload = std::move(t);
  }
  level.validate();
  return level;
}

std::string render_grid(const Level& level) {
  const std::string flat = encode_level(level);
  const std::string cells = flat.substr(flat.find(':') + 1);
  const GridPayload& g = level.grid();
  std::string out;
  for (int r = 0; r < g.height; ++r) {
    out.append(cells, static_cast<size_t>(r) * g.width, g.width);
    out += '\n';
  }
  return out;
}

}  // namespace ued
